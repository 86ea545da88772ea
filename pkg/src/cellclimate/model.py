"""Two-box (atmosphere + surface) energy-balance climate model.

The state is the pair of global-mean temperatures ``(t_a, t_s)`` in kelvin.
Solar-insolation management enters as a fraction ``u`` of the incoming
shortwave flux that is blocked; both absorbed shortwave terms are scaled by
``(1 - u)``.

All functions accept plain floats; :func:`rhs` and :func:`net_flux` also
broadcast over numpy arrays, which is what the cell-mapping synthesis uses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import NamedTuple

import numpy as np

#: Upper bound on the blocked-insolation fraction used throughout.
U_MAX = 0.03

#: Plausibility window for temperatures crossing the public API, K.
T_MIN_PLAUSIBLE = 150.0
T_MAX_PLAUSIBLE = 400.0


class NumericalBlowUp(ArithmeticError):
    """Raised when the dynamics produce or receive a non-finite state."""


class EquilibriumError(RuntimeError):
    """Newton iteration failed to converge.

    Attributes
    ----------
    last : ClimateState
        Final iterate.
    residual : float
        Max-norm of the flux residual at ``last`` in W m^-2.
    """

    def __init__(self, message: str, last: "ClimateState", residual: float):
        super().__init__(message)
        self.last = last
        self.residual = residual


class ClimateState(NamedTuple):
    t_a: float
    t_s: float


def check_state(x) -> ClimateState:
    """Validate a state at an API boundary and return it as a ClimateState."""
    t_a, t_s = (float(v) for v in x)
    for name, v in (("t_a", t_a), ("t_s", t_s)):
        if not math.isfinite(v):
            raise NumericalBlowUp(f"{name} is not finite: {v!r}")
        if not T_MIN_PLAUSIBLE <= v <= T_MAX_PLAUSIBLE:
            raise ValueError(
                f"{name}={v} K outside plausible range "
                f"[{T_MIN_PLAUSIBLE}, {T_MAX_PLAUSIBLE}]"
            )
    return ClimateState(t_a, t_s)


def check_control(u: float, u_max: float = U_MAX) -> float:
    """Validate a blocked-insolation fraction against ``[0, u_max]``."""
    u = float(u)
    if not 0.0 <= u <= u_max:
        raise ValueError(f"control u={u} outside [0, {u_max}]")
    return u


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the two-box model.

    Heat capacities are in J m^-2 K^-1, fluxes in W m^-2. ``eps`` is the
    atmospheric longwave emissivity and doubles as the greenhouse knob.
    """

    C_A: float = 4.6e7
    C_S: float = 2.97e8
    Q: float = 342.0
    delta: float = 5.67e-8
    a: float = 0.241
    eps: float = 0.812
    alpha_s: float = 0.132
    alpha_a: float = 0.250
    H: float = 5.944

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise TypeError(f"{f.name} must be a number, got {v!r}")
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{f.name} must be finite and > 0, got {v!r}")
        for name in ("a", "eps", "alpha_s", "alpha_a"):
            if not getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {getattr(self, name)!r}")

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


#: Warmed parameterization (doubled-CO2 analogue) used by the offset scenario.
WARMED_EPS = 0.8408


def shortwave_coefficients(p: ModelParams) -> tuple[float, float]:
    """Absorbed shortwave flux in the atmosphere and at the surface, W m^-2."""
    s_a = (1 - p.alpha_a) * p.a * (1 + (1 - p.a) * p.alpha_s) * p.Q
    s_s = (1 - p.alpha_a) * (1 - p.a) * (1 - p.alpha_s) * p.Q
    return s_a, s_s


def _net_flux(t_a, t_s, u, p: ModelParams, s_a: float, s_s: float):
    sig_a4 = p.delta * t_a**4
    sig_s4 = p.delta * t_s**4
    exchange = p.H * (t_s - t_a)
    f_a = s_a * (1 - u) + p.eps * sig_s4 - 2 * p.eps * sig_a4 + exchange
    f_s = s_s * (1 - u) - sig_s4 + (4.0 / 3.0) * p.eps * sig_a4 - exchange
    return f_a, f_s


def net_flux(x, u: float, p: ModelParams):
    """Net energy flux into each box, W m^-2 (the rhs numerators)."""
    t_a, t_s = x
    s_a, s_s = shortwave_coefficients(p)
    return _net_flux(t_a, t_s, u, p, s_a, s_s)


def rhs(x, u: float, p: ModelParams):
    """Time derivatives ``(dT_a/dt, dT_s/dt)`` in K s^-1.

    Raises
    ------
    NumericalBlowUp
        If any component of ``x`` is non-finite.
    """
    t_a, t_s = x
    if not (np.all(np.isfinite(t_a)) and np.all(np.isfinite(t_s))):
        raise NumericalBlowUp(f"non-finite state passed to rhs: {x!r}")
    f_a, f_s = net_flux(x, u, p)
    return f_a / p.C_A, f_s / p.C_S


def make_rhs(p: ModelParams):
    """Return an unchecked ``f(t_a, t_s, u) -> (dT_a, dT_s)`` closure.

    Precomputes the shortwave coefficients; used in integration inner loops.
    """
    s_a, s_s = shortwave_coefficients(p)
    inv_ca, inv_cs = 1.0 / p.C_A, 1.0 / p.C_S

    def f(t_a, t_s, u):
        f_a, f_s = _net_flux(t_a, t_s, u, p, s_a, s_s)
        return f_a * inv_ca, f_s * inv_cs

    return f


def jacobian(x, u: float, p: ModelParams, h: float = 1e-4, f=None) -> np.ndarray:
    """Central finite-difference Jacobian of the dynamics, s^-1.

    ``f`` may replace :func:`rhs` (same call signature), e.g. for checking
    the differencing on a system with known derivatives.
    """
    f = rhs if f is None else f
    t_a, t_s = float(x[0]), float(x[1])
    J = np.empty((2, 2))
    for col, (da, ds) in enumerate(((h, 0.0), (0.0, h))):
        plus = f((t_a + da, t_s + ds), u, p)
        minus = f((t_a - da, t_s - ds), u, p)
        J[0, col] = (plus[0] - minus[0]) / (2 * h)
        J[1, col] = (plus[1] - minus[1]) / (2 * h)
    return J


def equilibrium(
    p: ModelParams,
    guess=(270.0, 288.0),
    u: float = 0.0,
    tol: float = 1e-6,
    max_iter: int = 100,
) -> ClimateState:
    """Steady state of the model under constant control ``u``.

    Damped Newton on the net fluxes (W m^-2) with a central-difference
    Jacobian; the step is halved while it would increase the residual.
    """
    s_a, s_s = shortwave_coefficients(p)
    h = 1e-4

    def F(ta, ts):
        return _net_flux(ta, ts, u, p, s_a, s_s)

    ta, ts = check_state(guess)
    fa, fs = F(ta, ts)
    res = max(abs(fa), abs(fs))
    for _ in range(max_iter):
        if res < tol:
            return ClimateState(ta, ts)
        pa, ps = F(ta + h, ts)
        ma, ms = F(ta - h, ts)
        j00, j10 = (pa - ma) / (2 * h), (ps - ms) / (2 * h)
        pa, ps = F(ta, ts + h)
        ma, ms = F(ta, ts - h)
        j01, j11 = (pa - ma) / (2 * h), (ps - ms) / (2 * h)
        det = j00 * j11 - j01 * j10
        if det == 0 or not math.isfinite(det):
            break
        da = -(j11 * fa - j01 * fs) / det
        ds = -(-j10 * fa + j00 * fs) / det
        lam = 1.0
        for _ in range(30):
            na, ns = ta + lam * da, ts + lam * ds
            nfa, nfs = F(na, ns)
            nres = max(abs(nfa), abs(nfs))
            if math.isfinite(nres) and nres <= res:
                break
            lam *= 0.5
        ta, ts, fa, fs, res = na, ns, nfa, nfs, nres
    if res < tol:
        return ClimateState(ta, ts)
    raise EquilibriumError(
        f"equilibrium did not converge in {max_iter} iterations "
        f"(residual {res:.3e} W m^-2 at t_a={ta:.6f}, t_s={ts:.6f})",
        ClimateState(ta, ts),
        res,
    )
