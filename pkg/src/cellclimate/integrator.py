"""Fixed-step classical RK4 with the control held constant over an interval."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ClimateState, ModelParams, NumericalBlowUp, make_rhs

DAY = 86400.0
YEAR = 365.25 * DAY
QUARTER = YEAR / 4

#: Largest RK4 sub-step accepted by :class:`TimeStep`, s.
MAX_SUBSTEP = 2.0e5


@dataclass(frozen=True)
class TimeStep:
    """Mapping (or feedback hold) interval ``tau`` split into RK4 sub-steps."""

    tau: float
    substeps: int

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be > 0, got {self.tau!r}")
        if int(self.substeps) != self.substeps or self.substeps < 1:
            raise ValueError(f"substeps must be a positive integer, got {self.substeps!r}")
        if self.tau / self.substeps > MAX_SUBSTEP:
            raise ValueError(
                f"sub-step tau/substeps = {self.tau / self.substeps:.4g} s exceeds {MAX_SUBSTEP:g} s"
            )

    @property
    def dt(self) -> float:
        return self.tau / self.substeps

    @classmethod
    def quarter(cls, substeps: int = 90) -> "TimeStep":
        return cls(QUARTER, substeps)

    @classmethod
    def year(cls, substeps: int = 360) -> "TimeStep":
        return cls(YEAR, substeps)


def _rk4(f, t_a, t_s, u, dt):
    k1a, k1s = f(t_a, t_s, u)
    k2a, k2s = f(t_a + 0.5 * dt * k1a, t_s + 0.5 * dt * k1s, u)
    k3a, k3s = f(t_a + 0.5 * dt * k2a, t_s + 0.5 * dt * k2s, u)
    k4a, k4s = f(t_a + dt * k3a, t_s + dt * k3s, u)
    return (
        t_a + dt / 6 * (k1a + 2 * k2a + 2 * k3a + k4a),
        t_s + dt / 6 * (k1s + 2 * k2s + 2 * k3s + k4s),
    )


def _adapt(f, p):
    # f(x, u, p) -> (da, ds)  ==>  g(t_a, t_s, u)
    if f is None:
        return make_rhs(p)
    return lambda t_a, t_s, u: f((t_a, t_s), u, p)


def rk4_step(x, u: float, p: ModelParams, dt: float, f=None) -> ClimateState:
    """One classical RK4 step of length ``dt`` seconds.

    ``f`` optionally replaces :func:`cellclimate.model.rhs` with any
    ``f(x, u, p)`` of the same shape.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    t_a, t_s = float(x[0]), float(x[1])
    if not (math.isfinite(t_a) and math.isfinite(t_s)):
        raise NumericalBlowUp(f"non-finite state {tuple(x)}")
    t_a, t_s = _rk4(_adapt(f, p), t_a, t_s, u, dt)
    if not (math.isfinite(t_a) and math.isfinite(t_s)):
        raise NumericalBlowUp(f"RK4 step from {tuple(x)} produced ({t_a}, {t_s})")
    return ClimateState(t_a, t_s)


def integrate_interval(x, u: float, p: ModelParams, step: TimeStep, f=None) -> ClimateState:
    """Advance ``x`` by ``step.tau`` seconds under the constant control ``u``."""
    g = _adapt(f, p)
    t_a, t_s = float(x[0]), float(x[1])
    if not (math.isfinite(t_a) and math.isfinite(t_s)):
        raise NumericalBlowUp(f"non-finite initial state {tuple(x)}")
    dt = step.dt
    for _ in range(step.substeps):
        t_a, t_s = _rk4(g, t_a, t_s, u, dt)
    if not (math.isfinite(t_a) and math.isfinite(t_s)):
        raise NumericalBlowUp(f"integration from {tuple(x)} with u={u} blew up")
    return ClimateState(t_a, t_s)


def integrate_batch(t_a, t_s, u, p: ModelParams, step: TimeStep, f=None):
    """Vectorized :func:`integrate_interval` over arrays of states.

    Does not raise; non-finite results are left in the output for the caller
    to mask (overflow warnings are suppressed).
    """
    g = _adapt(f, p)
    t_a = np.array(t_a, dtype=float)
    t_s = np.array(t_s, dtype=float)
    dt = step.dt
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(step.substeps):
            t_a, t_s = _rk4(g, t_a, t_s, u, dt)
    return t_a, t_s
