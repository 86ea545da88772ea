import math

import numpy as np
import pytest

from cellclimate.integrator import (
    QUARTER,
    YEAR,
    TimeStep,
    integrate_batch,
    integrate_interval,
    rk4_step,
)
from cellclimate.model import ModelParams, NumericalBlowUp, equilibrium

P = ModelParams()


def _n_steps(x, u, p, tau, n):
    for _ in range(n):
        x = rk4_step(x, u, p, tau / n)
    return np.asarray(x)


def test_time_constants():
    assert QUARTER == pytest.approx(7.88940e6)
    assert YEAR == pytest.approx(3.15576e7)
    assert TimeStep.quarter().dt == pytest.approx(QUARTER / 90)
    assert TimeStep.year().substeps == 360


@pytest.mark.parametrize("tau, substeps", [(0.0, 1), (-1.0, 1), (QUARTER, 0), (QUARTER, 1.5), (QUARTER, 10)])
def test_timestep_validation(tau, substeps):
    with pytest.raises(ValueError):
        TimeStep(tau, substeps)


def test_equilibrium_is_preserved():
    x = equilibrium(P)
    y = rk4_step(x, 0.0, P, 1e6)
    assert abs(y.t_a - x.t_a) < 1e-10 and abs(y.t_s - x.t_s) < 1e-10


def test_scalar_decay_textbook_accuracy():
    y = rk4_step((1.0, 1.0), 0.0, P, 0.1, f=lambda x, u, p: (-x[0], -x[1]))
    assert abs(y.t_a - math.exp(-0.1)) / math.exp(-0.1) < 1e-7


def test_step_halving_ratio_is_fourth_order():
    x0 = (274.0, 292.0)
    a, b, c = (_n_steps(x0, 0.0, P, QUARTER, n) for n in (8, 16, 32))
    ratio = np.max(np.abs(a - b)) / np.max(np.abs(b - c))
    assert 11 <= ratio <= 22
    assert 3.5 <= math.log2(ratio) <= 4.5


def test_interval_relaxes_toward_equilibrium():
    x0 = np.array([274.0, 292.0])
    eq = np.array([270.2, 288.0])
    x1 = np.asarray(integrate_interval(x0, 0.0, P, TimeStep.quarter()))
    assert np.all(np.abs(x1 - eq) < np.abs(x0 - eq))


def test_default_substeps_converged():
    x0 = (274.0, 292.0)
    ref = np.asarray(integrate_interval(x0, 0.0, P, TimeStep.quarter(90)))
    assert np.max(np.abs(_n_steps(x0, 0.0, P, QUARTER, 4) - ref)) < 1e-3
    assert np.max(np.abs(_n_steps(x0, 0.0, P, QUARTER, 45) - ref)) < 1e-6
    # the fast atmospheric mode makes a single RK4 step per quarter too coarse here
    assert np.max(np.abs(_n_steps(x0, 0.0, P, QUARTER, 1) - ref)) > 1e-3


def test_yearly_default_substeps_converged():
    x0 = (271.8, 290.3)
    warm = ModelParams(eps=0.8408)
    a = np.asarray(integrate_interval(x0, 0.03, warm, TimeStep.year(360)))
    b = np.asarray(integrate_interval(x0, 0.03, warm, TimeStep.year(720)))
    assert np.max(np.abs(a - b)) < 1e-6


def test_vanishing_interval_is_identity():
    x0 = (274.0, 292.0)
    y = integrate_interval(x0, 0.02, P, TimeStep(1e-3, 1))
    np.testing.assert_allclose(y, x0, atol=1e-10)


def test_interval_splitting_commutes():
    x0 = (274.0, 292.0)
    whole = integrate_interval(x0, 0.01, P, TimeStep.quarter())
    half = TimeStep(QUARTER / 2, 90)
    split = integrate_interval(integrate_interval(x0, 0.01, P, half), 0.01, P, half)
    np.testing.assert_allclose(whole, split, atol=1e-6)


def test_blowup_is_reported():
    with pytest.raises(NumericalBlowUp):
        integrate_interval((274.0, 292.0), 0.0, P, TimeStep(1.0, 1), f=lambda x, u, p: (np.inf, 0.0))
    with pytest.raises(NumericalBlowUp):
        rk4_step((np.nan, 292.0), 0.0, P, 1.0)
    with pytest.raises(ValueError):
        rk4_step((274.0, 292.0), 0.0, P, 0.0)


def test_batch_matches_scalar_bitwise():
    t_a = np.array([268.5, 271.0, 275.5])
    t_s = np.array([286.5, 290.0, 293.5])
    step = TimeStep.quarter()
    ba, bs = integrate_batch(t_a, t_s, 0.015, P, step)
    for k in range(3):
        x = integrate_interval((t_a[k], t_s[k]), 0.015, P, step)
        assert (ba[k], bs[k]) == (x.t_a, x.t_s)
