"""Exit criteria. Each test prints one PASS/FAIL line; the terminal summary repeats them.

Run alone with ``pytest tests/test_acceptance.py -s``.
"""
import math
import time
import timeit

import numpy as np
import pytest
from acceptance_log import record
from oracles import forward_shortest_paths, random_table

from cellclimate.cellspace import REGULATOR_REGION, SINK, CellGrid, Region
from cellclimate.config import RunConfig
from cellclimate.integrator import QUARTER, TimeStep, rk4_step
from cellclimate.model import ModelParams, equilibrium
from cellclimate.simulate import (
    closed_loop,
    first_entry,
    offset_scenario,
    open_loop,
    regulator_scenario,
    synthesize,
)
from cellclimate.synthesis import (
    UNREACHABLE,
    TransitionTable,
    build_transitions,
    control_levels,
    controllable_region,
    solve_min_time,
    target_cells,
)

P = ModelParams()
P_WARM = ModelParams(eps=0.8408)


def _best_time(fn, repeat=20):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


@pytest.fixture(scope="module")
def regulator():
    cfg = RunConfig.regulator()
    t0 = time.perf_counter()
    table, doc = synthesize(cfg)
    return cfg, table, doc, time.perf_counter() - t0


@pytest.fixture(scope="module")
def uncontrolled_steps(regulator):
    cfg, _, doc, _ = regulator
    traj = open_loop(cfg.initial, 0.0, cfg.params, cfg.step, 120)
    return first_entry(traj, doc.grid, doc.targets)


def test_01_equilibrium_natural():
    x = equilibrium(P)
    dt = _best_time(lambda: equilibrium(P))
    ok = abs(x.t_a - 270.2) <= 0.1 and abs(x.t_s - 288.0) <= 0.1 and dt < 1e-3
    record(1, ok, f"({x.t_a:.3f}, {x.t_s:.3f}) vs (270.2, 288.0) +-0.1 K; {dt * 1e3:.3f} ms < 1 ms")


def test_02_equilibrium_warmed():
    x = equilibrium(P_WARM)
    dt = _best_time(lambda: equilibrium(P_WARM))
    ok = abs(x.t_a - 271.56) <= 0.05 and abs(x.t_s - 290.34) <= 0.05 and dt < 1e-3
    record(2, ok, f"({x.t_a:.3f}, {x.t_s:.3f}) vs (271.56, 290.34) +-0.05 K; {dt * 1e3:.3f} ms < 1 ms")


def test_03_uncontrolled_relaxation(regulator, uncontrolled_steps):
    cfg, _, _, _ = regulator
    k = uncontrolled_steps
    dt = _best_time(lambda: open_loop(cfg.initial, 0.0, cfg.params, cfg.step, 120), repeat=3)
    ok = k is not None and 45 <= k <= 75 and dt < 1.0
    record(3, ok, f"target cell entered after {k} quarters (60 +-25%: 45..75); {dt:.3f} s < 1 s")


def test_04_closed_loop_regulator(regulator, uncontrolled_steps):
    cfg, _, doc, _ = regulator

    def run():
        return closed_loop(cfg.initial, doc, cfg.params, cfg.step, 120)

    k = run().steps_to_target
    dt = _best_time(run, repeat=3)
    ok = k is not None and 14 <= k <= 30 and k < uncontrolled_steps and dt < 1.0
    record(4, ok, f"{k} quarters (14..30) vs uncontrolled {uncontrolled_steps}; {dt:.3f} s < 1 s")


def test_05_controllable_region(regulator):
    _, table, doc, elapsed = regulator
    count, _ = controllable_region(doc)
    n_int = table.image.size
    ok = abs(count - 3271) <= 0.10 * 3271 and n_int == 36864 and elapsed < 10.0
    record(5, ok, f"{count} / 4096 controllable (3271 +-10%); {n_int} integrations in {elapsed:.2f} s < 10 s")


def test_06_offset_scenario():
    a, b = offset_scenario(), offset_scenario()
    deterministic = (
        a.trajectory.states == b.trajectory.states
        and a.trajectory.controls == b.trajectory.controls
        and a.infeasibility == b.infeasibility
    )
    if a.steps_to_target is not None:
        ok = a.steps_to_target <= 10
        detail = f"target cell reached after {a.steps_to_target} years (<= 10)"
    else:
        inf = a.infeasibility
        ok = inf is not None and inf.distance <= 1
        detail = f"structured report: {inf.describe()}" if inf else "no report"
    record(6, ok and deterministic, f"{detail}; deterministic={deterministic}")


def test_07_dp_oracle_equivalence():
    rng = np.random.default_rng(20240601)
    mismatches = []
    cases = []
    for _ in range(3):
        n_a, n_s = (int(v) for v in rng.integers(3, 17, size=2))
        image = random_table(rng, n_a, n_s, 4, p_sink=0.15)
        t = TransitionTable(CellGrid(Region(0, 1, 0, 1), n_a, n_s), (0.0, 0.01, 0.02, 0.03), image)
        targets = rng.choice(t.grid.n_cells, size=1 + int(rng.integers(0, 3)), replace=False).tolist()
        cases.append((f"random {n_a}x{n_s}", t, targets))
    g16 = CellGrid(REGULATOR_REGION, 16, 16)
    t16 = build_transitions(g16, control_levels(0.03, 8), P, TimeStep.quarter())
    cases.append(("climate 16x16", t16, target_cells(g16, (270.2, 288.0))))
    for name, t, targets in cases:
        if solve_min_time(t, targets).cost.tolist() != forward_shortest_paths(t.image, targets):
            mismatches.append(name)
    record(7, not mismatches, f"{len(cases)} tables ({', '.join(c[0] for c in cases)}); mismatches: {mismatches or 'none'}")


def test_08_bellman_and_descent(regulator):
    _, table, doc, _ = regulator
    cost, img = doc.cost, table.image
    img_cost = np.where(img == SINK, UNREACHABLE, cost[np.where(img == SINK, 0, img)])
    checked = bellman_bad = descent_bad = 0
    for c in np.flatnonzero(cost > 0):
        checked += 1
        finite = img_cost[c][img_cost[c] != UNREACHABLE]
        if finite.size == 0 or cost[c] != 1 + finite.min():
            bellman_bad += 1
        k = doc.choice[c]
        if k < 0 or img_cost[c, k] != cost[c] - 1:
            descent_bad += 1
    ok = checked > 0 and bellman_bad == 0 and descent_bad == 0
    record(8, ok, f"{checked} reachable non-target cells; Bellman violations {bellman_bad}, descent violations {descent_bad}")


def test_09_integrator_order():
    def run(n):
        x = (274.0, 292.0)
        for _ in range(n):
            x = rk4_step(x, 0.0, P, QUARTER / n)
        return np.asarray(x)

    a, b, c = run(8), run(16), run(32)
    ratio = np.max(np.abs(a - b)) / np.max(np.abs(b - c))
    record(9, 11 <= ratio <= 22, f"step-halving error ratio {ratio:.2f} in [11, 22] (order {math.log2(ratio):.2f})")


def test_10_constraint_safety(regulator_report, offset_report, offset_report_r1):
    runs = {
        "regulator": regulator_report,
        "offset": offset_report,
        "offset r=1": offset_report_r1,
        "regulator hold 60": regulator_scenario(RunConfig.regulator().with_(hold=60)),
    }
    total = violations = 0
    for r in runs.values():
        u = np.asarray(r.trajectory.controls)
        total += u.size
        violations += int(np.count_nonzero((u < 0) | (u > 0.03)))
    record(10, total > 0 and violations == 0, f"{total} applied controls over {len(runs)} runs; {violations} outside [0, 0.03]")
