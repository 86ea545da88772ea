"""Open-loop and DOC-driven closed-loop simulation, and the two scenarios.

The closed loop observes the state once per interval, looks up its cell in
the DOC table and holds that control level for one interval (zero-order
hold). "Reaching" the target means first entry into a target cell.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .cellspace import SINK, CellGrid
from .config import RunConfig
from .integrator import TimeStep, integrate_interval
from .model import ClimateState, ModelParams, NumericalBlowUp, check_control, check_state
from .synthesis import (
    NO_LEVEL,
    DocTable,
    TransitionTable,
    build_transitions,
    controllable_region,
    solve_min_time,
    target_cells,
)


@dataclass
class Trajectory:
    """States at interval boundaries and the control held over each interval.

    ``states`` has one more row than ``controls``: ``controls[k]`` is applied
    on ``[times[k], times[k+1])``.
    """

    step: TimeStep
    states: list[ClimateState] = field(default_factory=list)
    controls: list[float] = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.states)) * self.step.tau

    @property
    def n_intervals(self) -> int:
        return len(self.controls)

    @property
    def terminal(self) -> ClimateState:
        return self.states[-1]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.states, dtype=float).reshape(-1, 2)

    def rows(self):
        """``(step, time_s, t_a, t_s, u)`` per sample; u is None on the last."""
        for k, (x, t) in enumerate(zip(self.states, self.times)):
            u = self.controls[k] if k < len(self.controls) else None
            yield k, float(t), x.t_a, x.t_s, u


class ControlLost(RuntimeError):
    """Closed loop left the controllable set (sink or unreachable cell)."""

    def __init__(self, message: str, trajectory: Trajectory, cell: int, step_index: int):
        super().__init__(message)
        self.trajectory = trajectory
        self.cell = cell
        self.step_index = step_index


def first_entry(traj: Trajectory, grid: CellGrid, targets) -> int | None:
    """Index of the first sample lying in a target cell, or None."""
    targets = set(targets)
    for k, x in enumerate(traj.states):
        if grid.locate(x) in targets:
            return k
    return None


def open_loop(x0, u: float, p: ModelParams, step: TimeStep, n: int) -> Trajectory:
    """``n`` intervals of constant control ``u`` from ``x0``.

    On blow-up the partial trajectory is attached to the raised
    :class:`NumericalBlowUp` as ``.trajectory``.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    traj = Trajectory(step, [check_state(x0)])
    x = traj.states[0]
    for _ in range(n):
        try:
            x = integrate_interval(x, u, p, step)
        except NumericalBlowUp as e:
            e.trajectory = traj
            raise
        traj.controls.append(u)
        traj.states.append(x)
    return traj


@dataclass
class ClosedLoopResult:
    trajectory: Trajectory
    steps_to_target: int | None
    #: Closest regular cell visited (Chebyshev distance to the target set)
    nearest_cell: int
    nearest_distance: int
    nearest_step: int


def _distance_to_targets(grid: CellGrid, c: int, targets) -> int:
    return min(grid.chebyshev(c, t) for t in targets)


def closed_loop(
    x0,
    doc: DocTable,
    p: ModelParams,
    step: TimeStep,
    max_steps: int,
    hold: int = 0,
) -> ClosedLoopResult:
    """Drive ``x0`` with the DOC feedback law.

    Runs until the target is entered and ``hold`` further intervals have
    elapsed (the law stays engaged, using each target cell's hold level), or
    until ``max_steps`` intervals.

    Raises
    ------
    ControlLost
        If the state lands in the sink or in a cell with no control level.
    """
    g = doc.grid
    traj = Trajectory(step, [check_state(x0)])
    x = traj.states[0]
    reached = None
    best = (None, -1, -1)  # distance, cell, step

    def observe(k, x):
        nonlocal reached, best
        c = g.locate(x)
        if c != SINK:
            d = _distance_to_targets(g, c, doc.targets)
            if best[0] is None or d < best[0]:
                best = (d, c, k)
        if reached is None and c in doc.targets:
            reached = k
        return c

    for k in range(max_steps):
        c = observe(k, x)
        if reached is not None and k - reached >= hold:
            break
        if c == SINK:
            raise ControlLost(f"state {tuple(x)} left the region at step {k}", traj, c, k)
        level = doc.level_for(c)
        if not doc.reachable(c) or level == NO_LEVEL:
            raise ControlLost(
                f"cell {g.ij(c)} at step {k} has no control level (state {tuple(x)})", traj, c, k
            )
        u = doc.levels[level]
        x = integrate_interval(x, u, p, step)
        traj.controls.append(u)
        traj.states.append(x)
    else:
        if max_steps > 0:
            observe(max_steps, x)

    if best[0] is None:
        best = (-1, SINK, -1)
    return ClosedLoopResult(traj, reached, best[1], best[0], best[2])


@dataclass
class Infeasibility:
    """Why the target was not attained, and the closest cell that was.

    ``reason`` is ``"target_unreachable"`` when the initial cell cannot reach
    the target in the cell map, or ``"not_entered"`` when the continuous
    closed loop never entered a target cell within ``max_steps``.
    """

    reason: str
    target_cell: tuple[int, int]
    nearest_cell: tuple[int, int]
    distance: int
    step: int

    def describe(self) -> str:
        return (
            f"{self.reason}: target cell {self.target_cell} not attained; nearest cell "
            f"{self.nearest_cell} at Chebyshev distance {self.distance} (step {self.step})"
        )


@dataclass
class ScenarioReport:
    name: str
    config: RunConfig
    transitions: TransitionTable
    doc: DocTable
    controllable_count: int
    trajectory: Trajectory
    steps_to_target: int | None
    uncontrolled: Trajectory
    uncontrolled_steps_to_target: int | None
    infeasibility: Infeasibility | None = None
    #: mean |t_s - target t_s| over the hold phase (or the trailing ``hold``
    #: samples when the target was never entered)
    tracking_error: float | None = None

    @property
    def terminal_state(self) -> ClimateState:
        return self.trajectory.terminal

    @property
    def feasible(self) -> bool:
        return self.infeasibility is None


def synthesize(cfg: RunConfig, threads: int = 1) -> tuple[TransitionTable, DocTable]:
    """Transition table and DOC table for ``cfg``."""
    g = cfg.grid
    table = build_transitions(g, cfg.levels, cfg.params, cfg.step, threads=threads)
    targets = target_cells(g, cfg.target, cfg.target_radius)
    return table, solve_min_time(table, targets)


def nearest_forward_reachable(table: TransitionTable, start: int, targets) -> tuple[int, int, int]:
    """Cell reachable from ``start`` in the cell map that is closest to ``targets``.

    Returns ``(cell, distance, depth)``; ties prefer the shallower cell.
    """
    g = table.grid
    depth = {start: 0}
    queue = deque([start])
    best = (_distance_to_targets(g, start, targets), 0, start)
    while queue:
        c = queue.popleft()
        for nxt in table.image[c]:
            nxt = int(nxt)
            if nxt != SINK and nxt not in depth:
                depth[nxt] = depth[c] + 1
                queue.append(nxt)
                best = min(best, (_distance_to_targets(g, nxt, targets), depth[nxt], nxt))
    return best[2], best[0], best[1]


def run_scenario(cfg: RunConfig, name: str = "custom", threads: int = 1) -> ScenarioReport:
    """Synthesize, run the closed loop with hold phase, and the u = 0 baseline."""
    for u in cfg.levels:
        check_control(u, cfg.u_max)
    table, doc = synthesize(cfg, threads)
    g = cfg.grid
    count, _ = controllable_region(doc)
    targets = doc.targets
    target_cell = g.locate(cfg.target)

    baseline = open_loop(cfg.initial, 0.0, cfg.params, cfg.step, cfg.max_steps)
    base_steps = first_entry(baseline, g, targets)

    x0 = check_state(cfg.initial)
    c0 = g.locate(x0)
    report = ScenarioReport(
        name, cfg, table, doc, count, Trajectory(cfg.step, [x0]), None, baseline, base_steps
    )
    if c0 != SINK and not doc.reachable(c0):
        cell, dist, depth = nearest_forward_reachable(table, c0, targets)
        report.infeasibility = Infeasibility(
            "target_unreachable", g.ij(target_cell), g.ij(cell), dist, depth
        )
        return report

    res = closed_loop(x0, doc, cfg.params, cfg.step, cfg.max_steps, cfg.hold)
    report.trajectory = res.trajectory
    report.steps_to_target = res.steps_to_target
    ts = res.trajectory.as_array()[:, 1]
    if res.steps_to_target is None:
        if cfg.max_steps > 0:
            report.infeasibility = Infeasibility(
                "not_entered",
                g.ij(target_cell),
                g.ij(res.nearest_cell) if res.nearest_cell != SINK else (-1, -1),
                res.nearest_distance,
                res.nearest_step,
            )
        window = ts[-cfg.hold:] if cfg.hold > 0 else ts[-1:]
    else:
        window = ts[res.steps_to_target:]
    if cfg.max_steps > 0:
        report.tracking_error = float(np.mean(np.abs(window - cfg.target.t_s)))
    return report


def regulator_scenario(cfg: RunConfig | None = None, threads: int = 1) -> ScenarioReport:
    """Return a perturbed climate to its natural equilibrium in minimum time."""
    return run_scenario(cfg or RunConfig.regulator(), "regulator", threads)


def offset_scenario(cfg: RunConfig | None = None, threads: int = 1) -> ScenarioReport:
    """Hold the warmed climate near a cooler reference state."""
    return run_scenario(cfg or RunConfig.offset(), "offset", threads)
