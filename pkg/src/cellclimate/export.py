"""Plain-text CSV/report writers and the DOC table reader.

Floats are written with ``repr`` so every value round-trips exactly.
"""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from .cellspace import CellGrid
from .simulate import ScenarioReport, Trajectory
from .synthesis import NO_LEVEL, UNREACHABLE, DocTable, TransitionTable


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _writer(path: Path):
    fh = open(path, "w", encoding="utf-8", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def write_doc_csv(doc: DocTable, path: str | Path) -> None:
    """Rows ``i, j, cost_to_go, chosen_u``.

    ``cost_to_go`` is -1 for unreachable cells. ``chosen_u`` is the level the
    feedback law applies in that cell (the hold level for target cells) and
    is empty where no level is defined.
    """
    g = doc.grid
    fh, w = _writer(Path(path))
    with fh:
        w.writerow(["i", "j", "cost_to_go", "chosen_u"])
        for c in range(g.n_cells):
            i, j = g.ij(c)
            k = doc.level_for(c)
            u = doc.levels[k] if k != NO_LEVEL else None
            w.writerow([i, j, int(doc.cost[c]), _fmt(u)])


def read_doc_csv(path: str | Path, grid: CellGrid, levels: Sequence[float]) -> DocTable:
    """Inverse of :func:`write_doc_csv`; target cells are those with cost 0."""
    levels = tuple(float(u) for u in levels)
    lookup = {u: k for k, u in enumerate(levels)}
    n = grid.n_cells
    cost = np.full(n, UNREACHABLE, dtype=np.int64)
    choice = np.full(n, NO_LEVEL, dtype=np.int64)
    hold = np.full(n, NO_LEVEL, dtype=np.int64)
    seen = 0
    with open(path, encoding="utf-8", newline="") as fh:
        rows = csv.DictReader(fh)
        if rows.fieldnames != ["i", "j", "cost_to_go", "chosen_u"]:
            raise ValueError(f"{path}: unexpected header {rows.fieldnames}")
        for row in rows:
            c = grid.index(int(row["i"]), int(row["j"]))
            cost[c] = int(row["cost_to_go"])
            if row["chosen_u"]:
                u = float(row["chosen_u"])
                if u not in lookup:
                    raise ValueError(f"{path}: u={u} at cell {(row['i'], row['j'])} is not a control level")
                (hold if cost[c] == 0 else choice)[c] = lookup[u]
            seen += 1
    if seen != n:
        raise ValueError(f"{path}: expected {n} rows, found {seen}")
    targets = frozenset(int(c) for c in np.flatnonzero(cost == 0))
    return DocTable(grid, levels, targets, cost, choice, hold)


def write_matrix_csv(values: np.ndarray, path: str | Path) -> None:
    """Dense ``(n_a, n_s)`` matrix: row per t_a index ``i``, column per t_s index ``j``."""
    values = np.asarray(values)
    fh, w = _writer(Path(path))
    with fh:
        w.writerow(["i"] + [f"j{j}" for j in range(values.shape[1])])
        for i, row in enumerate(values):
            w.writerow([i] + [_fmt(v.item() if hasattr(v, "item") else v) for v in row])


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> None:
    fh, w = _writer(Path(path))
    with fh:
        w.writerow(["step", "time_s", "t_a", "t_s", "u"])
        for k, t, ta, ts, u in traj.rows():
            w.writerow([k, _fmt(t), _fmt(ta), _fmt(ts), _fmt(u)])


def read_trajectory_csv(path: str | Path) -> np.ndarray:
    """``(n, 5)`` float array; the empty final ``u`` reads as NaN."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    return np.array([[float(v) if v else np.nan for v in r] for r in rows]).reshape(-1, 5)


def transitions_summary(table: TransitionTable) -> str:
    g = table.grid
    n_int = g.n_cells * len(table.levels)
    return (
        f"cells: {g.n_a}x{g.n_s} = {g.n_cells}\n"
        f"levels: {len(table.levels)} ({', '.join(repr(u) for u in table.levels)})\n"
        f"integrations: {n_int}\n"
        f"sink transitions: {table.sink_count}\n"
        f"blowups: {table.blowups}\n"
        f"wall_clock_s: {table.elapsed:.3f}\n"
    )


def _steps(v) -> str:
    return "NOT_REACHED" if v is None else str(v)


def report_text(report: ScenarioReport) -> str:
    cfg = report.config
    x = report.terminal_state
    lines = [
        f"scenario: {report.name}",
        f"eps: {cfg.params.eps!r}",
        f"interval_s: {cfg.tau!r}",
        f"initial_state: {cfg.initial.t_a!r}, {cfg.initial.t_s!r}",
        f"target_state: {cfg.target.t_a!r}, {cfg.target.t_s!r}",
        f"target_radius_cells: {cfg.target_radius}",
        f"controllable_cells: {report.controllable_count} / {cfg.grid.n_cells}",
        f"steps_to_target: {_steps(report.steps_to_target)}",
        f"uncontrolled_steps_to_target: {_steps(report.uncontrolled_steps_to_target)}",
        f"intervals_simulated: {report.trajectory.n_intervals}",
        f"terminal_state: {x.t_a!r}, {x.t_s!r}",
    ]
    if report.trajectory.controls:
        u = report.trajectory.controls
        lines.append(f"applied_u_range: {min(u)!r}, {max(u)!r}")
    if report.tracking_error is not None:
        lines.append(f"tracking_error_ts_K: {report.tracking_error!r}")
    inf = report.infeasibility
    if inf is None:
        lines.append("status: reached" if report.steps_to_target is not None else "status: NOT_REACHED")
    else:
        lines += [
            "status: INFEASIBLE",
            f"infeasibility_reason: {inf.reason}",
            f"target_cell: {inf.target_cell[0]}, {inf.target_cell[1]}",
            f"nearest_cell: {inf.nearest_cell[0]}, {inf.nearest_cell[1]}",
            f"nearest_distance_cells: {inf.distance}",
            f"nearest_step: {inf.step}",
        ]
    return "\n".join(lines) + "\n"
