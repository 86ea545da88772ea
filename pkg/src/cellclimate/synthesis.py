"""Controlled cell-to-cell mapping and minimum-time dynamic programming.

The transition table records, for every regular cell and every control level,
the cell reached from the cell center after one interval of zero-order-hold
control. With unit cost per interval, a breadth-first sweep backwards from the
target over the inverse relation yields exact Bellman cost-to-go values; the
DOC (discrete optimal control) table stores those costs together with the
level that realizes each one.
"""
from __future__ import annotations

import logging
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cellspace import SINK, CellGrid
from .integrator import TimeStep, integrate_batch
from .model import ModelParams

log = logging.getLogger(__name__)

UNREACHABLE = -1
NO_LEVEL = -1


def control_levels(u_max: float = 0.03, segments: int = 8) -> tuple[float, ...]:
    """``segments + 1`` evenly spaced levels from 0 to ``u_max`` inclusive."""
    if not u_max > 0:
        raise ValueError(f"u_max must be > 0, got {u_max!r}")
    if int(segments) != segments or segments < 1:
        raise ValueError(f"segments must be a positive integer, got {segments!r}")
    return tuple(float(v) for v in np.linspace(0.0, u_max, int(segments) + 1))


def _check_levels(levels: Sequence[float]) -> tuple[float, ...]:
    levels = tuple(float(u) for u in levels)
    if not levels or levels[0] != 0.0:
        raise ValueError(f"control levels must start at 0: {levels}")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError(f"control levels must be strictly increasing: {levels}")
    return levels


@dataclass(frozen=True, eq=False)
class TransitionTable:
    """``image[c, k]``: cell reached from cell ``c`` under level ``k`` (or SINK)."""

    grid: CellGrid
    levels: tuple[float, ...]
    image: np.ndarray
    step: TimeStep | None = None
    blowups: int = 0
    elapsed: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "levels", _check_levels(self.levels))
        img = np.asarray(self.image, dtype=np.int64)
        if img.shape != (self.grid.n_cells, len(self.levels)):
            raise ValueError(
                f"image shape {img.shape} != ({self.grid.n_cells}, {len(self.levels)})"
            )
        if np.any((img < SINK) | (img >= self.grid.n_cells)):
            raise ValueError("image entries must be regular cell indices or SINK")
        img.setflags(write=False)
        object.__setattr__(self, "image", img)

    @property
    def sink_count(self) -> int:
        return int(np.count_nonzero(self.image == SINK))

    def restrict(self, level_indices: Iterable[int]) -> "TransitionTable":
        """Table over a subset of the control levels (must include level 0)."""
        idx = sorted(set(level_indices))
        return TransitionTable(
            self.grid,
            tuple(self.levels[k] for k in idx),
            self.image[:, idx],
            self.step,
        )


def build_transitions(
    g: CellGrid,
    levels: Sequence[float],
    p: ModelParams,
    step: TimeStep,
    f=None,
    threads: int = 1,
) -> TransitionTable:
    """Integrate every cell center under every level for one interval.

    Non-finite results are sent to the sink and counted in ``blowups``.
    ``f`` optionally replaces the model right-hand side (``f(x, u, p)``).
    """
    levels = _check_levels(levels)
    t0 = time.perf_counter()
    ca, cs = g.centers()
    image = np.empty((g.n_cells, len(levels)), dtype=np.int64)
    blowups = 0

    def work(sl: slice) -> int:
        bad = 0
        for k, u in enumerate(levels):
            ta, ts = integrate_batch(ca[sl], cs[sl], u, p, step, f=f)
            ta = np.broadcast_to(ta, ca[sl].shape)
            ts = np.broadcast_to(ts, cs[sl].shape)
            finite = np.isfinite(ta) & np.isfinite(ts)
            bad += int(np.count_nonzero(~finite))
            image[sl, k] = np.where(finite, g.locate_many(ta, ts), SINK)
        return bad

    threads = max(1, int(threads))
    bounds = np.linspace(0, g.n_cells, threads + 1).astype(int)
    chunks = [slice(a, b) for a, b in zip(bounds, bounds[1:]) if b > a]
    if len(chunks) == 1:
        blowups = work(chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            blowups = sum(pool.map(work, chunks))
    if blowups:
        log.warning("%d cell/level integrations blew up and were sent to the sink", blowups)
    return TransitionTable(g, levels, image, step, blowups, time.perf_counter() - t0)


@dataclass(frozen=True, eq=False)
class DocTable:
    """Discrete optimal control table.

    ``cost[c]`` is the minimum number of intervals from cell ``c`` to the
    target set (UNREACHABLE if none). ``choice[c]`` is the level index that
    realizes it, defined only for reachable non-target cells. For target
    cells ``hold[c]`` gives the level used to stay in (or return to) the
    target once it has been reached.
    """

    grid: CellGrid
    levels: tuple[float, ...]
    targets: frozenset[int]
    cost: np.ndarray
    choice: np.ndarray
    hold: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.hold is None:
            object.__setattr__(self, "hold", np.full(self.grid.n_cells, NO_LEVEL, dtype=np.int64))
        for name in ("cost", "choice", "hold"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def is_target(self, c: int) -> bool:
        return c in self.targets

    def reachable(self, c: int) -> bool:
        return c != SINK and self.cost[c] != UNREACHABLE

    def level_for(self, c: int) -> int:
        """Level index to apply in cell ``c`` (hold level inside the target)."""
        k = self.hold[c] if c in self.targets else self.choice[c]
        return int(k)

    def control(self, c: int) -> float:
        k = self.level_for(c)
        if k == NO_LEVEL:
            raise KeyError(f"cell {c} has no control level")
        return self.levels[k]

    def chosen_u(self) -> np.ndarray:
        """Chosen u per cell (NaN where undefined)."""
        u = np.full(self.grid.n_cells, np.nan)
        ok = self.choice != NO_LEVEL
        u[ok] = np.asarray(self.levels)[self.choice[ok]]
        return u


def solve_min_time(t: TransitionTable, target: Iterable[int]) -> DocTable:
    """Minimum-time DOC table by backward breadth-first search.

    Ties between levels with equal cost are broken toward the smallest u.
    """
    n = t.grid.n_cells
    targets = frozenset(int(c) for c in target)
    if not targets:
        raise ValueError("target set must be non-empty")
    if any(not 0 <= c < n for c in targets):
        raise ValueError(f"target cells must be regular: {sorted(targets)}")

    img = t.image
    n_levels = img.shape[1]
    src = np.repeat(np.arange(n, dtype=np.int64), n_levels)
    dst = img.ravel()
    keep = dst != SINK
    src, dst = src[keep], dst[keep]
    order = np.argsort(dst, kind="stable")
    pred = src[order]
    ptr = np.searchsorted(dst[order], np.arange(n + 1))

    cost = np.full(n, UNREACHABLE, dtype=np.int64)
    queue = deque(sorted(targets))
    for c in targets:
        cost[c] = 0
    pred_l, ptr_l, cost_l = pred.tolist(), ptr.tolist(), cost.tolist()
    while queue:
        c = queue.popleft()
        nxt = cost_l[c] + 1
        for q in pred_l[ptr_l[c]:ptr_l[c + 1]]:
            if cost_l[q] == UNREACHABLE:
                cost_l[q] = nxt
                queue.append(q)
    cost = np.array(cost_l, dtype=np.int64)

    img_cost = np.where(img == SINK, UNREACHABLE, cost[np.where(img == SINK, 0, img)])
    is_target = np.zeros(n, dtype=bool)
    is_target[list(targets)] = True

    descend = (img_cost != UNREACHABLE) & (img_cost == (cost - 1)[:, None])
    active = (cost > 0) & ~is_target
    choice = np.where(active & descend.any(axis=1), np.argmax(descend, axis=1), NO_LEVEL)

    hold = np.full(n, NO_LEVEL, dtype=np.int64)
    for c in targets:
        row = img_cost[c]
        if (row == 0).any():
            hold[c] = int(np.argmax(row == 0))
        elif (row != UNREACHABLE).any():
            hold[c] = int(np.argmin(np.where(row == UNREACHABLE, np.iinfo(np.int64).max, row)))
    return DocTable(t.grid, t.levels, targets, cost, choice, hold)


def controllable_region(d: DocTable) -> tuple[int, np.ndarray]:
    """Count and ``(n_a, n_s)`` boolean mask of cells that can reach the target."""
    mask = (d.cost != UNREACHABLE).reshape(d.grid.n_a, d.grid.n_s)
    return int(mask.sum()), mask


def target_cells(g: CellGrid, x_target, radius: int = 0) -> list[int]:
    """Cell containing ``x_target`` plus its Chebyshev ``radius`` neighborhood."""
    c = g.locate(x_target)
    if c == SINK:
        raise ValueError(f"target state {tuple(x_target)} lies outside the grid region")
    if radius < 0:
        raise ValueError(f"target radius must be >= 0, got {radius}")
    return g.neighborhood(c, radius)
