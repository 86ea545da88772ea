"""Rectangular cell partition of a 2-D state region plus an absorbing sink.

Cells are addressed by a flat integer ``c = i * n_s + j`` where ``i`` indexes
the atmospheric temperature axis and ``j`` the surface axis. Everything that
falls outside the region maps to :data:`SINK`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ClimateState

SINK = -1


@dataclass(frozen=True)
class Region:
    t_a_min: float
    t_a_max: float
    t_s_min: float
    t_s_max: float

    def __post_init__(self):
        vals = (self.t_a_min, self.t_a_max, self.t_s_min, self.t_s_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"region bounds must be finite: {vals}")
        if not (self.t_a_min < self.t_a_max and self.t_s_min < self.t_s_max):
            raise ValueError(f"region needs min < max on both axes: {vals}")

    def contains(self, x) -> bool:
        return (self.t_a_min <= x[0] <= self.t_a_max) and (self.t_s_min <= x[1] <= self.t_s_max)


REGULATOR_REGION = Region(268.0, 276.0, 286.0, 294.0)
OFFSET_REGION = Region(269.0, 273.0, 287.0, 291.0)


@dataclass(frozen=True)
class CellGrid:
    region: Region
    n_a: int = 64
    n_s: int = 64

    def __post_init__(self):
        for name in ("n_a", "n_s"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")

    @property
    def n_cells(self) -> int:
        return self.n_a * self.n_s

    @property
    def width_a(self) -> float:
        return (self.region.t_a_max - self.region.t_a_min) / self.n_a

    @property
    def width_s(self) -> float:
        return (self.region.t_s_max - self.region.t_s_min) / self.n_s

    def index(self, i: int, j: int) -> int:
        if not (0 <= i < self.n_a and 0 <= j < self.n_s):
            raise IndexError(f"cell ({i}, {j}) outside {self.n_a}x{self.n_s} grid")
        return i * self.n_s + j

    def ij(self, c: int) -> tuple[int, int]:
        if not 0 <= c < self.n_cells:
            raise IndexError(f"{c} is not a regular cell index")
        return divmod(int(c), self.n_s)

    def locate(self, x) -> int:
        """Flat index of the cell holding ``x``, or SINK.

        Bins are half-open ``[lo, hi)`` except the last on each axis, which
        also takes the top edge.
        """
        return int(self.locate_many(np.asarray(x[0], float), np.asarray(x[1], float)))

    def locate_many(self, t_a, t_s) -> np.ndarray:
        r = self.region
        t_a = np.asarray(t_a, dtype=float)
        t_s = np.asarray(t_s, dtype=float)
        with np.errstate(invalid="ignore"):
            inside = (t_a >= r.t_a_min) & (t_a <= r.t_a_max) & (t_s >= r.t_s_min) & (t_s <= r.t_s_max)
            i = np.floor((np.where(inside, t_a, r.t_a_min) - r.t_a_min) / self.width_a)
            j = np.floor((np.where(inside, t_s, r.t_s_min) - r.t_s_min) / self.width_s)
        i = np.clip(i.astype(np.int64), 0, self.n_a - 1)
        j = np.clip(j.astype(np.int64), 0, self.n_s - 1)
        return np.where(inside, i * self.n_s + j, SINK)

    def center(self, c: int) -> ClimateState:
        if c == SINK:
            raise ValueError("the sink cell has no center")
        i, j = self.ij(c)
        return ClimateState(
            self.region.t_a_min + (i + 0.5) * self.width_a,
            self.region.t_s_min + (j + 0.5) * self.width_s,
        )

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Centers of all regular cells in flat-index order."""
        i, j = np.divmod(np.arange(self.n_cells), self.n_s)
        return (
            self.region.t_a_min + (i + 0.5) * self.width_a,
            self.region.t_s_min + (j + 0.5) * self.width_s,
        )

    def chebyshev(self, c1: int, c2: int) -> int:
        (i1, j1), (i2, j2) = self.ij(c1), self.ij(c2)
        return max(abs(i1 - i2), abs(j1 - j2))

    def neighborhood(self, c: int, radius: int) -> list[int]:
        """Regular cells within Chebyshev distance ``radius`` of ``c``."""
        i0, j0 = self.ij(c)
        return [
            self.index(i, j)
            for i in range(max(0, i0 - radius), min(self.n_a, i0 + radius + 1))
            for j in range(max(0, j0 - radius), min(self.n_s, j0 + radius + 1))
        ]


def locate(x, g: CellGrid) -> int:
    return g.locate(x)


def center(c: int, g: CellGrid) -> ClimateState:
    return g.center(c)
