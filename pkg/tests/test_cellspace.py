import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cellclimate.cellspace import OFFSET_REGION, REGULATOR_REGION, SINK, CellGrid, Region

G = CellGrid(REGULATOR_REGION, 64, 64)


def test_widths():
    assert G.width_a == 0.125 and G.width_s == 0.125
    assert G.n_cells == 4096
    assert CellGrid(OFFSET_REGION).width_a == 0.0625


@pytest.mark.parametrize(
    "x, ij",
    [
        ((268.0, 286.0), (0, 0)),
        ((270.2, 288.0), (17, 16)),
        ((276.0, 294.0), (63, 63)),  # top edges are closed
        ((275.999, 286.125), (63, 1)),
    ],
)
def test_locate(x, ij):
    assert G.ij(G.locate(x)) == ij


@pytest.mark.parametrize("x", [(276.1, 290.0), (267.99, 290.0), (270.0, 294.0001), (np.nan, 290.0)])
def test_outside_is_sink(x):
    assert G.locate(x) == SINK


def test_centers():
    assert G.center(G.index(0, 0)) == (268.0625, 286.0625)
    assert G.center(G.index(17, 16)) == (270.1875, 288.0625)
    with pytest.raises(ValueError):
        G.center(SINK)


@pytest.mark.parametrize("grid", [G, CellGrid(OFFSET_REGION), CellGrid(Region(0, 1, 0, 3), 3, 7)])
def test_center_round_trip(grid):
    ca, cs = grid.centers()
    np.testing.assert_array_equal(grid.locate_many(ca, cs), np.arange(grid.n_cells))
    for c in range(0, grid.n_cells, 97):
        assert grid.locate(grid.center(c)) == c


@given(st.floats(268, 276), st.floats(286, 294))
def test_partition(t_a, t_s):
    c = G.locate((t_a, t_s))
    assert c != SINK
    cx = G.center(c)
    assert abs(cx.t_a - t_a) <= G.width_a / 2 + 1e-12
    assert abs(cx.t_s - t_s) <= G.width_s / 2 + 1e-12


def test_neighborhood_and_distance():
    c = G.index(0, 5)
    nb = G.neighborhood(c, 1)
    assert len(nb) == 6
    assert all(G.chebyshev(c, n) <= 1 for n in nb)
    assert G.chebyshev(G.index(3, 4), G.index(5, 1)) == 3


def test_invalid_grids():
    with pytest.raises(ValueError):
        Region(270, 269, 286, 294)
    with pytest.raises(ValueError):
        CellGrid(REGULATOR_REGION, 0, 64)
    with pytest.raises(IndexError):
        G.index(64, 0)
