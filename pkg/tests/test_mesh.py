"""Mesh construction, volumes, and mass lumping."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mesobench.errors import MeshTangledError
from mesobench.mesh import (
    build_grid,
    cell_centroids,
    cell_volume,
    cell_volumes,
    lump_masses,
    quad_areas,
)


class TestBuildGrid:
    def test_unit_square(self):
        g = build_grid(1, 1, 1.0, 1.0)
        assert g.n_nodes == 4
        assert g.n_cells == 1
        assert cell_volume(g, 0) == pytest.approx(1.0)

    def test_uniform_refinement(self):
        g = build_grid(2, 2, 2.0, 2.0)
        assert g.n_nodes == 9
        assert g.n_cells == 4
        assert np.allclose(cell_volumes(g), 1.0)

    def test_node_count_arithmetic(self):
        g = build_grid(128, 160, 27.0, 33.75)
        assert g.n_nodes == 129 * 161 == 20769

    @pytest.mark.parametrize("nx,ny,w,h", [(0, 1, 1.0, 1.0), (1, 0, 1.0, 1.0),
                                           (1, 1, 0.0, 1.0), (1, 1, 1.0, -2.0)])
    def test_invalid_arguments(self, nx, ny, w, h):
        with pytest.raises(ValueError):
            build_grid(nx, ny, w, h)

    def test_all_cells_positive_area(self):
        g = build_grid(7, 5, 3.0, 2.0)
        assert np.all(cell_volumes(g) > 0.0)
        assert np.allclose(cell_volumes(g), (3.0 / 7) * (2.0 / 5))

    def test_connectivity_counterclockwise(self):
        g = build_grid(3, 4, 1.0, 1.0)
        assert g.cells.shape == (12, 4)
        xq, yq = g.corner_coords()
        assert np.all(quad_areas(xq, yq) > 0.0)


class TestCellVolume:
    def test_unit_square(self):
        g = build_grid(1, 1, 1.0, 1.0)
        assert cell_volume(g, 0) == pytest.approx(1.0)

    def test_stretched_square(self):
        g = build_grid(1, 1, 1.0, 1.0)
        g.node_x = g.node_x * 1.01
        assert cell_volume(g, 0) == pytest.approx(1.01)

    def test_arbitrary_convex_quad(self):
        # (0,0) (2,0) (2,1) (0,1)
        g = build_grid(1, 1, 2.0, 1.0)
        assert cell_volume(g, 0) == pytest.approx(2.0)

    def test_inverted_quad_raises_with_cell_id(self):
        g = build_grid(2, 1, 2.0, 1.0)
        # collapse the second cell by crossing its right edge past its left
        nid = g.node_id(2, 0)
        g.node_x[nid] = -1.0
        nid = g.node_id(2, 1)
        g.node_x[nid] = -1.0
        with pytest.raises(MeshTangledError) as err:
            cell_volumes(g)
        assert err.value.cell == 1


class TestLumpMasses:
    def test_single_cell_quarters(self):
        g = build_grid(1, 1, 2.0, 2.0)
        masses = lump_masses(g, np.array([4.0]))
        assert np.allclose(masses, 1.0)

    def test_shared_nodes_additive(self):
        g = build_grid(2, 1, 2.0, 1.0)
        masses = lump_masses(g, np.array([4.0, 4.0]))
        # middle nodes shared by both cells get double the corner mass
        corner = masses[g.node_id(0, 0)]
        middle = masses[g.node_id(1, 0)]
        assert corner == pytest.approx(1.0)
        assert middle == pytest.approx(2.0)

    def test_random_grid_conserves_total_mass(self):
        # oracle: total mass by direct summation over cells
        rng = np.random.default_rng(42)
        g = build_grid(4, 4, 1.0, 1.0)
        cell_mass = rng.uniform(0.5, 3.0, g.n_cells)
        expected_total = float(np.sum(cell_mass))
        masses = lump_masses(g, cell_mass)
        assert np.sum(masses) == pytest.approx(expected_total, rel=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(
        nx=st.integers(1, 6),
        ny=st.integers(1, 6),
        seed=st.integers(0, 2**31),
    )
    def test_mass_conservation_any_mesh(self, nx, ny, seed):
        rng = np.random.default_rng(seed)
        g = build_grid(nx, ny, 2.0, 3.0)
        # jiggle nodes without tangling (displacement < half min cell size)
        g.node_x = g.node_x + rng.uniform(-0.1, 0.1, g.n_nodes) * min(2.0 / nx, 3.0 / ny)
        g.node_y = g.node_y + rng.uniform(-0.1, 0.1, g.n_nodes) * min(2.0 / nx, 3.0 / ny)
        cell_mass = rng.uniform(0.1, 5.0, g.n_cells)
        masses = lump_masses(g, cell_mass)
        assert np.sum(masses) == pytest.approx(float(np.sum(cell_mass)), rel=1e-12)


def test_cell_centroids_regular_grid():
    g = build_grid(2, 2, 2.0, 2.0)
    c = cell_centroids(g)
    assert c.shape == (4, 2)
    assert sorted(map(tuple, c.tolist())) == [(0.5, 0.5), (0.5, 1.5), (1.5, 0.5), (1.5, 1.5)]


def test_edge_nodes():
    g = build_grid(3, 2, 3.0, 2.0)
    assert np.all(g.node_x[g.edge_nodes("left")] == 0.0)
    assert np.all(g.node_x[g.edge_nodes("right")] == 3.0)
    assert np.all(g.node_y[g.edge_nodes("bottom")] == 0.0)
    assert np.all(g.node_y[g.edge_nodes("top")] == 2.0)
