"""Polycrystal generation: tessellation, yield scatter, statistics."""

import numpy as np
import pytest

from mesobench.grains import (
    assign_yield,
    cell_yield_strength,
    equivalent_diameters,
    generate_grains,
    grain_aspect_ratios,
)
from mesobench.mesh import build_grid


@pytest.fixture(scope="module")
def meso_grid():
    return build_grid(90, 105, 27.0, 31.4)


@pytest.fixture(scope="module")
def meso_grains(meso_grid):
    return generate_grains(meso_grid, 120, seed=11, relax_iters=3)


class TestGenerateGrains:
    def test_single_grain(self):
        g = build_grid(4, 4, 1.0, 1.0)
        gm = generate_grains(g, 1, seed=0)
        assert np.all(gm.grain_id == 0)

    def test_too_many_grains_rejected(self):
        g = build_grid(2, 2, 1.0, 1.0)
        with pytest.raises(ValueError):
            generate_grains(g, 5, seed=0)

    def test_partition_complete(self, meso_grid, meso_grains):
        counts = np.bincount(meso_grains.grain_id, minlength=120)
        assert counts.sum() == meso_grid.n_cells
        assert np.all(counts > 0)

    def test_deterministic(self, meso_grid, meso_grains):
        again = generate_grains(meso_grid, 120, seed=11, relax_iters=3)
        assert np.array_equal(again.grain_id, meso_grains.grain_id)
        assert np.array_equal(again.seed_points, meso_grains.seed_points)

    def test_mean_equivalent_diameter(self, meso_grid, meso_grains):
        # oracle: per-grain areas and equal-area-circle diameters computed
        # from the generated map; 120 grains over 27.0 x 31.4 um should
        # average 2 sqrt(A_total / (N pi)) = 3.0 um
        diam = equivalent_diameters(meso_grid, meso_grains)
        assert diam.shape == (120,)
        target = 2.0 * np.sqrt(27.0 * 31.4 / (120 * np.pi))
        assert target == pytest.approx(3.0, abs=0.01)
        assert abs(diam.mean() - 3.0) <= 0.3

    def test_equiaxed_after_relaxation(self, meso_grid, meso_grains):
        aspects = grain_aspect_ratios(meso_grid, meso_grains)
        assert np.median(aspects) <= 2.0


class TestAssignYield:
    def test_zero_delta_all_ones(self, meso_grains):
        out = assign_yield(meso_grains, 0.0, seed=3)
        assert np.all(out.yield_factor == 1.0)

    def test_range_forced(self, meso_grains):
        out = assign_yield(meso_grains, 0.3, seed=3)
        assert np.all(out.yield_factor >= 0.7)
        assert np.all(out.yield_factor <= 1.0)

    def test_sample_mean(self, meso_grains):
        # uniform on [0.7, 1.0] has mean 0.85; 120 draws should land within
        # 0.03 (about 3.8 standard errors)
        out = assign_yield(meso_grains, 0.3, seed=3)
        assert abs(out.yield_factor.mean() - 0.85) <= 0.03

    def test_delta_out_of_range(self, meso_grains):
        with pytest.raises(ValueError):
            assign_yield(meso_grains, 1.0, seed=0)
        with pytest.raises(ValueError):
            assign_yield(meso_grains, -0.1, seed=0)

    def test_deterministic_and_keyed_per_grain(self, meso_grains):
        a = assign_yield(meso_grains, 0.3, seed=9)
        b = assign_yield(meso_grains, 0.3, seed=9)
        assert np.array_equal(a.yield_factor, b.yield_factor)
        c = assign_yield(meso_grains, 0.3, seed=10)
        assert not np.array_equal(a.yield_factor, c.yield_factor)

    def test_cell_yield_strength(self, meso_grains):
        out = assign_yield(meso_grains, 0.3, seed=3)
        sy = cell_yield_strength(0.25, out)
        assert sy.shape == meso_grains.grain_id.shape
        assert np.all(sy <= 0.25)
        assert np.all(sy >= 0.25 * 0.7)
        assert sy[0] == pytest.approx(0.25 * out.yield_factor[out.grain_id[0]])
