"""Polycrystalline mesovolume generation.

Grains are a Voronoi tessellation of seed points evaluated at cell
centroids (the solver only needs per-cell properties, so no polygon
clipping).  Lloyd centroid iterations make the grains equiaxed.  Yield
scatter is a per-grain multiplicative factor drawn from a counter-based
generator keyed by (seed, grain id), so factors do not depend on how many
grains surround them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, PCG64, Philox

from .mesh import Grid2D, cell_centroids, cell_volumes


@dataclass
class GrainMap:
    """Per-cell grain assignment plus per-grain yield scaling.

    grain_id : int array (n_cells,), values in [0, n_grains)
    yield_factor : float array (n_grains,), each in [1 - delta, 1]
    seed_points : float array (n_grains, 2), generator points (um)
    """

    grain_id: np.ndarray
    yield_factor: np.ndarray
    seed_points: np.ndarray

    @property
    def n_grains(self) -> int:
        return self.seed_points.shape[0]

    def cell_yield_factors(self) -> np.ndarray:
        return self.yield_factor[self.grain_id]


def _nearest_seed(centroids: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    # ties broken toward the lower grain index by argmin
    d2 = ((centroids[:, None, :] - seeds[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def generate_grains(grid: Grid2D, target_count: int, seed: int, relax_iters: int = 3) -> GrainMap:
    """Tessellate the mesh into target_count grains.

    Seeds start uniform random over the domain, then relax_iters Lloyd
    iterations move each seed to the area-weighted centroid of its cells.
    Empty grains are re-seeded deterministically at the cell centroid
    farthest from every other seed.  Identical inputs give identical maps.
    """
    if target_count < 1:
        raise ValueError("target_count must be >= 1")
    if target_count > grid.n_cells:
        raise ValueError(
            f"target_count {target_count} exceeds cell count {grid.n_cells}"
        )
    centroids = cell_centroids(grid)
    areas = cell_volumes(grid)
    lo = centroids.min(axis=0)
    hi = centroids.max(axis=0)
    rng = Generator(PCG64(seed))
    seeds = lo + rng.random((target_count, 2)) * (hi - lo)

    assignment = _nearest_seed(centroids, seeds)
    for _ in range(max(0, relax_iters)):
        assignment = _repair_empty(centroids, seeds, assignment)
        for g in range(target_count):
            members = assignment == g
            w = areas[members]
            seeds[g] = (centroids[members] * w[:, None]).sum(axis=0) / w.sum()
        assignment = _nearest_seed(centroids, seeds)
    assignment = _repair_empty(centroids, seeds, assignment)

    return GrainMap(
        grain_id=assignment.astype(np.int32),
        yield_factor=np.ones(target_count),
        seed_points=seeds,
    )


def _repair_empty(centroids, seeds, assignment) -> np.ndarray:
    """Move any empty grain's seed to the centroid farthest from all seeds."""
    n = seeds.shape[0]
    counts = np.bincount(assignment, minlength=n)
    while np.any(counts == 0):
        g = int(np.argmax(counts == 0))
        d2 = ((centroids[:, None, :] - seeds[None, :, :]) ** 2).sum(axis=2)
        nearest = d2.min(axis=1)
        seeds[g] = centroids[int(np.argmax(nearest))]
        assignment = _nearest_seed(centroids, seeds)
        counts = np.bincount(assignment, minlength=n)
    return assignment


def assign_yield(grains: GrainMap, delta: float, seed: int) -> GrainMap:
    """Draw per-grain yield factors i.i.d. uniform on [1 - delta, 1].

    Each grain's factor comes from its own Philox stream keyed by
    (seed, grain_id), so the value for grain g is independent of the total
    grain count.
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must be in [0, 1), got {delta}")
    n = grains.n_grains
    factors = np.empty(n)
    seed_word = int(seed) % 2**64
    for g in range(n):
        key = np.array([seed_word, g], dtype=np.uint64)
        u = Generator(Philox(key=key)).random()
        factors[g] = 1.0 - delta * u
    return GrainMap(
        grain_id=grains.grain_id.copy(),
        yield_factor=factors,
        seed_points=grains.seed_points.copy(),
    )


def cell_yield_strength(base_sigma_y: float, grains: GrainMap) -> np.ndarray:
    """Per-cell yield strength: base value scaled by the owning grain's factor."""
    return base_sigma_y * grains.cell_yield_factors()


def grain_areas(grid: Grid2D, grains: GrainMap) -> np.ndarray:
    """Total cell area of each grain, shape (n_grains,)."""
    areas = cell_volumes(grid)
    return np.bincount(grains.grain_id, weights=areas, minlength=grains.n_grains)


def equivalent_diameters(grid: Grid2D, grains: GrainMap) -> np.ndarray:
    """Equal-area circle diameters 2*sqrt(A/pi) per grain (um)."""
    return 2.0 * np.sqrt(grain_areas(grid, grains) / np.pi)


def grain_aspect_ratios(grid: Grid2D, grains: GrainMap) -> np.ndarray:
    """Principal-axis aspect ratio sqrt(l1/l2) of each grain's cell centroids."""
    centroids = cell_centroids(grid)
    out = np.empty(grains.n_grains)
    for g in range(grains.n_grains):
        pts = centroids[grains.grain_id == g]
        if pts.shape[0] < 2:
            out[g] = 1.0
            continue
        cov = np.cov(pts.T)
        evals = np.linalg.eigvalsh(cov)
        lo = max(evals[0], 1e-30)
        out[g] = float(np.sqrt(evals[1] / lo))
    return out
