"""Structured quadrilateral meshes with movable nodes.

The mesh starts as a regular nx-by-ny grid of cells but nodes move freely
during a Lagrangian run, and fracture may duplicate nodes, so connectivity
is stored explicitly.

Indexing conventions (used consistently across the package):

* node (i, j) has id ``i * (ny + 1) + j`` for i in [0, nx], j in [0, ny];
* cell (i, j) has id ``i * ny + j`` for i in [0, nx), j in [0, ny);
* cell (i, j) owns nodes (i, j), (i+1, j), (i+1, j+1), (i, j+1), in
  counterclockwise order (x to the right, y up).

Lengths are micrometers, masses picograms, stresses GPa.  The derived time
unit that makes this system consistent is the nanosecond (1 pg/um^3 *
(um/ns)^2 = 1 GPa), so velocities are um/ns, i.e. km/s.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MeshTangledError


@dataclass
class NodeSplit:
    """Record of one fracture node duplication."""

    original: int
    duplicate: int
    moved_cells: tuple[int, ...]


@dataclass
class Grid2D:
    """Quadrilateral mesh: nodal coordinates plus explicit connectivity.

    Attributes
    ----------
    nx, ny : int
        Cell counts along x and y.
    node_x, node_y : ndarray
        Nodal coordinates (um), flat, indexed per the module convention.
        These arrays grow when fracture duplicates nodes.
    cells : ndarray, shape (nx*ny, 4), int32
        Node ids of each cell, counterclockwise.
    split_nodes : list of NodeSplit
        History of node duplications introduced by fracture.
    """

    nx: int
    ny: int
    node_x: np.ndarray
    node_y: np.ndarray
    cells: np.ndarray
    split_nodes: list[NodeSplit] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return self.node_x.shape[0]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    def node_id(self, i, j) -> int:
        return i * (self.ny + 1) + j

    def cell_id(self, i, j) -> int:
        return i * self.ny + j

    def cell_ij(self, cell) -> tuple[int, int]:
        return divmod(int(cell), self.ny)

    def edge_nodes(self, side: str) -> np.ndarray:
        """Original node ids along one domain edge ('left', 'right', 'bottom', 'top')."""
        ny1 = self.ny + 1
        if side == "left":
            return np.arange(0, ny1, dtype=np.int64)
        if side == "right":
            return self.nx * ny1 + np.arange(0, ny1, dtype=np.int64)
        if side == "bottom":
            return np.arange(0, self.nx + 1, dtype=np.int64) * ny1
        if side == "top":
            return np.arange(0, self.nx + 1, dtype=np.int64) * ny1 + self.ny
        raise ValueError(f"unknown side {side!r}")

    def corner_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-cell corner coordinates, each of shape (n_cells, 4)."""
        return self.node_x[self.cells], self.node_y[self.cells]


def build_grid(nx: int, ny: int, width: float, height: float) -> Grid2D:
    """Build a regular rectangular mesh over [0, width] x [0, height].

    Raises ValueError for non-positive counts or dimensions.
    """
    if nx < 1 or ny < 1:
        raise ValueError(f"cell counts must be >= 1, got nx={nx}, ny={ny}")
    if not (width > 0.0 and height > 0.0):
        raise ValueError(f"dimensions must be positive, got {width} x {height}")
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    node_x = np.repeat(xs, ny + 1)
    node_y = np.tile(ys, nx + 1)
    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    i = i.ravel()
    j = j.ravel()
    ny1 = ny + 1
    cells = np.stack(
        [
            i * ny1 + j,
            (i + 1) * ny1 + j,
            (i + 1) * ny1 + (j + 1),
            i * ny1 + (j + 1),
        ],
        axis=1,
    ).astype(np.int32)
    return Grid2D(nx=nx, ny=ny, node_x=node_x, node_y=node_y, cells=cells)


def quad_areas(xq: np.ndarray, yq: np.ndarray) -> np.ndarray:
    """Signed areas of quadrilaterals given corner coordinates (n, 4), CCW positive.

    Equivalent to the shoelace formula specialized to four vertices.
    """
    return 0.5 * (
        (xq[:, 2] - xq[:, 0]) * (yq[:, 3] - yq[:, 1])
        - (xq[:, 3] - xq[:, 1]) * (yq[:, 2] - yq[:, 0])
    )


def quad_gradient_operators(xq: np.ndarray, yq: np.ndarray):
    """Mean-gradient operators for one-point quadrature on quads.

    Returns (area, bx, by) where for nodal values f the cell-average
    gradient is (sum f_k bx_k / area, sum f_k by_k / area).  bx/by are the
    integrals of the shape-function gradients over the cell, so they also
    serve as the force stencil.
    """
    area = quad_areas(xq, yq)
    bx = 0.5 * np.stack(
        [yq[:, 1] - yq[:, 3], yq[:, 2] - yq[:, 0], yq[:, 3] - yq[:, 1], yq[:, 0] - yq[:, 2]],
        axis=1,
    )
    by = 0.5 * np.stack(
        [xq[:, 3] - xq[:, 1], xq[:, 0] - xq[:, 2], xq[:, 1] - xq[:, 3], xq[:, 2] - xq[:, 0]],
        axis=1,
    )
    return area, bx, by


def cell_volumes(grid: Grid2D, step=None) -> np.ndarray:
    """Cell volumes per unit thickness (um^3/um), i.e. in-plane areas.

    Raises MeshTangledError (with the first offending cell id) if any
    quadrilateral is inverted.
    """
    xq, yq = grid.corner_coords()
    areas = quad_areas(xq, yq)
    if not np.all(areas > 0.0):
        bad = int(np.argmax(areas <= 0.0))
        raise MeshTangledError(bad, step=step)
    return areas


def cell_volume(grid: Grid2D, cell: int) -> float:
    """Volume per unit thickness of a single cell."""
    xq = grid.node_x[grid.cells[cell]][None, :]
    yq = grid.node_y[grid.cells[cell]][None, :]
    area = float(quad_areas(xq, yq)[0])
    if area <= 0.0:
        raise MeshTangledError(cell)
    return area


def cell_centroids(grid: Grid2D) -> np.ndarray:
    """Vertex-average centroids of all cells, shape (n_cells, 2)."""
    xq, yq = grid.corner_coords()
    return np.stack([xq.mean(axis=1), yq.mean(axis=1)], axis=1)


def lump_masses(grid: Grid2D, cell_mass: np.ndarray) -> np.ndarray:
    """Lump cell masses to nodes: each cell sends mass/4 to each corner.

    Summation runs in fixed index order (bincount over the connectivity
    array), so results are bit-reproducible and total nodal mass equals
    total cell mass exactly up to float addition order.
    """
    contrib = np.repeat(cell_mass / 4.0, 4)
    return np.bincount(grid.cells.ravel(), weights=contrib, minlength=grid.n_nodes)
