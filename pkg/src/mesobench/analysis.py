"""Postprocessing: plastic strain intensity, band metrology, field export.

A FieldFrame stores one cell-centered scalar field on the reference grid
layout: values are flat in the same i-major order as cell ids
(``index = i * ny + j``), with i the x cell index.  Gaps (e.g. failed
recovery points) are NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree


@dataclass
class FieldFrame:
    """One time-stamped cell-centered scalar field snapshot."""

    name: str
    time: float
    nx: int
    ny: int
    bounds: tuple[float, float, float, float]  # xmin, xmax, ymin, ymax
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size != self.nx * self.ny:
            raise ValueError(
                f"frame {self.name!r}: {self.values.size} values for {self.nx}x{self.ny} cells"
            )

    def grid_values(self) -> np.ndarray:
        """Values reshaped to (nx, ny): axis 0 is x, axis 1 is y."""
        return self.values.reshape(self.nx, self.ny)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        xmin, xmax, ymin, ymax = self.bounds
        dx = (xmax - xmin) / self.nx
        dy = (ymax - ymin) / self.ny
        return (
            xmin + (np.arange(self.nx) + 0.5) * dx,
            ymin + (np.arange(self.ny) + 0.5) * dy,
        )

    @property
    def cell_area(self) -> float:
        xmin, xmax, ymin, ymax = self.bounds
        return (xmax - xmin) * (ymax - ymin) / (self.nx * self.ny)


@dataclass
class Band:
    """A detected localization band (connected super-threshold region)."""

    cells: np.ndarray          # flat cell ids of members
    angle_deg: float           # acute angle to the loading axis, [0, 90]
    width: float               # um, member area / principal-axis length
    length: float              # um, extent along the principal axis
    peak: float                # max field value over members
    mean: float                # mean field value over members


def plastic_strain_intensity(ep_xx, ep_yy, ep_xy, ep_zz) -> np.ndarray:
    """Equivalent plastic strain sqrt(2/3 (exx^2 + eyy^2 + 2 exy^2 + ezz^2)).

    The xy component enters twice because the tensor has symmetric off-
    diagonal entries.
    """
    return np.sqrt(
        (2.0 / 3.0) * (ep_xx**2 + ep_yy**2 + 2.0 * ep_xy**2 + ep_zz**2)
    )


def intensity_frame(cells, nx, ny, bounds, time=0.0, name="eq_plastic") -> FieldFrame:
    """FieldFrame of plastic strain intensity from a CellState."""
    vals = plastic_strain_intensity(cells.ep_xx, cells.ep_yy, cells.ep_xy, cells.ep_zz)
    return FieldFrame(name=name, time=time, nx=nx, ny=ny, bounds=bounds, values=vals)


# ---------------------------------------------------------------------------
# band detection


def detect_bands(
    frame: FieldFrame,
    threshold_factor: float = 3.0,
    n_min: int = 10,
    load_axis: str = "y",
) -> list[Band]:
    """Find localization bands: 8-connected regions above threshold_factor
    times the spatial mean, at least n_min cells each.

    Regions that are not elongated (e.g. two bands crossing in an X) are
    decomposed by clustering the cells' local orientations, so each
    returned band has a single direction.
    """
    vals = frame.grid_values()
    finite = np.isfinite(vals)
    if not finite.any():
        return []
    mean = float(vals[finite].mean())
    if mean <= 0.0:
        return []
    mask = np.where(finite, vals, -np.inf) >= threshold_factor * mean
    labels, n_labels = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))

    xc, yc = frame.cell_centers()
    xmin, xmax, ymin, ymax = frame.bounds
    dx = (xmax - xmin) / frame.nx
    dy = (ymax - ymin) / frame.ny
    cell_size = max(dx, dy)
    axis_vec = np.array([0.0, 1.0]) if load_axis == "y" else np.array([1.0, 0.0])

    bands: list[Band] = []
    for lab in range(1, n_labels + 1):
        ii, jj = np.nonzero(labels == lab)
        if ii.size < n_min:
            continue
        pts = np.stack([xc[ii], yc[jj]], axis=1)
        flat_ids = ii * frame.ny + jj
        for group, forced_theta in _split_by_orientation(pts, cell_size, n_min):
            if group.size < n_min:
                continue
            gids = flat_ids[group]
            angle, length, width = _band_geometry(
                ii[group], jj[group], pts[group], axis_vec, cell_size,
                frame.cell_area, forced_theta,
            )
            members = frame.values[gids]
            bands.append(
                Band(
                    cells=np.sort(gids),
                    angle_deg=angle,
                    width=width,
                    length=length,
                    peak=float(members.max()),
                    mean=float(members.mean()),
                )
            )
    return bands


def _band_geometry(gi, gj, pts, axis_vec, cell_size, cell_area, forced_theta=None):
    """Acute angle (deg) to axis_vec, extent along the band direction, and
    the covering width.

    Coherent single regions use the principal axis of their cell
    centroids.  Groups produced by orientation splitting may hold several
    parallel branches, where position covariance misreads the direction,
    so they use the clustered local orientation instead, and their width
    is the area-weighted mean over connected branches (a branch's width
    is its area divided by its extent along the common direction).
    """
    centered = pts - pts.mean(axis=0)
    if forced_theta is None:
        cov = centered.T @ centered / pts.shape[0]
        evals, evecs = np.linalg.eigh(cov)
        direction = evecs[:, np.argmax(evals)]
    else:
        direction = np.array([math.cos(forced_theta), math.sin(forced_theta)])
    cosang = min(1.0, abs(float(direction @ axis_vec)) / np.linalg.norm(direction))
    angle = math.degrees(math.acos(cosang))
    proj = centered @ direction
    length = float(proj.max() - proj.min()) + cell_size

    # covering width, branch by branch
    i0, j0 = gi.min(), gj.min()
    mask = np.zeros((gi.max() - i0 + 1, gj.max() - j0 + 1), dtype=bool)
    mask[gi - i0, gj - j0] = True
    pieces, n_pieces = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    widths = []
    weights = []
    for p in range(1, n_pieces + 1):
        sel = pieces[gi - i0, gj - j0] == p
        if sel.sum() < 3:
            continue
        piece_proj = (pts[sel] - pts[sel].mean(axis=0)) @ direction
        piece_len = float(piece_proj.max() - piece_proj.min()) + cell_size
        piece_area = float(sel.sum()) * cell_area
        widths.append(piece_area / piece_len)
        weights.append(piece_area)
    if widths:
        width = float(np.average(widths, weights=weights))
    else:
        width = pts.shape[0] * cell_area / length
    return angle, length, width


def _local_orientations(pts, radius):
    """Doubled-angle unit vectors of local PCA directions, NaN where undefined."""
    tree = cKDTree(pts)
    out = np.full((pts.shape[0], 2), np.nan)
    for k, p in enumerate(pts):
        idx = tree.query_ball_point(p, radius)
        if len(idx) < 3:
            continue
        nb = pts[idx] - pts[idx].mean(axis=0)
        cov = nb.T @ nb
        evals, evecs = np.linalg.eigh(cov)
        if evals[1] <= 1e-12:
            continue
        v = evecs[:, 1]
        theta = math.atan2(v[1], v[0])
        out[k] = (math.cos(2 * theta), math.sin(2 * theta))
    return out


def _split_by_orientation(pts, cell_size, n_min) -> list[tuple[np.ndarray, float | None]]:
    """Split a region into two direction-consistent groups when its local
    orientations are bimodal (crossing or conjugate bands); otherwise keep
    it whole.

    Returns (member indices, direction) pairs; the direction (radians) is
    the cluster-mean local orientation for split groups and None for whole
    regions, which should use their own principal axis.
    """
    n = pts.shape[0]
    all_idx = np.arange(n)
    if n < 2 * n_min:
        return [(all_idx, None)]

    u = _local_orientations(pts, 3.5 * cell_size)
    valid = np.isfinite(u[:, 0])
    if valid.sum() < 2 * n_min:
        return [(all_idx, None)]
    uv = u[valid]
    # deterministic 2-means on the doubled-angle circle
    c1 = uv[0]
    c2 = uv[int(np.argmax(((uv - c1) ** 2).sum(axis=1)))]
    assign = None
    for _iteration in range(25):
        d1 = ((uv - c1) ** 2).sum(axis=1)
        d2 = ((uv - c2) ** 2).sum(axis=1)
        new_assign = (d2 < d1).astype(int)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        if (assign == 0).any():
            c1 = uv[assign == 0].mean(axis=0)
        if (assign == 1).any():
            c2 = uv[assign == 1].mean(axis=0)
    n1 = float(np.linalg.norm(c1))
    n2 = float(np.linalg.norm(c2))
    if n1 < 1e-12 or n2 < 1e-12:
        return [(all_idx, None)]
    separation = 0.5 * math.degrees(math.acos(np.clip((c1 @ c2) / (n1 * n2), -1.0, 1.0)))
    if separation < 15.0:
        return [(all_idx, None)]
    # fold assignments back over all points; undefined orientations join
    # the cluster of their nearest oriented neighbor
    full_assign = np.full(n, -1, dtype=int)
    full_assign[valid] = assign
    if (~valid).any():
        tree = cKDTree(pts[valid])
        _, nearest = tree.query(pts[~valid])
        full_assign[~valid] = assign[nearest]
    g1 = all_idx[full_assign == 0]
    g2 = all_idx[full_assign == 1]
    if min(g1.size, g2.size) < n_min:
        return [(all_idx, None)]
    theta1 = 0.5 * math.atan2(c1[1], c1[0])
    theta2 = 0.5 * math.atan2(c2[1], c2[0])
    return [(g1, theta1), (g2, theta2)]


# ---------------------------------------------------------------------------
# export


_CSV_HEADER = "name,time,nx,ny,xmin,xmax,ymin,ymax"


def write_field_csv(frame: FieldFrame, path) -> None:
    """Write a frame: header line, metadata line, then nx rows of ny values.

    All floats use the %.9e format; lines end with LF.
    """
    xmin, xmax, ymin, ymax = frame.bounds
    lines = [_CSV_HEADER]
    lines.append(
        f"{frame.name},{frame.time:.9e},{frame.nx},{frame.ny},"
        f"{xmin:.9e},{xmax:.9e},{ymin:.9e},{ymax:.9e}"
    )
    grid = frame.grid_values()
    for i in range(frame.nx):
        lines.append(",".join(f"{v:.9e}" for v in grid[i]))
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def read_field_csv(path) -> FieldFrame:
    with open(path, "r") as f:
        header = f.readline().strip()
        if header != _CSV_HEADER:
            raise ValueError(f"unexpected field CSV header in {path}")
        meta = f.readline().strip().split(",")
        name = meta[0]
        time = float(meta[1])
        nx, ny = int(meta[2]), int(meta[3])
        bounds = tuple(float(v) for v in meta[4:8])
        values = np.loadtxt(f, delimiter=",", ndmin=2)
    if values.shape != (nx, ny):
        raise ValueError(f"field CSV body shape {values.shape} != ({nx}, {ny})")
    return FieldFrame(name=name, time=time, nx=nx, ny=ny, bounds=bounds, values=values.ravel())


def write_field_png(frame: FieldFrame, path, scale: int = 4) -> None:
    """Render a frame as a PNG: viridis colormap on a linear scale, min/max
    recorded in tEXt metadata, one cell -> scale x scale pixels."""
    from matplotlib import colormaps
    from PIL import Image
    from PIL.PngImagePlugin import PngInfo

    vals = frame.grid_values()
    finite = np.isfinite(vals)
    vmin = float(vals[finite].min()) if finite.any() else 0.0
    vmax = float(vals[finite].max()) if finite.any() else 0.0
    span = vmax - vmin
    norm = np.zeros_like(vals) if span == 0.0 else np.clip((vals - vmin) / span, 0.0, 1.0)
    norm = np.where(finite, norm, 0.0)
    rgba = colormaps["viridis"](norm)
    rgba[~finite] = (0.0, 0.0, 0.0, 1.0)
    # image rows run top to bottom: transpose (nx, ny) -> (ny, nx), flip y
    img_arr = (rgba.transpose(1, 0, 2)[::-1] * 255).astype(np.uint8)
    img = Image.fromarray(img_arr, mode="RGBA")
    if scale > 1:
        img = img.resize((frame.nx * scale, frame.ny * scale), Image.NEAREST)
    meta = PngInfo()
    meta.add_text("field_name", frame.name)
    meta.add_text("field_time", repr(frame.time))
    meta.add_text("field_min", repr(vmin))
    meta.add_text("field_max", repr(vmax))
    img.save(path, pnginfo=meta)


def export_field(frame: FieldFrame, fmt: str, path) -> None:
    """Write a frame to disk as 'csv' or 'png'."""
    if fmt == "csv":
        write_field_csv(frame, path)
    elif fmt == "png":
        write_field_png(frame, path)
    else:
        raise ValueError(f"unknown export format {fmt!r}")
