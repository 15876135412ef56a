"""Smoothed stress fields by moving least squares.

Each query point gets its own weighted least-squares fit of the three
in-plane stress components over a circular domain of interest (DOI), with
the full quadratic basis {1, x, y, x^2, xy, y^2} in DOI-local scaled
coordinates and the quartic spline weight w(r) = 1 - 6r^2 + 8r^3 - 3r^4.

Near boundaries, traction conditions sigma.n = t couple the component
fits, so the three fits are solved as one joint system of 18 unknowns;
without traction rows it is block diagonal and identical to three
independent fits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import FieldFrame
from .errors import IllConditionedError, InsufficientSupportError

_BASIS_SIZE = 6
_UNKNOWNS = 3 * _BASIS_SIZE


@dataclass
class RecoveryPoint:
    """Recovered stress at one query location."""

    x: float
    y: float
    radius: float          # DOI radius actually used (after any expansion)
    sxx: float
    syy: float
    sxy: float
    condition: float       # condition estimate of the normal-equation matrix


@dataclass
class TractionSamples:
    """Known boundary tractions: points (m, 2), outward normals (m, 2),
    traction vectors (m, 2)."""

    points: np.ndarray
    normals: np.ndarray
    tractions: np.ndarray

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
        self.tractions = np.atleast_2d(np.asarray(self.tractions, dtype=float))

    @property
    def count(self) -> int:
        return self.points.shape[0]


def _quartic_weight(r):
    w = 1.0 - 6.0 * r**2 + 8.0 * r**3 - 3.0 * r**4
    return np.where(r <= 1.0, w, 0.0)


def _basis(u, v):
    return np.stack([np.ones_like(u), u, v, u * u, u * v, v * v], axis=-1)


def mls_recover(
    sample_xy: np.ndarray,
    sample_stress: np.ndarray,
    query_xy,
    radius: float,
    boundary: TractionSamples | None = None,
    max_expansion: int = 4,
    condition_limit: float = 1e12,
) -> RecoveryPoint:
    """Fit stresses near one query point and evaluate the fit there.

    sample_xy : (n, 2) cell-centered sample positions
    sample_stress : (n, 3) columns sxx, syy, sxy
    radius : initial DOI radius; expanded by 1.5x up to max_expansion times
        if the system would be underdetermined (fewer than 18 effective
        equations: 3 per interior sample, 2 per in-DOI traction sample).

    Raises InsufficientSupportError if still underdetermined after
    expansion, IllConditionedError if the normal-equation condition
    estimate exceeds condition_limit.
    """
    sample_xy = np.asarray(sample_xy, dtype=float)
    sample_stress = np.asarray(sample_stress, dtype=float)
    qx, qy = float(query_xy[0]), float(query_xy[1])
    if not radius > 0.0:
        raise ValueError("radius must be positive")

    dist = np.hypot(sample_xy[:, 0] - qx, sample_xy[:, 1] - qy)
    if boundary is not None and boundary.count:
        bdist = np.hypot(boundary.points[:, 0] - qx, boundary.points[:, 1] - qy)
    else:
        bdist = np.empty(0)

    r = float(radius)
    for _ in range(max_expansion + 1):
        inside = dist <= r
        b_inside = bdist <= r
        n_eq = 3 * int(inside.sum()) + 2 * int(b_inside.sum())
        if n_eq >= _UNKNOWNS and inside.sum() >= 1:
            break
        r *= 1.5
    else:
        raise InsufficientSupportError(qx, qy)

    pts = sample_xy[inside]
    vals = sample_stress[inside]
    u = (pts[:, 0] - qx) / r
    v = (pts[:, 1] - qy) / r
    w = _quartic_weight(np.hypot(u, v))

    n_b = int(b_inside.sum()) if bdist.size else 0
    n_rows = 3 * pts.shape[0] + 2 * n_b
    a = np.zeros((n_rows, _UNKNOWNS))
    rhs = np.zeros(n_rows)
    weights = np.zeros(n_rows)

    p = _basis(u, v)
    for comp in range(3):
        rows = slice(comp * pts.shape[0], (comp + 1) * pts.shape[0])
        a[rows, comp * _BASIS_SIZE:(comp + 1) * _BASIS_SIZE] = p
        rhs[rows] = vals[:, comp]
        weights[rows] = w

    if n_b:
        w_max = float(w.max()) if w.size else 1.0
        bp = boundary.points[b_inside]
        bn = boundary.normals[b_inside]
        bt = boundary.tractions[b_inside]
        ub = (bp[:, 0] - qx) / r
        vb = (bp[:, 1] - qy) / r
        pb = _basis(ub, vb)
        base = 3 * pts.shape[0]
        for k in range(n_b):
            nx, ny = bn[k]
            # sigma_xx nx + sigma_xy ny = t_x
            a[base + 2 * k, 0:_BASIS_SIZE] = pb[k] * nx
            a[base + 2 * k, 2 * _BASIS_SIZE:] = pb[k] * ny
            rhs[base + 2 * k] = bt[k, 0]
            # sigma_xy nx + sigma_yy ny = t_y
            a[base + 2 * k + 1, 2 * _BASIS_SIZE:] = pb[k] * nx
            a[base + 2 * k + 1, _BASIS_SIZE:2 * _BASIS_SIZE] = pb[k] * ny
            rhs[base + 2 * k + 1] = bt[k, 1]
            weights[base + 2 * k] = w_max
            weights[base + 2 * k + 1] = w_max

    aw = a * weights[:, None]
    normal = a.T @ aw
    moment = normal[:_BASIS_SIZE, :_BASIS_SIZE]
    condition = float(np.linalg.cond(normal if n_b else moment))
    if not np.isfinite(condition) or condition > condition_limit:
        raise IllConditionedError(qx, qy, condition)
    coeff = np.linalg.solve(normal, a.T @ (weights * rhs))
    return RecoveryPoint(
        x=qx, y=qy, radius=r,
        sxx=float(coeff[0]), syy=float(coeff[_BASIS_SIZE]), sxy=float(coeff[2 * _BASIS_SIZE]),
        condition=condition,
    )


def recover_field(
    sample_xy: np.ndarray,
    sample_stress: np.ndarray,
    query_x: np.ndarray,
    query_y: np.ndarray,
    radius: float,
    boundary: TractionSamples | None = None,
    time: float = 0.0,
) -> tuple[dict[str, FieldFrame], list[str]]:
    """Recover sxx/syy/sxy frames on a query grid; failed points become NaN
    gaps.  Returns (frames keyed by component, warnings); a warning is
    raised when more than 10% of points fail.
    """
    query_x = np.asarray(query_x, dtype=float)
    query_y = np.asarray(query_y, dtype=float)
    nx, ny = query_x.size, query_y.size
    out = {name: np.full(nx * ny, np.nan) for name in ("sxx", "syy", "sxy")}
    gaps = 0
    for i, qx in enumerate(query_x):
        for j, qy in enumerate(query_y):
            try:
                rec = mls_recover(sample_xy, sample_stress, (qx, qy), radius, boundary)
            except (InsufficientSupportError, IllConditionedError):
                gaps += 1
                continue
            idx = i * ny + j
            out["sxx"][idx] = rec.sxx
            out["syy"][idx] = rec.syy
            out["sxy"][idx] = rec.sxy
    warnings = []
    if gaps > 0.10 * nx * ny:
        warnings.append(
            f"recovery quality: {gaps}/{nx * ny} query points lacked support"
        )
    dx = (query_x[1] - query_x[0]) if nx > 1 else radius
    dy = (query_y[1] - query_y[0]) if ny > 1 else radius
    bounds = (
        float(query_x[0] - 0.5 * dx), float(query_x[-1] + 0.5 * dx),
        float(query_y[0] - 0.5 * dy), float(query_y[-1] + 0.5 * dy),
    )
    frames = {
        name: FieldFrame(name=f"recovered_{name}", time=time, nx=nx, ny=ny, bounds=bounds, values=vals)
        for name, vals in out.items()
    }
    return frames, warnings
