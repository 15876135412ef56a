"""Explicit 2D Lagrangian elastic-plastic dynamics on quadrilateral meshes.

One-point (centroid) quadrature throughout, leapfrog time staggering:
velocities live at half steps, coordinates and stresses at whole steps.
Each cycle runs

    nodal forces -> velocity/position update -> strain rates at the
    half-step geometry -> volume/density -> pressure + artificial
    viscosity -> rotated deviatoric trial -> radial return -> fracture

which is the classic ordering for this family of schemes.  Deviators are
co-rotated by the exact in-plane rotation through wz*dt before the elastic
increment, so rigid spins preserve stress invariants.

Units: um, ns, pg, GPa (velocities um/ns = km/s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from typing import Callable

import numpy as np

from .analysis import FieldFrame, plastic_strain_intensity
from .errors import MeshTangledError, NumericalFailureError
from .grains import GrainMap, cell_yield_strength
from .mesh import Grid2D, NodeSplit, lump_masses, quad_areas, quad_gradient_operators
from .state import CellState, MaterialModel, NodalState, von_mises


# ---------------------------------------------------------------------------
# kernel data types


@dataclass
class StrainRateSample:
    """Cell-centered strain rates (1/ns) and spin for one evaluation."""

    exx: float | np.ndarray
    eyy: float | np.ndarray
    exy: float | np.ndarray
    ezz: float | np.ndarray
    wz: float | np.ndarray

    @property
    def trace(self):
        return self.exx + self.eyy + self.ezz


@dataclass
class PlasticUpdate:
    """Result of the yield-surface return for one or many cells."""

    sxx: float | np.ndarray
    syy: float | np.ndarray
    sxy: float | np.ndarray
    szz: float | np.ndarray
    d_ep_xx: float | np.ndarray
    d_ep_yy: float | np.ndarray
    d_ep_xy: float | np.ndarray
    d_ep_zz: float | np.ndarray
    lambda_dot: float | np.ndarray
    d_eq_plastic: float | np.ndarray


# ---------------------------------------------------------------------------
# kernels (vectorized over cells; scalars broadcast)


def velocity_gradients(xq, yq, vxq, vyq):
    """Mean velocity gradient per quad from corner positions/velocities (n, 4).

    Returns (area, Lxx, Lxy, Lyx, Lyy) where Lab = d v_a / d b.
    """
    area, bx, by = quad_gradient_operators(xq, yq)
    inv = 1.0 / area
    lxx = np.einsum("ij,ij->i", vxq, bx) * inv
    lxy = np.einsum("ij,ij->i", vxq, by) * inv
    lyx = np.einsum("ij,ij->i", vyq, bx) * inv
    lyy = np.einsum("ij,ij->i", vyq, by) * inv
    return area, lxx, lxy, lyx, lyy


def strain_rates(x, y, vx, vy) -> StrainRateSample:
    """Strain rates and spin of one quad from its 4 corner positions and
    velocities (counterclockwise order).

    exx = dvx/dx, eyy = dvy/dy, exy = (dvy/dx + dvx/dy)/2,
    wz = (dvy/dx - dvx/dy)/2; ezz is 0 here (plane strain) and is set by
    the plane-stress closure when that mode is active.
    """
    xq = np.asarray(x, dtype=float).reshape(1, 4)
    yq = np.asarray(y, dtype=float).reshape(1, 4)
    vxq = np.asarray(vx, dtype=float).reshape(1, 4)
    vyq = np.asarray(vy, dtype=float).reshape(1, 4)
    if not quad_areas(xq, yq)[0] > 0.0:
        raise MeshTangledError(0)
    area, lxx, lxy, lyx, lyy = velocity_gradients(xq, yq, vxq, vyq)
    return StrainRateSample(
        exx=float(lxx[0]),
        eyy=float(lyy[0]),
        exy=float(0.5 * (lyx[0] + lxy[0])),
        ezz=0.0,
        wz=float(0.5 * (lyx[0] - lxy[0])),
    )


def continuity_check(v_old, v_new, rates: StrainRateSample, dt: float):
    """Residual of V_new/V_old = 1 + tr(rates)*dt.

    Geometry is primary: the solver evolves volumes from nodal positions
    and uses this relation only as a consistency check (the residual is
    second order in dt for smooth motion).
    """
    return v_new / v_old - (1.0 + rates.trace * dt)


def pressure_update(rho, rho0, K):
    """Linear equation of state P = K (rho/rho0 - 1)."""
    return K * (rho / rho0 - 1.0)


def jaumann_rotate(sxx, syy, sxy, szz, angle):
    """Rotate the in-plane block of a deviator by the given angle (rad)."""
    c = np.cos(angle)
    s = np.sin(angle)
    rxx = c * c * sxx - 2.0 * c * s * sxy + s * s * syy
    ryy = s * s * sxx + 2.0 * c * s * sxy + c * c * syy
    rxy = c * s * (sxx - syy) + (c * c - s * s) * sxy
    return rxx, ryy, rxy, szz


def deviatoric_trial(sxx, syy, sxy, szz, rates: StrainRateSample, G, dt):
    """Elastic predictor: co-rotate the old deviator through wz*dt, then add
    2G * deviatoric(strain rate) * dt."""
    rxx, ryy, rxy, rzz = jaumann_rotate(sxx, syy, sxy, szz, rates.wz * dt)
    tr3 = rates.trace / 3.0
    txx = rxx + 2.0 * G * (rates.exx - tr3) * dt
    tyy = ryy + 2.0 * G * (rates.eyy - tr3) * dt
    txy = rxy + 2.0 * G * rates.exy * dt
    tzz = rzz + 2.0 * G * (rates.ezz - tr3) * dt
    return txx, tyy, txy, tzz


def radial_return(sxx_t, syy_t, sxy_t, szz_t, sigma_y, G, dt, hardening=0.0, eq_plastic=0.0) -> PlasticUpdate:
    """Return a trial deviator to the von Mises surface along its own
    direction.

    Elastic if sqrt(3/2 s:s) <= sigma_y (optionally raised by linear
    hardening); otherwise the deviator is scaled back, the plastic strain
    increment is (s_trial - s_new) / 2G, and lambda_dot is the plastic
    multiplier rate matching flow rule eps_dot_p = lambda_dot * s.
    """
    vm = von_mises(sxx_t, syy_t, szz_t, sxy_t)
    sig_eff = sigma_y + hardening * eq_plastic
    d_gamma = np.maximum(vm - sig_eff, 0.0) / (3.0 * G + hardening)
    sig_new = sig_eff + hardening * d_gamma
    scale = np.where(vm > sig_eff, sig_new / np.maximum(vm, 1e-300), 1.0)
    sxx_n = sxx_t * scale
    syy_n = syy_t * scale
    sxy_n = sxy_t * scale
    szz_n = szz_t * scale
    inv2g = 1.0 / (2.0 * G)
    dxx = (sxx_t - sxx_n) * inv2g
    dyy = (syy_t - syy_n) * inv2g
    dxy = (sxy_t - sxy_n) * inv2g
    dzz = (szz_t - szz_n) * inv2g
    d_eq = np.sqrt((2.0 / 3.0) * (dxx**2 + dyy**2 + 2.0 * dxy**2 + dzz**2))
    lam = d_eq * 3.0 / (2.0 * np.maximum(sig_new, 1e-300) * dt)
    return PlasticUpdate(
        sxx=sxx_n, syy=syy_n, sxy=sxy_n, szz=szz_n,
        d_ep_xx=dxx, d_ep_yy=dyy, d_ep_xy=dxy, d_ep_zz=dzz,
        lambda_dot=lam, d_eq_plastic=d_eq,
    )


def artificial_viscosity(rates: StrainRateSample, rho, area, sound_speed, c_l=0.1, c_q=2.0):
    """Compression-only viscous pressure stabilizing the explicit scheme.

    q = rho * (c_q^2 a^2 tr^2 + c_l a c |tr|) for tr < 0, else 0, with
    a = sqrt(cell area).
    """
    tr = rates.trace
    a = np.sqrt(area)
    q = rho * (c_q**2 * a**2 * tr**2 + c_l * a * sound_speed * np.abs(tr))
    return np.where(tr < 0.0, q, 0.0)


def plane_stress_closure(
    rates_in_plane: StrainRateSample,
    sxx, syy, sxy, szz,
    h, v_new, cell_mass,
    material: MaterialModel,
    sigma_y_cell,
    dt,
    eq_plastic=0.0,
    max_iter=8,
    tol_factor=1e-6,
):
    """Find ezz so the out-of-plane total stress vanishes after the full
    update, by damped Newton with the elastic slope (<= max_iter passes).

    Returns (ezz, full update dict) where the dict carries the committed
    pressure, density, thickness, deviator, and plastic increments.
    Raises NumericalFailureError (with a cell id) on non-convergence.
    """
    exx, eyy, exy, wz = rates_in_plane.exx, rates_in_plane.eyy, rates_in_plane.exy, rates_in_plane.wz
    K, G = material.K, material.G
    slope = (K + 4.0 * G / 3.0) * dt
    ezz = np.zeros_like(np.asarray(exx, dtype=float))
    tol = tol_factor * material.sigma_y
    result = None
    for _ in range(max_iter):
        rates = StrainRateSample(exx=exx, eyy=eyy, exy=exy, ezz=ezz, wz=wz)
        h_new = h * (1.0 + ezz * dt)
        rho = cell_mass / (v_new * h_new)
        p = pressure_update(rho, material.rho0, K)
        trial = deviatoric_trial(sxx, syy, sxy, szz, rates, G, dt)
        ret = radial_return(*trial, sigma_y_cell, G, dt, material.hardening, eq_plastic)
        sig_zz = -p + ret.szz
        result = (rates, h_new, rho, p, ret)
        if np.all(np.abs(sig_zz) <= tol):
            break
        ezz = ezz - sig_zz / slope
    else:
        bad = int(np.argmax(np.abs(np.atleast_1d(sig_zz)) > tol))
        raise NumericalFailureError("plane-stress closure did not converge", cell=bad)
    rates, h_new, rho, p, ret = result
    return rates, h_new, rho, p, ret


def nodal_forces(grid: Grid2D, cells: CellState, geometry=None):
    """Assemble nodal forces from cell stresses.

    Per cell, the total stress sigma = -(P + q) I + s acts through the
    one-point gradient stencil; each corner receives the traction of its
    two adjacent half-edges.  Contributions are summed in fixed cell-index
    order, so assembly is bit-reproducible.  Sign convention: m dv/dt = f,
    i.e. a free body under tension pulls its boundary nodes inward.
    """
    xq, yq = geometry if geometry is not None else grid.corner_coords()
    _, bx, by = quad_gradient_operators(xq, yq)
    p_eff = cells.pressure + cells.q
    sig_xx = (cells.sxx - p_eff) * cells.h
    sig_yy = (cells.syy - p_eff) * cells.h
    sig_xy = cells.sxy * cells.h
    fcx = -(sig_xx[:, None] * bx + sig_xy[:, None] * by)
    fcy = -(sig_xy[:, None] * bx + sig_yy[:, None] * by)
    conn = grid.cells.ravel()
    fx = np.bincount(conn, weights=fcx.ravel(), minlength=grid.n_nodes)
    fy = np.bincount(conn, weights=fcy.ravel(), minlength=grid.n_nodes)
    return fx, fy


def stable_dt(grid: Grid2D, cells: CellState, material: MaterialModel, dt_safety=0.3, trace_rate=None, c_l=0.0, c_q=0.0, geometry=None):
    """CFL-style stable time step.

    dt = dt_safety * min over cells of L / (Q + sqrt(Q^2 + c^2)) with
    L = area / longest edge, c the current longitudinal sound speed, and Q
    the standard viscosity correction (zero when coefficients or the
    compression rate are zero, reducing to dt_safety * L / c).
    """
    xq, yq = geometry if geometry is not None else grid.corner_coords()
    area = quad_areas(xq, yq)
    if np.any(area <= 0.0):
        raise MeshTangledError(int(np.argmax(area <= 0.0)))
    longest_sq = np.zeros(area.shape)
    for k in range(4):
        k2 = (k + 1) % 4
        edge_sq = (xq[:, k2] - xq[:, k]) ** 2 + (yq[:, k2] - yq[:, k]) ** 2
        np.maximum(longest_sq, edge_sq, out=longest_sq)
    length = area / np.sqrt(longest_sq)
    c = np.sqrt((material.K + 4.0 * material.G / 3.0) / cells.rho)
    if trace_rate is not None and (c_l > 0.0 or c_q > 0.0):
        compressing = trace_rate < 0.0
        q_term = np.where(compressing, c_q**2 * length * np.abs(trace_rate) + c_l * c, 0.0)
    else:
        q_term = 0.0
    denom = q_term + np.sqrt(q_term**2 + c**2)
    dt = dt_safety * float(np.min(length / denom))
    if not (dt > 0.0 and math.isfinite(dt)):
        raise NumericalFailureError(f"non-positive stable dt {dt}")
    return dt


def integrate_motion(node_x, node_y, vx, vy, fx, fy, mass, dt, step=None):
    """One leapfrog update: v += f/m dt, then x += v dt.

    Returns new (x, y, vx, vy) arrays; raises NumericalFailureError if any
    value goes non-finite.
    """
    vx_new = vx + fx / mass * dt
    vy_new = vy + fy / mass * dt
    if not (np.all(np.isfinite(vx_new)) and np.all(np.isfinite(vy_new))):
        raise NumericalFailureError("non-finite velocity", step=step)
    x_new = node_x + vx_new * dt
    y_new = node_y + vy_new * dt
    return x_new, y_new, vx_new, vy_new


# ---------------------------------------------------------------------------
# schedule


@dataclass
class LoadSpec:
    """Uniaxial tension program: cosine velocity ramp to a target average
    strain over ramp_time, then a hold at fixed grip position."""

    axis: str = "y"
    target_strain: float = 0.007
    ramp_time: float | None = None   # default: 20 slowest-P-wave transits
    hold_time: float | None = None   # default: 5 transits

    def __post_init__(self):
        if self.axis not in ("x", "y"):
            raise ValueError("load axis must be 'x' or 'y'")
        if self.ramp_time is not None and not self.ramp_time > 0.0:
            raise ValueError("ramp time must be positive")


@dataclass
class FractureSpec:
    enabled: bool = False
    eps_frac: float = 0.5
    sigma_frac: float = 1.0


@dataclass
class OutputSpec:
    frames: int = 5
    fields: tuple[str, ...] = ("eq_plastic",)
    history_every: int = 25


@dataclass
class Schedule:
    """Everything that controls a run besides mesh/material/grains."""

    mode: str = "plane-strain"
    load: LoadSpec = dataclass_field(default_factory=LoadSpec)
    dt_safety: float = 0.3
    c_l: float = 0.1
    c_q: float = 2.0
    damping: float = 0.0          # mass-proportional dynamic relaxation, 1/ns
    hourglass: float = 0.0        # stiffness hourglass penalty coefficient
    fracture: FractureSpec = dataclass_field(default_factory=FractureSpec)
    output: OutputSpec = dataclass_field(default_factory=OutputSpec)

    def __post_init__(self):
        if self.mode not in ("plane-strain", "plane-stress"):
            raise ValueError("mode must be 'plane-strain' or 'plane-stress'")
        if not 0.0 < self.dt_safety <= 0.9:
            raise ValueError("dt_safety must be in (0, 0.9]")


@dataclass
class BoundaryCondition:
    """Prescribed velocity component on a set of nodes.

    program(t) returns the velocity (scalar, or an array over the nodes).
    """

    nodes: np.ndarray
    component: str  # 'x' or 'y'
    program: Callable[[float], float | np.ndarray]


@dataclass
class RunResult:
    frames: list[FieldFrame]
    history: dict[str, np.ndarray]
    quasi_static: bool
    warnings: list[str]
    energy: dict[str, float]
    sim: "Simulation"


# ---------------------------------------------------------------------------
# simulation


_HG_BASE = np.array([1.0, -1.0, 1.0, -1.0])


class Simulation:
    """Owns the full state of one run and advances it step by step.

    State buffers belong to this object alone; hand the instance between
    threads, never share it mutably.
    """

    def __init__(
        self,
        grid: Grid2D,
        material: MaterialModel,
        grains: GrainMap | None = None,
        schedule: Schedule | None = None,
        check_invariants: bool = False,
    ):
        self.grid = grid
        self.material = material
        self.grains = grains
        self.schedule = schedule or Schedule()
        self.check_invariants = check_invariants

        thickness = 1.0
        self.cells = CellState.initial(grid, material, thickness)
        self.cell_mass = self.cells.cell_mass().copy()
        self.h0 = self.cells.h.copy()
        self.nodes = NodalState.zeros(grid.n_nodes, mass=lump_masses(grid, self.cell_mass))
        if grains is not None:
            self.sigma_y_cell = cell_yield_strength(material.sigma_y, grains)
        else:
            self.sigma_y_cell = np.full(grid.n_cells, material.sigma_y)

        self.time = 0.0
        self.step_index = 0
        self.bcs: list[BoundaryCondition] = []
        self._bc_node_set: set[int] = set()

        x0, y0 = grid.node_x, grid.node_y
        self.initial_bounds = (float(x0.min()), float(x0.max()), float(y0.min()), float(y0.max()))

        # per-node (i, j) labels survive node duplication for split bookkeeping
        ny1 = grid.ny + 1
        ids = np.arange(grid.n_nodes)
        self.node_ij = np.stack([ids // ny1, ids % ny1], axis=1).astype(np.int32)

        self.work_external = 0.0
        self.plastic_dissipation = 0.0
        self.viscous_dissipation = 0.0
        self.damping_dissipation = 0.0
        self.max_continuity_residual = 0.0
        self.warnings: list[str] = []
        self._last_trace_rate = None
        self._hg_x = np.zeros(grid.n_cells)
        self._hg_y = np.zeros(grid.n_cells)
        self._geom = None  # cached (xq, yq) corner coordinates at x^n

    # -- setup ------------------------------------------------------------

    def add_bc(self, nodes, component: str, program) -> None:
        nodes = np.asarray(nodes, dtype=np.int64)
        if component not in ("x", "y"):
            raise ValueError("bc component must be 'x' or 'y'")
        self.bcs.append(BoundaryCondition(nodes=nodes, component=component, program=program))
        self._bc_node_set.update(int(n) for n in nodes)

    # -- measurements ------------------------------------------------------

    def kinetic_energy(self) -> float:
        n = self.nodes
        return float(0.5 * np.sum(n.mass * (n.vx**2 + n.vy**2)))

    def elastic_energy(self) -> float:
        c = self.cells
        m = self.material
        dev = (c.sxx**2 + c.syy**2 + c.szz**2 + 2.0 * c.sxy**2) / (4.0 * m.G)
        vol = c.pressure**2 / (2.0 * m.K)
        return float(np.sum((dev + vol) * c.V0 * self.h0))

    def internal_energy(self) -> float:
        return self.elastic_energy() + self.plastic_dissipation + self.viscous_dissipation

    def _geometry(self):
        if self._geom is None:
            self._geom = self.grid.corner_coords()
        return self._geom

    def stable_dt(self) -> float:
        s = self.schedule
        return stable_dt(
            self.grid, self.cells, self.material, s.dt_safety,
            trace_rate=self._last_trace_rate, c_l=s.c_l, c_q=s.c_q,
            geometry=self._geometry(),
        )

    def energy_ledger(self) -> dict[str, float]:
        return {
            "work_external": self.work_external,
            "kinetic": self.kinetic_energy(),
            "elastic": self.elastic_energy(),
            "plastic_dissipation": self.plastic_dissipation,
            "viscous_dissipation": self.viscous_dissipation,
            "damping_dissipation": self.damping_dissipation,
        }

    # -- stepping ----------------------------------------------------------

    def _hourglass_forces(self, xq, yq, area, bx, by, dt):
        """Flanagan-Belytschko style stiffness hourglass resistance."""
        kappa = self.schedule.hourglass
        conn = self.grid.cells
        vxq = self.nodes.vx[conn]
        vyq = self.nodes.vy[conn]
        gx = (_HG_BASE[None, :] * xq).sum(axis=1)
        gy = (_HG_BASE[None, :] * yq).sum(axis=1)
        gamma = _HG_BASE[None, :] - (gx[:, None] * bx + gy[:, None] * by) / area[:, None]
        qdot_x = (gamma * vxq).sum(axis=1)
        qdot_y = (gamma * vyq).sum(axis=1)
        stiff = kappa * self.material.G * self.cells.h * (bx**2 + by**2).sum(axis=1) / area
        self._hg_x += stiff * qdot_x * dt
        self._hg_y += stiff * qdot_y * dt
        fcx = -self._hg_x[:, None] * gamma
        fcy = -self._hg_y[:, None] * gamma
        flat = conn.ravel()
        fx = np.bincount(flat, weights=fcx.ravel(), minlength=self.grid.n_nodes)
        fy = np.bincount(flat, weights=fcy.ravel(), minlength=self.grid.n_nodes)
        return fx, fy

    def step(self, dt: float | None = None) -> float:
        """Advance one time step; returns the dt used."""
        if dt is None:
            dt = self.stable_dt()
        grid, cells, nodes, mat, sched = self.grid, self.cells, self.nodes, self.material, self.schedule

        # forces at the current configuration
        xq_old, yq_old = self._geometry()
        fx, fy = nodal_forces(grid, cells, geometry=(xq_old, yq_old))
        if sched.hourglass > 0.0:
            area0, bx0, by0 = quad_gradient_operators(xq_old, yq_old)
            hfx, hfy = self._hourglass_forces(xq_old, yq_old, area0, bx0, by0, dt)
            fx = fx + hfx
            fy = fy + hfy
        nodes.fx = fx
        nodes.fy = fy

        vx_old = nodes.vx
        vy_old = nodes.vy
        vx_free = vx_old + fx / nodes.mass * dt
        vy_free = vy_old + fy / nodes.mass * dt
        if sched.damping > 0.0:
            fac = 1.0 / (1.0 + sched.damping * dt)
            vx_new = vx_free * fac
            vy_new = vy_free * fac
        else:
            vx_new = vx_free
            vy_new = vy_free

        # prescribed velocities at the half step; reactions feed the ledger
        t_mid = self.time + 0.5 * dt
        constrained_x = np.zeros(grid.n_nodes, dtype=bool)
        constrained_y = np.zeros(grid.n_nodes, dtype=bool)
        for bc in self.bcs:
            target = np.broadcast_to(np.asarray(bc.program(t_mid), dtype=float), bc.nodes.shape)
            m = nodes.mass[bc.nodes]
            if bc.component == "x":
                reaction = m * (target - vx_old[bc.nodes]) / dt - fx[bc.nodes]
                vbar = 0.5 * (vx_old[bc.nodes] + target)
                vx_new[bc.nodes] = target
                constrained_x[bc.nodes] = True
            else:
                reaction = m * (target - vy_old[bc.nodes]) / dt - fy[bc.nodes]
                vbar = 0.5 * (vy_old[bc.nodes] + target)
                vy_new[bc.nodes] = target
                constrained_y[bc.nodes] = True
            self.work_external += float(np.sum(reaction * vbar) * dt)

        if sched.damping > 0.0:
            freex = ~constrained_x
            freey = ~constrained_y
            self.damping_dissipation += float(
                np.sum(nodes.mass[freex] * (vx_free - vx_new)[freex] * 0.5 * (vx_old + vx_new)[freex])
                + np.sum(nodes.mass[freey] * (vy_free - vy_new)[freey] * 0.5 * (vy_old + vy_new)[freey])
            )

        if not (np.all(np.isfinite(vx_new)) and np.all(np.isfinite(vy_new))):
            raise NumericalFailureError("non-finite velocity", step=self.step_index)
        nodes.vx = vx_new
        nodes.vy = vy_new

        # move nodes; rates are evaluated on the half-step geometry
        grid.node_x = grid.node_x + vx_new * dt
        grid.node_y = grid.node_y + vy_new * dt

        conn = grid.cells
        vxq = vx_new[conn]
        vyq = vy_new[conn]
        xq_new = xq_old + vxq * dt
        yq_new = yq_old + vyq * dt
        self._geom = (xq_new, yq_new)
        v_new = quad_areas(xq_new, yq_new)
        if not np.all(v_new > 0.0):
            raise MeshTangledError(int(np.argmax(v_new <= 0.0)), step=self.step_index)

        area_mid, lxx, lxy, lyx, lyy = velocity_gradients(
            xq_old + (0.5 * dt) * vxq, yq_old + (0.5 * dt) * vyq, vxq, vyq
        )
        exx = lxx
        eyy = lyy
        exy = 0.5 * (lyx + lxy)
        wz = 0.5 * (lyx - lxy)

        # constitutive update
        if sched.mode == "plane-strain":
            rates = StrainRateSample(exx=exx, eyy=eyy, exy=exy, ezz=np.zeros_like(exx), wz=wz)
            h_new = cells.h
            rho = self.cell_mass / (v_new * h_new)
            p = pressure_update(rho, mat.rho0, mat.K)
            trial = deviatoric_trial(cells.sxx, cells.syy, cells.sxy, cells.szz, rates, mat.G, dt)
            ret = radial_return(*trial, self.sigma_y_cell, mat.G, dt, mat.hardening, cells.eq_plastic)
        else:
            rates_in = StrainRateSample(exx=exx, eyy=eyy, exy=exy, ezz=np.zeros_like(exx), wz=wz)
            rates, h_new, rho, p, ret = plane_stress_closure(
                rates_in, cells.sxx, cells.syy, cells.sxy, cells.szz,
                cells.h, v_new, self.cell_mass, mat, self.sigma_y_cell, dt,
                eq_plastic=cells.eq_plastic,
            )

        tr = rates.trace
        c_sound = np.sqrt((mat.K + 4.0 * mat.G / 3.0) / rho)
        q = artificial_viscosity(rates, rho, v_new, c_sound, sched.c_l, sched.c_q)

        # continuity consistency check (geometry is primary)
        residual = continuity_check(cells.V * cells.h, v_new * h_new, rates, dt)
        self.max_continuity_residual = max(self.max_continuity_residual, float(np.max(np.abs(residual))))
        if self.check_invariants:
            self._check_invariants(rates, ret, residual, dt)

        vol = v_new * h_new
        self.plastic_dissipation += float(np.sum(
            (ret.sxx * ret.d_ep_xx + ret.syy * ret.d_ep_yy
             + ret.szz * ret.d_ep_zz + 2.0 * ret.sxy * ret.d_ep_xy) * vol
        ))
        self.viscous_dissipation += float(np.sum(q * np.maximum(-tr, 0.0) * vol) * dt)

        cells.sxx, cells.syy, cells.sxy, cells.szz = ret.sxx, ret.syy, ret.sxy, ret.szz
        cells.pressure = p
        cells.q = q
        cells.rho = rho
        cells.V = v_new
        cells.h = h_new if isinstance(h_new, np.ndarray) else cells.h
        cells.ep_xx = cells.ep_xx + ret.d_ep_xx
        cells.ep_yy = cells.ep_yy + ret.d_ep_yy
        cells.ep_xy = cells.ep_xy + ret.d_ep_xy
        cells.ep_zz = cells.ep_zz + ret.d_ep_zz
        cells.eq_plastic = cells.eq_plastic + ret.d_eq_plastic
        self._last_trace_rate = tr

        if sched.fracture.enabled:
            self.split_nodes(sched.fracture.eps_frac, sched.fracture.sigma_frac)

        self.time += dt
        self.step_index += 1
        return dt

    def _check_invariants(self, rates, ret: PlasticUpdate, residual, dt):
        vm = von_mises(ret.sxx, ret.syy, ret.szz, ret.sxy)
        if np.any(vm > self.sigma_y_cell * (1.0 + 1e-8) + self.material.hardening * (self.cells.eq_plastic + ret.d_eq_plastic) * (1.0 + 1e-8)):
            raise AssertionError(f"yield surface violated at step {self.step_index}")
        trace = ret.d_ep_xx + ret.d_ep_yy + ret.d_ep_zz
        if np.any(np.abs(trace) > 1e-12):
            raise AssertionError("plastic increment not traceless")
        active = ret.d_eq_plastic > 0.0
        if np.any(active):
            num = (ret.d_ep_xx * ret.sxx + ret.d_ep_yy * ret.syy
                   + ret.d_ep_zz * ret.szz + 2.0 * ret.d_ep_xy * ret.sxy)[active]
            na = np.sqrt(ret.d_ep_xx**2 + ret.d_ep_yy**2 + ret.d_ep_zz**2 + 2.0 * ret.d_ep_xy**2)[active]
            nb = np.sqrt(ret.sxx**2 + ret.syy**2 + ret.szz**2 + 2.0 * ret.sxy**2)[active]
            cosine = num / (na * nb)
            if np.any(cosine < 1.0 - 1e-10):
                raise AssertionError("plastic increment not codirectional with deviator")
        rate_mag = np.abs(rates.exx) + np.abs(rates.eyy) + np.abs(rates.exy) + np.abs(np.asarray(rates.ezz))
        bound = max(1e-14, float(np.max(rate_mag) * dt) ** 2 * 10.0)
        if np.any(np.abs(residual) > bound):
            raise AssertionError("continuity residual above second-order bound")

    # -- fracture ----------------------------------------------------------

    def split_nodes(self, eps_frac: float, sigma_frac: float) -> int:
        """Duplicate over-threshold interior nodes to open traction-free
        crack faces; returns the number of splits performed.

        A node splits when both its incident-cell-averaged equivalent
        plastic strain and averaged maximum principal stress exceed the
        thresholds.  Incident cells separate across the mesh line through
        the node most nearly perpendicular to the averaged principal
        direction; nodal masses are re-lumped afterwards (total conserved).
        """
        if not (math.isfinite(eps_frac) or math.isfinite(sigma_frac)):
            return 0
        grid, cells, nodes = self.grid, self.cells, self.nodes
        conn = grid.cells
        flat = conn.ravel()
        counts = np.bincount(flat, minlength=grid.n_nodes).astype(float)
        counts[counts == 0] = 1.0

        intensity = plastic_strain_intensity(cells.ep_xx, cells.ep_yy, cells.ep_xy, cells.ep_zz)
        avg_ep = np.bincount(flat, weights=np.repeat(intensity, 4), minlength=grid.n_nodes) / counts
        p_eff = cells.pressure + cells.q
        sig_xx = cells.sxx - p_eff
        sig_yy = cells.syy - p_eff
        sig_xy = cells.sxy
        avg_xx = np.bincount(flat, weights=np.repeat(sig_xx, 4), minlength=grid.n_nodes) / counts
        avg_yy = np.bincount(flat, weights=np.repeat(sig_yy, 4), minlength=grid.n_nodes) / counts
        avg_xy = np.bincount(flat, weights=np.repeat(sig_xy, 4), minlength=grid.n_nodes) / counts
        mean = 0.5 * (avg_xx + avg_yy)
        radius = np.sqrt((0.5 * (avg_xx - avg_yy)) ** 2 + avg_xy**2)
        s1 = mean + radius

        candidates = np.nonzero((avg_ep >= eps_frac) & (s1 >= sigma_frac))[0]
        n_splits = 0
        for node in candidates:
            node = int(node)
            i, j = self.node_ij[node]
            if i <= 0 or i >= grid.nx or j <= 0 or j >= grid.ny:
                continue
            if node in self._bc_node_set:
                self.warnings.append(f"fracture: skipped boundary-condition node {node}")
                continue
            incident = np.nonzero((grid.cells == node).any(axis=1))[0]
            if incident.size < 2:
                continue
            # principal direction of the averaged stress tensor
            theta = 0.5 * math.atan2(2.0 * avg_xy[node], avg_xx[node] - avg_yy[node])
            nx_dir, ny_dir = math.cos(theta), math.sin(theta)
            cell_i = incident // grid.ny
            cell_j = incident % grid.ny
            if abs(nx_dir) >= abs(ny_dir):
                move = incident[cell_i >= i]   # crack line vertical: right cells move
            else:
                move = incident[cell_j >= j]   # crack line horizontal: upper cells move
            if move.size == 0 or move.size == incident.size:
                continue
            new_id = grid.n_nodes
            grid.node_x = np.append(grid.node_x, grid.node_x[node])
            grid.node_y = np.append(grid.node_y, grid.node_y[node])
            nodes.vx = np.append(nodes.vx, nodes.vx[node])
            nodes.vy = np.append(nodes.vy, nodes.vy[node])
            nodes.fx = np.append(nodes.fx, 0.0)
            nodes.fy = np.append(nodes.fy, 0.0)
            nodes.mass = np.append(nodes.mass, 0.0)
            self.node_ij = np.vstack([self.node_ij, self.node_ij[node]])
            rows = grid.cells[move]
            rows[rows == node] = new_id
            grid.cells[move] = rows
            grid.split_nodes.append(NodeSplit(original=node, duplicate=new_id, moved_cells=tuple(int(c) for c in move)))
            n_splits += 1
        if n_splits:
            nodes.mass = lump_masses(grid, self.cell_mass)
            self._geom = None
        return n_splits

    # -- field extraction ---------------------------------------------------

    def field_values(self, name: str) -> np.ndarray:
        c = self.cells
        if name == "eq_plastic":
            return plastic_strain_intensity(c.ep_xx, c.ep_yy, c.ep_xy, c.ep_zz)
        if name == "eq_plastic_path":
            return c.eq_plastic.copy()
        if name == "von_mises":
            return von_mises(c.sxx, c.syy, c.szz, c.sxy)
        if name == "pressure":
            return c.pressure.copy()
        if name == "sigma_xx":
            return c.sxx - c.pressure
        if name == "sigma_yy":
            return c.syy - c.pressure
        if name == "sigma_xy":
            return c.sxy.copy()
        raise ValueError(f"unknown field {name!r}")

    def make_frame(self, name: str) -> FieldFrame:
        return FieldFrame(
            name=name, time=self.time, nx=self.grid.nx, ny=self.grid.ny,
            bounds=self.initial_bounds, values=self.field_values(name),
        )

    # -- driven runs ---------------------------------------------------------

    def run(self, progress: Callable[[float], None] | None = None) -> RunResult:
        """Run the schedule's uniaxial tension program to completion.

        One-shot: the program installs its boundary conditions, so a
        Simulation instance cannot be run twice.
        """
        if getattr(self, "_ran", False):
            raise RuntimeError("Simulation.run() already executed; build a fresh Simulation")
        self._ran = True
        sched = self.schedule
        load = sched.load
        grid = self.grid
        xmin, xmax, ymin, ymax = self.initial_bounds
        span = (ymax - ymin) if load.axis == "y" else (xmax - xmin)
        transit = span / self.material.longitudinal_speed
        t_pull = load.ramp_time if load.ramp_time is not None else 20.0 * transit
        t_hold = load.hold_time if load.hold_time is not None else 5.0 * transit
        t_end = t_pull + t_hold

        rate_peak = load.target_strain * math.pi / (2.0 * t_pull)

        def grip_velocity(t):
            if t >= t_pull:
                return 0.0
            return span * rate_peak * math.sin(math.pi * t / t_pull)

        if load.axis == "y":
            fixed_edge, moving_edge = grid.edge_nodes("bottom"), grid.edge_nodes("top")
            pin = grid.node_id(0, 0)
            self.add_bc(fixed_edge, "y", lambda t: 0.0)
            self.add_bc(moving_edge, "y", grip_velocity)
            self.add_bc(np.array([pin]), "x", lambda t: 0.0)
        else:
            fixed_edge, moving_edge = grid.edge_nodes("left"), grid.edge_nodes("right")
            pin = grid.node_id(0, 0)
            self.add_bc(fixed_edge, "x", lambda t: 0.0)
            self.add_bc(moving_edge, "x", grip_velocity)
            self.add_bc(np.array([pin]), "y", lambda t: 0.0)

        self._fixed_edge = fixed_edge
        self._moving_edge = moving_edge
        self._span0 = span

        n_frames = max(1, sched.output.frames)
        frame_times = [t_end * (k + 1) / n_frames for k in range(n_frames)]
        next_frame = 0
        frames: list[FieldFrame] = []
        hist: dict[str, list[float]] = {
            "time": [], "avg_strain": [], "avg_stress": [],
            "kinetic_energy": [], "internal_energy": [],
        }
        quasi_static = True
        last_progress = -1.0

        def record_history():
            hist["time"].append(self.time)
            hist["avg_strain"].append(self.average_strain())
            hist["avg_stress"].append(self.average_axial_stress())
            hist["kinetic_energy"].append(self.kinetic_energy())
            hist["internal_energy"].append(self.internal_energy())

        record_history()
        while self.time < t_end - 1e-12:
            dt = self.stable_dt()
            dt = min(dt, t_end - self.time)
            self.step(dt)
            if self.step_index % sched.output.history_every == 0 or self.time >= t_end - 1e-12:
                record_history()
                if self.time > t_pull:
                    ke = hist["kinetic_energy"][-1]
                    internal = hist["internal_energy"][-1]
                    if ke > 0.05 * internal and ke > 1e-12:
                        quasi_static = False
            while next_frame < n_frames and self.time >= frame_times[next_frame] - 1e-12:
                for fname in sched.output.fields:
                    frames.append(self.make_frame(fname))
                next_frame += 1
            if progress is not None:
                frac = min(1.0, self.time / t_end)
                if frac - last_progress >= 0.01:
                    progress(frac)
                    last_progress = frac
        if next_frame < n_frames:
            for fname in sched.output.fields:
                frames.append(self.make_frame(fname))
        if progress is not None:
            progress(1.0)
        if not quasi_static:
            self.warnings.append("kinetic energy exceeded 5% of internal energy during hold")

        energy = self.energy_ledger()
        history = {k: np.asarray(v) for k, v in hist.items()}
        return RunResult(
            frames=frames, history=history, quasi_static=quasi_static,
            warnings=list(self.warnings), energy=energy, sim=self,
        )

    def average_strain(self) -> float:
        load = self.schedule.load
        if load.axis == "y":
            lo = float(self.grid.node_y[self._fixed_edge].mean())
            hi = float(self.grid.node_y[self._moving_edge].mean())
        else:
            lo = float(self.grid.node_x[self._fixed_edge].mean())
            hi = float(self.grid.node_x[self._moving_edge].mean())
        return (hi - lo) / self._span0 - 1.0

    def average_axial_stress(self) -> float:
        c = self.cells
        axial = (c.syy if self.schedule.load.axis == "y" else c.sxx) - c.pressure
        vol = c.V * c.h
        return float(np.sum(axial * vol) / np.sum(vol))
