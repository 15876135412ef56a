"""Material parameters and solver state containers.

State is held struct-of-arrays: one NodalState / CellState instance carries
flat numpy arrays over all nodes / cells of a mesh.  Buffers are owned by
exactly one simulation and never shared mutably.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .mesh import Grid2D, cell_volumes, lump_masses


@dataclass(frozen=True)
class MaterialModel:
    """Isotropic elastic-perfectly-plastic material.

    Parameters are user inputs; the shipped aluminum/diamond values in the
    example scenes are illustrative defaults, not measured data.

    rho0 : reference density (pg/um^3, numerically g/cm^3)
    K, G : bulk and shear moduli (GPa)
    sigma_y : base yield strength (GPa)
    hardening : linear hardening modulus (GPa), 0 for perfect plasticity
    """

    name: str
    rho0: float
    K: float
    G: float
    sigma_y: float
    hardening: float = 0.0

    def __post_init__(self):
        for attr in ("rho0", "K", "G", "sigma_y"):
            if not getattr(self, attr) > 0.0:
                raise ValueError(f"material {attr} must be positive")
        if self.hardening < 0.0:
            raise ValueError("hardening modulus must be >= 0")

    @property
    def longitudinal_speed(self) -> float:
        """P-wave speed sqrt((K + 4G/3)/rho0) in um/ns."""
        return float(np.sqrt((self.K + 4.0 * self.G / 3.0) / self.rho0))

    @property
    def youngs_modulus(self) -> float:
        return 9.0 * self.K * self.G / (3.0 * self.K + self.G)

    @property
    def poisson_ratio(self) -> float:
        return (3.0 * self.K - 2.0 * self.G) / (2.0 * (3.0 * self.K + self.G))


@dataclass
class NodalState:
    """Per-node kinematics: velocities (um/ns), lumped mass (pg), force accumulators."""

    vx: np.ndarray
    vy: np.ndarray
    mass: np.ndarray
    fx: np.ndarray
    fy: np.ndarray

    @classmethod
    def zeros(cls, n_nodes: int, mass: np.ndarray | None = None) -> "NodalState":
        z = lambda: np.zeros(n_nodes)
        m = np.zeros(n_nodes) if mass is None else np.asarray(mass, dtype=float)
        return cls(vx=z(), vy=z(), mass=m, fx=z(), fy=z())


@dataclass
class CellState:
    """Per-cell stress and history state.

    sxx, syy, sxy, szz : deviatoric stress components (GPa), trace-free
    pressure : hydrostatic pressure P (GPa), positive in compression
    q : artificial viscosity pressure (GPa)
    rho : current density (pg/um^3)
    V, V0 : current / reference in-plane cell volume per unit thickness (um^2)
    h : thickness (um); identically 1 under plane strain
    ep_xx .. ep_zz : accumulated plastic strain tensor components
    eq_plastic : accumulated equivalent plastic strain
    """

    sxx: np.ndarray
    syy: np.ndarray
    sxy: np.ndarray
    szz: np.ndarray
    pressure: np.ndarray
    q: np.ndarray
    rho: np.ndarray
    V: np.ndarray
    V0: np.ndarray
    h: np.ndarray
    ep_xx: np.ndarray
    ep_yy: np.ndarray
    ep_xy: np.ndarray
    ep_zz: np.ndarray
    eq_plastic: np.ndarray

    @classmethod
    def initial(cls, grid: Grid2D, material: MaterialModel, thickness: float = 1.0) -> "CellState":
        """Unstressed state at reference density on the given mesh."""
        n = grid.n_cells
        areas = cell_volumes(grid)
        z = lambda: np.zeros(n)
        return cls(
            sxx=z(), syy=z(), sxy=z(), szz=z(),
            pressure=z(), q=z(),
            rho=np.full(n, material.rho0),
            V=areas.copy(), V0=areas.copy(),
            h=np.full(n, float(thickness)),
            ep_xx=z(), ep_yy=z(), ep_xy=z(), ep_zz=z(),
            eq_plastic=z(),
        )

    def cell_mass(self) -> np.ndarray:
        """Cell masses rho*V*h (pg); constant in time for a Lagrangian mesh."""
        return self.rho * self.V * self.h

    def copy(self) -> "CellState":
        return replace(self, **{k: v.copy() for k, v in self.__dict__.items()})


def total_stress(cells: CellState):
    """Assemble sigma_ij = -P delta_ij + s_ij; returns (sxx, syy, sxy, szz) totals."""
    p = cells.pressure
    return (cells.sxx - p, cells.syy - p, cells.sxy.copy(), cells.szz - p)


def split_stress(sig_xx, sig_yy, sig_xy, sig_zz):
    """Split a total stress into (pressure, deviator components)."""
    p = -(sig_xx + sig_yy + sig_zz) / 3.0
    return p, (sig_xx + p, sig_yy + p, np.copy(sig_xy), sig_zz + p)


def von_mises(sxx, syy, szz, sxy):
    """sqrt(3/2 s:s) for a trace-free deviator with one in-plane shear component."""
    return np.sqrt(1.5 * (sxx**2 + syy**2 + szz**2 + 2.0 * sxy**2))


def lump_nodal_masses(grid: Grid2D, cells: CellState) -> np.ndarray:
    """Nodal masses lumped from the current cell densities and volumes."""
    return lump_masses(grid, cells.cell_mass())
