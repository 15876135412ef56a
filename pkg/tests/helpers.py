"""Shared drivers for dynamics tests and the acceptance suite."""

import math

import numpy as np

import mesobench as mb
from mesobench.mesh import lump_masses
from mesobench.solver import FractureSpec, LoadSpec, OutputSpec, Schedule, Simulation

ALUMINUM = mb.MaterialModel("aluminum-like", rho0=2.7, K=72.0, G=26.0, sigma_y=0.25)


def run_patch(nx=16, ny=16, size=2.0, stress_fraction=0.5, check_invariants=False):
    """Homogeneous plate pulled to a target uniaxial stress, with dynamic
    relaxation during a long hold so the final state is static."""
    mat = ALUMINUM
    modulus = mat.youngs_modulus / (1.0 - mat.poisson_ratio**2)  # plane strain
    target = stress_fraction * mat.sigma_y / modulus
    c = mat.longitudinal_speed
    transit = size / c
    sched = Schedule(
        load=LoadSpec(axis="y", target_strain=target, hold_time=200 * transit),
        damping=2.0 * c / size,
        output=OutputSpec(frames=1),
    )
    grid = mb.build_grid(nx, ny, size, size)
    sim = Simulation(grid, mat, schedule=sched, check_invariants=check_invariants)
    result = sim.run()
    return sim, result


def measure_wave_speed():
    """Longitudinal pulse down a 100x4 bar in a frictionless rigid channel;
    speed from half-amplitude arrival at the quarter and three-quarter
    points.  Returns (measured, expected)."""
    mat = ALUMINUM
    length, height = 20.0, 0.8
    grid = mb.build_grid(100, 4, length, height)
    sim = Simulation(grid, mat, schedule=Schedule())
    c_exp = mat.longitudinal_speed
    sim.add_bc(np.arange(grid.n_nodes), "y", lambda t: 0.0)
    tau = 40 * sim.stable_dt()
    amp = 1e-3

    def pulse(t):
        return amp * math.sin(math.pi * t / tau) ** 2 if t < tau else 0.0

    sim.add_bc(grid.edge_nodes("left"), "x", pulse)
    probe1 = [grid.node_id(25, j) for j in range(5)]
    probe2 = [grid.node_id(75, j) for j in range(5)]
    times, v1, v2 = [], [], []
    while sim.time < 15.0 / c_exp + 3 * tau:
        sim.step()
        times.append(sim.time)
        v1.append(float(np.mean(sim.nodes.vx[probe1])))
        v2.append(float(np.mean(sim.nodes.vx[probe2])))
    times = np.array(times)
    v1 = np.array(v1)
    v2 = np.array(v2)

    def front_time(v):
        th = 0.5 * amp
        k = int(np.argmax(v > th))
        frac = (th - v[k - 1]) / (v[k] - v[k - 1])
        return times[k - 1] + frac * (times[k] - times[k - 1])

    speed = 10.0 / (front_time(v2) - front_time(v1))
    return speed, c_exp


def rotate_stressed_body(rotation_transits=400, settle_transits=30):
    """Load a free body with a uniform pure-shear deviator, rotate it 90
    degrees rigidly via boundary velocities, let it settle.  Returns
    (von Mises before, von Mises after, simulation)."""
    mat = mb.MaterialModel("stiff", rho0=2.7, K=72.0, G=26.0, sigma_y=10.0)
    size = 2.0
    grid = mb.build_grid(8, 8, size, size)
    sim = Simulation(grid, mat, schedule=Schedule())
    sim.cells.sxy[:] = 0.08
    vm0 = mb.von_mises(sim.cells.sxx, sim.cells.syy, sim.cells.szz, sim.cells.sxy).copy()

    transit = size / mat.longitudinal_speed
    total = rotation_transits * transit
    peak = math.pi / (2.0 * total)  # omega = 2 peak sin^2 integrates to pi/2
    cx = cy = size / 2.0
    edge = np.unique(np.concatenate([grid.edge_nodes(s) for s in ("left", "right", "top", "bottom")]))

    def omega(t):
        if t >= total:
            return 0.0
        return 2.0 * peak * math.sin(math.pi * t / total) ** 2

    sim.add_bc(edge, "x", lambda t: -omega(t) * (sim.grid.node_y[edge] - cy))
    sim.add_bc(edge, "y", lambda t: omega(t) * (sim.grid.node_x[edge] - cx))
    while sim.time < total + settle_transits * transit:
        sim.step()
    vm1 = mb.von_mises(sim.cells.sxx, sim.cells.syy, sim.cells.szz, sim.cells.sxy)
    return vm0, vm1, sim


def make_notched_sim(target_strain=0.03, eps_frac=0.001, sigma_frac=0.36):
    """A 40x20 strip with a pre-opened edge crack along row j=10, loaded in
    tension with node splitting enabled.  Returns (sim, notch row)."""
    mat = ALUMINUM
    grid = mb.build_grid(40, 20, 8.0, 4.0)
    notch_j = 10
    sched = Schedule(
        load=LoadSpec(axis="y", target_strain=target_strain, hold_time=0.0),
        fracture=FractureSpec(enabled=True, eps_frac=eps_frac, sigma_frac=sigma_frac),
        output=OutputSpec(frames=1),
    )
    sim = Simulation(grid, mat, schedule=sched)
    for i in range(1, 7):
        node = grid.node_id(i, notch_j)
        incident = np.nonzero((grid.cells == node).any(axis=1))[0]
        move = incident[(incident % grid.ny) >= notch_j]
        new_id = grid.n_nodes
        grid.node_x = np.append(grid.node_x, grid.node_x[node])
        grid.node_y = np.append(grid.node_y, grid.node_y[node])
        sim.nodes.vx = np.append(sim.nodes.vx, 0.0)
        sim.nodes.vy = np.append(sim.nodes.vy, 0.0)
        sim.nodes.fx = np.append(sim.nodes.fx, 0.0)
        sim.nodes.fy = np.append(sim.nodes.fy, 0.0)
        sim.nodes.mass = np.append(sim.nodes.mass, 0.0)
        sim.node_ij = np.vstack([sim.node_ij, sim.node_ij[node]])
        rows = grid.cells[move]
        rows[rows == node] = new_id
        grid.cells[move] = rows
    sim.nodes.mass = lump_masses(grid, sim.cell_mass)
    sim._geom = None
    return sim, notch_j


def small_meso_run(seed=3, nx=24, ny=28, grains=12, delta=0.3, target=0.006,
                   check_invariants=False, frames=1):
    """A quick heterogeneous tension run used for determinism/energy checks."""
    mat = ALUMINUM
    grid = mb.build_grid(nx, ny, 4.8, 5.6)
    gm = mb.assign_yield(mb.generate_grains(grid, grains, seed=seed, relax_iters=2), delta, seed=seed)
    sched = Schedule(load=LoadSpec(axis="y", target_strain=target),
                     output=OutputSpec(frames=frames))
    sim = Simulation(grid, mat, grains=gm, schedule=sched, check_invariants=check_invariants)
    result = sim.run()
    return sim, result


def ledger_mismatch(energy: dict) -> float:
    """Relative energy-ledger closure error (fraction of external work)."""
    sinks = (energy["kinetic"] + energy["elastic"] + energy["plastic_dissipation"]
             + energy["viscous_dissipation"] + energy["damping_dissipation"])
    return abs(energy["work_external"] - sinks) / abs(energy["work_external"])
