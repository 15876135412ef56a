"""mesobench: a desk-scale workbench for nanoparticle-reinforced composites.

Library layers:

* mesh / state / grains : meshes, materials, polycrystal mesovolumes
* solver : explicit 2D Lagrangian elastic-plastic dynamics
* recovery : moving-least-squares stress smoothing
* analysis : plastic strain intensity, band metrology, field export
* lattice : crystal lattices, nanoparticles, composite assembly, XYZ export
* scene / runner / service / cli : scene documents, run persistence, HTTP API
"""

from .analysis import Band, FieldFrame, detect_bands, export_field, plastic_strain_intensity
from .errors import (
    EmptyParticleError,
    IllConditionedError,
    InsufficientSupportError,
    MeshTangledError,
    NumericalFailureError,
    ParticleCollisionError,
    SceneValidationError,
    TooLargeError,
)
from .grains import GrainMap, assign_yield, generate_grains
from .lattice import AtomSet, LatticeSpec, ParticleSpec, Placement, assemble_composite, build_lattice, build_particle, export_xyz
from .mesh import Grid2D, build_grid, cell_volume, cell_volumes, lump_masses
from .recovery import RecoveryPoint, TractionSamples, mls_recover, recover_field
from .scene import SceneSpec, validate_scene
from .solver import (
    LoadSpec,
    PlasticUpdate,
    RunResult,
    Schedule,
    Simulation,
    StrainRateSample,
    artificial_viscosity,
    continuity_check,
    deviatoric_trial,
    nodal_forces,
    plane_stress_closure,
    pressure_update,
    radial_return,
    stable_dt,
    strain_rates,
)
from .state import CellState, MaterialModel, NodalState, split_stress, total_stress, von_mises

__version__ = "0.1.0"
