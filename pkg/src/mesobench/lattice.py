"""Crystal lattices, carved nanoparticles, and composite assembly.

Distances here are Angstroms.  Conventional cells tile half-open, so atom
counts are exact multiples of the per-cell basis size (sc 1, bcc 2, fcc 4,
diamond 8) and block composition is associative.  Carved particles are
returned with their reference point (sphere center, pyramid base center,
fullerene center) at the origin, ready for placement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyParticleError, ParticleCollisionError, TooLargeError

_GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0

_STANDARD_BASES = {
    "simple-cubic": [(0.0, 0.0, 0.0)],
    "bcc": [(0.0, 0.0, 0.0), (0.5, 0.5, 0.5)],
    "fcc": [(0.0, 0.0, 0.0), (0.5, 0.5, 0.0), (0.5, 0.0, 0.5), (0.0, 0.5, 0.5)],
    "diamond": [
        (0.0, 0.0, 0.0), (0.5, 0.5, 0.0), (0.5, 0.0, 0.5), (0.0, 0.5, 0.5),
        (0.25, 0.25, 0.25), (0.75, 0.75, 0.25), (0.75, 0.25, 0.75), (0.25, 0.75, 0.75),
    ],
}

# nearest-neighbor distance in units of the lattice parameter
_NN_FACTOR = {
    "simple-cubic": 1.0,
    "bcc": math.sqrt(3.0) / 2.0,
    "fcc": math.sqrt(0.5),
    "diamond": math.sqrt(3.0) / 4.0,
}

MIN_SEPARATION = 0.5  # Angstrom, global closest-approach floor


@dataclass(frozen=True)
class LatticeSpec:
    """A conventional-cell lattice block.

    kind : 'simple-cubic' | 'bcc' | 'fcc' | 'diamond' | 'custom'
    a : lattice parameter (Angstrom)
    extents : cells along each axis
    species : atom label (ignored for 'custom', which carries its own)
    basis : for 'custom', list of ((fx, fy, fz), species) with fractional
        coordinates in [0, 1)
    """

    kind: str
    a: float
    extents: tuple[int, int, int] = (1, 1, 1)
    species: str = "X"
    basis: tuple = ()

    def __post_init__(self):
        if self.kind not in (*_STANDARD_BASES, "custom"):
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if not self.a > 0.0:
            raise ValueError("lattice parameter must be positive")
        if any(int(e) < 1 for e in self.extents):
            raise ValueError("extents must be >= 1 along every axis")
        if self.kind == "custom":
            if not self.basis:
                raise ValueError("custom lattice needs a basis")
            for frac, _sp in self.basis:
                if any(not 0.0 <= f < 1.0 for f in frac):
                    raise ValueError("fractional coordinates must be in [0, 1)")

    def basis_atoms(self) -> tuple[np.ndarray, list[str]]:
        if self.kind == "custom":
            fracs = np.array([f for f, _ in self.basis], dtype=float)
            species = [sp for _, sp in self.basis]
        else:
            fracs = np.array(_STANDARD_BASES[self.kind], dtype=float)
            species = [self.species] * len(fracs)
        return fracs, species


@dataclass
class AtomSet:
    """Species-labeled atom positions with per-atom provenance."""

    positions: np.ndarray          # (n, 3) Angstrom
    species: np.ndarray            # (n,) str
    provenance: np.ndarray         # (n,) str: matrix | particle | composite

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        self.species = np.asarray(self.species, dtype=str)
        self.provenance = np.asarray(self.provenance, dtype=str)
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("atom coordinates must be finite")

    @classmethod
    def tagged(cls, positions, species, tag: str) -> "AtomSet":
        positions = np.asarray(positions, dtype=float).reshape(-1, 3)
        n = positions.shape[0]
        if isinstance(species, str):
            species = np.full(n, species)
        return cls(positions=positions, species=np.asarray(species, dtype=str),
                   provenance=np.full(n, tag))

    def __len__(self) -> int:
        return self.positions.shape[0]

    def min_distance(self) -> float:
        """Closest approach between any two atoms (inf for < 2 atoms)."""
        if len(self) < 2:
            return math.inf
        tree = cKDTree(self.positions)
        dist, _ = tree.query(self.positions, k=2)
        return float(dist[:, 1].min())

    def transformed(self, rotation: np.ndarray | None = None, translation=None) -> "AtomSet":
        pos = self.positions
        if rotation is not None:
            pos = pos @ np.asarray(rotation, dtype=float).T
        if translation is not None:
            pos = pos + np.asarray(translation, dtype=float)
        return AtomSet(positions=pos, species=self.species.copy(), provenance=self.provenance.copy())


@dataclass(frozen=True)
class ParticleSpec:
    """A nanoparticle to carve or construct.

    shape : 'sphere' (radius), 'pyramid' (base_edge, height), 'fullerene'
        (radius; no carving lattice, 60 vertices of a truncated icosahedron)
    lattice : carving lattice for sphere/pyramid
    """

    shape: str
    species: str = "C"
    radius: float = 0.0
    base_edge: float = 0.0
    height: float = 0.0
    lattice: LatticeSpec | None = None

    def __post_init__(self):
        if self.shape not in ("sphere", "pyramid", "fullerene"):
            raise ValueError(f"unknown particle shape {self.shape!r}")
        if self.shape in ("sphere", "fullerene") and not self.radius > 0.0:
            raise ValueError(f"{self.shape} needs a positive radius")
        if self.shape == "pyramid" and not (self.base_edge > 0.0 and self.height > 0.0):
            raise ValueError("pyramid needs positive base_edge and height")
        if self.shape in ("sphere", "pyramid") and self.lattice is None:
            raise ValueError(f"{self.shape} particle needs a carving lattice")


@dataclass(frozen=True)
class Placement:
    """Where one particle goes: translation (Angstrom) and unit quaternion
    (w, x, y, z) rotation applied before translating."""

    particle: int
    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rotation: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        norm = math.sqrt(sum(c * c for c in self.rotation))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"placement quaternion norm {norm} not within 1e-9 of 1")

    def rotation_matrix(self) -> np.ndarray:
        w, x, y, z = self.rotation
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])


def build_lattice(spec: LatticeSpec, max_atoms: int = 1_000_000, tag: str = "matrix") -> AtomSet:
    """Emit all basis atoms of every conventional cell in the block.

    Cells tile half-open, so an nx x ny x nz block holds exactly
    (basis size) * nx * ny * nz atoms.
    """
    fracs, species = spec.basis_atoms()
    nx, ny, nz = (int(e) for e in spec.extents)
    n_total = len(fracs) * nx * ny * nz
    if n_total > max_atoms:
        raise TooLargeError(f"{n_total} atoms exceeds the cap of {max_atoms}")
    nn = _NN_FACTOR.get(spec.kind)
    if nn is not None and spec.a * nn < MIN_SEPARATION:
        raise ValueError(
            f"lattice parameter {spec.a} puts neighbors closer than {MIN_SEPARATION} A"
        )
    ii, jj, kk = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij")
    origins = np.stack([ii.ravel(), jj.ravel(), kk.ravel()], axis=1).astype(float)
    positions = (origins[:, None, :] + fracs[None, :, :]) * spec.a
    positions = positions.reshape(-1, 3)
    labels = np.tile(np.asarray(species, dtype=str), origins.shape[0])
    return AtomSet.tagged(positions, labels, tag)


def _truncated_icosahedron() -> np.ndarray:
    """The 60 vertices, unit circumradius."""
    phi = _GOLDEN
    seeds = [
        (0.0, 1.0, 3.0 * phi),
        (1.0, 2.0 + phi, 2.0 * phi),
        (phi, 2.0, 2.0 * phi + 1.0),
    ]
    verts = set()
    for sx, sy, sz in seeds:
        for a in ((sx,) if sx == 0.0 else (sx, -sx)):
            for b in (sy, -sy):
                for c in (sz, -sz):
                    base = (a, b, c)
                    for perm in (base, (base[1], base[2], base[0]), (base[2], base[0], base[1])):
                        verts.add(perm)
    arr = np.array(sorted(verts), dtype=float)
    arr /= np.linalg.norm(arr[0])
    return arr


def build_particle(spec: ParticleSpec, max_atoms: int = 1_000_000) -> AtomSet:
    """Carve a sphere/pyramid out of the carving lattice, or place a
    fullerene cage; the result is centered on its reference point."""
    if spec.shape == "fullerene":
        verts = _truncated_icosahedron() * spec.radius
        return AtomSet.tagged(verts, spec.species, "particle")

    lat = spec.lattice
    if spec.shape == "sphere":
        half = (spec.radius, spec.radius, spec.radius)
    else:
        half = (spec.base_edge / 2.0, spec.base_edge / 2.0, 0.0)
    cells = []
    for axis, h in enumerate(half):
        reach = h if axis < 2 or spec.shape == "sphere" else 0.0
        cells.append(int(math.ceil(reach / lat.a)) + 1)
    if spec.shape == "pyramid":
        cells[2] = int(math.ceil(spec.height / lat.a)) + 1
        extents = (2 * cells[0], 2 * cells[1], cells[2] + 1)
        center_cells = (cells[0], cells[1], 0)
    else:
        extents = tuple(2 * c for c in cells)
        center_cells = tuple(cells)
    block_spec = LatticeSpec(kind=lat.kind, a=lat.a, extents=extents,
                             species=spec.species if lat.kind != "custom" else lat.species,
                             basis=lat.basis)
    block = build_lattice(block_spec, max_atoms=max_atoms, tag="particle")
    center = np.array(center_cells, dtype=float) * lat.a
    rel = block.positions - center

    if spec.shape == "sphere":
        keep = np.linalg.norm(rel, axis=1) <= spec.radius + 1e-9
    else:
        z = rel[:, 2]
        shrink = 1.0 - z / spec.height
        keep = (
            (z >= -1e-9) & (z <= spec.height + 1e-9)
            & (np.abs(rel[:, 0]) <= spec.base_edge / 2.0 * shrink + 1e-9)
            & (np.abs(rel[:, 1]) <= spec.base_edge / 2.0 * shrink + 1e-9)
        )
    if not keep.any():
        raise EmptyParticleError(f"{spec.shape} of given size contains no lattice atom")
    return AtomSet(positions=rel[keep], species=block.species[keep],
                   provenance=block.provenance[keep])


def assemble_composite(
    matrix: AtomSet,
    particles: list[ParticleSpec],
    placements: list[Placement],
    clearance: float,
) -> AtomSet:
    """Embed placed particles in the matrix.

    Particles are rotated then translated; matrix atoms within `clearance`
    of any particle atom are removed (KD-tree neighbor search).  Placed
    particles closer than `clearance` to each other raise
    ParticleCollisionError naming the offending pair.
    """
    if clearance < 0.0:
        raise ValueError("clearance must be >= 0")
    built = [build_particle(p) for p in particles]
    placed: list[AtomSet] = []
    for pl in placements:
        if not 0 <= pl.particle < len(built):
            raise ValueError(f"placement references unknown particle {pl.particle}")
        placed.append(built[pl.particle].transformed(pl.rotation_matrix(), pl.translation))

    for i in range(len(placed)):
        for j in range(i + 1, len(placed)):
            tree = cKDTree(placed[j].positions)
            d, _ = tree.query(placed[i].positions, k=1)
            if float(d.min()) < clearance:
                raise ParticleCollisionError(i, j)

    if placed:
        all_particle = np.vstack([p.positions for p in placed])
        tree = cKDTree(all_particle)
        d, _ = tree.query(matrix.positions, k=1)
        keep = d > clearance
    else:
        keep = np.ones(len(matrix), dtype=bool)

    parts = [AtomSet(matrix.positions[keep], matrix.species[keep], matrix.provenance[keep])]
    parts.extend(placed)
    return AtomSet(
        positions=np.vstack([p.positions for p in parts]),
        species=np.concatenate([p.species for p in parts]),
        provenance=np.concatenate([p.provenance for p in parts]),
    )


def export_xyz(atoms: AtomSet, path, comment: str = "") -> None:
    """Standard XYZ: count line, comment line, then 'SPECIES X Y Z' rows
    with %.6f coordinates, single spaces, LF endings."""
    lines = [str(len(atoms)), comment.replace("\n", " ")]
    for sp, (x, y, z) in zip(atoms.species, atoms.positions):
        lines.append(f"{sp} {x:.6f} {y:.6f} {z:.6f}")
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def read_xyz(path) -> tuple[AtomSet, str]:
    """Parse an XYZ file back into an AtomSet (provenance 'composite')."""
    with open(path, "r") as f:
        count = int(f.readline().strip())
        comment = f.readline().rstrip("\n")
        species = []
        positions = []
        for _ in range(count):
            parts = f.readline().split()
            species.append(parts[0])
            positions.append([float(v) for v in parts[1:4]])
    return AtomSet.tagged(np.array(positions), np.array(species), "composite"), comment
