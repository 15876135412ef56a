"""Run execution and persistence.

A run lives in its own directory named by the scene content hash:

    <out_dir>/<run_id>/
        manifest.json        status, progress, warnings, artifact index
        scene.json           canonical normalized scene document
        history.csv          time, avg_strain, avg_stress, KE, internal energy
        fields/<name>_<k>.csv   cell-centered field frames (meso runs)
        bands.json           detected localization bands (meso runs)
        atoms.xyz            assembled atoms (lattice runs)

Everything except manifest.json (which carries wall time) is byte-identical
across re-runs of the same scene.  Manifests are written atomically
(temp file + rename) so readers never see a torn document.
"""

from __future__ import annotations

import json
import os
import time as _time
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path
from typing import Callable

import numpy as np

from .analysis import Band, detect_bands, write_field_csv
from .lattice import assemble_composite, build_lattice, export_xyz
from .scene import SceneSpec, validate_scene
from .solver import Simulation

_STATUS_ORDER = {"queued": 0, "running": 1, "done": 2, "failed": 2}

BAND_THRESHOLD_FACTOR = 3.0

_HISTORY_COLUMNS = ("time", "avg_strain", "avg_stress", "kinetic_energy", "internal_energy")


def band_min_cells(n_cells: int) -> int:
    """Minimum member count for a detected band, scaled with resolution.

    Ten cells is a sensible floor on coarse demo grids, but on a fine mesh
    it admits one-cell-wide slivers that are not bands in any useful
    sense; one band per ~500 cells keeps the floor near a fixed physical
    size as the mesh refines.
    """
    return max(10, n_cells // 500)


@dataclass
class RunManifest:
    """Persisted record of one run."""

    run_id: str
    status: str = "queued"
    progress: float = 0.0
    wall_time_s: float = 0.0
    quasi_static: bool | None = None
    warnings: list = dataclass_field(default_factory=list)
    scene: dict = dataclass_field(default_factory=dict)
    frames: list = dataclass_field(default_factory=list)
    history: str | None = None
    atoms: str | None = None
    bands: str | None = None
    band_detection: dict = dataclass_field(default_factory=dict)
    energy: dict = dataclass_field(default_factory=dict)
    error: str | None = None

    def advance(self, status: str) -> None:
        if status == self.status:
            return
        if self.status in ("done", "failed") or _STATUS_ORDER[status] < _STATUS_ORDER[self.status]:
            raise ValueError(f"status cannot regress from {self.status} to {status}")
        self.status = status

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "status": self.status,
            "progress": self.progress,
            "wall_time_s": self.wall_time_s,
            "quasi_static": self.quasi_static,
            "warnings": self.warnings,
            "scene": self.scene,
            "frames": self.frames,
            "history": self.history,
            "atoms": self.atoms,
            "bands": self.bands,
            "band_detection": self.band_detection,
            "energy": self.energy,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        return cls(**d)


def write_manifest(manifest: RunManifest, run_dir: Path) -> None:
    """Atomic write: readers always see a complete manifest."""
    tmp = run_dir / ".manifest.json.tmp"
    with open(tmp, "w") as f:
        json.dump(manifest.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    os.replace(tmp, run_dir / "manifest.json")


def read_manifest(run_dir: Path) -> RunManifest:
    with open(Path(run_dir) / "manifest.json") as f:
        return RunManifest.from_dict(json.load(f))


def write_history_csv(history: dict[str, np.ndarray], path: Path) -> None:
    n = len(history["time"])
    lines = [",".join(_HISTORY_COLUMNS)]
    for k in range(n):
        lines.append(",".join(f"{history[c][k]:.9e}" for c in _HISTORY_COLUMNS))
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def read_history_csv(path) -> dict[str, np.ndarray]:
    with open(path) as f:
        columns = f.readline().strip().split(",")
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    if data.size == 0:
        data = data.reshape(0, len(columns))
    return {c: data[:, k] for k, c in enumerate(columns)}


def bands_to_json(bands: list[Band]) -> list[dict]:
    return [
        {
            "cells": [int(c) for c in b.cells],
            "angle_deg": b.angle_deg,
            "width": b.width,
            "length": b.length,
            "peak": b.peak,
            "mean": b.mean,
        }
        for b in bands
    ]


def run_job(
    spec: SceneSpec,
    out_dir,
    progress_cb: Callable[[RunManifest], None] | None = None,
) -> RunManifest:
    """Execute a validated scene and persist every artifact.

    The run id is the scene content hash, so re-running the same scene
    lands in the same directory with byte-identical data artifacts.
    Solver failures are captured into the manifest (status 'failed').
    """
    run_id = spec.content_hash()
    run_dir = Path(out_dir) / run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    with open(run_dir / "scene.json", "w", newline="\n") as f:
        f.write(spec.canonical_json() + "\n")

    manifest = RunManifest(run_id=run_id, scene=spec.doc)
    write_manifest(manifest, run_dir)
    started = _time.monotonic()

    def push(progress: float | None = None):
        if progress is not None:
            manifest.progress = max(manifest.progress, min(1.0, progress))
        manifest.wall_time_s = _time.monotonic() - started
        write_manifest(manifest, run_dir)
        if progress_cb is not None:
            progress_cb(manifest)

    manifest.advance("running")
    push(0.0)
    try:
        if spec.kind == "meso-simulation":
            _run_meso(spec, run_dir, manifest, push)
        else:
            _run_lattice(spec, run_dir, manifest)
        manifest.advance("done")
        push(1.0)
    except Exception as exc:  # captured into the manifest, not raised
        manifest.error = f"{type(exc).__name__}: {exc}"
        manifest.advance("failed")
        push(None)
    return manifest


def _run_meso(spec: SceneSpec, run_dir: Path, manifest: RunManifest, push) -> None:
    grid = spec.grid()
    material = spec.material()
    grains = spec.grains(grid)
    schedule = spec.schedule()
    sim = Simulation(grid, material, grains=grains, schedule=schedule)

    last = {"t": _time.monotonic(), "frac": 0.0}

    def on_progress(frac):
        now = _time.monotonic()
        if frac >= 1.0 or frac - last["frac"] >= 0.02 or now - last["t"] >= 0.5:
            last["t"] = now
            last["frac"] = frac
            push(frac * 0.98)

    result = sim.run(progress=on_progress)

    fields_dir = run_dir / "fields"
    fields_dir.mkdir(exist_ok=True)
    counters: dict[str, int] = {}
    for frame in result.frames:
        k = counters.get(frame.name, 0)
        counters[frame.name] = k + 1
        rel = f"fields/{frame.name}_{k:04d}.csv"
        write_field_csv(frame, run_dir / rel)
        manifest.frames.append({"field": frame.name, "index": k, "time": frame.time, "path": rel})

    write_history_csv(result.history, run_dir / "history.csv")
    manifest.history = "history.csv"

    eq_frames = [f for f in result.frames if f.name == "eq_plastic"]
    if eq_frames:
        n_min = band_min_cells(grid.n_cells)
        bands = detect_bands(
            eq_frames[-1],
            threshold_factor=BAND_THRESHOLD_FACTOR,
            n_min=n_min,
            load_axis=schedule.load.axis,
        )
        with open(run_dir / "bands.json", "w", newline="\n") as f:
            json.dump(bands_to_json(bands), f, indent=2, sort_keys=True)
            f.write("\n")
        manifest.bands = "bands.json"
        manifest.band_detection = {
            "threshold_factor": BAND_THRESHOLD_FACTOR,
            "n_min": n_min,
            "load_axis": schedule.load.axis,
        }

    manifest.quasi_static = result.quasi_static
    manifest.warnings = list(result.warnings)
    manifest.energy = {k: float(v) for k, v in result.energy.items()}


def _run_lattice(spec: SceneSpec, run_dir: Path, manifest: RunManifest) -> None:
    matrix = build_lattice(spec.matrix_lattice())
    composite = assemble_composite(matrix, spec.particle_specs(), spec.placements(), spec.clearance)
    export_xyz(composite, run_dir / "atoms.xyz", comment=f"mesobench composite {manifest.run_id}")
    manifest.atoms = "atoms.xyz"


def run_scene_file(path, out_dir, progress_cb=None) -> RunManifest:
    """Validate a scene file and run it."""
    with open(path) as f:
        spec = validate_scene(f.read())
    return run_job(spec, out_dir, progress_cb)
