"""Scene documents: parsing, validation, defaults, canonical hashing.

A scene is a JSON object describing either a mesovolume simulation
("meso-simulation") or an atomistic composite build ("lattice-composite").
Validation collects every problem (not just the first), reports each with
its document path, rejects unknown fields, and returns a normalized
document with all defaults filled in and echoed.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any

from .errors import SceneValidationError
from .grains import GrainMap, assign_yield, generate_grains
from .lattice import LatticeSpec, ParticleSpec, Placement
from .mesh import Grid2D, build_grid
from .solver import FractureSpec, LoadSpec, OutputSpec, Schedule
from .state import MaterialModel

SCENE_VERSION = 1

_KINDS = ("meso-simulation", "lattice-composite")
_LATTICE_KINDS = ("simple-cubic", "bcc", "fcc", "diamond", "custom")
_SHAPES = ("sphere", "pyramid", "fullerene")
_FIELDS = ("eq_plastic", "eq_plastic_path", "von_mises", "pressure", "sigma_xx", "sigma_yy", "sigma_xy")


class _Errors:
    def __init__(self):
        self.items: list[tuple[str, str]] = []

    def add(self, path: str, message: str):
        self.items.append((path, message))


def _expect_object(doc, path, errors) -> dict | None:
    if not isinstance(doc, dict):
        errors.add(path, f"expected an object, got {type(doc).__name__}")
        return None
    return doc


def _take(doc: dict, known: set, path: str, errors: _Errors):
    for key in doc:
        if key not in known:
            errors.add(f"{path}.{key}" if path else key, "unknown field")


def _number(doc, key, path, errors, default=None, required=False,
            minimum=None, maximum=None, exclusive_min=None, exclusive_max=None,
            integer=False, allow_none=False):
    if key not in doc:
        if required:
            errors.add(f"{path}.{key}" if path else key, "missing required field")
            return None
        return default
    val = doc[key]
    p = f"{path}.{key}" if path else key
    if val is None and allow_none:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        errors.add(p, "expected a number")
        return default
    if integer and int(val) != val:
        errors.add(p, "expected an integer")
        return default
    if not math.isfinite(val):
        errors.add(p, "must be finite")
        return default
    if minimum is not None and val < minimum:
        errors.add(p, f"must be >= {minimum}")
        return default
    if maximum is not None and val > maximum:
        errors.add(p, f"must be <= {maximum}")
        return default
    if exclusive_min is not None and val <= exclusive_min:
        errors.add(p, f"must be > {exclusive_min}")
        return default
    if exclusive_max is not None and val >= exclusive_max:
        errors.add(p, f"must be < {exclusive_max}")
        return default
    return int(val) if integer else float(val)


def _string(doc, key, path, errors, default=None, required=False, choices=None):
    if key not in doc:
        if required:
            errors.add(f"{path}.{key}" if path else key, "missing required field")
            return None
        return default
    val = doc[key]
    p = f"{path}.{key}" if path else key
    if not isinstance(val, str):
        errors.add(p, "expected a string")
        return default
    if choices is not None and val not in choices:
        errors.add(p, f"must be one of {', '.join(choices)}")
        return default
    return val


def _boolean(doc, key, path, errors, default=False):
    if key not in doc:
        return default
    val = doc[key]
    if not isinstance(val, bool):
        errors.add(f"{path}.{key}" if path else key, "expected a boolean")
        return default
    return val


@dataclass(frozen=True)
class SceneSpec:
    """A validated scene: normalized document plus typed accessors."""

    kind: str
    doc: dict

    def canonical_json(self) -> str:
        return json.dumps(self.doc, sort_keys=True, separators=(",", ":"))

    def content_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()[:16]

    # -- meso accessors ----------------------------------------------------

    def material(self) -> MaterialModel:
        m = self.doc["material"]
        return MaterialModel(name=m["name"], rho0=m["rho0"], K=m["K"], G=m["G"],
                             sigma_y=m["sigma_y"], hardening=m["hardening"])

    def grid(self) -> Grid2D:
        g = self.doc["grid"]
        return build_grid(g["nx"], g["ny"], g["width"], g["height"])

    def grains(self, grid: Grid2D) -> GrainMap:
        g = self.doc["grains"]
        gm = generate_grains(grid, g["count"], g["seed"], g["relax_iters"])
        return assign_yield(gm, g["delta"], g["seed"])

    def schedule(self) -> Schedule:
        s = self.doc["schedule"]
        return Schedule(
            mode=s["mode"],
            load=LoadSpec(axis=s["load"]["axis"], target_strain=s["load"]["target_strain"],
                          ramp_time=s["load"]["ramp_time"], hold_time=s["load"]["hold_time"]),
            dt_safety=s["dt_safety"],
            c_l=s["viscosity"]["c_l"],
            c_q=s["viscosity"]["c_q"],
            damping=s["damping"],
            hourglass=s["hourglass"],
            fracture=FractureSpec(enabled=s["fracture"]["enabled"],
                                  eps_frac=s["fracture"]["eps_frac"],
                                  sigma_frac=s["fracture"]["sigma_frac"]),
            output=OutputSpec(frames=s["output"]["frames"],
                              fields=tuple(s["output"]["fields"]),
                              history_every=s["output"]["history_every"]),
        )

    # -- lattice accessors ---------------------------------------------------

    def matrix_lattice(self) -> LatticeSpec:
        return _lattice_spec_from_doc(self.doc["matrix"])

    def particle_specs(self) -> list[ParticleSpec]:
        out = []
        for p in self.doc["particles"]:
            lat = _lattice_spec_from_doc(p["lattice"]) if p.get("lattice") else None
            out.append(ParticleSpec(
                shape=p["shape"], species=p["species"], radius=p["radius"],
                base_edge=p["base_edge"], height=p["height"], lattice=lat,
            ))
        return out

    def placements(self) -> list[Placement]:
        return [
            Placement(particle=p["particle"], translation=tuple(p["translation"]),
                      rotation=tuple(p["rotation"]))
            for p in self.doc["placements"]
        ]

    @property
    def clearance(self) -> float:
        return self.doc["clearance"]


def _lattice_spec_from_doc(doc: dict) -> LatticeSpec:
    basis = tuple((tuple(b["frac"]), b["species"]) for b in doc.get("basis", []))
    return LatticeSpec(kind=doc["kind"], a=doc["a"], extents=tuple(doc["extents"]),
                       species=doc["species"], basis=basis)


def _validate_lattice_section(doc, path, errors) -> dict | None:
    obj = _expect_object(doc, path, errors)
    if obj is None:
        return None
    _take(obj, {"kind", "a", "extents", "species", "basis"}, path, errors)
    kind = _string(obj, "kind", path, errors, required=True, choices=_LATTICE_KINDS)
    a = _number(obj, "a", path, errors, required=True, exclusive_min=0.0)
    species = _string(obj, "species", path, errors, default="X")
    extents = obj.get("extents", [1, 1, 1])
    p = f"{path}.extents"
    if not (isinstance(extents, list) and len(extents) == 3):
        errors.add(p, "expected a list of 3 integers")
        extents = [1, 1, 1]
    else:
        clean = []
        for k, e in enumerate(extents):
            if isinstance(e, bool) or not isinstance(e, int) or e < 1:
                errors.add(f"{p}[{k}]", "must be an integer >= 1")
                clean.append(1)
            else:
                clean.append(e)
        extents = clean
    basis = []
    if kind == "custom":
        raw = obj.get("basis")
        if not isinstance(raw, list) or not raw:
            errors.add(f"{path}.basis", "custom lattice needs a non-empty basis list")
        else:
            for k, item in enumerate(raw):
                bp = f"{path}.basis[{k}]"
                entry = _expect_object(item, bp, errors)
                if entry is None:
                    continue
                _take(entry, {"frac", "species"}, bp, errors)
                frac = entry.get("frac")
                sp = _string(entry, "species", bp, errors, default="X")
                if not (isinstance(frac, list) and len(frac) == 3
                        and all(isinstance(f, (int, float)) and not isinstance(f, bool) for f in frac)):
                    errors.add(f"{bp}.frac", "expected 3 fractional coordinates")
                    continue
                if any(not 0.0 <= float(f) < 1.0 for f in frac):
                    errors.add(f"{bp}.frac", "fractional coordinates must be in [0, 1)")
                    continue
                basis.append({"frac": [float(f) for f in frac], "species": sp})
    elif "basis" in obj:
        errors.add(f"{path}.basis", "basis is only allowed for kind 'custom'")
    if kind is None or a is None:
        return None
    return {"kind": kind, "a": a, "extents": extents, "species": species, "basis": basis}


def _validate_meso(doc: dict, errors: _Errors) -> dict:
    out: dict[str, Any] = {}

    mat = _expect_object(doc.get("material", {}), "material", errors) or {}
    _take(mat, {"name", "rho0", "K", "G", "sigma_y", "hardening"}, "material", errors)
    out["material"] = {
        "name": _string(mat, "name", "material", errors, default="aluminum-like"),
        "rho0": _number(mat, "rho0", "material", errors, default=2.7, exclusive_min=0.0),
        "K": _number(mat, "K", "material", errors, default=72.0, exclusive_min=0.0),
        "G": _number(mat, "G", "material", errors, default=26.0, exclusive_min=0.0),
        "sigma_y": _number(mat, "sigma_y", "material", errors, default=0.25, exclusive_min=0.0),
        "hardening": _number(mat, "hardening", "material", errors, default=0.0, minimum=0.0),
    }

    grid = _expect_object(doc.get("grid", {}), "grid", errors) or {}
    _take(grid, {"nx", "ny", "width", "height"}, "grid", errors)
    out["grid"] = {
        "nx": _number(grid, "nx", "grid", errors, default=64, minimum=1, integer=True),
        "ny": _number(grid, "ny", "grid", errors, default=64, minimum=1, integer=True),
        "width": _number(grid, "width", "grid", errors, default=10.0, exclusive_min=0.0),
        "height": _number(grid, "height", "grid", errors, default=10.0, exclusive_min=0.0),
    }

    grains = _expect_object(doc.get("grains", {}), "grains", errors) or {}
    _take(grains, {"count", "delta", "seed", "relax_iters"}, "grains", errors)
    out["grains"] = {
        "count": _number(grains, "count", "grains", errors, default=1, minimum=1, integer=True),
        "delta": _number(grains, "delta", "grains", errors, default=0.0, minimum=0.0, exclusive_max=1.0),
        "seed": _number(grains, "seed", "grains", errors, default=0, minimum=0, integer=True),
        "relax_iters": _number(grains, "relax_iters", "grains", errors, default=3, minimum=0, integer=True),
    }
    if (out["grains"]["count"] is not None and out["grid"]["nx"] is not None
            and out["grid"]["ny"] is not None
            and out["grains"]["count"] > out["grid"]["nx"] * out["grid"]["ny"]):
        errors.add("grains.count", "must not exceed the number of grid cells")

    sched = _expect_object(doc.get("schedule", {}), "schedule", errors) or {}
    _take(sched, {"mode", "load", "dt_safety", "viscosity", "damping", "hourglass",
                  "fracture", "output"}, "schedule", errors)
    load = _expect_object(sched.get("load", {}), "schedule.load", errors) or {}
    _take(load, {"axis", "target_strain", "ramp_time", "hold_time"}, "schedule.load", errors)
    visc = _expect_object(sched.get("viscosity", {}), "schedule.viscosity", errors) or {}
    _take(visc, {"c_l", "c_q"}, "schedule.viscosity", errors)
    frac = _expect_object(sched.get("fracture", {}), "schedule.fracture", errors) or {}
    _take(frac, {"enabled", "eps_frac", "sigma_frac"}, "schedule.fracture", errors)
    output = _expect_object(sched.get("output", {}), "schedule.output", errors) or {}
    _take(output, {"frames", "fields", "history_every"}, "schedule.output", errors)

    fields = output.get("fields", ["eq_plastic"])
    if not (isinstance(fields, list) and fields and all(isinstance(f, str) for f in fields)):
        errors.add("schedule.output.fields", "expected a non-empty list of field names")
        fields = ["eq_plastic"]
    else:
        for k, f in enumerate(fields):
            if f not in _FIELDS:
                errors.add(f"schedule.output.fields[{k}]",
                           f"unknown field; known: {', '.join(_FIELDS)}")

    out["schedule"] = {
        "mode": _string(sched, "mode", "schedule", errors, default="plane-strain",
                        choices=("plane-strain", "plane-stress")),
        "load": {
            "axis": _string(load, "axis", "schedule.load", errors, default="y", choices=("x", "y")),
            "target_strain": _number(load, "target_strain", "schedule.load", errors,
                                     default=0.007, exclusive_min=0.0),
            "ramp_time": _number(load, "ramp_time", "schedule.load", errors,
                                 default=None, exclusive_min=0.0, allow_none=True),
            "hold_time": _number(load, "hold_time", "schedule.load", errors,
                                 default=None, minimum=0.0, allow_none=True),
        },
        "dt_safety": _number(sched, "dt_safety", "schedule", errors, default=0.3,
                             exclusive_min=0.0, maximum=0.9),
        "viscosity": {
            "c_l": _number(visc, "c_l", "schedule.viscosity", errors, default=0.1, minimum=0.0),
            "c_q": _number(visc, "c_q", "schedule.viscosity", errors, default=2.0, minimum=0.0),
        },
        "damping": _number(sched, "damping", "schedule", errors, default=0.0, minimum=0.0),
        "hourglass": _number(sched, "hourglass", "schedule", errors, default=0.0, minimum=0.0),
        "fracture": {
            "enabled": _boolean(frac, "enabled", "schedule.fracture", errors, default=False),
            "eps_frac": _number(frac, "eps_frac", "schedule.fracture", errors,
                                default=0.5, exclusive_min=0.0),
            "sigma_frac": _number(frac, "sigma_frac", "schedule.fracture", errors,
                                  default=1.0, exclusive_min=0.0),
        },
        "output": {
            "frames": _number(output, "frames", "schedule.output", errors,
                              default=5, minimum=1, integer=True),
            "fields": fields,
            "history_every": _number(output, "history_every", "schedule.output", errors,
                                     default=25, minimum=1, integer=True),
        },
    }
    return out


def _validate_lattice_scene(doc: dict, errors: _Errors) -> dict:
    out: dict[str, Any] = {}
    matrix = _validate_lattice_section(doc.get("matrix", {}), "matrix", errors)
    if "matrix" not in doc:
        errors.add("matrix", "missing required field")
    out["matrix"] = matrix or {}

    particles_raw = doc.get("particles", [])
    particles = []
    if not isinstance(particles_raw, list):
        errors.add("particles", "expected a list")
        particles_raw = []
    for k, p in enumerate(particles_raw):
        pp = f"particles[{k}]"
        obj = _expect_object(p, pp, errors)
        if obj is None:
            continue
        _take(obj, {"shape", "species", "radius", "base_edge", "height", "lattice"}, pp, errors)
        shape = _string(obj, "shape", pp, errors, required=True, choices=_SHAPES)
        entry = {
            "shape": shape,
            "species": _string(obj, "species", pp, errors, default="C"),
            "radius": _number(obj, "radius", pp, errors, default=0.0, minimum=0.0),
            "base_edge": _number(obj, "base_edge", pp, errors, default=0.0, minimum=0.0),
            "height": _number(obj, "height", pp, errors, default=0.0, minimum=0.0),
            "lattice": None,
        }
        if shape in ("sphere", "fullerene") and not (entry["radius"] or 0) > 0.0:
            errors.add(f"{pp}.radius", f"{shape} needs a positive radius")
        if shape == "pyramid" and not ((entry["base_edge"] or 0) > 0.0 and (entry["height"] or 0) > 0.0):
            errors.add(pp, "pyramid needs positive base_edge and height")
        if shape in ("sphere", "pyramid"):
            if "lattice" not in obj:
                errors.add(f"{pp}.lattice", "carved shapes need a carving lattice")
            else:
                entry["lattice"] = _validate_lattice_section(obj["lattice"], f"{pp}.lattice", errors)
        elif "lattice" in obj:
            errors.add(f"{pp}.lattice", "fullerene particles take no carving lattice")
        particles.append(entry)
    out["particles"] = particles

    placements_raw = doc.get("placements", [])
    placements = []
    if not isinstance(placements_raw, list):
        errors.add("placements", "expected a list")
        placements_raw = []
    for k, p in enumerate(placements_raw):
        pp = f"placements[{k}]"
        obj = _expect_object(p, pp, errors)
        if obj is None:
            continue
        _take(obj, {"particle", "translation", "rotation"}, pp, errors)
        idx = _number(obj, "particle", pp, errors, required=True, minimum=0, integer=True)
        if idx is not None and idx >= len(particles):
            errors.add(f"{pp}.particle", f"references unknown particle {idx}")
        translation = obj.get("translation", [0.0, 0.0, 0.0])
        if not (isinstance(translation, list) and len(translation) == 3
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in translation)):
            errors.add(f"{pp}.translation", "expected 3 numbers")
            translation = [0.0, 0.0, 0.0]
        rotation = obj.get("rotation", [1.0, 0.0, 0.0, 0.0])
        if not (isinstance(rotation, list) and len(rotation) == 4
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in rotation)):
            errors.add(f"{pp}.rotation", "expected a quaternion of 4 numbers")
            rotation = [1.0, 0.0, 0.0, 0.0]
        else:
            norm = math.sqrt(sum(float(v) ** 2 for v in rotation))
            if abs(norm - 1.0) > 1e-9:
                errors.add(f"{pp}.rotation", "quaternion must be normalized (|q| = 1 within 1e-9)")
        placements.append({
            "particle": idx,
            "translation": [float(v) for v in translation],
            "rotation": [float(v) for v in rotation],
        })
    out["placements"] = placements
    out["clearance"] = _number(doc, "clearance", "", errors, default=2.0, minimum=0.0)
    return out


_MESO_SECTIONS = {"material", "grid", "grains", "schedule"}
_LATTICE_SECTIONS = {"matrix", "particles", "placements", "clearance"}


def validate_scene(text_or_doc) -> SceneSpec:
    """Parse and validate a scene document (JSON text or dict).

    Returns a SceneSpec whose doc has every default filled in.  Raises
    SceneValidationError listing all problems with their document paths.
    """
    errors = _Errors()
    if isinstance(text_or_doc, (str, bytes)):
        try:
            doc = json.loads(text_or_doc)
        except json.JSONDecodeError as exc:
            raise SceneValidationError([("", f"not valid JSON: {exc}")]) from exc
    else:
        doc = text_or_doc
    if not isinstance(doc, dict):
        raise SceneValidationError([("", "scene document must be a JSON object")])

    version = doc.get("scene_version")
    if version != SCENE_VERSION:
        errors.add("scene_version", f"unknown version {version!r}; expected {SCENE_VERSION}")
    kind = _string(doc, "kind", "", errors, required=True, choices=_KINDS)

    known = {"scene_version", "kind"}
    if kind == "meso-simulation":
        known |= _MESO_SECTIONS
        overlap = _LATTICE_SECTIONS & set(doc)
        if overlap:
            for key in sorted(overlap):
                errors.add(key, "not allowed: scene must be exactly one kind "
                           "(this is a lattice-composite section in a meso-simulation scene)")
            known |= overlap
    elif kind == "lattice-composite":
        known |= _LATTICE_SECTIONS
        overlap = _MESO_SECTIONS & set(doc)
        if overlap:
            for key in sorted(overlap):
                errors.add(key, "not allowed: scene must be exactly one kind "
                           "(this is a meso-simulation section in a lattice-composite scene)")
            known |= overlap
    _take(doc, known, "", errors)

    body: dict[str, Any] = {}
    if kind == "meso-simulation":
        body = _validate_meso(doc, errors)
    elif kind == "lattice-composite":
        body = _validate_lattice_scene(doc, errors)

    if errors.items:
        raise SceneValidationError(errors.items)

    normalized = {"scene_version": SCENE_VERSION, "kind": kind}
    normalized.update(body)
    return SceneSpec(kind=kind, doc=normalized)
