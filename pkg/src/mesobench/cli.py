"""Command-line interface.

Exit codes: 0 success, 1 validation or usage error, 2 runtime failure.
Every command prints the paths of the artifacts it wrote.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import detect_bands, read_field_csv, write_field_png
from .errors import SceneValidationError
from .grains import assign_yield, generate_grains
from .lattice import assemble_composite, build_lattice, export_xyz
from .runner import read_manifest, run_job
from .scene import validate_scene, _validate_lattice_section, _Errors, _lattice_spec_from_doc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mesobench",
                                     description="nanocomposite workbench: scenes, runs, postprocessing")
    sub = parser.add_subparsers(dest="command", required=True)

    p_scene = sub.add_parser("scene", help="scene document operations")
    scene_sub = p_scene.add_subparsers(dest="scene_command", required=True)
    p_validate = scene_sub.add_parser("validate", help="validate a scene file")
    p_validate.add_argument("file")

    p_lattice = sub.add_parser("lattice", help="lattice construction")
    lattice_sub = p_lattice.add_subparsers(dest="lattice_command", required=True)
    p_build = lattice_sub.add_parser("build", help="build a lattice block from a spec file")
    p_build.add_argument("spec")
    p_build.add_argument("-o", "--output", required=True)

    p_comp = sub.add_parser("composite", help="composite assembly")
    comp_sub = p_comp.add_subparsers(dest="composite_command", required=True)
    p_asm = comp_sub.add_parser("assemble", help="assemble a lattice-composite scene")
    p_asm.add_argument("scene")
    p_asm.add_argument("-o", "--output", required=True)

    p_meso = sub.add_parser("meso", help="mesovolume generation")
    meso_sub = p_meso.add_subparsers(dest="meso_command", required=True)
    p_gen = meso_sub.add_parser("gen", help="generate the grain map of a meso scene")
    p_gen.add_argument("scene")
    p_gen.add_argument("-o", "--output", required=True)

    p_sim = sub.add_parser("sim", help="simulation runs")
    sim_sub = p_sim.add_subparsers(dest="sim_command", required=True)
    p_run = sim_sub.add_parser("run", help="run a scene into an output directory")
    p_run.add_argument("scene")
    p_run.add_argument("-o", "--output", required=True)

    p_post = sub.add_parser("post", help="postprocess a finished run directory")
    post_sub = p_post.add_subparsers(dest="post_command", required=True)
    p_bands = post_sub.add_parser("bands", help="print the localization band table")
    p_bands.add_argument("run_dir")
    p_bands.add_argument("--field", default="eq_plastic")
    p_bands.add_argument("--threshold", type=float, default=3.0)
    p_bands.add_argument("--n-min", type=int, default=None,
                         help="min cells per band (default: scaled with grid size)")
    p_plot = post_sub.add_parser("plot", help="render a field frame to PNG")
    p_plot.add_argument("run_dir")
    p_plot.add_argument("--field", default="eq_plastic")
    p_plot.add_argument("--frame", type=int, default=None)
    p_plot.add_argument("-o", "--output", required=True)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--port", type=int, default=8423)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--data", required=True)
    p_serve.add_argument("--workers", type=int, default=1)
    return parser


def _load_scene(path):
    with open(path) as f:
        return validate_scene(f.read())


def _latest_frame_path(run_dir: Path, field: str, frame: int | None):
    manifest = read_manifest(run_dir)
    entries = [e for e in manifest.frames if e["field"] == field]
    if not entries:
        raise FileNotFoundError(f"run has no field {field!r}")
    if frame is None:
        entry = entries[-1]
    else:
        match = [e for e in entries if e["index"] == frame]
        if not match:
            raise FileNotFoundError(f"field {field!r} has no frame {frame}")
        entry = match[0]
    return run_dir / entry["path"], manifest


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1

    try:
        return _dispatch(args)
    except SceneValidationError as exc:
        print("scene validation failed:", file=sys.stderr)
        for path, message in exc.errors:
            print(f"  {path or '<root>'}: {message}", file=sys.stderr)
        return 1
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "scene":
        spec = _load_scene(args.file)
        print(f"scene OK: kind={spec.kind} id={spec.content_hash()}")
        return 0

    if args.command == "lattice":
        with open(args.spec) as f:
            doc = json.load(f)
        errors = _Errors()
        section = _validate_lattice_section(doc, "lattice", errors)
        if errors.items or section is None:
            raise SceneValidationError(errors.items)
        atoms = build_lattice(_lattice_spec_from_doc(section))
        export_xyz(atoms, args.output, comment=f"mesobench lattice {section['kind']}")
        print(args.output)
        return 0

    if args.command == "composite":
        spec = _load_scene(args.scene)
        if spec.kind != "lattice-composite":
            raise SceneValidationError([("kind", "composite assemble needs a lattice-composite scene")])
        matrix = build_lattice(spec.matrix_lattice())
        composite = assemble_composite(matrix, spec.particle_specs(), spec.placements(), spec.clearance)
        export_xyz(composite, args.output, comment=f"mesobench composite {spec.content_hash()}")
        print(args.output)
        return 0

    if args.command == "meso":
        spec = _load_scene(args.scene)
        if spec.kind != "meso-simulation":
            raise SceneValidationError([("kind", "meso gen needs a meso-simulation scene")])
        grid = spec.grid()
        g = spec.doc["grains"]
        grains = assign_yield(generate_grains(grid, g["count"], g["seed"], g["relax_iters"]),
                              g["delta"], g["seed"])
        lines = ["i,j,grain_id,yield_factor"]
        for cell in range(grid.n_cells):
            i, j = grid.cell_ij(cell)
            gid = int(grains.grain_id[cell])
            lines.append(f"{i},{j},{gid},{grains.yield_factor[gid]:.9e}")
        with open(args.output, "w", newline="\n") as f:
            f.write("\n".join(lines) + "\n")
        print(args.output)
        return 0

    if args.command == "sim":
        spec = _load_scene(args.scene)
        manifest = run_job(spec, args.output)
        run_dir = Path(args.output) / manifest.run_id
        if manifest.status != "done":
            print(f"run failed: {manifest.error}", file=sys.stderr)
            print(run_dir / "manifest.json", file=sys.stderr)
            return 2
        print(run_dir)
        for entry in manifest.frames:
            print(run_dir / entry["path"])
        if manifest.history:
            print(run_dir / manifest.history)
        if manifest.atoms:
            print(run_dir / manifest.atoms)
        return 0

    if args.command == "post":
        run_dir = Path(args.run_dir)
        if args.post_command == "bands":
            frame_path, manifest = _latest_frame_path(run_dir, args.field, None)
            frame = read_field_csv(frame_path)
            axis = manifest.band_detection.get("load_axis", "y")
            from .runner import band_min_cells
            n_min = args.n_min if args.n_min is not None else band_min_cells(frame.nx * frame.ny)
            bands = detect_bands(frame, threshold_factor=args.threshold,
                                 n_min=n_min, load_axis=axis)
            print(f"{'band':>4} {'cells':>6} {'angle_deg':>9} {'width_um':>9} "
                  f"{'length_um':>9} {'peak':>10} {'mean':>10}")
            for k, b in enumerate(bands):
                print(f"{k:>4} {len(b.cells):>6} {b.angle_deg:>9.2f} {b.width:>9.3f} "
                      f"{b.length:>9.3f} {b.peak:>10.4g} {b.mean:>10.4g}")
            if not bands:
                print("(no bands above threshold)")
            return 0
        if args.post_command == "plot":
            frame_path, _ = _latest_frame_path(run_dir, args.field, args.frame)
            frame = read_field_csv(frame_path)
            write_field_png(frame, args.output)
            print(args.output)
            return 0

    if args.command == "serve":
        from .service import serve
        serve(port=args.port, data_dir=args.data, host=args.host, workers=args.workers)
        return 0

    raise RuntimeError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
