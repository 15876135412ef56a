"""Command-line interface: exit codes, outputs, end-to-end smoke."""

import json
from pathlib import Path

import pytest

from mesobench.cli import main

MESO = {
    "scene_version": 1,
    "kind": "meso-simulation",
    "grid": {"nx": 8, "ny": 8, "width": 2.0, "height": 2.0},
    "grains": {"count": 4, "delta": 0.3, "seed": 1},
    "schedule": {"load": {"target_strain": 0.004}, "output": {"frames": 2}},
}

LATTICE_SCENE = {
    "scene_version": 1,
    "kind": "lattice-composite",
    "matrix": {"kind": "fcc", "a": 4.05, "extents": [6, 6, 6], "species": "Al"},
    "particles": [{"shape": "sphere", "radius": 5.0, "species": "C",
                   "lattice": {"kind": "diamond", "a": 3.567, "species": "C"}}],
    "placements": [{"particle": 0, "translation": [12.15, 12.15, 12.15]}],
    "clearance": 2.0,
}


@pytest.fixture
def scene_file(tmp_path):
    path = tmp_path / "meso.json"
    path.write_text(json.dumps(MESO))
    return path


def test_scene_validate_ok(scene_file, capsys):
    assert main(["scene", "validate", str(scene_file)]) == 0
    assert "scene OK" in capsys.readouterr().out


def test_scene_validate_bad(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"scene_version": 1, "kind": "meso-simulation",
                               "grains": {"delta": 2.0}}))
    assert main(["scene", "validate", str(bad)]) == 1
    assert "grains.delta" in capsys.readouterr().err


def test_unknown_subcommand_usage_error(capsys):
    assert main(["frobnicate"]) == 1


def test_lattice_build(tmp_path, capsys):
    spec = tmp_path / "fcc.json"
    spec.write_text(json.dumps({"kind": "fcc", "a": 4.05, "extents": [3, 3, 3], "species": "Al"}))
    out = tmp_path / "m.xyz"
    assert main(["lattice", "build", str(spec), "-o", str(out)]) == 0
    assert str(out) in capsys.readouterr().out
    assert out.read_text().split("\n", 1)[0] == "108"


def test_composite_assemble(tmp_path, capsys):
    scene = tmp_path / "comp.json"
    scene.write_text(json.dumps(LATTICE_SCENE))
    out = tmp_path / "c.xyz"
    assert main(["composite", "assemble", str(scene), "-o", str(out)]) == 0
    count = int(out.read_text().split("\n", 1)[0])
    assert count > 0


def test_meso_gen(scene_file, tmp_path, capsys):
    out = tmp_path / "grains.csv"
    assert main(["meso", "gen", str(scene_file), "-o", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "i,j,grain_id,yield_factor"
    assert len(lines) == 1 + 64


def test_sim_run_then_post(scene_file, tmp_path, capsys):
    runs = tmp_path / "runs"
    assert main(["sim", "run", str(scene_file), "-o", str(runs)]) == 0
    out = capsys.readouterr().out
    run_dir = Path(out.strip().split("\n")[0])
    assert run_dir.exists()
    assert (run_dir / "history.csv").exists()

    assert main(["post", "bands", str(run_dir)]) == 0
    table = capsys.readouterr().out
    assert "angle_deg" in table

    png = tmp_path / "eq.png"
    assert main(["post", "plot", str(run_dir), "--field", "eq_plastic", "-o", str(png)]) == 0
    assert png.exists()
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_sim_run_failure_exit_2(tmp_path, capsys):
    doc = json.loads(json.dumps(LATTICE_SCENE))
    doc["placements"] = [
        {"particle": 0, "translation": [12.0, 12.0, 12.0]},
        {"particle": 0, "translation": [12.5, 12.0, 12.0]},
    ]
    scene = tmp_path / "boom.json"
    scene.write_text(json.dumps(doc))
    assert main(["sim", "run", str(scene), "-o", str(tmp_path / "runs")]) == 2
    assert "run failed" in capsys.readouterr().err


def test_missing_file_exit_1(capsys):
    assert main(["scene", "validate", "/definitely/not/here.json"]) == 1


def test_wrong_kind_for_composite(scene_file, tmp_path, capsys):
    assert main(["composite", "assemble", str(scene_file), "-o", str(tmp_path / "x.xyz")]) == 1
