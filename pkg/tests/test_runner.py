"""Run execution, persistence, and artifact determinism."""

import hashlib
import json
from pathlib import Path

import pytest

from mesobench.runner import (
    RunManifest,
    read_history_csv,
    read_manifest,
    run_job,
)
from mesobench.scene import validate_scene

TINY_MESO = {
    "scene_version": 1,
    "kind": "meso-simulation",
    "grid": {"nx": 8, "ny": 8, "width": 2.0, "height": 2.0},
    "grains": {"count": 4, "delta": 0.3, "seed": 1},
    "schedule": {"load": {"target_strain": 0.004}, "output": {"frames": 2}},
}

TINY_LATTICE = {
    "scene_version": 1,
    "kind": "lattice-composite",
    "matrix": {"kind": "fcc", "a": 4.05, "extents": [6, 6, 6], "species": "Al"},
    "particles": [{"shape": "sphere", "radius": 5.0, "species": "C",
                   "lattice": {"kind": "diamond", "a": 3.567, "species": "C"}}],
    "placements": [{"particle": 0, "translation": [12.15, 12.15, 12.15]}],
    "clearance": 2.0,
}


def _artifact_hashes(run_dir: Path) -> dict[str, str]:
    """Hash every data artifact (manifest excluded: it carries wall time)."""
    out = {}
    for path in sorted(run_dir.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            rel = str(path.relative_to(run_dir))
            out[rel] = hashlib.sha256(path.read_bytes()).hexdigest()
    return out


@pytest.fixture(scope="module")
def done(tmp_path_factory):
    out = tmp_path_factory.mktemp("runs")
    spec = validate_scene(TINY_MESO)
    manifest = run_job(spec, out)
    return spec, manifest, out / manifest.run_id


class TestMesoJob:
    def test_done_with_frames(self, done):
        _, manifest, run_dir = done
        assert manifest.status == "done"
        assert manifest.error is None
        eq_frames = [f for f in manifest.frames if f["field"] == "eq_plastic"]
        assert len(eq_frames) >= 1
        for entry in manifest.frames:
            assert (run_dir / entry["path"]).exists()

    def test_history_persisted(self, done):
        _, manifest, run_dir = done
        hist = read_history_csv(run_dir / manifest.history)
        assert list(hist.keys()) == ["time", "avg_strain", "avg_stress",
                                     "kinetic_energy", "internal_energy"]
        assert hist["avg_strain"][-1] == pytest.approx(0.004, rel=1e-3)

    def test_manifest_readback(self, done):
        _, manifest, run_dir = done
        back = read_manifest(run_dir)
        assert back.run_id == manifest.run_id
        assert back.status == "done"
        assert back.progress == 1.0
        assert back.quasi_static is True
        assert back.scene["grid"]["nx"] == 8
        assert back.band_detection["threshold_factor"] == 3.0

    def test_scene_json_canonical(self, done):
        spec, _, run_dir = done
        assert (run_dir / "scene.json").read_text().strip() == spec.canonical_json()

    def test_run_id_is_content_hash(self, done):
        spec, manifest, _ = done
        assert manifest.run_id == spec.content_hash()

    def test_rerun_byte_identical_artifacts(self, done, tmp_path):
        spec, manifest, run_dir = done
        again = run_job(spec, tmp_path)
        assert again.run_id == manifest.run_id
        assert _artifact_hashes(run_dir) == _artifact_hashes(tmp_path / again.run_id)


class TestLatticeJob:
    def test_done_with_atoms(self, tmp_path):
        spec = validate_scene(TINY_LATTICE)
        manifest = run_job(spec, tmp_path)
        assert manifest.status == "done"
        assert manifest.atoms == "atoms.xyz"
        xyz = tmp_path / manifest.run_id / "atoms.xyz"
        assert xyz.exists()
        count = int(xyz.read_text().split("\n", 1)[0])
        assert count > 0

    def test_rerun_byte_identical(self, tmp_path):
        spec = validate_scene(TINY_LATTICE)
        m1 = run_job(spec, tmp_path / "a")
        m2 = run_job(spec, tmp_path / "b")
        assert m1.run_id == m2.run_id
        assert _artifact_hashes(tmp_path / "a" / m1.run_id) == \
            _artifact_hashes(tmp_path / "b" / m2.run_id)


class TestFailureCapture:
    def test_solver_failure_lands_in_manifest(self, tmp_path):
        # a colliding-particle scene fails during assembly; status failed,
        # error context captured, no exception escapes
        doc = json.loads(json.dumps(TINY_LATTICE))
        doc["placements"] = [
            {"particle": 0, "translation": [12.0, 12.0, 12.0]},
            {"particle": 0, "translation": [12.5, 12.0, 12.0]},
        ]
        spec = validate_scene(doc)
        manifest = run_job(spec, tmp_path)
        assert manifest.status == "failed"
        assert "ParticleCollisionError" in manifest.error
        back = read_manifest(tmp_path / manifest.run_id)
        assert back.status == "failed"


class TestManifestInvariants:
    def test_status_never_regresses(self):
        m = RunManifest(run_id="x")
        m.advance("running")
        m.advance("done")
        with pytest.raises(ValueError):
            m.advance("running")
        with pytest.raises(ValueError):
            m.advance("failed")

    def test_progress_monotone_during_run(self, tmp_path):
        spec = validate_scene(TINY_MESO)
        seen = []
        run_job(spec, tmp_path, progress_cb=lambda m: seen.append(m.progress))
        assert seen == sorted(seen)
        assert seen[-1] == 1.0
