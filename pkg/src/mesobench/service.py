"""JSON-over-HTTP service wrapping scenes, jobs, and results.

Scenes are stored under <data_dir>/scenes/<scene_id>.json, runs under
<data_dir>/runs/<run_id>/.  Jobs execute on background worker threads fed
by a FIFO queue; clients poll GET /api/v1/jobs/{id} for progress.

Routes (all bodies UTF-8 JSON):

    POST /api/v1/scenes            scene doc -> 201 {scene_id} | 422 {errors}
    POST /api/v1/jobs              {scene_id} -> 202 {job_id} | 404
    GET  /api/v1/jobs/{id}         manifest | 404
    GET  /api/v1/jobs/{id}/fields/{name}?frame=k   field frame | 404 | 409
    GET  /api/v1/jobs/{id}/history history table | 404 | 409
    GET  /api/v1/jobs/{id}/bands   band list | 404 | 409
    POST /api/v1/lattice/preview   lattice spec -> atoms (cap 50000 -> 413)
"""

from __future__ import annotations

import json
import queue
import sys
import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse

from .analysis import read_field_csv
from .errors import SceneValidationError, TooLargeError
from .lattice import build_lattice
from .runner import RunManifest, read_history_csv, read_manifest, run_job, write_manifest
from .scene import validate_scene, _validate_lattice_section, _Errors, _lattice_spec_from_doc

PREVIEW_ATOM_CAP = 50_000


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


class JobQueue:
    """FIFO queue of run requests executed by daemon worker threads."""

    def __init__(self, runs_dir: Path, workers: int = 1):
        self.runs_dir = runs_dir
        self._queue: queue.Queue = queue.Queue()
        self._active: set[str] = set()
        self._lock = threading.Lock()
        self._threads = [
            threading.Thread(target=self._worker, name=f"mesobench-worker-{k}", daemon=True)
            for k in range(max(1, workers))
        ]
        for t in self._threads:
            t.start()

    def submit(self, spec) -> str:
        job_id = spec.content_hash()
        run_dir = self.runs_dir / job_id
        with self._lock:
            if job_id in self._active:
                return job_id
            manifest_path = run_dir / "manifest.json"
            if manifest_path.exists():
                status = read_manifest(run_dir).status
                if status in ("done", "failed"):
                    return job_id  # idempotent: same scene, same artifacts
            self._active.add(job_id)
        run_dir.mkdir(parents=True, exist_ok=True)
        write_manifest(RunManifest(run_id=job_id, scene=spec.doc), run_dir)
        self._queue.put(spec)
        return job_id

    def _worker(self):
        while True:
            spec = self._queue.get()
            job_id = spec.content_hash()
            try:
                # run_job captures run failures into the manifest itself;
                # anything escaping here (e.g. the data dir vanishing) must
                # not kill the worker thread
                run_job(spec, self.runs_dir)
            except Exception as exc:
                print(f"mesobench worker: job {job_id} aborted: {exc}", file=sys.stderr)
            finally:
                with self._lock:
                    self._active.discard(job_id)
                self._queue.task_done()


def create_app(data_dir, workers: int = 1) -> FastAPI:
    data_dir = Path(data_dir)
    scenes_dir = data_dir / "scenes"
    runs_dir = data_dir / "runs"
    scenes_dir.mkdir(parents=True, exist_ok=True)
    runs_dir.mkdir(parents=True, exist_ok=True)

    app = FastAPI(title="mesobench", docs_url=None, redoc_url=None)
    jobs = JobQueue(runs_dir, workers=workers)
    app.state.job_queue = jobs

    def load_manifest(job_id: str) -> RunManifest | None:
        run_dir = runs_dir / job_id
        if not (run_dir / "manifest.json").exists():
            return None
        return read_manifest(run_dir)

    @app.post("/api/v1/scenes")
    async def post_scene(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return JSONResponse(status_code=422, content={"errors": [
                {"path": "", "message": "request body is not valid JSON"}]})
        try:
            spec = validate_scene(body)
        except SceneValidationError as exc:
            return JSONResponse(status_code=422, content={"errors": [
                {"path": p, "message": m} for p, m in exc.errors]})
        scene_id = spec.content_hash()
        with open(scenes_dir / f"{scene_id}.json", "w", newline="\n") as f:
            f.write(spec.canonical_json() + "\n")
        return JSONResponse(status_code=201, content={"scene_id": scene_id})

    @app.get("/api/v1/scenes/{scene_id}")
    async def get_scene(scene_id: str):
        path = scenes_dir / f"{scene_id}.json"
        if not path.exists():
            return _error(404, f"unknown scene {scene_id}")
        return JSONResponse(content=json.loads(path.read_text()))

    @app.post("/api/v1/jobs")
    async def post_job(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return _error(422, "request body is not valid JSON")
        scene_id = body.get("scene_id") if isinstance(body, dict) else None
        if not isinstance(scene_id, str):
            return _error(422, "body must be an object with a scene_id string")
        path = scenes_dir / f"{scene_id}.json"
        if not path.exists():
            return _error(404, f"unknown scene {scene_id}")
        spec = validate_scene(path.read_text())
        job_id = jobs.submit(spec)
        return JSONResponse(status_code=202, content={"job_id": job_id})

    @app.get("/api/v1/jobs/{job_id}")
    async def get_job(job_id: str):
        manifest = load_manifest(job_id)
        if manifest is None:
            return _error(404, f"unknown job {job_id}")
        return JSONResponse(content=manifest.to_dict())

    def _finished_or_error(job_id: str):
        manifest = load_manifest(job_id)
        if manifest is None:
            return None, _error(404, f"unknown job {job_id}")
        if manifest.status != "done":
            return None, _error(409, f"job {job_id} is {manifest.status}, not done")
        return manifest, None

    @app.get("/api/v1/jobs/{job_id}/fields/{name}")
    async def get_field(job_id: str, name: str, frame: int | None = None):
        manifest, err = _finished_or_error(job_id)
        if err is not None:
            return err
        entries = [e for e in manifest.frames if e["field"] == name]
        if not entries:
            return _error(404, f"job {job_id} has no field {name!r}")
        index = frame if frame is not None else entries[-1]["index"]
        match = [e for e in entries if e["index"] == index]
        if not match:
            return _error(404, f"field {name!r} has no frame {index}")
        fr = read_field_csv(runs_dir / job_id / match[0]["path"])
        values = [None if v != v else v for v in fr.values.tolist()]
        return JSONResponse(content={
            "name": fr.name, "time": fr.time, "nx": fr.nx, "ny": fr.ny,
            "bounds": list(fr.bounds), "frame": index, "values": values,
        })

    @app.get("/api/v1/jobs/{job_id}/history")
    async def get_history(job_id: str):
        manifest, err = _finished_or_error(job_id)
        if err is not None:
            return err
        if not manifest.history:
            return _error(404, f"job {job_id} has no history")
        hist = read_history_csv(runs_dir / job_id / manifest.history)
        columns = list(hist.keys())
        n = len(hist[columns[0]])
        rows = [[float(hist[c][k]) for c in columns] for k in range(n)]
        return JSONResponse(content={"columns": columns, "rows": rows})

    @app.get("/api/v1/jobs/{job_id}/bands")
    async def get_bands(job_id: str):
        manifest, err = _finished_or_error(job_id)
        if err is not None:
            return err
        if not manifest.bands:
            return _error(404, f"job {job_id} has no band data")
        with open(runs_dir / job_id / manifest.bands) as f:
            return JSONResponse(content=json.load(f))

    @app.get("/api/v1/jobs/{job_id}/plot/{name}")
    async def get_plot(job_id: str, name: str, frame: int | None = None):
        manifest, err = _finished_or_error(job_id)
        if err is not None:
            return err
        entries = [e for e in manifest.frames if e["field"] == name]
        if not entries:
            return _error(404, f"job {job_id} has no field {name!r}")
        index = frame if frame is not None else entries[-1]["index"]
        match = [e for e in entries if e["index"] == index]
        if not match:
            return _error(404, f"field {name!r} has no frame {index}")
        from .analysis import write_field_png
        png_path = runs_dir / job_id / (Path(match[0]["path"]).stem + ".png")
        if not png_path.exists():
            fr = read_field_csv(runs_dir / job_id / match[0]["path"])
            write_field_png(fr, png_path)
        return FileResponse(png_path, media_type="image/png")

    @app.post("/api/v1/lattice/preview")
    async def lattice_preview(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return _error(422, "request body is not valid JSON")
        errors = _Errors()
        section = _validate_lattice_section(body, "lattice", errors)
        if errors.items or section is None:
            return JSONResponse(status_code=422, content={"errors": [
                {"path": p, "message": m} for p, m in errors.items]})
        spec = _lattice_spec_from_doc(section)
        try:
            atoms = build_lattice(spec, max_atoms=PREVIEW_ATOM_CAP, tag="matrix")
        except TooLargeError as exc:
            return _error(413, str(exc))
        return JSONResponse(content={
            "count": len(atoms),
            "species": atoms.species.tolist(),
            "positions": [[round(v, 6) for v in row] for row in atoms.positions.tolist()],
        })

    return app


def serve(port: int, data_dir, host: str = "127.0.0.1", workers: int = 1) -> None:
    """Run the service until interrupted."""
    import uvicorn

    app = create_app(data_dir, workers=workers)
    uvicorn.run(app, host=host, port=port, log_level="warning")
