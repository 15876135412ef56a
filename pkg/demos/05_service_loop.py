"""Drive the HTTP service the way the web workbench does.

Starts a live service instance on a local port, then walks the design
loop over plain HTTP: preview a lattice, submit a scene, poll the job,
pull back the plastic-strain field, history, and band table.

Run:  python3 demos/05_service_loop.py
"""

import socket
import tempfile
import threading
import time

import httpx
import uvicorn

from mesobench.service import create_app

SCENE = {
    "scene_version": 1,
    "kind": "meso-simulation",
    "grid": {"nx": 40, "ny": 48, "width": 13.5, "height": 15.7},
    "grains": {"count": 40, "delta": 0.3, "seed": 7},
    "schedule": {"load": {"target_strain": 0.007}, "output": {"frames": 2}},
}

sock = socket.socket()
sock.bind(("127.0.0.1", 0))
port = sock.getsockname()[1]
sock.close()

data_dir = tempfile.mkdtemp(prefix="mesobench-demo-")
server = uvicorn.Server(uvicorn.Config(create_app(data_dir), host="127.0.0.1",
                                       port=port, log_level="error"))
threading.Thread(target=server.run, daemon=True).start()
while not server.started:
    time.sleep(0.02)
base = f"http://127.0.0.1:{port}/api/v1"
print(f"service up at {base} (data in {data_dir})")

preview = httpx.post(f"{base}/lattice/preview",
                     json={"kind": "fcc", "a": 4.05, "extents": [3, 3, 3], "species": "Al"}).json()
print(f"lattice preview: {preview['count']} atoms")

scene_id = httpx.post(f"{base}/scenes", json=SCENE).json()["scene_id"]
job_id = httpx.post(f"{base}/jobs", json={"scene_id": scene_id}).json()["job_id"]
print(f"scene {scene_id} -> job {job_id}")

while True:
    manifest = httpx.get(f"{base}/jobs/{job_id}").json()
    print(f"\r  status {manifest['status']:8s} progress {manifest['progress'] * 100:5.1f}%", end="")
    if manifest["status"] in ("done", "failed"):
        print()
        break
    time.sleep(0.5)

field = httpx.get(f"{base}/jobs/{job_id}/fields/eq_plastic").json()
values = [v for v in field["values"] if v is not None]
print(f"eq_plastic frame {field['frame']}: {field['nx']}x{field['ny']} cells, "
      f"peak {max(values):.4f}")

history = httpx.get(f"{base}/jobs/{job_id}/history").json()
last = dict(zip(history["columns"], history["rows"][-1]))
print(f"history: final avg strain {last['avg_strain'] * 100:.2f}%, "
      f"avg stress {last['avg_stress']:.3f} GPa")

bands = httpx.get(f"{base}/jobs/{job_id}/bands").json()
print(f"bands: {[(round(b['angle_deg'], 1), round(b['width'], 2)) for b in bands]}")

server.should_exit = True
