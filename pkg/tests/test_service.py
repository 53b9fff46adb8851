"""HTTP service: request validation, job lifecycle, artifacts, determinism."""

import base64
import io
import threading
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from sketchsdf.pipeline import (
    RunConfig,
    build_occupancy_dataset,
    build_sdf_dataset,
    make_toy_shapes,
    train_occupancy,
    train_sdf,
)
from sketchsdf.pipeline.config import OptimizerConfig, SamplerConfig
from sketchsdf.service import GenerationBackend, create_app

SERVICE_CFG = RunConfig(
    seed=0,
    occ_optimizer=OptimizerConfig("adam", 2e-3, 6, 8),
    sdf_optimizer=OptimizerConfig("adamw", 1e-3, 2, 8),
    sampler=SamplerConfig(steps=6, guidance=1.0),
)


def sketch_png_b64(size=224) -> str:
    img = np.full((size, size), 255, np.uint8)
    img[60:160, 80:140] = 0
    buf = io.BytesIO()
    Image.fromarray(img).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode()


def wait_done(client, job_id, timeout=60.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        body = client.get(f"/jobs/{job_id}").json()
        if body["status"] in ("done", "failed"):
            return body
        time.sleep(0.05)
    raise TimeoutError(f"job {job_id} did not finish")


@pytest.fixture(scope="module")
def backend(tmp_path_factory):
    shapes = make_toy_shapes(16, 32, seed=2)
    occ_tr = train_occupancy(SERVICE_CFG, build_occupancy_dataset(shapes, 16))
    sdf_tr = train_sdf(SERVICE_CFG, build_sdf_dataset(shapes, 16))
    art = tmp_path_factory.mktemp("service-artifacts")
    return GenerationBackend(occ_tr.net, sdf_tr.net, SERVICE_CFG, art)


@pytest.fixture()
def client(backend):
    app = create_app(backend)
    with TestClient(app) as c:
        yield c
    app.state.worker.shutdown()


class TestValidation:
    def test_views_endpoint(self, client):
        body = client.get("/views").json()
        assert len(body) == 5
        assert [v["azimuth"] for v in body] == [-90, -45, 0, 45, 90]
        assert {v["name"] for v in body} == {
            "left", "side-left", "front", "side-right", "right"
        }

    def test_health(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["checkpoints"]["occupancy"] is True

    def test_unknown_view_400_lists_names(self, client):
        r = client.post(
            "/generate", json={"sketch": sketch_png_b64(), "view_id": "top"}
        )
        assert r.status_code == 400
        assert "side-right" in r.json()["detail"]

    def test_invalid_image_400(self, client):
        r = client.post(
            "/generate",
            json={"sketch": base64.b64encode(b"not a png").decode(),
                  "view_id": "front"},
        )
        assert r.status_code == 400

    def test_unknown_job_404(self, client):
        assert client.get("/jobs/doesnotexist").status_code == 404

    def test_no_model_503(self):
        app = create_app(None)
        with TestClient(app) as c:
            r = c.post(
                "/generate", json={"sketch": sketch_png_b64(), "view_id": "front"}
            )
            assert r.status_code == 503
            assert c.get("/health").json()["status"] == "no-model"

    def test_bad_region_400(self, client):
        r = client.post(
            "/stitch",
            json={
                "sketch_a": sketch_png_b64(),
                "sketch_b": sketch_png_b64(),
                "region": "diagonal",
                "view_id": "front",
            },
        )
        assert r.status_code == 400


    def test_blank_sketch_rejected(self, client):
        import numpy as np
        from PIL import Image
        import io, base64

        buf = io.BytesIO()
        Image.fromarray(np.full((224, 224), 255, np.uint8)).save(buf, format="PNG")
        r = client.post(
            "/generate",
            json={"sketch": base64.b64encode(buf.getvalue()).decode(),
                  "view_id": "front"},
        )
        assert r.status_code == 400
        assert "empty-sketch" in r.json()["detail"]

    def test_server_rescales_other_sizes(self, client):
        r = client.post(
            "/generate", json={"sketch": sketch_png_b64(size=100),
                               "view_id": "front", "steps": 4},
        )
        assert r.status_code == 202
        body = wait_done(client, r.json()["job_id"])
        assert body["status"] == "done"


class TestJobs:
    def test_generate_lifecycle_and_mesh_download(self, client):
        r = client.post(
            "/generate",
            json={"sketch": sketch_png_b64(), "view_id": "side-right",
                  "seed": 3, "steps": 6},
        )
        assert r.status_code == 202
        job_id = r.json()["job_id"]
        body = wait_done(client, job_id)
        assert body["status"] == "done"
        meshes = body["results"]["meshes"]
        assert len(meshes) == 1
        assert meshes[0]["seed"] == 3
        obj = client.get(meshes[0]["uri"])
        assert obj.status_code == 200
        assert obj.content.startswith(b"v ")
        preview = body["results"]["occupancy_previews"][0]
        assert len(preview) > 0 and len(preview[0]) == 3

    def test_num_samples_seeds(self, client):
        r = client.post(
            "/generate",
            json={"sketch": sketch_png_b64(), "view_id": "front", "seed": 10,
                  "steps": 4, "num_samples": 3},
        )
        body = wait_done(client, r.json()["job_id"])
        seeds = [m["seed"] for m in body["results"]["meshes"]]
        assert seeds == [10, 11, 12]

    def test_same_request_same_mesh_bytes(self, client):
        payload = {"sketch": sketch_png_b64(), "view_id": "front", "seed": 7,
                   "steps": 6}
        bodies = []
        for _ in range(2):
            r = client.post("/generate", json=payload)
            body = wait_done(client, r.json()["job_id"])
            uri = body["results"]["meshes"][0]["uri"]
            bodies.append(client.get(uri).content)
        assert bodies[0] == bodies[1]

    def test_generate_category(self, client):
        r = client.post(
            "/generate_category", json={"category": "sphere", "seed": 1, "steps": 4}
        )
        assert r.status_code == 202
        body = wait_done(client, r.json()["job_id"])
        assert body["status"] == "done"

    def test_stitch_all_false_region_matches_plain(self, client, backend):
        # An explicit all-false region keeps sketch_a's features: identical
        # mesh to plain /generate at the same seed.
        g = 224 // 14
        region = [[False] * g for _ in range(g)]
        payload = {
            "sketch_a": sketch_png_b64(),
            "sketch_b": sketch_png_b64(),
            "region": region,
            "view_id": "front",
            "seed": 4,
            "steps": 6,
        }
        r = client.post("/stitch", json=payload)
        body = wait_done(client, r.json()["job_id"])
        stitched = client.get(body["results"]["meshes"][0]["uri"]).content

        r2 = client.post(
            "/generate",
            json={"sketch": sketch_png_b64(), "view_id": "front", "seed": 4,
                  "steps": 6},
        )
        body2 = wait_done(client, r2.json()["job_id"])
        plain = client.get(body2["results"]["meshes"][0]["uri"]).content
        assert stitched == plain

    def test_queue_overflow_429(self, tmp_path):
        gate = threading.Event()

        class SlowBackend:
            ready = True
            artifact_dir = tmp_path

            def checkpoint_info(self):
                return {}

            def run(self, request):
                gate.wait(timeout=10)
                return {"meshes": [], "occupancy_previews": [], "timings": []}

        app = create_app(SlowBackend())
        with TestClient(app) as c:
            payload = {"sketch": sketch_png_b64(), "view_id": "front"}
            codes = [c.post("/generate", json=payload).status_code
                     for _ in range(20)]
            assert 429 in codes
            assert codes[0] == 202
        gate.set()
        app.state.worker.shutdown()

    def test_fifo_order(self, tmp_path):
        processed = []
        release = threading.Event()

        class Recorder:
            ready = True
            artifact_dir = tmp_path

            def checkpoint_info(self):
                return {}

            def run(self, request):
                release.wait(timeout=10)
                processed.append(request["seed"])
                return {"meshes": [], "occupancy_previews": [], "timings": []}

        app = create_app(Recorder())
        with TestClient(app) as c:
            ids = []
            for seed in range(5):
                r = c.post(
                    "/generate",
                    json={"sketch": sketch_png_b64(), "view_id": "front",
                          "seed": seed},
                )
                ids.append(r.json()["job_id"])
            release.set()
            for jid in ids:
                wait_done(c, jid)
        assert processed == sorted(processed)
        app.state.worker.shutdown()

    def test_status_transitions_monotone(self):
        from sketchsdf.service.jobs import JobStore

        store = JobStore()
        job = store.create({})
        store.transition(job.id, "running")
        store.transition(job.id, "done", results={})
        with pytest.raises(ValueError, match="invalid-transition"):
            store.transition(job.id, "running")
