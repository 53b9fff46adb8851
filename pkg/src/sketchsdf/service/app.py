"""HTTP API for the sketch/category generation pipeline.

POST /generate and friends enqueue jobs on a single serialized model
worker; responses return immediately with a job id. Meshes are stored on
disk under the run directory and served by reference.
"""

from __future__ import annotations

import base64
import io
import json
from pathlib import Path
from typing import List, Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from ..denoiser.checkpoint import load_checkpoint
from ..mesh.objio import obj_bytes
from ..view_attention.cameras import VIEW_NAMES, predefined_views
from ..view_attention.encoder import StubPatchEncoder
from ..view_attention.masks import half_region, stitch_patch_features
from ..denoiser.conditioning import Conditioning, category_embedding
from ..pipeline.config import RunConfig
from ..pipeline.generate import generate, sketch_conditioning
from .jobs import JobStore, Worker

INLINE_MESH_LIMIT = 1 << 20  # larger meshes served by reference only


class GenerateRequest(BaseModel):
    sketch: str = Field(..., description="base64 PNG, 224x224 grayscale")
    view_id: str
    seed: int = 0
    steps: Optional[int] = None
    guidance: Optional[float] = None
    num_samples: int = 1


class CategoryRequest(BaseModel):
    category: str
    seed: int = 0
    steps: Optional[int] = None
    guidance: Optional[float] = None
    num_samples: int = 1


class StitchRequest(BaseModel):
    sketch_a: str
    sketch_b: str
    region: object = "top"  # named half or explicit 16x16 boolean grid
    view_id: str = "front"
    seed: int = 0
    steps: Optional[int] = None
    guidance: Optional[float] = None


def _decode_sketch(b64: str, image_size: int = 224) -> np.ndarray:
    from PIL import Image

    try:
        raw = base64.b64decode(b64, validate=True)
        img = Image.open(io.BytesIO(raw))
    except Exception:
        raise HTTPException(status_code=400, detail="invalid-image: not decodable PNG")
    img = img.convert("L")
    if img.size != (image_size, image_size):
        img = img.resize((image_size, image_size))  # documented server rescale
    return np.asarray(img, dtype=np.uint8)


class GenerationBackend:
    """Owns the checkpoints and runs generations serially via the worker."""

    def __init__(self, occ_net, sdf_net, config: RunConfig, artifact_dir: Path,
                 encoder=None):
        self.occ_net = occ_net
        self.sdf_net = sdf_net
        self.config = config
        self.artifact_dir = Path(artifact_dir)
        self.encoder = encoder or StubPatchEncoder(
            config.patch_feature_dim, seed=config.encoder_seed
        )

    @property
    def ready(self) -> bool:
        return self.occ_net is not None and self.sdf_net is not None

    def checkpoint_info(self) -> dict:
        return {
            "occupancy": self.occ_net is not None,
            "sdf": self.sdf_net is not None,
            "conditioning": self.config.conditioning,
        }

    def run(self, request: dict) -> dict:
        kind = request["kind"]
        steps = request.get("steps") or self.config.sampler.steps
        base_seed = int(request.get("seed", 0))
        num = int(request.get("num_samples", 1))
        cond = None
        guidance = 1.0
        if kind in ("sketch", "stitch"):
            patches = self._patches_for(request)
            cond = Conditioning(
                kind="sketch",
                patches=patches,
                view=[v for v in predefined_views() if v.name == request["view_id"]][0],
                mode=self.config.sketch_mode,
            )
            guidance = request.get("guidance") or self.config.sampler.guidance
        elif kind == "category":
            cond = Conditioning(
                kind="category",
                embedding=category_embedding(request["category"], self.config.embed_dim),
            )
            guidance = request.get("guidance") or self.config.sampler.guidance

        meshes: List[dict] = []
        previews: List[list] = []
        timings: List[dict] = []
        job_dir = self.artifact_dir / request["job_id"]
        job_dir.mkdir(parents=True, exist_ok=True)
        for k in range(num):
            result = generate(
                self.occ_net,
                self.sdf_net,
                cond=cond,
                seed=base_seed + k,
                steps=steps,
                guidance=guidance,
                dilate_shell=self.config.dilate_predicted_shell,
                method=self.config.sampler.method,
            )
            data = obj_bytes(result.mesh)
            path = job_dir / f"mesh-{k}.obj"
            path.write_bytes(data)
            meshes.append(
                {
                    "uri": f"/jobs/{request['job_id']}/meshes/{k}",
                    "bytes": len(data),
                    "triangles": int(result.mesh.num_triangles),
                    "watertight": bool(result.watertight),
                    "warnings": result.warnings,
                    "seed": base_seed + k,
                }
            )
            previews.append(_occupancy_preview(result))
            timings.append(result.timings)
        return {"meshes": meshes, "occupancy_previews": previews, "timings": timings}

    def _patches_for(self, request: dict):
        image = _decode_sketch(request["sketch"])
        img = image.astype(np.float32) / 255.0
        patches = self.encoder(img)
        if request["kind"] == "stitch":
            other = _decode_sketch(request["sketch_b"]).astype(np.float32) / 255.0
            patches_b = self.encoder(other)
            region = request["region"]
            g = patches.image_size // patches.patch_width
            if isinstance(region, str):
                region_mask = half_region(g, g, region)
            else:
                region_mask = np.asarray(region, dtype=bool).reshape(-1)
                if region_mask.size != g * g:
                    raise HTTPException(status_code=400, detail="malformed-region-mask")
            patches = stitch_patch_features(patches, patches_b, region_mask)
        return patches


def _occupancy_preview(result) -> list:
    coords = np.argwhere(result.occupancy.values > 0.5)
    return coords.tolist()


def create_app(backend: Optional[GenerationBackend]) -> FastAPI:
    app = FastAPI(title="sketchsdf service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = JobStore()
    worker = Worker(store, backend.run) if backend is not None else None
    app.state.store = store
    app.state.worker = worker
    app.state.backend = backend

    def _enqueue(request: dict) -> dict:
        if backend is None or not backend.ready:
            raise HTTPException(status_code=503, detail="model not loaded")
        job = store.create(request)
        request["job_id"] = job.id
        if not worker.submit(job):
            raise HTTPException(status_code=429, detail="queue full")
        return {"job_id": job.id}

    @app.post("/generate", status_code=202)
    def post_generate(req: GenerateRequest):
        if req.view_id not in VIEW_NAMES:
            raise HTTPException(
                status_code=400,
                detail=f"unknown view_id {req.view_id!r}; valid: {list(VIEW_NAMES)}",
            )
        image = _decode_sketch(req.sketch)  # validate early, before queueing
        if (image == 255).all():
            raise HTTPException(status_code=400, detail="empty-sketch: the canvas is blank")
        return _enqueue({"kind": "sketch", **req.model_dump()})

    @app.post("/generate_category", status_code=202)
    def post_generate_category(req: CategoryRequest):
        if not req.category.strip():
            raise HTTPException(status_code=400, detail="empty category")
        return _enqueue({"kind": "category", **req.model_dump()})

    @app.post("/stitch", status_code=202)
    def post_stitch(req: StitchRequest):
        if req.view_id not in VIEW_NAMES:
            raise HTTPException(
                status_code=400,
                detail=f"unknown view_id {req.view_id!r}; valid: {list(VIEW_NAMES)}",
            )
        if isinstance(req.region, str) and req.region not in (
            "top", "bottom", "left", "right",
        ):
            raise HTTPException(status_code=400, detail="malformed-region-mask")
        _decode_sketch(req.sketch_a)
        _decode_sketch(req.sketch_b)
        payload = req.model_dump()
        payload["sketch"] = payload.pop("sketch_a")
        return _enqueue({"kind": "stitch", **payload})

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = store.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="unknown job")
        return job.to_dict()

    @app.get("/jobs/{job_id}/meshes/{index}")
    def get_mesh(job_id: str, index: int):
        job = store.get(job_id)
        if job is None or job.results is None:
            raise HTTPException(status_code=404, detail="unknown job or no results")
        path = backend.artifact_dir / job_id / f"mesh-{index}.obj"
        if not path.exists():
            raise HTTPException(status_code=404, detail="unknown mesh")
        return Response(content=path.read_bytes(), media_type="model/obj")

    @app.get("/views")
    def get_views():
        return [v.to_dict() for v in predefined_views()]

    @app.get("/health")
    def get_health():
        return {
            "status": "ok" if (backend is not None and backend.ready) else "no-model",
            "checkpoints": backend.checkpoint_info() if backend else {},
        }

    return app


def create_app_from_run_dir(run_dir) -> FastAPI:
    run_dir = Path(run_dir)
    config = RunConfig.load(run_dir / "config.json")
    occ_net, _ = load_checkpoint(run_dir / "checkpoints" / "occ")
    sdf_net, _ = load_checkpoint(run_dir / "checkpoints" / "sdf")
    backend = GenerationBackend(
        occ_net, sdf_net, config, artifact_dir=run_dir / "samples" / "service"
    )
    return create_app(backend)
