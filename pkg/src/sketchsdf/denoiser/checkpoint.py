"""Checkpoints: named parameter map (npz) + config JSON + schema version.

Round-trips are bit-exact: float32 tensors are stored raw.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import torch

from .dense_unet import DenseUNet, DenseUNetConfig
from .sparse_unet import SparseUNet, SparseUNetConfig

SCHEMA_VERSION = 1

Net = Union[DenseUNet, SparseUNet]


def save_checkpoint(path, net: Net, extra: dict | None = None) -> None:
    """Write config.json + params.npz into a checkpoint directory."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    kind = "dense" if isinstance(net, DenseUNet) else "sparse"
    meta = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "config": net.cfg.to_dict(),
        "extra": extra or {},
    }
    (path / "config.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    arrays = {k: v.detach().cpu().numpy() for k, v in net.state_dict().items()}
    np.savez(path / "params.npz", **arrays)


def load_checkpoint(path) -> Tuple[Net, dict]:
    """Reconstruct the network and return (net, meta)."""
    path = Path(path)
    meta = json.loads((path / "config.json").read_text())
    if meta.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported-schema-version: {meta.get('schema_version')}")
    if meta["kind"] == "dense":
        net: Net = DenseUNet(DenseUNetConfig.from_dict(meta["config"]))
    elif meta["kind"] == "sparse":
        net = SparseUNet(SparseUNetConfig.from_dict(meta["config"]))
    else:
        raise ValueError(f"unknown-checkpoint-kind: {meta['kind']!r}")
    with np.load(path / "params.npz") as data:
        state = {k: torch.from_numpy(data[k].copy()) for k in data.files}
    net.load_state_dict(state)
    net.eval()
    return net, meta
