"""Named-tensor checkpoint container (``.npz``) with a format version and JSON metadata."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1
_VERSION_KEY = "__format_version__"
_META_KEY = "__meta__"


def save_checkpoint(path, tensors: dict, meta: dict | None = None) -> None:
    arrays = {}
    for name, value in tensors.items():
        if name.startswith("__"):
            raise ValueError(f"reserved tensor name {name!r}")
        arrays[name] = np.asarray(value, dtype=np.float64)
    arrays[_VERSION_KEY] = np.array([FORMAT_VERSION], dtype=np.int64)
    blob = json.dumps(meta or {}, sort_keys=True).encode("utf-8")
    arrays[_META_KEY] = np.frombuffer(blob, dtype=np.uint8)
    path = Path(path)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path) -> tuple[dict, dict]:
    with np.load(Path(path), allow_pickle=False) as data:
        if _VERSION_KEY not in data.files:
            raise ValueError(f"{path}: not a checkpoint (no format version)")
        version = int(data[_VERSION_KEY][0])
        if version != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint format {version}")
        meta = json.loads(bytes(data[_META_KEY]).decode("utf-8")) if _META_KEY in data.files else {}
        tensors = {k: data[k].copy() for k in data.files if not k.startswith("__")}
    return tensors, meta
