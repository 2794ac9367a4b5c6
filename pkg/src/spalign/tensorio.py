"""Flat binary tensor files with a JSON sidecar header.

Data is raw little-endian float32 in row-major order; the header at
``<path>.json`` records ``{"shape": [...], "dtype": "f32",
"layout": "row-major"}``. Used for cached features and persisted
embeddings.
"""

import json

import numpy as np


def save_tensor(path, arr) -> None:
    arr = np.ascontiguousarray(np.asarray(arr), dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(arr.tobytes())
    header = {"shape": list(arr.shape), "dtype": "f32", "layout": "row-major"}
    with open(str(path) + ".json", "w") as fh:
        json.dump(header, fh, sort_keys=True)
        fh.write("\n")


def load_tensor(path) -> np.ndarray:
    with open(str(path) + ".json") as fh:
        header = json.load(fh)
    if header.get("dtype") != "f32":
        raise ValueError(f"unsupported tensor dtype {header.get('dtype')!r}")
    with open(path, "rb") as fh:
        flat = np.frombuffer(fh.read(), dtype="<f4")
    return flat.reshape(header["shape"])
