"""Raster file I/O and the content-addressed variant cache.

PNG is read/write, JPEG read-only. Generated variants land in a cache
directory keyed by a recipe hash (source content hash plus parameters),
so identical requests share one file and names never collide.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
from PIL import Image

from .carving import check_raster

_READABLE = ("PNG", "JPEG")


def load_raster(source: Union[str, Path, bytes]) -> np.ndarray:
    """Read a PNG or JPEG into an (H, W, 3) uint8 array."""
    if isinstance(source, bytes):
        img = Image.open(io.BytesIO(source))
    else:
        img = Image.open(source)
    if img.format not in _READABLE:
        raise ValueError(f"unsupported raster format {img.format!r}")
    return np.asarray(img.convert("RGB"), dtype=np.uint8)


def png_bytes(raster: np.ndarray) -> bytes:
    check_raster(raster)
    buf = io.BytesIO()
    Image.fromarray(raster, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def save_raster(raster: np.ndarray, path: Union[str, Path]) -> None:
    """Write as PNG regardless of extension; JPEG output is not offered."""
    data = png_bytes(raster)
    _atomic_write(Path(path), data)


def bytes_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def file_hash(path: Union[str, Path]) -> str:
    return bytes_hash(Path(path).read_bytes())


def recipe_hash(source_hash: str, **params) -> str:
    """Stable address for a derived asset: source plus the exact recipe."""
    canonical = json.dumps([source_hash, params], sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class VariantCache:
    """Content-addressed file store for generated raster variants.

    Writes are atomic (temp file plus rename), so concurrent producers
    of the same key race harmlessly: content under one key is always
    identical by construction.
    """

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    def path_for(self, key: str) -> Path:
        return self.root / f"{key}.png"

    def get(self, key: str) -> Optional[bytes]:
        path = self.path_for(key)
        try:
            return path.read_bytes()
        except FileNotFoundError:
            return None

    def put(self, key: str, data: bytes) -> Path:
        path = self.path_for(key)
        _atomic_write(path, data)
        return path

    def get_or_create(self, key: str, producer: Callable[[], bytes]) -> bytes:
        cached = self.get(key)
        if cached is not None:
            return cached
        data = producer()
        self.put(key, data)
        return data
