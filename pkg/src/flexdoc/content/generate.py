"""Alternative generation and the content-plugin registry.

Generated variants extend an element's authored alternatives: text gets
extractive summaries at fixed length ratios, images get carved variants
at fixed area ratios (reshaped toward a viewport aspect hint when one
is given), audio passes through untouched. Authored content keeps its
ranks; generated variants are appended after it, so authors stay
preferred whenever scores tie.

The registry maps plugin kind ("scorer", "summarizer", "retargeter") and
name to a callable, so neural replacements can be slotted in without
touching call sites.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Callable, Optional

import numpy as np
from PIL import Image

from ..model import Alternative, Element, assign_detail_levels
from ..objective import original_text
from .carving import MAX_EXPANSION, carve
from .raster import VariantCache, bytes_hash, load_raster, png_bytes, recipe_hash
from .similarity import similarity
from .summarize import summarize

TEXT_RATIOS = (1.0, 0.6, 0.3)
IMAGE_RATIOS = (1.0, 0.75, 0.5)

_REGISTRY: dict[str, dict[str, Callable]] = {
    "scorer": {"token-f1": similarity},
    "summarizer": {"frequency-extractive": summarize},
    "retargeter": {"seam-carving": carve},
}


def register_plugin(kind: str, name: str, fn: Callable) -> None:
    if kind not in _REGISTRY:
        raise KeyError(f"unknown plugin kind {kind!r}")
    _REGISTRY[kind][name] = fn


def get_plugin(kind: str, name: str) -> Callable:
    try:
        return _REGISTRY[kind][name]
    except KeyError:
        raise KeyError(f"no {kind} plugin named {name!r}") from None


def retarget(raster: np.ndarray, target_w: int, target_h: int,
             retargeter: Callable = carve) -> np.ndarray:
    """Carve to the target, uniformly rescaling any part beyond the cap."""
    rows, cols = raster.shape[:2]
    carve_w = min(target_w, int(cols * MAX_EXPANSION))
    carve_h = min(target_h, int(rows * MAX_EXPANSION))
    out, _ = retargeter(raster, carve_w, carve_h)
    if (carve_w, carve_h) != (target_w, target_h):
        img = Image.fromarray(out, mode="RGB").resize(
            (target_w, target_h), Image.LANCZOS)
        out = np.asarray(img, dtype=np.uint8)
    return out


def _variant_dims(preferred: tuple[float, float], ratio: float,
                  viewport_hint: Optional[tuple[float, float]]) -> tuple[int, int]:
    area = ratio * preferred[0] * preferred[1]
    if viewport_hint is not None:
        aspect = viewport_hint[0] / viewport_hint[1]
    else:
        aspect = preferred[0] / preferred[1]
    w = max(1, round(math.sqrt(area * aspect)))
    h = max(1, round(area / w))
    return w, h


def generate_alternatives(element: Element,
                          viewport_hint: Optional[tuple[float, float]] = None,
                          *,
                          load_asset: Optional[Callable[[str], bytes]] = None,
                          cache: Optional[VariantCache] = None,
                          summarizer: str = "frequency-extractive",
                          retargeter: str = "seam-carving",
                          ) -> list[Alternative]:
    """Authored alternatives plus generated ones, detail levels rebuilt.

    Image generation needs ``load_asset`` to resolve the source raster;
    carved pixels are materialized into ``cache`` when one is given,
    otherwise only the recipe-addressed alternative entries are created.
    """
    authored = sorted(element.alternatives, key=lambda a: a.rank)
    out = list(authored)
    next_rank = len(authored) + 1
    summarize_fn = get_plugin("summarizer", summarizer)
    retarget_fn = get_plugin("retargeter", retargeter)

    texts = [a for a in authored if a.modality == "text"]
    if texts:
        original = original_text(element)
        base = max(texts, key=lambda a: (len(a.text or ""), -a.rank))
        bodies = {a.text for a in texts}
        for ratio in TEXT_RATIOS:
            variant = summarize_fn(original, ratio)
            if variant.text in bodies:
                continue
            bodies.add(variant.text)
            scale = len(variant.text) / max(len(original), 1)
            out.append(Alternative(
                id=f"{element.id}-sum-{int(ratio * 100)}",
                element_id=element.id,
                modality="text",
                rank=next_rank,
                preferred_size=(base.preferred_size[0],
                                max(1.0, base.preferred_size[1] * scale)),
                text=variant.text,
                preferred_font_size=base.preferred_font_size,
            ))
            next_rank += 1

    images = [a for a in authored if a.modality == "image"]
    if images:
        source = min(images, key=lambda a: a.rank)
        raster = None
        source_hash = None
        if load_asset is not None:
            data = load_asset(source.asset)
            source_hash = bytes_hash(data)
            raster = load_raster(data)
        for ratio in IMAGE_RATIOS:
            w, h = _variant_dims(source.preferred_size, ratio, viewport_hint)
            if raster is None:
                raise ValueError(
                    f"image generation for {element.id!r} needs load_asset")
            key = recipe_hash(source_hash, op="retarget", w=w, h=h)
            if cache is not None:
                cache.get_or_create(
                    key, lambda: png_bytes(retarget(raster, w, h, retarget_fn)))
            out.append(Alternative(
                id=f"{element.id}-carve-{int(ratio * 100)}",
                element_id=element.id,
                modality="image",
                rank=next_rank,
                preferred_size=(float(w), float(h)),
                asset=f"cas/{key}.png",
            ))
            next_rank += 1

    return list(assign_detail_levels(tuple(out)))
