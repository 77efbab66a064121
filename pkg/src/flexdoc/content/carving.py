"""Content-aware raster retargeting by seam carving.

A raster is a numpy array of shape (height, width, 3), dtype uint8.
Energies and cumulative seam costs are exact int64 arithmetic, so seam
selection is fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VERTICAL = "vertical"
HORIZONTAL = "horizontal"

# Per-axis expansion cap; duplicating more than half the seams of an
# image revisits content and produces visible smearing.
MAX_EXPANSION = 1.5

_SENTINEL = np.int64(2) ** 62


@dataclass(frozen=True)
class Seam:
    """One 8-connected pixel path: a column per row (vertical) or vice versa."""

    axis: str
    indices: tuple[int, ...]


def check_raster(raster: np.ndarray) -> None:
    if not isinstance(raster, np.ndarray) or raster.ndim != 3 or raster.shape[2] != 3:
        raise ValueError("raster must be an (H, W, 3) array")
    if raster.dtype != np.uint8:
        raise ValueError(f"raster must be uint8, got {raster.dtype}")
    if raster.shape[0] < 1 or raster.shape[1] < 1:
        raise ValueError("raster must be at least 1x1")


def energy_map(raster: np.ndarray) -> np.ndarray:
    """Dual-gradient energy: squared central RGB differences, both axes.

    Borders replicate their edge pixel, so a uniform image has zero
    energy everywhere. Returns an (H, W) int64 array.
    """
    check_raster(raster)
    arr = raster.astype(np.int64)
    padded = np.pad(arr, ((1, 1), (1, 1), (0, 0)), mode="edge")
    dx = padded[1:-1, 2:, :] - padded[1:-1, :-2, :]
    dy = padded[2:, 1:-1, :] - padded[:-2, 1:-1, :]
    return (dx * dx).sum(axis=2) + (dy * dy).sum(axis=2)


def min_seam(energy: np.ndarray, axis: str) -> Seam:
    """Minimal cumulative-energy seam by dynamic programming.

    Ties prefer the leftmost (topmost) predecessor at every backtrack
    step and the leftmost end pixel, making the result unique.
    """
    if axis == HORIZONTAL:
        inner = min_seam(np.ascontiguousarray(energy.T), VERTICAL)
        return Seam(HORIZONTAL, inner.indices)
    if axis != VERTICAL:
        raise ValueError(f"unknown seam axis {axis!r}")
    if energy.ndim != 2 or energy.shape[0] < 1 or energy.shape[1] < 1:
        raise ValueError("energy must be a non-empty 2-D array")
    rows, cols = energy.shape
    cost = energy[0].astype(np.int64)
    # Parent offsets in {-1, 0, 1} per pixel, row by row.
    parents = np.zeros((rows, cols), dtype=np.int8)
    for r in range(1, rows):
        left = np.concatenate(([_SENTINEL], cost[:-1]))
        right = np.concatenate((cost[1:], [_SENTINEL]))
        stacked = np.stack((left, cost, right))
        pick = stacked.argmin(axis=0)  # first minimum: leftmost parent
        parents[r] = pick.astype(np.int8) - 1
        cost = energy[r] + stacked[pick, np.arange(cols)]
    col = int(cost.argmin())
    path = np.empty(rows, dtype=np.int64)
    path[rows - 1] = col
    for r in range(rows - 1, 0, -1):
        col += int(parents[r, col])
        path[r - 1] = col
    return Seam(VERTICAL, tuple(int(c) for c in path))


def remove_seam(array: np.ndarray, seam: Seam) -> np.ndarray:
    """Drop one pixel per row (or column); works on 2-D and 3-D arrays."""
    if seam.axis == HORIZONTAL:
        swapped = remove_seam(np.swapaxes(array, 0, 1), Seam(VERTICAL, seam.indices))
        return np.ascontiguousarray(np.swapaxes(swapped, 0, 1))
    rows, cols = array.shape[:2]
    if len(seam.indices) != rows:
        raise ValueError("seam length does not match the raster")
    keep = np.ones((rows, cols), dtype=bool)
    keep[np.arange(rows), list(seam.indices)] = False
    return array[keep].reshape((rows, cols - 1) + array.shape[2:])


def lowest_disjoint_seams(raster: np.ndarray, count: int, axis: str) -> list[Seam]:
    """The sequentially lowest seams, reported in original coordinates.

    Each seam is found on a working copy with the previous ones removed,
    which guarantees pairwise disjointness.
    """
    work = raster
    rows, cols = raster.shape[:2]
    if axis == VERTICAL:
        index_map = np.tile(np.arange(cols), (rows, 1))
    else:
        index_map = np.tile(np.arange(rows)[:, None], (1, cols))
    seams = []
    for _ in range(count):
        seam = min_seam(energy_map(work), axis)
        if axis == VERTICAL:
            original = index_map[np.arange(index_map.shape[0]), list(seam.indices)]
        else:
            original = index_map[list(seam.indices), np.arange(index_map.shape[1])]
        seams.append(Seam(axis, tuple(int(i) for i in original)))
        work = remove_seam(work, seam)
        index_map = remove_seam(index_map, seam)
    return seams


def duplicate_seams(raster: np.ndarray, seams: list[Seam]) -> np.ndarray:
    """Insert an averaged copy right of every seam pixel, in one pass."""
    if not seams:
        return raster
    axis = seams[0].axis
    if axis == HORIZONTAL:
        flipped = [Seam(VERTICAL, s.indices) for s in seams]
        out = duplicate_seams(np.swapaxes(raster, 0, 1), flipped)
        return np.ascontiguousarray(np.swapaxes(out, 0, 1))
    rows, cols = raster.shape[:2]
    out = np.empty((rows, cols + len(seams), 3), dtype=np.uint8)
    wide = raster.astype(np.int64)
    for r in range(rows):
        cuts = sorted(s.indices[r] for s in seams)
        row = raster[r]
        pieces = []
        prev = 0
        for c in cuts:
            pieces.append(row[prev:c + 1])
            neighbor = wide[r, min(c + 1, cols - 1)]
            blended = ((wide[r, c] + neighbor) // 2).astype(np.uint8)
            pieces.append(blended[None, :])
            prev = c + 1
        pieces.append(row[prev:])
        out[r] = np.concatenate(pieces)
    return out


def carve(raster: np.ndarray, target_w: int, target_h: int) -> tuple[np.ndarray, list[Seam]]:
    """Retarget to exactly (target_w, target_h) by seam removal/duplication.

    Removals run one seam at a time, recomputing energy, taking the axis
    with the larger remaining delta (vertical on ties). Expansion, capped
    at 1.5x per axis, duplicates the lowest disjoint seams in one pass.
    """
    check_raster(raster)
    rows, cols = raster.shape[:2]
    if target_w < 1 or target_h < 1:
        raise ValueError("target dimensions must be at least 1")
    if target_w > cols * MAX_EXPANSION or target_h > rows * MAX_EXPANSION:
        raise ValueError(
            f"expansion beyond {MAX_EXPANSION}x per axis is not supported "
            f"({cols}x{rows} -> {target_w}x{target_h})")
    current = raster
    removed: list[Seam] = []
    while current.shape[1] > target_w or current.shape[0] > target_h:
        dw = max(current.shape[1] - target_w, 0)
        dh = max(current.shape[0] - target_h, 0)
        axis = VERTICAL if dw >= dh else HORIZONTAL
        seam = min_seam(energy_map(current), axis)
        removed.append(seam)
        current = remove_seam(current, seam)
    if target_w > current.shape[1]:
        seams = lowest_disjoint_seams(current, target_w - current.shape[1], VERTICAL)
        current = duplicate_seams(current, seams)
        removed.extend(seams)
    if target_h > current.shape[0]:
        seams = lowest_disjoint_seams(current, target_h - current.shape[0], HORIZONTAL)
        current = duplicate_seams(current, seams)
        removed.extend(seams)
    return current, removed
