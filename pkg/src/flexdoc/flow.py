"""Flow packing: assigning area elements to lines.

Row areas wrap greedily; column areas stack one element per line. The
packer only decides the line structure — actual coordinates come from the
continuous solve, which treats the assignment as fixed for one round.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .model import FLOW_DIRECTIONS


@dataclass(frozen=True)
class FlowPlan:
    """Line assignment for one area, in element order."""

    lines: tuple[tuple[str, ...], ...]
    oversize: tuple[str, ...]


def flow_pack(items: Sequence[tuple[str, float]], direction: str,
              available_width: float) -> FlowPlan:
    """Greedy first-fit wrap of (element id, width) pairs.

    A row starts a new line when the running width would overflow;
    elements wider than the area always get their own line and are
    reported as oversize so the caller can shrink or swap them.
    """
    if available_width <= 0:
        raise ValueError("available_width must be positive")
    if direction not in FLOW_DIRECTIONS:
        raise ValueError(f"unknown flow direction: {direction!r}")
    oversize = tuple(eid for eid, width in items if width > available_width)
    if direction == "column":
        return FlowPlan(tuple((eid,) for eid, _ in items), oversize)
    lines: list[tuple[str, ...]] = []
    current: list[str] = []
    used = 0.0
    for eid, width in items:
        if current and used + width > available_width:
            lines.append(tuple(current))
            current = []
            used = 0.0
        current.append(eid)
        used += width
    if current:
        lines.append(tuple(current))
    return FlowPlan(tuple(lines), oversize)
