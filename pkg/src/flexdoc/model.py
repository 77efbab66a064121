"""Core document, template, preference, and solution types.

Everything here is immutable after validation; instances can be shared
freely across threads. Construction helpers validate nothing by
themselves: :func:`flexdoc.bundle.validate` is the single source of
diagnostics and :func:`flexdoc.bundle.parse_document` refuses to return
an invalid document.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

# Implicit boundary tabstops. Layout edges resolve to fixed positions:
# 0 for @left/@top, viewport width for @right, viewport height for @bottom.
LEFT_EDGE = "@left"
RIGHT_EDGE = "@right"
TOP_EDGE = "@top"
BOTTOM_EDGE = "@bottom"
X_EDGES = (LEFT_EDGE, RIGHT_EDGE)
Y_EDGES = (TOP_EDGE, BOTTOM_EDGE)

MODALITIES = ("image", "text", "audio")
FLOW_DIRECTIONS = ("row-wrap", "column")

MIN_FONT_PX = 6.0
MAX_FONT_PX = 72.0


@dataclass(frozen=True)
class Rect:
    """Axis-aligned box; x/y is the top-left corner, in px."""

    x: float
    y: float
    w: float
    h: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


@dataclass(frozen=True)
class Tabstop:
    """A named alignment line: x-tabstops are vertical, y-tabstops horizontal."""

    id: str
    axis: str  # "x" | "y"
    solved_position: Optional[float] = None


@dataclass(frozen=True)
class ElementArea:
    """A template region bounded by tabstop ids (or layout edges)."""

    left: str
    right: str
    top: str
    bottom: str
    elements: tuple[str, ...]
    flow_direction: Optional[str] = None  # overrides template default


@dataclass(frozen=True)
class Template:
    """A ranked layout skeleton: ordered tabstops per axis plus element areas."""

    id: str
    rank: int  # 1 = most preferred
    tabstops_x: tuple[str, ...]
    tabstops_y: tuple[str, ...]
    areas: tuple[ElementArea, ...]
    flow_direction_default: str = "row-wrap"

    def area_of(self, element_id: str) -> ElementArea:
        for area in self.areas:
            if element_id in area.elements:
                return area
        raise KeyError(element_id)

    def flow_direction(self, area: ElementArea) -> str:
        return area.flow_direction or self.flow_direction_default


@dataclass(frozen=True)
class Alternative:
    """One renderable variant of an element with its preferred geometry.

    ``detail_level`` is derived, not authored: alternatives of an element
    are ordered by information content (characters for text, preferred
    area for image/audio, rank breaking ties) and numbered from 0.
    """

    id: str
    element_id: str
    modality: str  # "image" | "text" | "audio"
    rank: int  # 1 = most preferred
    preferred_size: tuple[float, float]
    text: Optional[str] = None
    asset: Optional[str] = None  # bundle-relative path for image/audio
    preferred_font_size: Optional[float] = None  # text only
    detail_level: int = 0

    def detail_metric(self) -> float:
        if self.modality == "text":
            return float(len(self.text or ""))
        return self.preferred_size[0] * self.preferred_size[1]


@dataclass(frozen=True)
class Element:
    """A content slot with at least one ranked alternative."""

    id: str
    alternatives: tuple[Alternative, ...]
    pinned_geometry: Optional[Rect] = None

    def alternative(self, alt_id: str) -> Alternative:
        for alt in self.alternatives:
            if alt.id == alt_id:
                return alt
        raise KeyError(alt_id)

    def by_rank(self) -> tuple[Alternative, ...]:
        return tuple(sorted(self.alternatives, key=lambda a: a.rank))

    def by_detail(self) -> tuple[Alternative, ...]:
        return tuple(sorted(self.alternatives, key=lambda a: a.detail_level))


@dataclass(frozen=True)
class AssetInfo:
    """Manifest entry for a bundle-relative asset path.

    ``data`` optionally inlines the asset bytes so a bundle can travel
    through a single JSON upload; entries without it are references the
    consumer must resolve out of band.
    """

    media_type: str
    data: Optional[bytes] = None


@dataclass(frozen=True)
class Document:
    """A validated bundle: templates, elements, and the asset manifest."""

    templates: tuple[Template, ...]
    elements: tuple[Element, ...]
    assets: dict[str, AssetInfo] = field(default_factory=dict)
    schema_version: int = 1
    content_hash: str = ""

    def template(self, template_id: str) -> Template:
        for t in self.templates:
            if t.id == template_id:
                return t
        raise KeyError(template_id)

    def element(self, element_id: str) -> Element:
        for e in self.elements:
            if e.id == element_id:
                return e
        raise KeyError(element_id)

    def templates_by_rank(self) -> tuple[Template, ...]:
        return tuple(sorted(self.templates, key=lambda t: t.rank))

    def with_pin(self, element_id: str, geometry: Optional[Rect]) -> "Document":
        """Return a copy with one element's pinned geometry replaced."""
        elements = tuple(
            replace(e, pinned_geometry=geometry) if e.id == element_id else e
            for e in self.elements
        )
        return replace(self, elements=elements)


@dataclass(frozen=True)
class Viewport:
    """Visible extent in px; content may exceed height via vertical scroll."""

    width: float
    height: float


@dataclass(frozen=True)
class PreferenceState:
    """Viewer-side state steering the solve.

    A slider at exactly 0.5 means "no change" and behaves as if absent.
    ``no_scroll`` caps all vertical tabstops at the viewport height.
    """

    sliders: dict[str, float] = field(default_factory=dict)
    forced_template: Optional[str] = None
    forced_alternatives: dict[str, str] = field(default_factory=dict)
    zoom_deltas: dict[str, int] = field(default_factory=dict)
    pins: frozenset[str] = frozenset()
    no_scroll: bool = False

    def active_sliders(self) -> dict[str, float]:
        return {m: s for m, s in self.sliders.items() if s != 0.5}


NEUTRAL_PREFERENCES = PreferenceState()


@dataclass(frozen=True)
class Placement:
    """Solved geometry for one element under its chosen alternative."""

    element_id: str
    alternative_id: str
    x: float
    y: float
    w: float
    h: float
    font_size: Optional[float] = None  # text only

    @property
    def rect(self) -> Rect:
        return Rect(self.x, self.y, self.w, self.h)


@dataclass(frozen=True)
class LayoutSolution:
    """A solved layout: discrete choices plus continuous geometry and losses.

    ``flags`` records degradations the caller must see, e.g.
    ``relaxed:zoom`` when interaction forcing had to be dropped to find a
    feasible layout, or ``iteration-capped`` for a truncated inner solve.
    """

    template_id: str
    placements: tuple[Placement, ...]
    total_loss: float
    loss_breakdown: dict[str, float]
    tabstops: dict[str, dict[str, float]] = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def placement(self, element_id: str) -> Placement:
        for p in self.placements:
            if p.element_id == element_id:
                return p
        raise KeyError(element_id)


def assign_detail_levels(alternatives: tuple[Alternative, ...]) -> tuple[Alternative, ...]:
    """Number alternatives by ascending information content.

    Cross-modality elements compare raw metric values (characters vs
    preferred area); any total order consistent with the per-modality
    orders is admissible, and this one is deterministic.
    """
    order = sorted(alternatives, key=lambda a: (a.detail_metric(), a.rank))
    levels = {alt.id: level for level, alt in enumerate(order)}
    return tuple(replace(a, detail_level=levels[a.id]) for a in alternatives)


def boundary_position(ref: str, viewport: Viewport) -> float:
    """Fixed position of an implicit boundary tabstop."""
    if ref in (LEFT_EDGE, TOP_EDGE):
        return 0.0
    if ref == RIGHT_EDGE:
        return viewport.width
    if ref == BOTTOM_EDGE:
        return viewport.height
    raise ValueError(f"not a boundary reference: {ref}")


def is_boundary(ref: str) -> bool:
    return ref in X_EDGES or ref in Y_EDGES
