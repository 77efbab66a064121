"""Bundle I/O: JSON (de)serialization plus validation diagnostics.

The wire format is a single JSON object with top-level keys
``schema_version`` (currently 1), ``templates``, ``elements``, and
``assets``; the full field-by-field shape is documented in README.md.
:func:`parse_document` refuses to return a :class:`Document` unless
:func:`validate` is clean, so downstream modules can assume every
invariant documented in :mod:`flexdoc.model` holds.

Diagnostic codes emitted here:

==================== =====================================================
schema-violation     wrong type, missing/unknown field, malformed JSON
duplicate-id         id reused within its scope
reserved-id          tabstop id starting with "@"
duplicate-rank       rank value reused within a rank set
bad-rank             ranks are not a permutation of 1..N
dangling-reference   reference to an id/path that does not exist
cyclic-tabstop-order area bound ordered against the tabstop sequence
degenerate-area      area with identical opposing bounds
empty-area           area assigned no elements
unassigned-element   element missing from a template's areas
duplicate-assignment element appearing in two areas of one template
no-alternatives      element without alternatives
bad-value            value outside its documented domain
==================== =====================================================
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import json
import math
from dataclasses import dataclass, replace
from typing import Any, Optional, Union

from .model import (
    AssetInfo,
    Alternative,
    BOTTOM_EDGE,
    Document,
    Element,
    ElementArea,
    FLOW_DIRECTIONS,
    LayoutSolution,
    LEFT_EDGE,
    MODALITIES,
    Placement,
    PreferenceState,
    Rect,
    RIGHT_EDGE,
    Template,
    TOP_EDGE,
    assign_detail_levels,
)

SCHEMA_VERSION = 1

JsonLike = Union[bytes, bytearray, str, dict]


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding with a machine-readable code and a path."""

    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} {self.path} {self.message}"


class BundleError(ValueError):
    """Raised when a bundle or solution cannot be accepted."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


class _Collector:
    def __init__(self) -> None:
        self.diagnostics: list[Diagnostic] = []

    def add(self, code: str, path: str, message: str) -> None:
        self.diagnostics.append(Diagnostic(code, path, message))

    @property
    def clean(self) -> bool:
        return not self.diagnostics


def _kind_name(value: Any) -> str:
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, str):
        return "string"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, list):
        return "array"
    if isinstance(value, dict):
        return "object"
    return type(value).__name__


def _matches(value: Any, kind: str) -> bool:
    if kind == "string":
        return isinstance(value, str)
    if kind == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == "array":
        return isinstance(value, list)
    if kind == "object":
        return isinstance(value, dict)
    if kind == "boolean":
        return isinstance(value, bool)
    raise ValueError(kind)


def _get(col: _Collector, obj: dict, path: str, key: str, kind: str,
         required: bool = True, default: Any = None) -> Any:
    if key not in obj:
        if required:
            col.add("schema-violation", f"{path}.{key}", "missing required field")
        return default
    value = obj[key]
    if value is None and not required:
        return default
    if not _matches(value, kind):
        col.add("schema-violation", f"{path}.{key}",
                f"expected {kind}, got {_kind_name(value)}")
        return default
    return value


def _check_keys(col: _Collector, obj: dict, path: str, allowed: tuple[str, ...]) -> None:
    for key in obj:
        if key not in allowed:
            col.add("schema-violation", f"{path}.{key}", "unknown field")


def _parse_size(col: _Collector, obj: dict, path: str) -> tuple[float, float]:
    raw = _get(col, obj, path, "preferred_size", "array", default=[1, 1])
    if len(raw) != 2 or not all(_matches(v, "number") for v in raw):
        col.add("schema-violation", f"{path}.preferred_size",
                "expected [width, height] numbers")
        return (1.0, 1.0)
    return (float(raw[0]), float(raw[1]))


def _parse_rect(col: _Collector, raw: Any, path: str) -> Optional[Rect]:
    if not _matches(raw, "object"):
        col.add("schema-violation", path, f"expected object, got {_kind_name(raw)}")
        return None
    _check_keys(col, raw, path, ("x", "y", "w", "h"))
    vals = {}
    for key in ("x", "y", "w", "h"):
        vals[key] = float(_get(col, raw, path, key, "number", default=0.0))
    return Rect(**vals)


def _parse_area(col: _Collector, raw: Any, path: str) -> Optional[ElementArea]:
    if not _matches(raw, "object"):
        col.add("schema-violation", path, f"expected object, got {_kind_name(raw)}")
        return None
    _check_keys(col, raw, path, ("bounds", "elements", "flow_direction"))
    bounds = _get(col, raw, path, "bounds", "object", default={})
    _check_keys(col, bounds, f"{path}.bounds", ("left", "right", "top", "bottom"))
    refs = {}
    for side in ("left", "right", "top", "bottom"):
        refs[side] = _get(col, bounds, f"{path}.bounds", side, "string", default="")
    elements_raw = _get(col, raw, path, "elements", "array", default=[])
    elements = []
    for i, eid in enumerate(elements_raw):
        if not _matches(eid, "string"):
            col.add("schema-violation", f"{path}.elements[{i}]",
                    f"expected string, got {_kind_name(eid)}")
            continue
        elements.append(eid)
    flow = _get(col, raw, path, "flow_direction", "string", required=False)
    return ElementArea(left=refs["left"], right=refs["right"], top=refs["top"],
                       bottom=refs["bottom"], elements=tuple(elements),
                       flow_direction=flow)


def _parse_template(col: _Collector, raw: Any, path: str) -> Optional[Template]:
    if not _matches(raw, "object"):
        col.add("schema-violation", path, f"expected object, got {_kind_name(raw)}")
        return None
    _check_keys(col, raw, path,
                ("id", "rank", "tabstops", "areas", "flow_direction_default"))
    tid = _get(col, raw, path, "id", "string", default="")
    rank = _get(col, raw, path, "rank", "integer", default=1)
    tabstops = _get(col, raw, path, "tabstops", "object", default={})
    _check_keys(col, tabstops, f"{path}.tabstops", ("x", "y"))
    axes = {}
    for axis in ("x", "y"):
        ids = []
        for i, name in enumerate(tabstops.get(axis, []) or []):
            if not _matches(name, "string"):
                col.add("schema-violation", f"{path}.tabstops.{axis}[{i}]",
                        f"expected string, got {_kind_name(name)}")
                continue
            ids.append(name)
        axes[axis] = tuple(ids)
    areas_raw = _get(col, raw, path, "areas", "array", default=[])
    areas = []
    for i, area_raw in enumerate(areas_raw):
        area = _parse_area(col, area_raw, f"{path}.areas[{i}]")
        if area is not None:
            areas.append(area)
    flow = _get(col, raw, path, "flow_direction_default", "string",
                required=False, default="row-wrap")
    return Template(id=tid, rank=rank, tabstops_x=axes["x"], tabstops_y=axes["y"],
                    areas=tuple(areas), flow_direction_default=flow)


def _parse_alternative(col: _Collector, raw: Any, path: str,
                       element_id: str) -> Optional[Alternative]:
    if not _matches(raw, "object"):
        col.add("schema-violation", path, f"expected object, got {_kind_name(raw)}")
        return None
    _check_keys(col, raw, path, ("id", "modality", "rank", "text", "asset",
                                 "preferred_size", "preferred_font_size"))
    alt_id = _get(col, raw, path, "id", "string", default="")
    modality = _get(col, raw, path, "modality", "string", default="text")
    if modality not in MODALITIES:
        col.add("schema-violation", f"{path}.modality",
                f"expected one of {'/'.join(MODALITIES)}, got {modality!r}")
    rank = _get(col, raw, path, "rank", "integer", default=1)
    text = _get(col, raw, path, "text", "string", required=False)
    asset = _get(col, raw, path, "asset", "string", required=False)
    size = _parse_size(col, raw, path)
    font = _get(col, raw, path, "preferred_font_size", "number", required=False)
    return Alternative(id=alt_id, element_id=element_id, modality=modality,
                       rank=rank, preferred_size=size, text=text, asset=asset,
                       preferred_font_size=None if font is None else float(font))


def _parse_element(col: _Collector, raw: Any, path: str) -> Optional[Element]:
    if not _matches(raw, "object"):
        col.add("schema-violation", path, f"expected object, got {_kind_name(raw)}")
        return None
    _check_keys(col, raw, path, ("id", "alternatives", "pinned_geometry"))
    eid = _get(col, raw, path, "id", "string", default="")
    alts_raw = _get(col, raw, path, "alternatives", "array", default=[])
    alts = []
    for i, alt_raw in enumerate(alts_raw):
        alt = _parse_alternative(col, alt_raw, f"{path}.alternatives[{i}]", eid)
        if alt is not None:
            alts.append(alt)
    pinned = None
    if raw.get("pinned_geometry") is not None:
        pinned = _parse_rect(col, raw["pinned_geometry"], f"{path}.pinned_geometry")
    return Element(id=eid, alternatives=assign_detail_levels(tuple(alts)),
                   pinned_geometry=pinned)


def _parse_root(col: _Collector, raw: Any) -> Optional[Document]:
    if not _matches(raw, "object"):
        col.add("schema-violation", "$", f"expected object, got {_kind_name(raw)}")
        return None
    _check_keys(col, raw, "$", ("schema_version", "templates", "elements", "assets"))
    version = _get(col, raw, "$", "schema_version", "integer", default=SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        col.add("schema-violation", "$.schema_version",
                f"unsupported version {version}, expected {SCHEMA_VERSION}")
    templates = []
    for i, t_raw in enumerate(_get(col, raw, "$", "templates", "array", default=[])):
        t = _parse_template(col, t_raw, f"templates[{i}]")
        if t is not None:
            templates.append(t)
    elements = []
    for i, e_raw in enumerate(_get(col, raw, "$", "elements", "array", default=[])):
        e = _parse_element(col, e_raw, f"elements[{i}]")
        if e is not None:
            elements.append(e)
    assets = {}
    assets_raw = _get(col, raw, "$", "assets", "object", required=False, default={})
    for key, info in assets_raw.items():
        apath = f"assets.{key}"
        if not _matches(info, "object"):
            col.add("schema-violation", apath,
                    f"expected object, got {_kind_name(info)}")
            continue
        _check_keys(col, info, apath, ("media_type", "data"))
        media = _get(col, info, apath, "media_type", "string", default="")
        encoded = _get(col, info, apath, "data", "string", required=False)
        data = None
        if encoded is not None:
            try:
                data = base64.b64decode(encoded, validate=True)
            except (binascii.Error, ValueError):
                col.add("bad-value", f"{apath}.data", "invalid base64 payload")
        assets[key] = AssetInfo(media_type=media, data=data)
    return Document(templates=tuple(templates), elements=tuple(elements),
                    assets=assets, schema_version=SCHEMA_VERSION)


def _build(data: JsonLike) -> tuple[list[Diagnostic], Optional[Document]]:
    if isinstance(data, (bytes, bytearray, str)):
        try:
            raw = json.loads(data)
        except json.JSONDecodeError as exc:
            return [Diagnostic("schema-violation", "$", f"invalid JSON: {exc}")], None
    else:
        raw = data
    col = _Collector()
    doc = _parse_root(col, raw)
    if not col.clean or doc is None:
        return col.diagnostics, None
    diags = validate(doc)
    if diags:
        return diags, None
    return [], replace(doc, content_hash=content_hash(doc))


def parse_document(data: JsonLike) -> Document:
    """Parse and fully validate a bundle; raises BundleError when dirty."""
    diags, doc = _build(data)
    if diags or doc is None:
        raise BundleError(diags)
    return doc


def diagnose(data: JsonLike) -> list[Diagnostic]:
    """All diagnostics for a bundle, empty iff parse_document would succeed."""
    diags, _ = _build(data)
    return diags


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


def _check_ranks(col: _Collector, path: str, ranks: list[int]) -> None:
    seen: dict[int, int] = {}
    for r in ranks:
        seen[r] = seen.get(r, 0) + 1
    dupes = sorted(r for r, n in seen.items() if n > 1)
    for r in dupes:
        col.add("duplicate-rank", path, f"rank {r} used more than once")
    if not dupes and sorted(ranks) != list(range(1, len(ranks) + 1)):
        col.add("bad-rank", path,
                f"ranks {sorted(ranks)} are not a permutation of 1..{len(ranks)}")


def _check_axis(col: _Collector, path: str, area: ElementArea, axis: str,
                order: list[str]) -> None:
    lo_side, hi_side = ("left", "right") if axis == "x" else ("top", "bottom")
    lo = getattr(area, lo_side)
    hi = getattr(area, hi_side)
    ok = True
    for side, ref in ((lo_side, lo), (hi_side, hi)):
        if ref not in order:
            col.add("dangling-reference", f"{path}.bounds.{side}",
                    f"{ref!r} is not a {axis}-tabstop or boundary of this template")
            ok = False
    if not ok:
        return
    if lo == hi:
        col.add("degenerate-area", f"{path}.bounds",
                f"{lo_side} and {hi_side} both reference {lo!r}")
    elif order.index(lo) > order.index(hi):
        col.add("cyclic-tabstop-order", f"{path}.bounds",
                f"{lo_side} bound {lo!r} is ordered after {hi_side} bound {hi!r}")


def _validate_template(col: _Collector, path: str, template: Template,
                       element_ids: set[str]) -> None:
    for axis, stops in (("x", template.tabstops_x), ("y", template.tabstops_y)):
        seen: set[str] = set()
        for i, sid in enumerate(stops):
            if sid.startswith("@"):
                col.add("reserved-id", f"{path}.tabstops.{axis}[{i}]",
                        f"tabstop id {sid!r} collides with boundary names")
            if sid in seen:
                col.add("duplicate-id", f"{path}.tabstops.{axis}[{i}]",
                        f"tabstop id {sid!r} reused on this axis")
            seen.add(sid)
    if template.flow_direction_default not in FLOW_DIRECTIONS:
        col.add("schema-violation", f"{path}.flow_direction_default",
                f"expected one of {'/'.join(FLOW_DIRECTIONS)}")
    x_order = [LEFT_EDGE, *template.tabstops_x, RIGHT_EDGE]
    y_order = [TOP_EDGE, *template.tabstops_y, BOTTOM_EDGE]
    assigned: dict[str, int] = {}
    for i, area in enumerate(template.areas):
        apath = f"{path}.areas[{i}]"
        if area.flow_direction is not None and area.flow_direction not in FLOW_DIRECTIONS:
            col.add("schema-violation", f"{apath}.flow_direction",
                    f"expected one of {'/'.join(FLOW_DIRECTIONS)}")
        _check_axis(col, apath, area, "x", x_order)
        _check_axis(col, apath, area, "y", y_order)
        if not area.elements:
            col.add("empty-area", f"{apath}.elements", "area assigns no elements")
        for j, eid in enumerate(area.elements):
            if eid not in element_ids:
                col.add("dangling-reference", f"{apath}.elements[{j}]",
                        f"unknown element {eid!r}")
            assigned[eid] = assigned.get(eid, 0) + 1
    for eid in sorted(element_ids):
        count = assigned.get(eid, 0)
        if count == 0:
            col.add("unassigned-element", path,
                    f"element {eid!r} appears in no area of template {template.id!r}")
        elif count > 1:
            col.add("duplicate-assignment", path,
                    f"element {eid!r} appears in {count} areas of template {template.id!r}")


def _validate_alternative(col: _Collector, path: str, alt: Alternative,
                          assets: dict[str, AssetInfo]) -> None:
    if alt.modality not in MODALITIES:
        col.add("schema-violation", f"{path}.modality",
                f"expected one of {'/'.join(MODALITIES)}, got {alt.modality!r}")
        return
    w, h = alt.preferred_size
    if not _finite(w, h) or w <= 0 or h <= 0:
        col.add("bad-value", f"{path}.preferred_size",
                f"components must be positive, got ({w}, {h})")
    if alt.modality == "text":
        if alt.text is None:
            col.add("bad-value", f"{path}.text", "text alternative needs a text body")
        if alt.asset is not None:
            col.add("bad-value", f"{path}.asset",
                    "text alternative must not reference an asset")
        if alt.preferred_font_size is None:
            col.add("bad-value", f"{path}.preferred_font_size",
                    "text alternative needs a preferred font size")
        elif not _finite(alt.preferred_font_size) or alt.preferred_font_size <= 0:
            col.add("bad-value", f"{path}.preferred_font_size",
                    f"must be positive, got {alt.preferred_font_size}")
    else:
        if alt.asset is None:
            col.add("bad-value", f"{path}.asset",
                    f"{alt.modality} alternative needs an asset reference")
        else:
            info = assets.get(alt.asset)
            if info is None:
                col.add("dangling-reference", f"{path}.asset",
                        f"asset {alt.asset!r} missing from the manifest")
            elif not info.media_type.startswith(f"{alt.modality}/"):
                col.add("bad-value", f"{path}.asset",
                        f"asset {alt.asset!r} has media type {info.media_type!r}, "
                        f"expected {alt.modality}/*")
        if alt.text is not None:
            col.add("bad-value", f"{path}.text",
                    f"{alt.modality} alternative must not carry a text body")
        if alt.preferred_font_size is not None:
            col.add("bad-value", f"{path}.preferred_font_size",
                    "font size only applies to text alternatives")


def _validate_element(col: _Collector, path: str, element: Element,
                      assets: dict[str, AssetInfo]) -> None:
    if not element.alternatives:
        col.add("no-alternatives", path,
                f"element {element.id!r} has no alternatives")
        return
    seen: set[str] = set()
    for i, alt in enumerate(element.alternatives):
        apath = f"{path}.alternatives[{i}]"
        if alt.id in seen:
            col.add("duplicate-id", f"{apath}.id", f"alternative id {alt.id!r} reused")
        seen.add(alt.id)
        if alt.element_id != element.id:
            col.add("bad-value", apath,
                    f"alternative {alt.id!r} claims element {alt.element_id!r}")
        _validate_alternative(col, apath, alt, assets)
    _check_ranks(col, path, [a.rank for a in element.alternatives])
    levels = sorted(element.alternatives, key=lambda a: a.detail_level)
    if [a.detail_level for a in levels] != list(range(len(levels))):
        col.add("bad-value", path, "detail levels are not a permutation of 0..K-1")
    else:
        metrics = [a.detail_metric() for a in levels]
        if any(metrics[i] > metrics[i + 1] for i in range(len(metrics) - 1)):
            col.add("bad-value", path, "detail levels disagree with the detail metric")
    if element.pinned_geometry is not None:
        g = element.pinned_geometry
        if not _finite(g.x, g.y, g.w, g.h) or g.w <= 0 or g.h <= 0:
            col.add("bad-value", f"{path}.pinned_geometry",
                    "pinned geometry must be finite with positive extent")


def validate(document: Document) -> list[Diagnostic]:
    """Every invariant violation in the document, empty when valid."""
    col = _Collector()
    if not document.templates:
        col.add("bad-value", "templates", "document needs at least one template")
    if not document.elements:
        col.add("bad-value", "elements", "document needs at least one element")
    seen_t: set[str] = set()
    for i, t in enumerate(document.templates):
        if t.id in seen_t:
            col.add("duplicate-id", f"templates[{i}].id",
                    f"template id {t.id!r} reused")
        seen_t.add(t.id)
    seen_e: set[str] = set()
    for i, e in enumerate(document.elements):
        if e.id in seen_e:
            col.add("duplicate-id", f"elements[{i}].id", f"element id {e.id!r} reused")
        seen_e.add(e.id)
    if document.templates:
        _check_ranks(col, "templates", [t.rank for t in document.templates])
    element_ids = {e.id for e in document.elements}
    for i, t in enumerate(document.templates):
        _validate_template(col, f"templates[{i}]", t, element_ids)
    for i, e in enumerate(document.elements):
        _validate_element(col, f"elements[{i}]", e, document.assets)
    return col.diagnostics


def document_to_dict(document: Document) -> dict:
    """Schema-shaped plain dict; inverse of parse for valid documents."""
    templates = []
    for t in document.templates:
        areas = []
        for a in t.areas:
            area: dict[str, Any] = {
                "bounds": {"left": a.left, "right": a.right,
                           "top": a.top, "bottom": a.bottom},
                "elements": list(a.elements),
            }
            if a.flow_direction is not None:
                area["flow_direction"] = a.flow_direction
            areas.append(area)
        templates.append({
            "id": t.id,
            "rank": t.rank,
            "tabstops": {"x": list(t.tabstops_x), "y": list(t.tabstops_y)},
            "areas": areas,
            "flow_direction_default": t.flow_direction_default,
        })
    elements = []
    for e in document.elements:
        alts = []
        for alt in e.alternatives:
            item: dict[str, Any] = {
                "id": alt.id,
                "modality": alt.modality,
                "rank": alt.rank,
                "preferred_size": list(alt.preferred_size),
            }
            if alt.text is not None:
                item["text"] = alt.text
            if alt.asset is not None:
                item["asset"] = alt.asset
            if alt.preferred_font_size is not None:
                item["preferred_font_size"] = alt.preferred_font_size
            alts.append(item)
        entry: dict[str, Any] = {"id": e.id, "alternatives": alts}
        if e.pinned_geometry is not None:
            g = e.pinned_geometry
            entry["pinned_geometry"] = {"x": g.x, "y": g.y, "w": g.w, "h": g.h}
        elements.append(entry)
    return {
        "schema_version": document.schema_version,
        "templates": templates,
        "elements": elements,
        "assets": {path: _asset_to_dict(info)
                   for path, info in sorted(document.assets.items())},
    }


def _asset_to_dict(info: AssetInfo) -> dict:
    entry: dict[str, Any] = {"media_type": info.media_type}
    if info.data is not None:
        entry["data"] = base64.b64encode(info.data).decode("ascii")
    return entry


def serialize_document(document: Document) -> bytes:
    return (json.dumps(document_to_dict(document), indent=2) + "\n").encode()


def content_hash(document: Document) -> str:
    """Stable content address: SHA-256 over the canonical JSON form."""
    canonical = json.dumps(document_to_dict(document), sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def parse_preferences(data: JsonLike) -> PreferenceState:
    """Parse a full PreferenceState; structural checks only.

    Referential checks (do forced ids exist in the document) are the
    caller's job, since a preferences file stands alone.
    """
    if isinstance(data, (bytes, bytearray, str)):
        try:
            raw = json.loads(data)
        except json.JSONDecodeError as exc:
            raise BundleError([Diagnostic("schema-violation", "$",
                                          f"invalid JSON: {exc}")]) from exc
    else:
        raw = data
    col = _Collector()
    if not _matches(raw, "object"):
        col.add("schema-violation", "$",
                f"expected object, got {_kind_name(raw)}")
        raise BundleError(col.diagnostics)
    _check_keys(col, raw, "$", ("sliders", "no_scroll", "zoom_deltas",
                                "forced_template", "forced_alternatives",
                                "pins"))
    sliders = {}
    for key, value in _get(col, raw, "$", "sliders", "object",
                           required=False, default={}).items():
        if not _matches(value, "number"):
            col.add("schema-violation", f"$.sliders.{key}",
                    f"expected number, got {_kind_name(value)}")
        elif not 0.0 <= value <= 1.0:
            col.add("bad-value", f"$.sliders.{key}",
                    f"slider {value} outside [0, 1]")
        else:
            sliders[key] = float(value)
    zoom_deltas = {}
    for key, value in _get(col, raw, "$", "zoom_deltas", "object",
                           required=False, default={}).items():
        if not _matches(value, "integer"):
            col.add("schema-violation", f"$.zoom_deltas.{key}",
                    f"expected integer, got {_kind_name(value)}")
        else:
            zoom_deltas[key] = int(value)
    forced_template = _get(col, raw, "$", "forced_template", "string",
                           required=False)
    forced_alternatives = {}
    for key, value in _get(col, raw, "$", "forced_alternatives", "object",
                           required=False, default={}).items():
        if not _matches(value, "string"):
            col.add("schema-violation", f"$.forced_alternatives.{key}",
                    f"expected string, got {_kind_name(value)}")
        else:
            forced_alternatives[key] = value
    pins = []
    for i, value in enumerate(_get(col, raw, "$", "pins", "array",
                                   required=False, default=[])):
        if not _matches(value, "string"):
            col.add("schema-violation", f"$.pins[{i}]",
                    f"expected string, got {_kind_name(value)}")
        else:
            pins.append(value)
    no_scroll = _get(col, raw, "$", "no_scroll", "boolean",
                     required=False, default=False)
    if not col.clean:
        raise BundleError(col.diagnostics)
    return PreferenceState(
        sliders=sliders, forced_template=forced_template,
        forced_alternatives=forced_alternatives, zoom_deltas=zoom_deltas,
        pins=frozenset(pins), no_scroll=bool(no_scroll))


def solution_to_dict(solution: LayoutSolution) -> dict:
    if not solution.loss_breakdown:
        raise BundleError([Diagnostic("bad-value", "loss_breakdown",
                                      "loss breakdown must not be empty")])
    placements = []
    for p in solution.placements:
        item: dict[str, Any] = {
            "element_id": p.element_id,
            "alternative_id": p.alternative_id,
            "x": p.x, "y": p.y, "w": p.w, "h": p.h,
        }
        if p.font_size is not None:
            item["font_size"] = p.font_size
        placements.append(item)
    return {
        "template_id": solution.template_id,
        "placements": placements,
        "tabstops": {axis: dict(stops) for axis, stops in solution.tabstops.items()},
        "total_loss": solution.total_loss,
        "loss_breakdown": dict(solution.loss_breakdown),
        "flags": list(solution.flags),
    }


def serialize_solution(solution: LayoutSolution) -> bytes:
    return (json.dumps(solution_to_dict(solution), indent=2) + "\n").encode()


def parse_solution(data: JsonLike) -> LayoutSolution:
    """Parse a serialized LayoutSolution; structural checks only."""
    if isinstance(data, (bytes, bytearray, str)):
        try:
            raw = json.loads(data)
        except json.JSONDecodeError as exc:
            raise BundleError([Diagnostic("schema-violation", "$",
                                          f"invalid JSON: {exc}")]) from exc
    else:
        raw = data
    col = _Collector()
    if not _matches(raw, "object"):
        col.add("schema-violation", "$", f"expected object, got {_kind_name(raw)}")
        raise BundleError(col.diagnostics)
    _check_keys(col, raw, "$", ("template_id", "placements", "tabstops",
                                "total_loss", "loss_breakdown", "flags"))
    template_id = _get(col, raw, "$", "template_id", "string", default="")
    placements = []
    for i, p_raw in enumerate(_get(col, raw, "$", "placements", "array", default=[])):
        ppath = f"placements[{i}]"
        if not _matches(p_raw, "object"):
            col.add("schema-violation", ppath, "expected object")
            continue
        _check_keys(col, p_raw, ppath, ("element_id", "alternative_id",
                                        "x", "y", "w", "h", "font_size"))
        font = _get(col, p_raw, ppath, "font_size", "number", required=False)
        placements.append(Placement(
            element_id=_get(col, p_raw, ppath, "element_id", "string", default=""),
            alternative_id=_get(col, p_raw, ppath, "alternative_id", "string",
                                default=""),
            x=float(_get(col, p_raw, ppath, "x", "number", default=0.0)),
            y=float(_get(col, p_raw, ppath, "y", "number", default=0.0)),
            w=float(_get(col, p_raw, ppath, "w", "number", default=0.0)),
            h=float(_get(col, p_raw, ppath, "h", "number", default=0.0)),
            font_size=None if font is None else float(font),
        ))
    tabstops: dict[str, dict[str, float]] = {}
    for axis, stops in _get(col, raw, "$", "tabstops", "object", default={}).items():
        if axis not in ("x", "y") or not _matches(stops, "object"):
            col.add("schema-violation", f"tabstops.{axis}", "expected x/y position maps")
            continue
        tabstops[axis] = {}
        for sid, pos in stops.items():
            if not _matches(pos, "number"):
                col.add("schema-violation", f"tabstops.{axis}.{sid}", "expected number")
                continue
            tabstops[axis][sid] = float(pos)
    total = float(_get(col, raw, "$", "total_loss", "number", default=0.0))
    breakdown_raw = _get(col, raw, "$", "loss_breakdown", "object", default={})
    breakdown = {}
    for term, value in breakdown_raw.items():
        if not _matches(value, "number"):
            col.add("schema-violation", f"loss_breakdown.{term}", "expected number")
            continue
        breakdown[term] = float(value)
    if not breakdown and col.clean:
        col.add("bad-value", "loss_breakdown", "loss breakdown must not be empty")
    flags = []
    for i, flag in enumerate(_get(col, raw, "$", "flags", "array",
                                  required=False, default=[])):
        if not _matches(flag, "string"):
            col.add("schema-violation", f"flags[{i}]", "expected string")
            continue
        flags.append(flag)
    if not col.clean:
        raise BundleError(col.diagnostics)
    return LayoutSolution(template_id=template_id, placements=tuple(placements),
                          total_loss=total, loss_breakdown=breakdown,
                          tabstops=tabstops, flags=tuple(flags))
