"""Continuous subproblem assembly for one discrete candidate.

Given a template and one chosen alternative per element, this module
eliminates every variable it can and emits a small convex QP:

* interior tabstop positions stay as variables;
* box elements (image, audio) keep width and height variables;
* text elements keep only a font variable — their box is tied to it
  through the linear fitting model (w >= (w_p/f_p) f, h likewise), and
  the font is capped at min(f_p, 72) so the fit deficit is linear with
  no kink inside the feasible region;
* element x and y coordinates are affine chains through their area's
  flow, so flush packing is built into the equalities rather than left
  as degenerate freedom. Only images participating in an alignment pair
  inside a column area get a free y (bounded below by the flow anchor),
  since alignment is the one term that can profit from extra whitespace.

The builder also constructs the canonical feasible start the active-set
solver expects: fonts at minimum, boxes at minimum size, x-tabstops
spread evenly, y-tabstops flushed to the least position admitting their
areas' content. When pins or cramped columns make that construction
infeasible, the caller falls back to a phase-1 LP.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .flow import FlowPlan, flow_pack
from .model import (
    BOTTOM_EDGE,
    MAX_FONT_PX,
    MIN_FONT_PX,
    Document,
    ElementArea,
    Placement,
    PreferenceState,
    Tabstop,
    Viewport,
    boundary_position,
    is_boundary,
)
from .objective import (
    BOX_MODALITIES,
    ContinuousWeights,
    DEFAULT_WEIGHTS,
    alignment_pairs,
)
from .qp import QuadraticProgram

MIN_TABSTOP_GAP = 1.0
MIN_BOX_PX = 1.0


class _Expr:
    """Affine expression: sparse coefficients over variables plus const."""

    __slots__ = ("coefs", "const")

    def __init__(self, coefs: Optional[dict[int, float]] = None,
                 const: float = 0.0):
        self.coefs = dict(coefs or {})
        self.const = float(const)

    def __add__(self, other: "_Expr | float") -> "_Expr":
        if isinstance(other, (int, float)):
            return _Expr(self.coefs, self.const + other)
        merged = dict(self.coefs)
        for idx, c in other.coefs.items():
            merged[idx] = merged.get(idx, 0.0) + c
        return _Expr(merged, self.const + other.const)

    def __sub__(self, other: "_Expr | float") -> "_Expr":
        if isinstance(other, (int, float)):
            return _Expr(self.coefs, self.const - other)
        merged = dict(self.coefs)
        for idx, c in other.coefs.items():
            merged[idx] = merged.get(idx, 0.0) - c
        return _Expr(merged, self.const - other.const)

    def __mul__(self, k: float) -> "_Expr":
        return _Expr({i: c * k for i, c in self.coefs.items()}, self.const * k)

    __rmul__ = __mul__

    def dense(self, n: int) -> np.ndarray:
        row = np.zeros(n)
        for idx, c in self.coefs.items():
            row[idx] = c
        return row

    def value(self, z: np.ndarray) -> float:
        return self.const + sum(z[i] * c for i, c in self.coefs.items())


def _const(value: float) -> _Expr:
    return _Expr(None, value)


@dataclass(frozen=True)
class ElementGeometry:
    """Affine maps from the variable vector to one element's box."""

    alternative_id: str
    x: _Expr
    y: _Expr
    w: _Expr
    h: _Expr
    f: Optional[_Expr]

    def placement(self, element_id: str, z: np.ndarray) -> Placement:
        return Placement(
            element_id=element_id,
            alternative_id=self.alternative_id,
            x=self.x.value(z), y=self.y.value(z),
            w=self.w.value(z), h=self.h.value(z),
            font_size=None if self.f is None else self.f.value(z))


@dataclass(frozen=True)
class ContinuousProblem:
    """One candidate's QP plus the maps back to document geometry."""

    program: QuadraticProgram
    names: tuple[str, ...]
    geometry: Mapping[str, ElementGeometry]
    tabstop_exprs: tuple[tuple[str, str, _Expr], ...]
    flow_plans: tuple[tuple[int, FlowPlan], ...]
    oversize: tuple[str, ...]
    start: Optional[np.ndarray]
    objective_constant: float

    def realize(self, z: np.ndarray) -> dict[str, Placement]:
        return {eid: geo.placement(eid, z)
                for eid, geo in self.geometry.items()}

    def solved_tabstops(self, z: np.ndarray) -> tuple[Tabstop, ...]:
        return tuple(
            Tabstop(id=tid, axis=axis, solved_position=expr.value(z))
            for tid, axis, expr in self.tabstop_exprs)


class _Builder:
    def __init__(self) -> None:
        self.names: list[str] = []
        self.eq: list[tuple[_Expr, float]] = []
        self.ineq: list[tuple[_Expr, float]] = []
        # Objective atoms: ("sq", weight, expr) adds weight*expr^2,
        # ("lin", coef, expr) adds coef*expr.
        self.atoms: list[tuple[str, float, _Expr]] = []

    def var(self, name: str) -> _Expr:
        self.names.append(name)
        return _Expr({len(self.names) - 1: 1.0})

    def le(self, lhs: _Expr, rhs: "_Expr | float") -> None:
        diff = lhs - rhs
        self.ineq.append((_Expr(diff.coefs), -diff.const))

    def square(self, weight: float, expr: _Expr) -> None:
        if weight != 0.0:
            self.atoms.append(("sq", weight, expr))

    def linear(self, coef: float, expr: _Expr) -> None:
        if coef != 0.0:
            self.atoms.append(("lin", coef, expr))

    def assemble(self) -> tuple[QuadraticProgram, float]:
        n = len(self.names)
        P = np.zeros((n, n))
        q = np.zeros(n)
        constant = 0.0
        for kind, weight, expr in self.atoms:
            row = expr.dense(n)
            if kind == "sq":
                P += 2.0 * weight * np.outer(row, row)
                q += 2.0 * weight * expr.const * row
                constant += weight * expr.const ** 2
            else:
                q += weight * row
                constant += weight * expr.const
        A = (np.array([e.dense(n) for e, _ in self.eq])
             if self.eq else np.zeros((0, n)))
        b = np.array([rhs for _, rhs in self.eq]) if self.eq else np.zeros(0)
        G = (np.array([e.dense(n) for e, _ in self.ineq])
             if self.ineq else np.zeros((0, n)))
        h = (np.array([rhs for _, rhs in self.ineq])
             if self.ineq else np.zeros(0))
        return QuadraticProgram(P=P, q=q, A=A, b=b, G=G, h=h), constant


def _even_spread(count: int, extent: float) -> list[float]:
    return [extent * (i + 1) / (count + 1) for i in range(count)]


def _x_estimates(template, viewport: Viewport) -> dict[str, float]:
    spots = _even_spread(len(template.tabstops_x), viewport.width)
    return dict(zip(template.tabstops_x, spots))


def area_width_estimate(template, area: ElementArea,
                        viewport: Viewport) -> float:
    """Rough area width used only to seed flow packing."""
    xs = _x_estimates(template, viewport)

    def pos(ref: str) -> float:
        if is_boundary(ref):
            return boundary_position(ref, viewport)
        return xs[ref]

    return max(pos(area.right) - pos(area.left), 1.0)


def build_continuous_problem(
        document: Document, template_id: str, choices: Mapping[str, str],
        viewport: Viewport, prefs: PreferenceState,
        weights: ContinuousWeights = DEFAULT_WEIGHTS,
        flow_widths: Optional[Mapping[str, float]] = None,
        area_widths: Optional[Mapping[int, float]] = None,
) -> ContinuousProblem:
    """Assemble the QP for ``choices`` on ``template_id``.

    ``flow_widths``/``area_widths`` override the packing estimates on
    re-solve rounds, once solved geometry is available.
    """
    template = document.template(template_id)
    builder = _Builder()
    alts = {e.id: e.alternative(choices[e.id]) for e in document.elements}
    modalities = {eid: alt.modality for eid, alt in alts.items()}
    pairs = alignment_pairs(template, modalities)
    aligned = {eid for pair in pairs for eid in pair}
    n_box = sum(1 for alt in alts.values() if alt.modality in BOX_MODALITIES)
    n_text = sum(1 for alt in alts.values() if alt.modality == "text")

    tx = {tid: builder.var(f"tx:{tid}") for tid in template.tabstops_x}
    ty = {tid: builder.var(f"ty:{tid}") for tid in template.tabstops_y}

    def pos(ref: str, axis: str) -> _Expr:
        if is_boundary(ref):
            return _const(boundary_position(ref, viewport))
        return tx[ref] if axis == "x" else ty[ref]

    def packing_width(eid: str) -> float:
        pin = document.element(eid).pinned_geometry
        if pin is not None:
            return float(pin.w)
        if flow_widths and eid in flow_widths:
            return float(flow_widths[eid])
        return float(alts[eid].preferred_size[0])

    geometry: dict[str, ElementGeometry] = {}
    flow_plans: list[tuple[int, FlowPlan]] = []
    oversize: list[str] = []
    # Per-area replay scripts for the canonical start: visiting order,
    # variable indices, and bottom reference for the flush pass.
    scripts: list[dict] = []

    for area_index, area in enumerate(template.areas):
        direction = template.flow_direction(area)
        left = pos(area.left, "x")
        right = pos(area.right, "x")
        top = pos(area.top, "y")
        bottom = pos(area.bottom, "y")
        width = right - left

        script: dict = {"area": area, "area_index": area_index, "steps": [],
                        "bottom": area.bottom, "top": area.top}
        scripts.append(script)

        def element_box(eid: str) -> tuple[_Expr, _Expr, Optional[_Expr]]:
            """Create the element's size variables and tie constraints.

            Pinned elements become constants instead of variables: the
            rect is frozen, so only feasibility gates remain (zero rows
            that turn infeasible when the pin cannot hold its content).
            """
            alt = alts[eid]
            pin = document.element(eid).pinned_geometry
            if alt.modality in BOX_MODALITIES:
                if pin is not None:
                    return _const(pin.w), _const(pin.h), None
                w = builder.var(f"w:{eid}")
                h = builder.var(f"h:{eid}")
                builder.le(_const(MIN_BOX_PX), w)
                builder.le(_const(MIN_BOX_PX), h)
                builder.le(w, width)
                return w, h, None
            f_p = alt.preferred_font_size
            w_rate = alt.preferred_size[0] / f_p
            h_rate = alt.preferred_size[1] / f_p
            if pin is not None:
                # exact-height rule: the frozen box dictates the font
                f = _const(f_p * pin.h / alt.preferred_size[1])
                builder.le(_const(MIN_FONT_PX), f)
                builder.le(f, min(f_p, MAX_FONT_PX))
                builder.le(f * w_rate, _const(pin.w))
                return _const(pin.w), _const(pin.h), f
            f = builder.var(f"f:{eid}")
            builder.le(_const(MIN_FONT_PX), f)
            builder.le(f, min(f_p, MAX_FONT_PX))
            if direction == "column":
                w = width  # text fills its column
                builder.le(f * w_rate, width)
            else:
                w = f * w_rate  # tight box so lines can share
            return w, f * h_rate, f

        if direction == "column":
            prev_extent = top
            for eid in area.elements:
                w, h, f = element_box(eid)
                pin = document.element(eid).pinned_geometry
                if pin is not None:
                    x: _Expr = _const(pin.x)
                    y: _Expr = _const(pin.y)
                    builder.le(left, x)
                    builder.le(x + w, right)
                    builder.le(prev_extent, y)
                elif eid in aligned and alts[eid].modality == "image":
                    x = left
                    y = builder.var(f"y:{eid}")
                    builder.le(prev_extent, y)
                    script["steps"].append(("slack", eid, prev_extent))
                else:
                    x = left
                    y = prev_extent
                geometry[eid] = ElementGeometry(alts[eid].id, x, y, w, h, f)
                prev_extent = y + h
            builder.le(prev_extent, bottom)
            script["extent"] = prev_extent
        else:
            items = [(eid, packing_width(eid)) for eid in area.elements]
            plan = flow_pack(items, direction,
                             (area_widths or {}).get(
                                 area_index,
                                 area_width_estimate(template, area, viewport)))
            flow_plans.append((area_index, plan))
            oversize.extend(plan.oversize)
            line_top: _Expr = top
            for line_no, line in enumerate(plan.lines):
                if line_no > 0:
                    nxt = builder.var(f"t:{area_index}:{line_no}")
                    for member in plan.lines[line_no - 1]:
                        builder.le(geometry[member].y + geometry[member].h,
                                   nxt)
                    script["steps"].append(("line", line_no,
                                            plan.lines[line_no - 1]))
                    line_top = nxt
                cursor = left
                for eid in line:
                    w, h, f = element_box(eid)
                    pin = document.element(eid).pinned_geometry
                    if pin is not None:
                        builder.le(cursor, _const(pin.x))
                        builder.le(line_top, _const(pin.y))
                        geometry[eid] = ElementGeometry(
                            alts[eid].id, _const(pin.x), _const(pin.y),
                            w, h, f)
                        cursor = _const(pin.x) + w
                    else:
                        geometry[eid] = ElementGeometry(
                            alts[eid].id, cursor, line_top, w, h, f)
                        cursor = cursor + w
                builder.le(cursor, right)
            for member in plan.lines[-1] if plan.lines else ():
                builder.le(geometry[member].y + geometry[member].h, bottom)
            script["extent"] = None

    # Tabstop ordering chains with the 1 px degeneracy gap.
    x_chain = [_const(0.0)] + [tx[t] for t in template.tabstops_x] + [
        _const(viewport.width)]
    for prev, nxt in zip(x_chain, x_chain[1:]):
        builder.le(prev + MIN_TABSTOP_GAP, nxt)
    bottom_referenced = any(area.bottom == BOTTOM_EDGE
                            for area in template.areas)
    y_chain = [_const(0.0)] + [ty[t] for t in template.tabstops_y]
    if bottom_referenced:
        y_chain.append(_const(viewport.height))
    for prev, nxt in zip(y_chain, y_chain[1:]):
        builder.le(prev + MIN_TABSTOP_GAP, nxt)
    if prefs.no_scroll:
        # Capping every y-tabstop suffices: area content is already
        # chained under its bottom reference.
        for t in template.tabstops_y:
            builder.le(ty[t], viewport.height)

    # Objective: size and aspect pull boxes toward preferred, the fit
    # deficit pulls fonts up, alignment pulls row-mate midlines together.
    if n_box:
        a = weights.w_img / n_box
        for eid, alt in alts.items():
            if alt.modality not in BOX_MODALITIES:
                continue
            w_p, h_p = alt.preferred_size
            geo = geometry[eid]
            builder.square(a, geo.w - w_p)
            builder.square(a, geo.h - h_p)
            builder.square(a, geo.w * h_p - geo.h * w_p)
    if n_text:
        c = weights.w_text / n_text
        for eid, alt in alts.items():
            if alt.modality == "text":
                builder.linear(c, _const(alt.preferred_font_size)
                               - geometry[eid].f)
    for i, j in pairs:
        mid_i = geometry[i].y + 0.5 * geometry[i].h
        mid_j = geometry[j].y + 0.5 * geometry[j].h
        builder.square(weights.w_align, mid_i - mid_j)

    program, constant = builder.assemble()
    tabstop_exprs = tuple(
        [(tid, "x", tx[tid]) for tid in template.tabstops_x]
        + [(tid, "y", ty[tid]) for tid in template.tabstops_y])
    problem = ContinuousProblem(
        program=program, names=tuple(builder.names), geometry=geometry,
        tabstop_exprs=tabstop_exprs, flow_plans=tuple(flow_plans),
        oversize=tuple(dict.fromkeys(oversize)), start=None,
        objective_constant=constant)
    start = _canonical_start(problem, document, template, alts, viewport,
                             scripts)
    return ContinuousProblem(
        program=program, names=problem.names, geometry=geometry,
        tabstop_exprs=tabstop_exprs, flow_plans=problem.flow_plans,
        oversize=problem.oversize, start=start,
        objective_constant=constant)


def _canonical_start(problem: ContinuousProblem, document: Document,
                     template, alts, viewport: Viewport,
                     scripts: Sequence[dict]) -> Optional[np.ndarray]:
    """Flush-packed starting point, or None when pins defeat it."""
    names = problem.names
    index = {name: i for i, name in enumerate(names)}
    z = np.zeros(len(names))

    for spot, tid in zip(_even_spread(len(template.tabstops_x),
                                      viewport.width), template.tabstops_x):
        z[index[f"tx:{tid}"]] = spot
    for eid, alt in alts.items():
        if document.element(eid).pinned_geometry is not None:
            continue  # pinned geometry is constant, no variables to seed
        if alt.modality in BOX_MODALITIES:
            z[index[f"w:{eid}"]] = MIN_BOX_PX
            z[index[f"h:{eid}"]] = MIN_BOX_PX
        else:
            z[index[f"f:{eid}"]] = MIN_FONT_PX

    def flush_area(script: dict) -> float:
        """Assign slack/line vars bottom-up; returns the content extent."""
        area = script["area"]
        for step in script["steps"]:
            if step[0] == "slack":
                _, eid, anchor = step
                z[index[f"y:{eid}"]] = anchor.value(z)
            else:
                _, line_no, members = step
                needed = max(problem.geometry[m].y.value(z)
                             + problem.geometry[m].h.value(z)
                             for m in members)
                z[index[f"t:{script['area_index']}:{line_no}"]] = needed
        if script["extent"] is not None:
            return script["extent"].value(z)
        last = area.elements and max(
            (problem.geometry[m].y.value(z) + problem.geometry[m].h.value(z))
            for m in area.elements)
        return float(last or 0.0)

    # y-tabstops in declared order: each sits at the least position that
    # clears the gap chain and every area that ends at it.
    prev = 0.0
    areas_by_bottom: dict[str, list[dict]] = {}
    for script in scripts:
        areas_by_bottom.setdefault(script["bottom"], []).append(script)
    for tid in template.tabstops_y:
        needed = prev + MIN_TABSTOP_GAP
        for script in areas_by_bottom.get(tid, ()):
            needed = max(needed, flush_area(script))
        z[index[f"ty:{tid}"]] = needed
        prev = needed
    for script in areas_by_bottom.get(BOTTOM_EDGE, ()):
        flush_area(script)

    if problem.program.is_feasible(z, tol=1e-7):
        return z
    return None
