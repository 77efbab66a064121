"""Joint discrete and continuous layout solving.

``solve`` walks discrete candidates in ascending discrete-loss order,
runs the continuous QP for each, and keeps the best total. Because the
continuous remainder can never drop below ``-w_text`` (size, aspect,
deficit and alignment are nonnegative; similarity is at most 1), the
walk stops at the first candidate whose discrete loss alone is already
worse than the best total found. Exhaustive mode is therefore a true
global argmin over the candidate space.

On global infeasibility (typically pins fighting a forced template)
interaction forcing is relaxed in fixed order: zoom remaps first, then
forced alternatives, then the forced template. Pins are never dropped.
Each relaxation stage is recorded in the solution's flags.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .candidates import DiscreteCandidate, SolverConfig, enumerate_candidates
from .model import (
    BOTTOM_EDGE,
    LEFT_EDGE,
    NEUTRAL_PREFERENCES,
    RIGHT_EDGE,
    TOP_EDGE,
    Document,
    LayoutSolution,
    Placement,
    PreferenceState,
    Viewport,
)
from .objective import ContinuousWeights, DEFAULT_WEIGHTS, total_loss
from .problem import ContinuousProblem, build_continuous_problem
from .qp import feasible_point, solve_qp

INTERACTION_KINDS = ("zoom-in", "zoom-out", "pin", "unpin",
                     "switch-template", "switch-alternative", "set-slider")


class SolveError(Exception):
    """No feasible layout exists, even after relaxation."""


@dataclass(frozen=True)
class Interaction:
    """One viewer operation to apply before re-solving."""

    kind: str
    element_id: Optional[str] = None
    template_id: Optional[str] = None
    alternative_id: Optional[str] = None
    modality: Optional[str] = None
    value: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in INTERACTION_KINDS:
            raise ValueError(f"unknown interaction kind: {self.kind!r}")


@dataclass(frozen=True)
class InteractionResult:
    """Solution plus the state the interaction produced."""

    solution: LayoutSolution
    document: Document
    prefs: PreferenceState


@dataclass(frozen=True)
class CandidateSolve:
    placements: dict[str, Placement]
    tabstops: dict[str, dict[str, float]]
    z: np.ndarray
    flags: tuple[str, ...]


@dataclass(frozen=True)
class ContinuousSolve:
    placements: dict[str, Placement]
    loss: float
    z: np.ndarray
    capped: bool


def solve_continuous(problem: ContinuousProblem, config: SolverConfig,
                     start: Optional[np.ndarray] = None,
                     ) -> Optional[ContinuousSolve]:
    """One QP round: geometry and continuous loss, or None if infeasible."""
    z0 = start if start is not None else problem.start
    if z0 is None:
        z0 = feasible_point(problem.program)
    if z0 is None:
        return None
    result = solve_qp(problem.program, z0,
                      max_iterations=config.iteration_cap)
    return ContinuousSolve(
        placements=problem.realize(result.z),
        loss=result.value + problem.objective_constant,
        z=result.z,
        capped=result.status == "iteration-cap")


def _warm_vector(problem: ContinuousProblem,
                 warm: LayoutSolution) -> Optional[np.ndarray]:
    """Rebuild the variable vector from a previous solution, if it maps."""
    placements = {p.element_id: p for p in warm.placements}
    plans = dict(problem.flow_plans)
    z = np.zeros(len(problem.names))
    try:
        for i, name in enumerate(problem.names):
            kind, _, rest = name.partition(":")
            if kind in ("tx", "ty"):
                axis = "x" if kind == "tx" else "y"
                z[i] = warm.tabstops[axis][rest]
            elif kind in ("w", "h", "y"):
                z[i] = getattr(placements[rest], kind)
            elif kind == "f":
                z[i] = placements[rest].font_size
            else:  # t:<area>:<line>
                area_no, _, line_no = rest.partition(":")
                line = plans[int(area_no)].lines[int(line_no)]
                z[i] = placements[line[0]].y
    except (KeyError, IndexError, TypeError):
        return None
    if not problem.program.is_feasible(z, tol=1e-7):
        return None
    return z


def solve_candidate(document: Document, candidate: DiscreteCandidate,
                    viewport: Viewport, prefs: PreferenceState,
                    weights: ContinuousWeights, config: SolverConfig,
                    warm: Optional[LayoutSolution] = None,
                    ) -> Optional[CandidateSolve]:
    """Continuous solve with flow re-packing until the lines settle."""
    choices = candidate.mapping
    flow_widths: Optional[dict[str, float]] = None
    area_widths: Optional[dict[int, float]] = None
    if warm is not None:
        flow_widths = {p.element_id: p.w for p in warm.placements}
    flags: list[str] = []
    problem = solved = None
    for round_no in range(config.flow_rounds):
        problem = build_continuous_problem(
            document, candidate.template_id, choices, viewport, prefs,
            weights, flow_widths=flow_widths, area_widths=area_widths)
        start = None
        if warm is not None and round_no == 0:
            start = _warm_vector(problem, warm)
        solved = solve_continuous(problem, config, start=start)
        if solved is None:
            return None
        flow_widths = {eid: p.w for eid, p in solved.placements.items()}
        area_widths = _solved_area_widths(document, candidate.template_id,
                                          viewport, problem, solved.z)
        if _plans_stable(document, candidate.template_id, viewport,
                         problem, flow_widths, area_widths):
            break
    else:
        flags.append("flow-unstable")
    if solved.capped:
        flags.append("iteration-capped")
    stops = {"x": {LEFT_EDGE: 0.0, RIGHT_EDGE: viewport.width},
             "y": {TOP_EDGE: 0.0, BOTTOM_EDGE: viewport.height}}
    for stop in problem.solved_tabstops(solved.z):
        stops[stop.axis][stop.id] = stop.solved_position
    return CandidateSolve(placements=solved.placements, tabstops=stops,
                          z=solved.z, flags=tuple(flags))


def _plans_stable(document, template_id, viewport, problem, widths,
                  area_widths) -> bool:
    from .flow import flow_pack

    template = document.template(template_id)
    for area_index, old_plan in problem.flow_plans:
        area = template.areas[area_index]
        items = [(eid, widths[eid]) for eid in area.elements]
        new_plan = flow_pack(items, template.flow_direction(area),
                             area_widths[area_index])
        if new_plan.lines != old_plan.lines:
            return False
    return True


def _solved_area_widths(document, template_id, viewport, problem,
                        z) -> dict[int, float]:
    from .model import boundary_position, is_boundary

    template = document.template(template_id)
    positions = {stop.id: stop.solved_position
                 for stop in problem.solved_tabstops(z)}

    def pos(ref: str) -> float:
        if is_boundary(ref):
            return boundary_position(ref, viewport)
        return positions[ref]

    return {i: max(pos(a.right) - pos(a.left), 1.0)
            for i, a in enumerate(template.areas)}


def _relaxation_ladder(prefs: PreferenceState,
                       ) -> list[tuple[PreferenceState, tuple[str, ...]]]:
    stages = [(prefs, ())]
    current, flags = prefs, ()
    if any(v != 0 for v in prefs.zoom_deltas.values()):
        current = dataclasses.replace(current, zoom_deltas={})
        flags = flags + ("relaxed:zoom",)
        stages.append((current, flags))
    if prefs.forced_alternatives:
        current = dataclasses.replace(current, forced_alternatives={})
        flags = flags + ("relaxed:alternatives",)
        stages.append((current, flags))
    if prefs.forced_template is not None:
        current = dataclasses.replace(current, forced_template=None)
        flags = flags + ("relaxed:template",)
        stages.append((current, flags))
    return stages


def attempted_relaxations(prefs: PreferenceState) -> tuple[str, ...]:
    """Flags of the deepest relaxation stage these prefs allow."""
    return _relaxation_ladder(prefs)[-1][1]


def solve(document: Document, viewport: Viewport,
          prefs: PreferenceState = NEUTRAL_PREFERENCES,
          weights: ContinuousWeights = DEFAULT_WEIGHTS,
          config: SolverConfig = SolverConfig(),
          warm: Optional[LayoutSolution] = None) -> LayoutSolution:
    """Best layout over the whole candidate space.

    Raises SolveError when nothing is feasible even after relaxing
    interaction forcing (pins are never relaxed).
    """
    if viewport.width <= 0 or viewport.height <= 0:
        raise ValueError("viewport must be positive")
    for stage_prefs, stage_flags in _relaxation_ladder(prefs):
        solution = _solve_stage(document, viewport, stage_prefs, weights,
                                config, warm, stage_flags)
        if solution is not None:
            return solution
    raise SolveError("no feasible layout, even after relaxing interactions")


def _solve_stage(document, viewport, prefs, weights, config, warm,
                 stage_flags) -> Optional[LayoutSolution]:
    candidates = enumerate_candidates(document, prefs, config)
    beam = bool(candidates) and _used_beam(document, prefs, config)
    deadline = time.monotonic() + config.time_budget_ms / 1000.0
    timed_out = False
    best_key = None
    best: Optional[tuple[DiscreteCandidate, CandidateSolve, object]] = None
    for candidate in candidates:
        if best_key is not None and (
                candidate.discrete_loss - weights.w_text >= best_key[0]):
            break
        # budget cuts the walk only once something feasible is in hand,
        # so feasibility reporting never depends on wall-clock time
        if best_key is not None and time.monotonic() > deadline:
            timed_out = True
            break
        solved = solve_candidate(document, candidate, viewport, prefs,
                                 weights, config, warm=warm)
        if solved is None:
            continue
        report = total_loss(document, candidate.template_id,
                            candidate.mapping, solved.placements, prefs,
                            weights)
        key = (report.total, candidate.template_rank, candidate.rank_vector)
        if best_key is None or key < best_key:
            best_key = key
            best = (candidate, solved, report)
    if best is None:
        return None
    candidate, solved, report = best
    order = {e.id: i for i, e in enumerate(document.elements)}
    placements = tuple(sorted(solved.placements.values(),
                              key=lambda p: order[p.element_id]))
    flags = stage_flags + (("beam",) if beam else ())
    flags += (("time-capped",) if timed_out else ()) + solved.flags
    return LayoutSolution(
        template_id=candidate.template_id,
        placements=placements,
        total_loss=report.total,
        loss_breakdown=dict(report.terms),
        tabstops=solved.tabstops,
        flags=flags)


def _used_beam(document, prefs, config) -> bool:
    if config.mode == "beam":
        return True
    if config.mode == "exhaustive":
        return False
    from .candidates import candidate_count

    return candidate_count(document, prefs,
                           config.exhaustive_threshold) > config.exhaustive_threshold


def resolve_interaction(previous: Optional[LayoutSolution],
                        interaction: Interaction, document: Document,
                        viewport: Viewport, prefs: PreferenceState,
                        weights: ContinuousWeights = DEFAULT_WEIGHTS,
                        config: SolverConfig = SolverConfig(),
                        ) -> InteractionResult:
    """Apply one viewer operation, then re-solve (warm-started)."""
    kind = interaction.kind
    if kind in ("zoom-in", "zoom-out"):
        eid = _require(interaction.element_id, "element_id")
        document.element(eid)
        deltas = dict(prefs.zoom_deltas)
        deltas[eid] = deltas.get(eid, 0) + (1 if kind == "zoom-in" else -1)
        prefs = dataclasses.replace(prefs, zoom_deltas=deltas)
    elif kind == "pin":
        eid = _require(interaction.element_id, "element_id")
        if previous is None:
            raise ValueError("pin requires a previous solution")
        document = document.with_pin(eid, previous.placement(eid).rect)
        prefs = dataclasses.replace(prefs, pins=prefs.pins | {eid})
    elif kind == "unpin":
        eid = _require(interaction.element_id, "element_id")
        document = document.with_pin(eid, None)
        prefs = dataclasses.replace(prefs, pins=prefs.pins - {eid})
    elif kind == "switch-template":
        tid = _require(interaction.template_id, "template_id")
        document.template(tid)
        prefs = dataclasses.replace(prefs, forced_template=tid)
    elif kind == "switch-alternative":
        eid = _require(interaction.element_id, "element_id")
        alt_id = _require(interaction.alternative_id, "alternative_id")
        document.element(eid).alternative(alt_id)
        forced = dict(prefs.forced_alternatives)
        forced[eid] = alt_id
        prefs = dataclasses.replace(prefs, forced_alternatives=forced)
    else:  # set-slider
        modality = _require(interaction.modality, "modality")
        value = _require(interaction.value, "value")
        if not 0.0 <= value <= 1.0:
            raise ValueError("slider value must be in [0, 1]")
        sliders = dict(prefs.sliders)
        sliders[modality] = value
        prefs = dataclasses.replace(prefs, sliders=sliders)
    solution = solve(document, viewport, prefs, weights, config,
                     warm=previous)
    return InteractionResult(solution=solution, document=document,
                             prefs=prefs)


def _require(value, name: str):
    if value is None:
        raise ValueError(f"interaction requires {name}")
    return value
