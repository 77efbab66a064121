"""Discrete candidate enumeration over templates and alternatives.

The discrete loss (author + viewer + interaction) is separable per
element once a template is fixed, which makes two things cheap: exact
exhaustive enumeration in ascending order, and lazy k-best generation
for beam mode without touching the full product space. The similarity
part of the text loss stays out of this ordering — it belongs to the
continuous objective's constant block — so the engine's pruning bound
stays sound: the continuous remainder can never drop below -w_text.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Iterator, Optional

from .model import Document, PreferenceState
from .objective import effective_forced, element_pools

EXHAUSTIVE_THRESHOLD = 4096


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for one solve; defaults match the interactive budget."""

    mode: str = "auto"  # "auto" | "exhaustive" | "beam"
    beam_width: int = 64
    tolerance: float = 1e-6
    iteration_cap: int = 500
    time_budget_ms: float = 450.0
    exhaustive_threshold: int = EXHAUSTIVE_THRESHOLD
    flow_rounds: int = 5

    def __post_init__(self) -> None:
        if self.mode not in ("auto", "exhaustive", "beam"):
            raise ValueError(f"unknown mode: {self.mode!r}")
        if min(self.beam_width, self.iteration_cap, self.flow_rounds) <= 0:
            raise ValueError("budgets must be positive")
        if self.time_budget_ms <= 0 or self.tolerance <= 0:
            raise ValueError("budgets must be positive")


@dataclass(frozen=True)
class DiscreteCandidate:
    """One template plus a complete alternative assignment."""

    template_id: str
    template_rank: int
    choices: tuple[tuple[str, str], ...]  # (element id, alternative id)
    rank_vector: tuple[int, ...]  # chosen ranks in document element order
    discrete_loss: float

    @property
    def mapping(self) -> dict[str, str]:
        return dict(self.choices)


def candidate_count(document: Document, prefs: PreferenceState,
                    cap: int = EXHAUSTIVE_THRESHOLD) -> int:
    """Total candidates under forcing, saturating just past ``cap``."""
    forced = effective_forced(document, prefs)
    per_template = 1
    for element in document.elements:
        per_template *= 1 if element.id in forced else len(element.alternatives)
        if per_template > cap:
            break
    templates = 1 if prefs.forced_template else len(document.templates)
    return min(per_template, cap + 1) * templates


def enumerate_candidates(document: Document, prefs: PreferenceState,
                         config: SolverConfig) -> tuple[DiscreteCandidate, ...]:
    """All candidates (or the beam), ascending by discrete loss.

    Order is (discrete loss, template rank, rank vector) so downstream
    pruning can stop at the first candidate whose discrete loss already
    exceeds the best total seen.
    """
    forced = effective_forced(document, prefs)
    author_pool, viewer_pool, _ = element_pools(document, prefs, forced)
    author_pool = set(author_pool)
    viewer_pool = set(viewer_pool)
    active = prefs.active_sliders()
    big_m = len(document.templates)

    def contribution(eid: str, alt) -> float:
        k_count = len(document.element(eid).alternatives)
        if eid in author_pool:
            return -50.0 * (k_count + 1 - alt.rank)
        if eid in viewer_pool:
            s_eff = active.get(alt.modality, 0.5)
            return (0.5 - s_eff) * 50.0 * (k_count + 1 - alt.rank)
        return 0.0

    if prefs.forced_template:
        templates = [document.template(prefs.forced_template)]
    else:
        templates = list(document.templates_by_rank())

    mode = config.mode
    if mode == "auto":
        count = candidate_count(document, prefs, config.exhaustive_threshold)
        mode = "exhaustive" if count <= config.exhaustive_threshold else "beam"

    out: list[DiscreteCandidate] = []
    for template in templates:
        template_term = -1000.0 * (big_m + 1 - template.rank)
        options = []
        for element in document.elements:
            if element.id in forced:
                alts = [element.alternative(forced[element.id])]
            else:
                alts = list(element.by_rank())
            scored = sorted(
                ((contribution(element.id, a), a.rank, a) for a in alts),
                key=lambda t: (t[0], t[1]))
            options.append((element.id, scored))
        if mode == "exhaustive":
            stream: Iterator = itertools.product(
                *(scored for _, scored in options))
            picks_iter = (tuple(p) for p in stream)
        else:
            picks_iter = _k_best(options, config.beam_width)
        limit = None if mode == "exhaustive" else config.beam_width
        for n, picks in enumerate(picks_iter):
            if limit is not None and n >= limit:
                break
            loss = template_term + sum(c for c, _, _ in picks)
            out.append(DiscreteCandidate(
                template_id=template.id,
                template_rank=template.rank,
                choices=tuple((eid, pick[2].id)
                              for (eid, _), pick in zip(options, picks)),
                rank_vector=tuple(pick[1] for pick in picks),
                discrete_loss=loss))
    out.sort(key=lambda c: (c.discrete_loss, c.template_rank, c.rank_vector))
    return tuple(out)


def _k_best(options: list[tuple[str, list]], k: int) -> Iterator[tuple]:
    """Lazily yield assignments in ascending summed-contribution order.

    Classic sorted-product search: states are index vectors, successors
    bump one coordinate. Ties resolve by rank vector, then indices, so
    the stream is deterministic.
    """
    lists = [scored for _, scored in options]
    base = tuple(0 for _ in lists)

    def keyed(state: tuple[int, ...]):
        cost = sum(lst[i][0] for lst, i in zip(lists, state))
        ranks = tuple(lst[i][1] for lst, i in zip(lists, state))
        return (cost, ranks, state)

    heap = [keyed(base)]
    seen = {base}
    yielded = 0
    while heap and yielded < k:
        _, _, state = heapq.heappop(heap)
        yield tuple(lst[i] for lst, i in zip(lists, state))
        yielded += 1
        for pos, idx in enumerate(state):
            if idx + 1 >= len(lists[pos]):
                continue
            nxt = state[:pos] + (idx + 1,) + state[pos + 1:]
            if nxt not in seen:
                seen.add(nxt)
                heapq.heappush(heap, keyed(nxt))
