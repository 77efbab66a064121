"""Loss terms and analytic gradients for the layout objective.

Everything here is a pure function over immutable inputs. The total
loss combines a continuous part, evaluated on solved geometry,

    w_img * (size + aspect_ratio) + w_text * text + w_align * align

with a discrete part scoring the candidate's template and alternative
choices. Per element exactly one of the three discrete terms applies:
the author term when the viewer has not touched it, the viewer term
when an active slider covers one of its alternatives' modalities, and
the interaction term when an explicit forcing (switch-element or zoom)
names it. A slider at exactly 0.5 is neutral and counts as absent.

Sign convention: lower is better everywhere; preference terms are
negative rewards, geometric penalties are nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .model import Document, Element, Placement, PreferenceState, Template

INFEASIBLE = math.inf

# Terms appearing in every LossReport breakdown, in reporting order.
TERM_NAMES = ("size", "aspect_ratio", "text", "align", "author", "viewer",
              "interaction")

# Elements whose box geometry is penalized quadratically: images, plus
# audio player widgets which occupy space the same way but carry no
# similarity or font semantics.
BOX_MODALITIES = ("image", "audio")


@dataclass(frozen=True)
class ContinuousWeights:
    """Weights of the continuous loss terms; all default to 1."""

    w_img: float = 1.0
    w_text: float = 1.0
    w_align: float = 1.0


DEFAULT_WEIGHTS = ContinuousWeights()


@dataclass(frozen=True)
class LossReport:
    """Total loss plus its per-term breakdown (unweighted term values)."""

    total: float
    terms: dict[str, float] = field(default_factory=dict)


def image_size_loss(assignments: Sequence[tuple[float, float, float, float]]) -> float:
    """Mean squared deviation of solved box extents from preferred ones.

    Each assignment is (w_hat, h_hat, w_p, h_p).
    """
    if not assignments:
        raise ValueError("image_size_loss needs at least one assignment")
    n = len(assignments)
    w_part = sum((w - wp) ** 2 for w, _, wp, _ in assignments) / n
    h_part = sum((h - hp) ** 2 for _, h, _, hp in assignments) / n
    return w_part + h_part


def aspect_ratio_loss(assignments: Sequence[tuple[float, float, float, float]]) -> float:
    """Mean squared violation of the bilinear identity w_hat*h_p == h_hat*w_p."""
    if not assignments:
        raise ValueError("aspect_ratio_loss needs at least one assignment")
    n = len(assignments)
    return sum((w * hp - h * wp) ** 2 for w, h, wp, hp in assignments) / n


def text_loss(assignments: Sequence[tuple[float, float, float]]) -> float:
    """Mean font-size deficit minus mean similarity of the chosen texts.

    Each assignment is (f_hat, f_p, similarity). The deficit penalizes
    fonts below preference; going above preference is free.
    """
    if not assignments:
        raise ValueError("text_loss needs at least one assignment")
    n = len(assignments)
    deficit = sum(max(fp - f, 0.0) for f, fp, _ in assignments) / n
    reward = sum(sim for _, _, sim in assignments) / n
    return deficit - reward


def alignment_loss(pairs: Iterable[tuple[tuple[float, float], tuple[float, float]]]) -> float:
    """Sum of squared horizontal-midline offsets over image pairs."""
    total = 0.0
    for (y_i, h_i), (y_j, h_j) in pairs:
        total += ((y_i + h_i / 2.0) - (y_j + h_j / 2.0)) ** 2
    return total


def author_loss(m: int, big_m: int, chosen_ranks: Iterable[tuple[int, int]]) -> float:
    """Author-preference reward for a template rank and content ranks.

    m is the chosen template's rank among big_m templates; chosen_ranks
    holds (k_i, K_i) for every element scored by author preference.
    """
    if not 1 <= m <= big_m:
        raise ValueError(f"template rank {m} outside 1..{big_m}")
    total = -1000.0 * (big_m + 1 - m)
    for k, big_k in chosen_ranks:
        if not 1 <= k <= big_k:
            raise ValueError(f"alternative rank {k} outside 1..{big_k}")
        total -= 50.0 * (big_k + 1 - k)
    return total


def viewer_loss(slider_adjusted: Iterable[tuple[float, int, int]]) -> float:
    """Slider-steered content reward: sum of (0.5 - s) * 50 * (K+1-k)."""
    total = 0.0
    for s, k, big_k in slider_adjusted:
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"slider value {s} outside [0, 1]")
        if not 1 <= k <= big_k:
            raise ValueError(f"alternative rank {k} outside 1..{big_k}")
        total += (0.5 - s) * 50.0 * (big_k + 1 - k)
    return total


def interaction_loss(element: Element, forced_alternative: str, candidate: str) -> float:
    """0 when the candidate honors the forcing, infeasible otherwise."""
    ids = {alt.id for alt in element.alternatives}
    if forced_alternative not in ids:
        raise KeyError(f"{forced_alternative!r} is not an alternative of {element.id!r}")
    if candidate not in ids:
        raise KeyError(f"{candidate!r} is not an alternative of {element.id!r}")
    return 0.0 if candidate == forced_alternative else INFEASIBLE


def alignment_pairs(template: Template,
                    modalities: Mapping[str, str]) -> list[tuple[str, str]]:
    """Image element pairs sharing a template row (same y-bound refs).

    ``modalities`` maps element id to the chosen alternative's modality;
    only elements currently shown as images participate. Pairs span
    distinct areas: images stacked inside one area can never share a
    midline, so only side-by-side columns co-align.
    """
    rows: dict[tuple[str, str], list[tuple[int, str]]] = {}
    for index, area in enumerate(template.areas):
        for eid in area.elements:
            if modalities.get(eid) == "image":
                rows.setdefault((area.top, area.bottom), []).append(
                    (index, eid))
    pairs = []
    for group in rows.values():
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                if group[i][0] != group[j][0]:
                    pairs.append((group[i][1], group[j][1]))
    return pairs


def element_pools(document: Document, prefs: PreferenceState,
                  forced: Optional[Mapping[str, str]] = None,
                  ) -> tuple[list[str], list[str], dict[str, str]]:
    """Split element ids into (author, viewer, interaction) pools.

    ``forced`` is the effective forcing map (explicit switches plus zoom
    remaps); when omitted it is derived from prefs. Interaction wins over
    sliders; sliders claim any element offering an alternative in an
    actively slid modality; everything else scores by author preference.
    """
    if forced is None:
        forced = effective_forced(document, prefs)
    active = prefs.active_sliders()
    author_pool: list[str] = []
    viewer_pool: list[str] = []
    for element in document.elements:
        if element.id in forced:
            continue
        if any(alt.modality in active for alt in element.alternatives):
            viewer_pool.append(element.id)
        else:
            author_pool.append(element.id)
    return author_pool, viewer_pool, dict(forced)


def effective_forced(document: Document, prefs: PreferenceState) -> dict[str, str]:
    """Explicit forced alternatives plus zoom-delta remaps.

    A zoom delta shifts the element's detail level away from the rank-1
    alternative's level, clamped to the available range. An explicit
    switch-element forcing overrides any zoom state on the same element.
    """
    forced: dict[str, str] = {}
    for eid, delta in prefs.zoom_deltas.items():
        if delta == 0:
            continue
        element = document.element(eid)
        baseline = min(element.alternatives, key=lambda a: a.rank)
        by_detail = element.by_detail()
        target = max(0, min(len(by_detail) - 1, baseline.detail_level + delta))
        forced[eid] = by_detail[target].id
    forced.update(prefs.forced_alternatives)
    return forced


def total_loss(document: Document, template_id: str, choices: Mapping[str, str],
               geometry: Mapping[str, Placement], prefs: PreferenceState,
               weights: ContinuousWeights = DEFAULT_WEIGHTS,
               similarities: Optional[Mapping[str, float]] = None) -> LossReport:
    """Full objective for one candidate at one geometry.

    ``choices`` maps element id to chosen alternative id; ``geometry``
    must cover every element. ``similarities`` maps text alternative ids
    to their similarity against the element's original text; it is
    computed on the fly when omitted.
    """
    template = document.template(template_id)
    box_assign: list[tuple[float, float, float, float]] = []
    text_assign: list[tuple[float, float, float]] = []
    modalities: dict[str, str] = {}
    for element in document.elements:
        alt = element.alternative(choices[element.id])
        place = geometry[element.id]
        modalities[element.id] = alt.modality
        if alt.modality in BOX_MODALITIES:
            box_assign.append((place.w, place.h, *alt.preferred_size))
        else:
            f_hat = place.font_size if place.font_size is not None else alt.preferred_font_size
            sim = _similarity_of(element, alt, similarities)
            text_assign.append((f_hat, alt.preferred_font_size, sim))
    size = image_size_loss(box_assign) if box_assign else 0.0
    aspect = aspect_ratio_loss(box_assign) if box_assign else 0.0
    text = text_loss(text_assign) if text_assign else 0.0
    pairs = alignment_pairs(template, modalities)
    align = alignment_loss(
        ((geometry[i].y, geometry[i].h), (geometry[j].y, geometry[j].h))
        for i, j in pairs)
    author_pool, viewer_pool, forced = element_pools(document, prefs)
    big_m = len(document.templates)
    author_ranks = []
    for eid in author_pool:
        alt = document.element(eid).alternative(choices[eid])
        author_ranks.append((alt.rank, len(document.element(eid).alternatives)))
    author = author_loss(template.rank, big_m, author_ranks)
    active = prefs.active_sliders()
    viewer_terms = []
    for eid in viewer_pool:
        element = document.element(eid)
        alt = element.alternative(choices[eid])
        s_eff = active.get(alt.modality, 0.5)
        viewer_terms.append((s_eff, alt.rank, len(element.alternatives)))
    viewer = viewer_loss(viewer_terms)
    interaction = 0.0
    for eid, forced_alt in forced.items():
        interaction += interaction_loss(document.element(eid), forced_alt, choices[eid])
    terms = {
        "size": size,
        "aspect_ratio": aspect,
        "text": text,
        "align": align,
        "author": author,
        "viewer": viewer,
        "interaction": interaction,
    }
    total = (weights.w_img * (size + aspect) + weights.w_text * text
             + weights.w_align * align + author + viewer + interaction)
    return LossReport(total=total, terms=terms)


def _similarity_of(element: Element, alt, provided: Optional[Mapping[str, float]]) -> float:
    if provided is not None and alt.id in provided:
        return provided[alt.id]
    original = original_text(element)
    if alt.text == original:
        return 1.0
    from .content.similarity import similarity
    return similarity(alt.text or "", original)


def original_text(element: Element) -> str:
    """The element's reference text: its longest text alternative."""
    texts = [a for a in element.alternatives if a.modality == "text"]
    if not texts:
        return ""
    best = max(texts, key=lambda a: (len(a.text or ""), -a.rank))
    return best.text or ""


def continuous_gradient(document: Document, template_id: str,
                        choices: Mapping[str, str],
                        geometry: Mapping[str, Placement],
                        weights: ContinuousWeights = DEFAULT_WEIGHTS,
                        ) -> dict[str, dict[str, float]]:
    """Partial derivatives of the continuous terms per element variable.

    Returns {element_id: {"x":, "y":, "w":, "h":, and "f" for text}}.
    The font-deficit kink takes subgradient 0 at f_hat == f_p; the
    similarity reward is constant under the discrete choice and drops
    out. Position variables only enter through the alignment term.
    """
    template = document.template(template_id)
    grads: dict[str, dict[str, float]] = {}
    modalities: dict[str, str] = {}
    boxes: list[str] = []
    texts: list[str] = []
    for element in document.elements:
        alt = element.alternative(choices[element.id])
        modalities[element.id] = alt.modality
        entry = {"x": 0.0, "y": 0.0, "w": 0.0, "h": 0.0}
        if alt.modality == "text":
            entry["f"] = 0.0
            texts.append(element.id)
        else:
            boxes.append(element.id)
        grads[element.id] = entry
    n_box = len(boxes)
    for eid in boxes:
        alt = document.element(eid).alternative(choices[eid])
        wp, hp = alt.preferred_size
        place = geometry[eid]
        residual = place.w * hp - place.h * wp
        grads[eid]["w"] += weights.w_img * (
            2.0 * (place.w - wp) / n_box + 2.0 * residual * hp / n_box)
        grads[eid]["h"] += weights.w_img * (
            2.0 * (place.h - hp) / n_box - 2.0 * residual * wp / n_box)
    n_text = len(texts)
    for eid in texts:
        alt = document.element(eid).alternative(choices[eid])
        place = geometry[eid]
        f_hat = place.font_size if place.font_size is not None else alt.preferred_font_size
        if f_hat < alt.preferred_font_size:
            grads[eid]["f"] -= weights.w_text / n_text
    for i, j in alignment_pairs(template, modalities):
        pi, pj = geometry[i], geometry[j]
        delta = (pi.y + pi.h / 2.0) - (pj.y + pj.h / 2.0)
        grads[i]["y"] += weights.w_align * 2.0 * delta
        grads[i]["h"] += weights.w_align * delta
        grads[j]["y"] -= weights.w_align * 2.0 * delta
        grads[j]["h"] -= weights.w_align * delta
    return grads
