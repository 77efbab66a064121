"""Extractive summarization by token-frequency sentence scoring."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .similarity import _load_words, similarity, tokenize

ABBREVIATIONS = _load_words("abbreviations.txt")

# A sentence boundary: terminal punctuation, optional closing quotes or
# brackets, then whitespace. Periods after known abbreviations or
# single-letter initials do not split.
_BOUNDARY = re.compile(r"([.!?]+['\")\]]*)\s+")
_LAST_WORD = re.compile(r"[\w.]+$")


@dataclass(frozen=True)
class TextVariant:
    """An extractive shortening of a text plus its provenance."""

    text: str
    sentence_indices: tuple[int, ...]
    similarity_to_original: float


def split_sentences(text: str) -> list[str]:
    """Split on terminal punctuation with an abbreviation guard."""
    sentences = []
    start = 0
    for match in _BOUNDARY.finditer(text):
        head = text[start:match.start(1)]
        word = _LAST_WORD.search(head)
        if word and match.group(1).startswith("."):
            stem = word.group(0).lower().rstrip(".")
            if stem in ABBREVIATIONS or (len(stem) == 1 and stem.isalpha()):
                continue
        sentence = text[start:match.end(1)].strip()
        if sentence:
            sentences.append(sentence)
        start = match.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def sentence_scores(sentences: list[str]) -> list[float]:
    """Mean document-frequency weight of each sentence's content tokens.

    Token weights are counts over the whole text normalized by the
    maximum count, so the dominant topic word has weight 1.
    """
    counts: dict[str, int] = {}
    per_sentence = [tokenize(s) for s in sentences]
    for tokens in per_sentence:
        for t in tokens:
            counts[t] = counts.get(t, 0) + 1
    if not counts:
        return [0.0] * len(sentences)
    peak = max(counts.values())
    scores = []
    for tokens in per_sentence:
        if not tokens:
            scores.append(0.0)
            continue
        scores.append(sum(counts[t] / peak for t in tokens) / len(tokens))
    return scores


def summarize(text: str, target_ratio: float) -> TextVariant:
    """Keep top-scoring sentences within target_ratio of the original length.

    Sentences are taken in (score descending, position ascending) order
    while the running character total stays within budget, stopping at
    the first overflow; at least one sentence always survives. Selected
    sentences are emitted in original order, so the result is a
    subsequence of the input.
    """
    if not text or not text.strip():
        raise ValueError("summarize needs non-empty text")
    if not 0.0 < target_ratio <= 1.0:
        raise ValueError(f"target_ratio {target_ratio} outside (0, 1]")
    sentences = split_sentences(text)
    scores = sentence_scores(sentences)
    order = sorted(range(len(sentences)), key=lambda i: (-scores[i], i))
    budget = target_ratio * len(text)
    chosen: list[int] = []
    used = 0.0
    for idx in order:
        cost = len(sentences[idx])
        if chosen and used + cost > budget:
            break
        chosen.append(idx)
        used += cost
    chosen.sort()
    if len(chosen) == len(sentences):
        # Nothing dropped: hand back the original verbatim.
        return TextVariant(text=text, sentence_indices=tuple(chosen),
                           similarity_to_original=1.0)
    body = " ".join(sentences[i] for i in chosen)
    return TextVariant(text=body, sentence_indices=tuple(chosen),
                       similarity_to_original=similarity(body, text))
