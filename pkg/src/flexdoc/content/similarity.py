"""Token-level text similarity: multiset F1 over content words.

Stands in for a neural scorer behind the plugin registry; values are
deterministic and reproducible because the tokenizer and stop-word
list ship as versioned data files.
"""

from __future__ import annotations

import re
from collections import Counter
from importlib import resources

_TOKEN = re.compile(r"[a-z0-9]+")


def _load_words(name: str) -> frozenset[str]:
    text = resources.files("flexdoc.content").joinpath(f"data/{name}").read_text()
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


STOP_WORDS = _load_words("stopwords.txt")


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric tokens with stop words removed."""
    return [t for t in _TOKEN.findall(text.lower()) if t not in STOP_WORDS]


def similarity(candidate_text: str, original_text: str) -> float:
    """Multiset token F1 in [0, 1]; 1.0 for identical token bags.

    Symmetric by construction. Texts reducing to zero content tokens
    compare as 1.0 against each other and 0.0 against anything else.
    """
    if not candidate_text or not original_text:
        raise ValueError("similarity needs two non-empty texts")
    cand = Counter(tokenize(candidate_text))
    orig = Counter(tokenize(original_text))
    if not cand and not orig:
        return 1.0
    if not cand or not orig:
        return 0.0
    overlap = sum((cand & orig).values())
    if overlap == 0:
        return 0.0
    precision = overlap / sum(cand.values())
    recall = overlap / sum(orig.values())
    return 2.0 * precision * recall / (precision + recall)
