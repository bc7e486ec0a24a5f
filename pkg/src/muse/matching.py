"""Text normalization and word-boundary phrase matching.

Every component that looks for concept phrases inside paper text goes
through the same normalization and the same matcher, so that "what counts
as a mention" has exactly one definition in the codebase.
"""

from __future__ import annotations

import re
import unicodedata
from collections.abc import Iterable

_WS_RE = re.compile(r"\s+")

# A word is a run of letters/digits; internal hyphens and apostrophes do
# not split it ("x-ray" is one word), anything else does.
WORD_RE = re.compile(r"[^\W_]+(?:[-'][^\W_]+)*")


def normalize_text(raw: str) -> str:
    """Lowercase, Unicode-compatibility-normalize, collapse whitespace.

    Hyphens are preserved. Idempotent; empty input maps to empty output.
    """
    text = unicodedata.normalize("NFKC", raw).lower()
    return _WS_RE.sub(" ", text).strip()


def tokenize(text: str) -> list[str]:
    """Word tokens of ``text``; punctuation separates, hyphens do not."""
    return WORD_RE.findall(text)


class ConceptMatcher:
    """Finds which of a fixed set of phrases occur in a piece of text.

    Matching is longest-match over word tokens: at each token position the
    longest known phrase starting there wins and its span is consumed, so
    "neural network" does not also fire inside an occurrence of
    "recurrent neural network".
    """

    def __init__(self, concepts: Iterable[str]):
        self._by_tokens: dict[tuple[str, ...], str] = {}
        self._lengths_by_first: dict[str, list[int]] = {}
        for concept in concepts:
            toks = tuple(tokenize(normalize_text(concept)))
            if not toks:
                continue
            self._by_tokens[toks] = concept
            lengths = self._lengths_by_first.setdefault(toks[0], [])
            if len(toks) not in lengths:
                lengths.append(len(toks))
        for lengths in self._lengths_by_first.values():
            lengths.sort(reverse=True)

    def __len__(self) -> int:
        return len(self._by_tokens)

    def find(self, text: str) -> set[str]:
        """Distinct matched phrases in ``text`` (normalized internally)."""
        tokens = tokenize(normalize_text(text))
        found: set[str] = set()
        n = len(tokens)
        i = 0
        while i < n:
            lengths = self._lengths_by_first.get(tokens[i])
            if lengths:
                for length in lengths:
                    if i + length > n:
                        continue
                    concept = self._by_tokens.get(tuple(tokens[i : i + length]))
                    if concept is not None:
                        found.add(concept)
                        i += length
                        break
                else:
                    i += 1
            else:
                i += 1
        return found
