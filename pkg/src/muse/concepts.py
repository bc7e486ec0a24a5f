"""Concept lexicon construction.

Candidate phrases are mined from titles+abstracts with RAKE, then pushed
through document-frequency thresholds, a deterministic rule-based cleanup,
an LLM keep/drop filter, and a whitelist restoration pass. Every stage
records how many phrases it touched so the final count can be audited:

    final = after_rules - removed_by_llm + restored_by_whitelist
"""

from __future__ import annotations

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .judge import JudgeClient, JudgeTransportError
from .matching import ConceptMatcher, normalize_text, tokenize

log = logging.getLogger(__name__)

__all__ = [
    "PhraseCandidate",
    "ConceptLexicon",
    "ConsistencyError",
    "rake_extract",
    "collect_candidates",
    "threshold_filter",
    "rule_cleanup",
    "llm_filter",
    "whitelist_restore",
    "finalize_lexicon",
    "build_lexicon",
    "DEFAULT_RULES",
]

# Phrase boundaries: everything that is not a word character, whitespace,
# hyphen, or apostrophe ends the current candidate phrase.
_BOUNDARY_RE = re.compile(r"[^\w\s'-]+")

_NUMERIC_RE = re.compile(r"[0-9][0-9.,-]*$")


class ConsistencyError(Exception):
    """Stage accounting does not add up."""


@dataclass(frozen=True)
class PhraseCandidate:
    """A candidate concept phrase with its RAKE score and document reach."""

    phrase: str
    rake_score: float
    doc_frequency: int
    word_count: int


@dataclass(frozen=True)
class ConceptLexicon:
    """Refined concept vocabulary plus per-stage provenance counters."""

    concepts: frozenset[str]
    stage_counts: dict[str, int]

    def __contains__(self, phrase: str) -> bool:
        return phrase in self.concepts

    def __len__(self) -> int:
        return len(self.concepts)


def _phrase_runs(doc: str, stopwords: set[str]) -> list[tuple[str, ...]]:
    """Candidate phrase occurrences: stopword- and punctuation-delimited runs."""
    runs: list[tuple[str, ...]] = []
    for fragment in _BOUNDARY_RE.split(normalize_text(doc)):
        current: list[str] = []
        for word in tokenize(fragment):
            if word in stopwords:
                if current:
                    runs.append(tuple(current))
                    current = []
            else:
                current.append(word)
        if current:
            runs.append(tuple(current))
    return runs


def rake_extract(doc: str, stopwords: set[str]) -> list[PhraseCandidate]:
    """RAKE keyword extraction for a single document.

    The text is split into candidate phrases at stopwords and punctuation.
    For every word occurrence, freq(w) counts it and deg(w) accumulates the
    length of the enclosing phrase; a phrase scores sum(deg(w)/freq(w))
    over its words. Duplicate phrases within the document are merged (one
    candidate each, doc_frequency 1).
    """
    if not stopwords:
        raise ValueError("stopword set must be non-empty")
    runs = _phrase_runs(doc, stopwords)
    if not runs:
        return []
    freq: Counter = Counter()
    deg: Counter = Counter()
    for run in runs:
        for word in run:
            freq[word] += 1
            deg[word] += len(run)
    candidates: dict[tuple[str, ...], PhraseCandidate] = {}
    for run in runs:
        if run in candidates:
            continue
        score = sum(deg[w] / freq[w] for w in run)
        candidates[run] = PhraseCandidate(" ".join(run), score, 1, len(run))
    return list(candidates.values())


def collect_candidates(corpus, stopwords: set[str]) -> list[PhraseCandidate]:
    """Aggregate per-document RAKE candidates across a corpus.

    doc_frequency counts distinct papers whose extraction produced the
    phrase; scores are summed over documents. Output is sorted by phrase
    so the result is independent of paper order.
    """
    if not len(corpus.records):
        raise ValueError("corpus is empty")
    merged: dict[str, list] = {}
    for record in corpus.records:
        for cand in rake_extract(record.text, stopwords):
            entry = merged.setdefault(cand.phrase, [0.0, 0, cand.word_count])
            entry[0] += cand.rake_score
            entry[1] += 1
    return [
        PhraseCandidate(phrase, score, df, wc)
        for phrase, (score, df, wc) in sorted(merged.items())
    ]


def threshold_filter(
    cands: list[PhraseCandidate],
    min_df_2word: int = 9,
    min_df_longer: int = 6,
) -> list[PhraseCandidate]:
    """Document-frequency thresholds: two-word phrases need min_df_2word
    papers, phrases of three or more words need min_df_longer; single
    words are always dropped."""
    if min_df_2word < 1 or min_df_longer < 1:
        raise ValueError("thresholds must be >= 1")
    kept = []
    for cand in cands:
        if cand.word_count < 2:
            continue
        needed = min_df_2word if cand.word_count == 2 else min_df_longer
        if cand.doc_frequency >= needed:
            kept.append(cand)
    return kept


# Closed word lists for the cleanup rules. Deliberately small and
# domain-independent; extend via the blocklist file, not here.
FRAGMENT_WORDS = {
    "the", "a", "an", "this", "that", "these", "those", "such",
    "however", "thus", "also", "moreover", "furthermore", "therefore",
    "additionally", "finally", "hence", "meanwhile",
}
CONJUNCTION_WORDS = {"and", "or", "but", "nor", "whereas", "although", "however"}
VERB_WORDS = {
    "show", "shows", "showed", "shown", "demonstrate", "demonstrates",
    "demonstrated", "propose", "proposes", "proposed", "present",
    "presents", "presented", "introduce", "introduces", "introduced",
    "use", "uses", "used", "using", "improve", "improves", "improved",
    "study", "studies", "studied", "investigate", "investigates",
    "investigated", "provide", "provides", "provided", "obtain",
    "obtains", "obtained", "consider", "considers", "considered",
}


def _rule_leading_fragment(words: tuple[str, ...]) -> bool:
    return words[0] in FRAGMENT_WORDS


def _rule_trailing_fragment(words: tuple[str, ...]) -> bool:
    return words[-1] in FRAGMENT_WORDS


def _rule_verbs_only(words: tuple[str, ...]) -> bool:
    return all(w in VERB_WORDS for w in words)


def _rule_contains_conjunction(words: tuple[str, ...]) -> bool:
    return any(w in CONJUNCTION_WORDS for w in words)


def _rule_numeric_only(words: tuple[str, ...]) -> bool:
    return all(_NUMERIC_RE.fullmatch(w) for w in words)


# Applied in this order; first matching rule removes the phrase.
DEFAULT_RULES: tuple[str, ...] = (
    "leading_fragment",
    "trailing_fragment",
    "verbs_only",
    "contains_conjunction",
    "numeric_only",
)

_RULE_FUNCS = {
    "leading_fragment": _rule_leading_fragment,
    "trailing_fragment": _rule_trailing_fragment,
    "verbs_only": _rule_verbs_only,
    "contains_conjunction": _rule_contains_conjunction,
    "numeric_only": _rule_numeric_only,
}


def rule_cleanup(
    cands: list[PhraseCandidate],
    rules: tuple[str, ...] = DEFAULT_RULES,
    blocklist: set[str] | None = None,
) -> tuple[list[PhraseCandidate], int]:
    """Remove phrases matching any enabled rule; returns (kept, removed_count).

    ``blocklist`` is an optional human-curated set of phrases that are
    always removed, checked before the rules.
    """
    for name in rules:
        if name not in _RULE_FUNCS:
            raise ValueError(f"unknown cleanup rule: {name!r}")
    blocklist = blocklist or set()
    kept: list[PhraseCandidate] = []
    removed = 0
    for cand in cands:
        words = tuple(cand.phrase.split(" "))
        if cand.phrase in blocklist or any(_RULE_FUNCS[name](words) for name in rules):
            removed += 1
        else:
            kept.append(cand)
    return kept, removed


_FILTER_PROMPT = """\
You are cleaning a list of candidate concepts mined from scientific text.
Keep only entries that are meaningful scientific concepts; drop sentence
fragments, verb phrases, and entries that are not concepts. Do not
rephrase, merge, or add entries. Reply with the kept entries, one per
line.

candidates:
{candidates}"""


def _parse_kept(response: str, batch: list[str]) -> set[str]:
    # longest-match scan keeps "neural network" from firing inside a kept
    # "recurrent neural network" line
    return ConceptMatcher(batch).find(response)


def llm_filter(
    cands: list[PhraseCandidate],
    judge: JudgeClient,
    cache: dict[str, bool] | None = None,
    batch_size: int = 50,
) -> tuple[list[PhraseCandidate], list[PhraseCandidate]]:
    """Keep or remove each phrase according to the judge's verdict.

    Phrases are batched into prompts; verdicts are cached by phrase in
    ``cache`` (pass the same dict again and the rerun issues no judge
    requests). If a batch's request fails even after the judge's own
    retries, the batch is left undecided and conservatively kept.
    """
    if cache is None:
        cache = {}
    pending = [c.phrase for c in cands if c.phrase not in cache]
    for start in range(0, len(pending), batch_size):
        batch = pending[start : start + batch_size]
        prompt = _FILTER_PROMPT.format(candidates="\n".join(batch))
        try:
            response = judge.complete(prompt)
        except JudgeTransportError:
            log.warning("judge unreachable for a batch of %d phrases; keeping them", len(batch))
            continue
        kept_in_batch = _parse_kept(response, batch)
        for phrase in batch:
            cache[phrase] = phrase in kept_in_batch
    kept = [c for c in cands if cache.get(c.phrase, True)]
    removed = [c for c in cands if not cache.get(c.phrase, True)]
    return kept, removed


def whitelist_restore(
    removed: list[PhraseCandidate], whitelist: set[str]
) -> list[PhraseCandidate]:
    """Restore removed phrases whose normalized form is whitelisted."""
    normalized = {normalize_text(entry) for entry in whitelist}
    return [c for c in removed if c.phrase in normalized]


def finalize_lexicon(
    concepts=None,
    *,
    candidates: int,
    after_threshold: int,
    after_rules: int,
    removed_by_llm: int,
    restored_by_whitelist: int,
) -> ConceptLexicon:
    """Assemble the lexicon and verify the stage accounting.

    ``concepts`` may be None for a counts-only audit (no phrases held);
    otherwise its size must equal the accounted final count.
    """
    counts = {
        "candidates": candidates,
        "after_threshold": after_threshold,
        "after_rules": after_rules,
        "removed_by_llm": removed_by_llm,
        "restored_by_whitelist": restored_by_whitelist,
    }
    if any(v < 0 for v in counts.values()):
        raise ConsistencyError(f"negative stage count: {counts}")
    final = after_rules - removed_by_llm + restored_by_whitelist
    if final < 0:
        raise ConsistencyError(f"accounting yields negative final count: {counts}")
    counts["final"] = final
    if concepts is not None:
        concepts = frozenset(concepts)
        if len(concepts) != final:
            raise ConsistencyError(
                f"{len(concepts)} concepts but accounting says {final}: {counts}"
            )
        for phrase in concepts:
            if len(phrase.split(" ")) < 2:
                raise ConsistencyError(f"single-word concept in lexicon: {phrase!r}")
    else:
        concepts = frozenset()
    return ConceptLexicon(concepts=concepts, stage_counts=counts)


def build_lexicon(
    corpus,
    stopwords: set[str],
    judge: JudgeClient | None = None,
    whitelist: set[str] | None = None,
    rules: tuple[str, ...] = DEFAULT_RULES,
    blocklist: set[str] | None = None,
    min_df_2word: int = 9,
    min_df_longer: int = 6,
    cache: dict[str, bool] | None = None,
) -> ConceptLexicon:
    """Run the whole refinement pipeline over a corpus.

    Without a judge the LLM stage is skipped (nothing removed, nothing to
    restore). The result is a pure function of (corpus, stopwords, rules,
    judge transcript, whitelist).
    """
    cands = collect_candidates(corpus, stopwords)
    thresholded = threshold_filter(cands, min_df_2word, min_df_longer)
    cleaned, _ = rule_cleanup(thresholded, rules, blocklist)
    if judge is not None:
        kept, removed = llm_filter(cleaned, judge, cache=cache)
    else:
        kept, removed = cleaned, []
    restored = whitelist_restore(removed, whitelist or set())
    concepts = {c.phrase for c in kept} | {c.phrase for c in restored}
    return finalize_lexicon(
        concepts,
        candidates=len(cands),
        after_threshold=len(thresholded),
        after_rules=len(cleaned),
        removed_by_llm=len(removed),
        restored_by_whitelist=len(restored),
    )


def save_lexicon(lexicon: ConceptLexicon, path: str | Path) -> None:
    """Header line with stage counts, then one concept per line."""
    path = Path(path)
    header = {"schema": "muse.lexicon/v1", "stage_counts": lexicon.stage_counts}
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for concept in sorted(lexicon.concepts):
            fh.write(concept + "\n")


def load_lexicon(path: str | Path) -> ConceptLexicon:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError(f"empty lexicon file: {path}")
    header = json.loads(lines[0])
    concepts = frozenset(line for line in lines[1:] if line)
    return ConceptLexicon(concepts=concepts, stage_counts=header["stage_counts"])
