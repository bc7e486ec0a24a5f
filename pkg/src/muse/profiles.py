"""Researcher profiles: recent-paper concepts and inter-researcher distances.

A profile is built from a researcher's publications within a recency
window anchored at their newest paper (not at wall-clock time, so
fixtures stay deterministic). Extracted concepts can be refined by an LLM
judge, which may only remove entries, never add them.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .judge import JudgeClient, JudgeTransportError
from .kgraph import GraphSnapshot
from .matching import ConceptMatcher
from .prompting import load_template, numbered_block

log = logging.getLogger(__name__)

__all__ = [
    "ResearcherProfile",
    "SubgraphPair",
    "UnusableProfileError",
    "extract_researcher_concepts",
    "build_refine_prompt",
    "refine_profile",
    "build_profile",
    "load_profiles",
    "semantic_distance_concepts",
    "semantic_distance_neighborhood",
    "make_pair",
]


class UnusableProfileError(Exception):
    """The researcher has no usable papers in the recency window."""


@dataclass
class ResearcherProfile:
    researcher_id: str
    papers: tuple  # PaperRecord, newest first
    window_years: int = 2
    raw_concepts: frozenset[str] = frozenset()
    concepts: frozenset[str] = frozenset()
    refine_fallback: bool = False  # judge failed; concepts == raw_concepts

    def recent_titles(self, limit: int = 7) -> list[str]:
        return [p.title for p in self.papers[:limit]]


@dataclass(frozen=True)
class SubgraphPair:
    """Two profiles with their graph-native distances (symmetric in a,b)."""

    profile_a: ResearcherProfile
    profile_b: ResearcherProfile
    distance_concept: float = 0.0
    distance_neighborhood: float = 0.0


def _window_papers(papers, window_years: int):
    if not papers:
        raise UnusableProfileError("researcher has no papers")
    newest = max(p.year for p in papers)
    recent = [p for p in papers if p.year > newest - window_years]
    if not recent:
        raise UnusableProfileError("no papers inside the recency window")
    recent.sort(key=lambda p: (-p.year, p.paper_id))
    return recent


def recent_titles(papers, window_years: int = 2, limit: int = 7) -> list[str]:
    """Newest-first titles from the recency window, capped at ``limit``."""
    return [p.title for p in _window_papers(papers, window_years)[:limit]]


def extract_researcher_concepts(papers, lexicon, window_years: int = 2) -> set[str]:
    """Union of lexicon concepts found in the researcher's recent papers.

    The window covers the ``window_years`` calendar years ending at the
    newest paper's year.
    """
    recent = _window_papers(papers, window_years)
    concepts = getattr(lexicon, "concepts", lexicon)
    matcher = ConceptMatcher(concepts)
    found: set[str] = set()
    for paper in recent:
        found |= matcher.find(paper.text)
    return found


def build_refine_prompt(titles: list[str], concepts: list[str]) -> str:
    """Concept-refinement prompt: titles numbered from 0, then the list."""
    return load_template("refine_concepts").format(
        titles=numbered_block(titles, start=0, sep=")"),
        concepts=", ".join(concepts),
    )


def refine_profile(
    raw: set[str], papers, judge: JudgeClient, strict: bool = False
) -> set[str]:
    """Ask the judge to drop unhelpful concepts; output is a subset of input.

    On judge transport failure the raw set is returned unchanged (or the
    error re-raised with ``strict=True``).
    """
    if not raw:
        return set()
    titles = [p.title for p in papers]
    concepts = sorted(raw)
    prompt = build_refine_prompt(titles, concepts)
    try:
        response = judge.complete(prompt)
    except JudgeTransportError:
        if strict:
            raise
        log.warning("concept refinement judge unavailable; keeping raw concepts")
        return set(raw)
    kept = ConceptMatcher(concepts).find(response)
    return kept & raw


def build_profile(
    researcher_id: str,
    papers,
    lexicon,
    judge: JudgeClient | None = None,
    window_years: int = 2,
) -> ResearcherProfile:
    """Extract, then optionally refine, one researcher's concept set."""
    recent = _window_papers(papers, window_years)
    raw = extract_researcher_concepts(papers, lexicon, window_years)
    fallback = False
    if judge is None:
        concepts = set(raw)
    else:
        try:
            concepts = refine_profile(raw, recent, judge, strict=True)
        except JudgeTransportError:
            log.warning("refinement failed for %s; using raw concepts", researcher_id)
            concepts = set(raw)
            fallback = True
    return ResearcherProfile(
        researcher_id=researcher_id,
        papers=tuple(recent),
        window_years=window_years,
        raw_concepts=frozenset(raw),
        concepts=frozenset(concepts),
        refine_fallback=fallback,
    )


def load_profiles(path: str | Path, corpus=None) -> list[dict]:
    """Read researcher descriptors: one JSON object per line.

    Each object has ``researcher_id`` plus either ``paper_ids`` (resolved
    against ``corpus``) or inline ``papers`` records.
    """
    from .corpus import _parse_record  # inline records share the ingest normalization
    from collections import Counter

    by_id = {r.paper_id: r for r in corpus.records} if corpus is not None else {}
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        rid = obj["researcher_id"]
        papers = []
        for pid in obj.get("paper_ids", []):
            if pid not in by_id:
                raise KeyError(f"researcher {rid}: paper {pid!r} not in corpus")
            papers.append(by_id[pid])
        tallies: Counter = Counter()
        for raw in obj.get("papers", []):
            record = _parse_record(raw, None, tallies)
            if record is None:
                raise ValueError(f"researcher {rid}: unusable inline paper record {raw!r}")
            papers.append(record)
        out.append({"researcher_id": rid, "papers": papers})
    return out


def _jaccard_distance(a: set, b: set) -> float:
    return 1.0 - len(a & b) / len(a | b)


def semantic_distance_concepts(a: set[str], b: set[str]) -> float:
    """Jaccard distance between two concept sets; 0 iff equal, 1 iff disjoint."""
    if not a or not b:
        raise ValueError("semantic distance needs non-empty concept sets")
    return _jaccard_distance(set(a), set(b))


def semantic_distance_neighborhood(a: set[str], b: set[str], snap: GraphSnapshot) -> float:
    """Jaccard distance between the neighborhood-augmented concept sets.

    Each side is expanded to itself plus all its graph neighbors at the
    snapshot year before comparing.
    """
    if not a or not b:
        raise ValueError("semantic distance needs non-empty concept sets")

    def expand(concepts: set[str]) -> set[str]:
        expanded = set(concepts)
        for concept in concepts:
            expanded |= snap.neighbors(concept)
        return expanded

    return _jaccard_distance(expand(set(a)), expand(set(b)))


def make_pair(
    profile_a: ResearcherProfile, profile_b: ResearcherProfile, snap: GraphSnapshot
) -> SubgraphPair:
    """Pair two profiles and compute both distances at the given snapshot."""
    a = set(profile_a.concepts)
    b = set(profile_b.concepts)
    return SubgraphPair(
        profile_a=profile_a,
        profile_b=profile_b,
        distance_concept=semantic_distance_concepts(a, b),
        distance_neighborhood=semantic_distance_neighborhood(a, b, snap),
    )
