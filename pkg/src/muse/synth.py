"""Deterministic synthetic fixtures: corpora, researchers, and judges.

Desk-scale stand-ins for the real inputs. Papers are built from a planted
vocabulary of multi-word concepts grouped into topic clusters, so the
whole pipeline (extraction, graph building, profiling, ideation,
tournaments) can run end to end without any external data or a live LLM.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

DEFAULT_STOPWORDS = {
    "a", "an", "and", "are", "as", "at", "be", "by", "for", "from", "in",
    "into", "is", "it", "its", "of", "on", "or", "that", "the", "their",
    "this", "to", "through", "towards", "via", "with", "we", "our", "new", "using",
}

_CLUSTERS = {
    "quantum": ["quantum", "photonic", "entangled", "coherent", "topological"],
    "bio": ["genomic", "cellular", "protein", "microbial", "neural"],
    "materials": ["perovskite", "graphene", "polymer", "crystalline", "amorphous"],
    "compute": ["statistical", "variational", "probabilistic", "spectral", "geometric"],
}

_NOUNS = [
    "imaging", "sensing", "dynamics", "networks", "catalysis", "transport",
    "folding", "lattices", "inference", "coupling", "resonance", "assembly",
]

_FILLERS = [
    "measurements", "experiments", "frameworks", "pathways",
    "architectures", "benchmarks", "observations", "datasets",
]


def planted_concepts(seed: int = 0, per_cluster: int = 18) -> dict[str, list[str]]:
    """Cluster -> list of planted two/three-word concept phrases."""
    rng = np.random.default_rng(seed)
    out: dict[str, list[str]] = {}
    for cluster, adjectives in _CLUSTERS.items():
        phrases: set[str] = set()
        while len(phrases) < per_cluster:
            adj = adjectives[int(rng.integers(len(adjectives)))]
            noun = _NOUNS[int(rng.integers(len(_NOUNS)))]
            if rng.random() < 0.3:
                second = _NOUNS[int(rng.integers(len(_NOUNS)))]
                if second != noun:
                    phrases.add(f"{adj} {noun} {second}")
                    continue
            phrases.add(f"{adj} {noun}")
        out[cluster] = sorted(phrases)
    return out


def synth_corpus_records(
    n_papers: int = 500,
    seed: int = 0,
    start_year: int = 2015,
    cutoff_year: int = 2023,
) -> tuple[list[dict], dict[str, list[str]], set[str]]:
    """Raw JSON-able paper records plus the planted vocabulary and stopwords.

    Titles and abstracts interleave planted concepts with stopwords so
    that RAKE recovers the phrases and concept matching finds them again.
    """
    rng = np.random.default_rng(seed)
    vocab = planted_concepts(seed)
    clusters = list(vocab)
    records = []
    for i in range(n_papers):
        cluster = clusters[int(rng.integers(len(clusters)))]
        pool = list(vocab[cluster])
        if rng.random() < 0.35:  # cross-cluster papers connect the clusters
            other = clusters[int(rng.integers(len(clusters)))]
            pool += vocab[other]
        k = int(rng.integers(2, 5))
        picked = [pool[j] for j in rng.choice(len(pool), size=min(k, len(pool)), replace=False)]
        year = int(rng.integers(start_year, cutoff_year + 1))
        filler = _FILLERS[int(rng.integers(len(_FILLERS)))]
        title = f"{picked[0].capitalize()} and {picked[1]} for {filler}"
        extras = " ".join(f"We study {c} in new {_FILLERS[int(rng.integers(len(_FILLERS)))]}." for c in picked[2:])
        abstract = (
            f"This work combines {picked[0]} with {picked[1]} to explore {filler}. {extras}".strip()
        )
        citations = {}
        base = float(rng.exponential(3.0))
        for cite_year in range(year, cutoff_year + 1):
            count = int(rng.poisson(base / (1 + cite_year - year)))
            if count:
                citations[str(cite_year)] = count
        records.append(
            {
                "paper_id": f"P{i:05d}",
                "title": title,
                "abstract": abstract,
                "year": year,
                "citations_by_year": citations,
                "cluster": cluster,
            }
        )
    return records, vocab, set(DEFAULT_STOPWORDS)


def write_corpus_file(records: list[dict], path: str | Path) -> Path:
    """Write raw ingest lines (cluster bookkeeping stripped)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            record = {k: v for k, v in record.items() if k != "cluster"}
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    return path


def synth_researchers(
    records: list[dict], n_researchers: int = 6, seed: int = 0, min_year: int = 2021
) -> list[dict]:
    """Researcher descriptors with paper_ids drawn from one cluster each."""
    rng = np.random.default_rng(seed)
    clusters = sorted({r["cluster"] for r in records})
    out = []
    for i in range(n_researchers):
        cluster = clusters[i % len(clusters)]
        candidates = [
            r["paper_id"] for r in records if r["cluster"] == cluster and r["year"] >= min_year
        ]
        size = int(min(len(candidates), rng.integers(4, 9)))
        picked = [candidates[j] for j in rng.choice(len(candidates), size=size, replace=False)]
        out.append({"researcher_id": f"R{i:02d}", "paper_ids": sorted(picked)})
    return out


_REFINE_LIST_RE = re.compile(r"concept list=\[(.*)\]", re.S)
_CANDIDATES_RE = re.compile(r"candidates:\n(.*)\Z", re.S)
_IDEA_CONCEPTS_RE = re.compile(r'combines "([^"]+)" and "([^"]+)"')
_SUGGESTION_RE = re.compile(r"Suggestion ([12]): (.*?)\n\n", re.S)


def scripted_judge(drop_every: int = 0):
    """A deterministic in-process judge for demos and offline runs.

    Refinement and cleaning prompts keep everything (optionally dropping
    every ``drop_every``-th entry), idea prompts return an outline-shaped
    response, and ranking prompts prefer the lexicographically smaller
    suggestion text (position-agnostic by construction).
    """

    def complete(prompt: str) -> str:
        if prompt.startswith("A scientist has written"):
            concepts = _REFINE_LIST_RE.search(prompt).group(1).split(", ")
            if drop_every:
                concepts = [c for i, c in enumerate(concepts) if (i + 1) % drop_every]
            return "Relevant concepts:\n" + "\n".join(concepts)
        if prompt.startswith("You are cleaning"):
            lines = _CANDIDATES_RE.search(prompt).group(1).splitlines()
            if drop_every:
                lines = [c for i, c in enumerate(lines) if (i + 1) % drop_every]
            return "\n".join(lines)
        if prompt.startswith("Two researchers"):
            m = _IDEA_CONCEPTS_RE.search(prompt)
            c1, c2 = m.groups() if m else ("the first field", "the second field")
            return (
                f'"{c1}" concerns itself with structure; "{c2}" with change.\n\n'
                "A) Four contexts follow.\nB) Each context has limits.\n"
                "C) The combination is workable and fresh.\n\n"
                f"Project Title: Bridging {c1} and {c2}\n"
                f"The project will map how {c1} constrains {c2}, building a shared "
                "testbed and a common vocabulary for both groups.\n\n"
                f"- How does {c1} reshape {c2} in practice?\n"
                f"- Which measurements decide between the competing mechanisms?"
            )
        if prompt.startswith("I will present two research ideas."):
            suggestions = dict(_SUGGESTION_RE.findall(prompt))
            winner = "1" if suggestions.get("1", "") <= suggestions.get("2", "") else "2"
            return f"Both are plausible.\nRESULT: SUGGESTION {winner}"
        raise ValueError(f"scripted judge got an unexpected prompt: {prompt[:60]!r}")

    return complete
