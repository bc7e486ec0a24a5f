"""Concept co-occurrence knowledge graph with per-year annotations.

Vertices are concepts; an undirected edge between two concepts tallies,
per publication year, how many papers mention both in their title or
abstract, and how many citations those papers collected per calendar
year. Citation years never precede publication years (enforced at
ingest), so restricting both paper years and citation years to <= Y gives
an exact "state of the graph at end of year Y" view.

Snapshots are immutable time-sliced views; the graph memoizes them
because feature extraction asks for the same handful of years over and
over.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from .matching import ConceptMatcher

__all__ = [
    "EdgeStats",
    "VertexStats",
    "KnowledgeGraph",
    "GraphSnapshot",
    "build_graph",
    "new_neighbors",
    "load_graph",
    "save_graph",
]

_SCHEMA = "muse.graph/v1"


def _until(series: dict[int, int], year: int) -> int:
    return sum(count for y, count in series.items() if y <= year)


@dataclass
class EdgeStats:
    """Per-year tallies for one unordered concept pair."""

    papers_by_year: dict[int, int] = field(default_factory=dict)
    citations_by_year: dict[int, int] = field(default_factory=dict)


@dataclass
class VertexStats:
    """Per-year tallies for papers mentioning one concept."""

    papers_by_year: dict[int, int] = field(default_factory=dict)
    citations_by_year: dict[int, int] = field(default_factory=dict)


def _edge_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


class KnowledgeGraph:
    """Concept vertices plus per-year edge/vertex statistics."""

    def __init__(self, cutoff_year: int):
        self.cutoff_year = cutoff_year
        self.vertices: dict[str, int] = {}
        self.edges: dict[tuple[str, str], EdgeStats] = {}
        self.vertex_stats: dict[str, VertexStats] = {}
        self._snapshots: dict[int, "GraphSnapshot"] = {}

    # -- construction ---------------------------------------------------

    def _vertex(self, concept: str) -> VertexStats:
        stats = self.vertex_stats.get(concept)
        if stats is None:
            stats = self.vertex_stats[concept] = VertexStats()
        return stats

    def _edge(self, a: str, b: str) -> EdgeStats:
        key = _edge_key(a, b)
        stats = self.edges.get(key)
        if stats is None:
            stats = self.edges[key] = EdgeStats()
        return stats

    def add_paper(self, concepts: set[str], year: int, citations_by_year: dict[int, int]) -> None:
        """Attribute one paper to every concept and concept pair it mentions."""
        if year > self.cutoff_year:
            raise ValueError(f"paper year {year} beyond graph cutoff {self.cutoff_year}")
        found = sorted(concepts)
        for concept in found:
            stats = self._vertex(concept)
            stats.papers_by_year[year] = stats.papers_by_year.get(year, 0) + 1
            for cite_year, count in citations_by_year.items():
                stats.citations_by_year[cite_year] = (
                    stats.citations_by_year.get(cite_year, 0) + count
                )
        for a, b in combinations(found, 2):
            stats = self._edge(a, b)
            stats.papers_by_year[year] = stats.papers_by_year.get(year, 0) + 1
            for cite_year, count in citations_by_year.items():
                stats.citations_by_year[cite_year] = (
                    stats.citations_by_year.get(cite_year, 0) + count
                )
        self._snapshots.clear()

    def freeze(self) -> "KnowledgeGraph":
        """Assign vertex indices (sorted by concept, paper-order invariant)."""
        self.vertices = {c: i for i, c in enumerate(sorted(self.vertex_stats))}
        return self

    # -- queries ----------------------------------------------------------

    def vertex_papers_until(self, concept: str, year: int) -> int:
        return _until(self.vertex_stats[concept].papers_by_year, year)

    def vertex_citations_until(self, concept: str, year: int) -> int:
        return _until(self.vertex_stats[concept].citations_by_year, year)

    def vertex_citations_in(self, concept: str, year: int) -> int:
        return self.vertex_stats[concept].citations_by_year.get(year, 0)

    def edge_papers_until(self, a: str, b: str, year: int) -> int:
        stats = self.edges.get(_edge_key(a, b))
        return _until(stats.papers_by_year, year) if stats else 0

    def edge_citations_until(self, a: str, b: str, year: int) -> int:
        stats = self.edges.get(_edge_key(a, b))
        return _until(stats.citations_by_year, year) if stats else 0

    def snapshot(self, year: int) -> "GraphSnapshot":
        """The graph as of end of ``year`` (memoized)."""
        if year > self.cutoff_year:
            raise ValueError(f"snapshot year {year} beyond cutoff {self.cutoff_year}")
        snap = self._snapshots.get(year)
        if snap is None:
            snap = GraphSnapshot(self, year)
            self._snapshots[year] = snap
        return snap


class GraphSnapshot:
    """Immutable view of the graph restricted to papers published <= year.

    The vertex set is the full build-time vertex set; a concept with no
    papers by the slice year is simply an isolated vertex. That keeps
    degree, neighbor, and PageRank queries defined for every concept at
    every slice.
    """

    def __init__(self, graph: KnowledgeGraph, year: int):
        self.graph = graph
        self.year = year
        self._neighbors: dict[str, frozenset[str]] = {}
        adjacency: dict[str, set[str]] = {c: set() for c in graph.vertex_stats}
        for (a, b), stats in graph.edges.items():
            if any(y <= year and n > 0 for y, n in stats.papers_by_year.items()):
                adjacency[a].add(b)
                adjacency[b].add(a)
        self._neighbors = {c: frozenset(ns) for c, ns in adjacency.items()}
        self._pagerank: dict[tuple[float, float], dict[str, float]] = {}

    def __contains__(self, concept: str) -> bool:
        return concept in self._neighbors

    @property
    def concepts(self) -> list[str]:
        return sorted(self._neighbors)

    def neighbors(self, concept: str) -> frozenset[str]:
        try:
            return self._neighbors[concept]
        except KeyError:
            raise KeyError(f"unknown concept: {concept!r}") from None

    def degree(self, concept: str) -> int:
        return len(self.neighbors(concept))

    def papers_until(self, concept: str) -> int:
        return self.graph.vertex_papers_until(concept, self.year)

    def citations_until(self, concept: str) -> int:
        return self.graph.vertex_citations_until(concept, self.year)

    def pagerank(self, damping: float = 0.85, tol: float = 1e-10) -> dict[str, float]:
        """PageRank over the slice, undirected edges treated as bidirected.

        Power iteration with uniform teleport; the rank of dangling
        (isolated) vertices is redistributed uniformly each step. Iterates
        until the L1 change drops below ``tol``; scores sum to 1.
        """
        cached = self._pagerank.get((damping, tol))
        if cached is not None:
            return cached
        order = sorted(self._neighbors)
        n = len(order)
        if n == 0:
            raise ValueError("pagerank undefined on an empty snapshot")
        index = {c: i for i, c in enumerate(order)}
        src: list[int] = []
        dst: list[int] = []
        # canonical order keeps the float accumulation bit-reproducible
        for concept in order:
            i = index[concept]
            for other in sorted(self._neighbors[concept]):
                src.append(i)
                dst.append(index[other])
        src_arr = np.array(src, dtype=np.int64)
        dst_arr = np.array(dst, dtype=np.int64)
        out_degree = np.zeros(n)
        np.add.at(out_degree, src_arr, 1.0)
        dangling = out_degree == 0
        safe_degree = np.where(dangling, 1.0, out_degree)

        x = np.full(n, 1.0 / n)
        for _ in range(100_000):
            share = x / safe_degree
            incoming = np.zeros(n)
            if len(src_arr):
                np.add.at(incoming, dst_arr, share[src_arr])
            dangling_mass = x[dangling].sum()
            new_x = (1.0 - damping) / n + damping * (incoming + dangling_mass / n)
            if np.abs(new_x - x).sum() < tol:
                x = new_x
                break
            x = new_x
        result = {concept: float(x[index[concept]]) for concept in order}
        self._pagerank[(damping, tol)] = result
        return result


def build_graph(corpus, lexicon) -> KnowledgeGraph:
    """Build the co-occurrence graph from a (filtered) corpus.

    Every paper connects all distinct lexicon concepts found in its
    title+abstract pairwise, counting once per paper, and its full
    citation series is attributed to each such vertex and edge. The
    result is independent of paper order.
    """
    concepts = getattr(lexicon, "concepts", lexicon)
    concepts = set(concepts)
    if not concepts:
        raise ValueError("cannot build a graph from an empty lexicon")
    matcher = ConceptMatcher(concepts)
    graph = KnowledgeGraph(cutoff_year=corpus.cutoff_year)
    for record in corpus.records:
        found = matcher.find(record.text)
        if found:
            graph.add_paper(found, record.year, record.citations_by_year)
    return graph.freeze()


def new_neighbors(graph: KnowledgeGraph, concept: str, y1: int, y2: int) -> int:
    """Count neighbors present at end of y2 but not at end of y1."""
    if not y1 < y2 <= graph.cutoff_year:
        raise ValueError(f"need y1 < y2 <= cutoff, got {y1}, {y2}")
    before = graph.snapshot(y1).neighbors(concept)
    after = graph.snapshot(y2).neighbors(concept)
    return len(after - before)


def save_graph(graph: KnowledgeGraph, path: str | Path) -> None:
    """Line-based export: header, vertex lines, edge lines."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema": _SCHEMA, "cutoff_year": graph.cutoff_year}) + "\n")
        for concept in sorted(graph.vertex_stats):
            stats = graph.vertex_stats[concept]
            fh.write(
                json.dumps(
                    {
                        "t": "v",
                        "c": concept,
                        "papers": {str(y): n for y, n in sorted(stats.papers_by_year.items())},
                        "cites": {str(y): n for y, n in sorted(stats.citations_by_year.items())},
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
        for (a, b) in sorted(graph.edges):
            stats = graph.edges[(a, b)]
            fh.write(
                json.dumps(
                    {
                        "t": "e",
                        "a": a,
                        "b": b,
                        "papers": {str(y): n for y, n in sorted(stats.papers_by_year.items())},
                        "cites": {str(y): n for y, n in sorted(stats.citations_by_year.items())},
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_graph(path: str | Path) -> KnowledgeGraph:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError(f"empty graph file: {path}")
    header = json.loads(lines[0])
    if header.get("schema") != _SCHEMA:
        raise ValueError(f"not a graph file (schema {header.get('schema')!r})")
    graph = KnowledgeGraph(cutoff_year=header["cutoff_year"])
    for line in lines[1:]:
        if not line.strip():
            continue
        obj = json.loads(line)
        papers = {int(y): n for y, n in obj["papers"].items()}
        cites = {int(y): n for y, n in obj["cites"].items()}
        if obj["t"] == "v":
            graph.vertex_stats[obj["c"]] = VertexStats(papers, cites)
        elif obj["t"] == "e":
            graph.edges[(obj["a"], obj["b"])] = EdgeStats(papers, cites)
        else:
            raise ValueError(f"unknown line type {obj['t']!r}")
    return graph.freeze()
