"""Per-concept-pair feature vectors and trend analysis.

The catalog is a fixed, versioned grid of graph statistics for a concept
pair (c_a from the evaluating researcher, c_b from the collaborator):

* per concept, at each of the five year slices ending at the cutoff:
  degree, PageRank, papers mentioning it, total citations, and citations
  during that single year;
* per concept, over the one- and two-year windows ending at the cutoff:
  new neighbors, new papers, new citations, plus rank-transformed
  variants of each (dense descending rank over all vertices, ties share a
  rank, normalized by vertex count);
* per concept, total citations over the four-year windows ending at the
  cutoff and one year before it;
* per pair, at each slice: papers mentioning either concept, papers
  mentioning both, citations to the co-mentioning papers, Simpson
  similarity and Sorensen-Dice coefficient of the neighbor sets;
* the two researcher-distance values and an externally supplied predicted
  impact.

Year slices are offsets relative to the graph cutoff, so small fixtures
exercise the same code paths as full-scale graphs.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kgraph import KnowledgeGraph

log = logging.getLogger(__name__)

__all__ = [
    "FeatureCatalog",
    "FeatureVector",
    "CATALOG",
    "TOP25_FEATURE_IDS",
    "compute_pair_features",
    "zscore",
    "bin_aggregate",
    "filter_top_impact",
    "trend_rows",
    "export_feature_matrix",
    "load_feature_matrix",
]

N_SLICES = 5      # year offsets 0..4 back from the cutoff
WINDOWS = (1, 2)  # deltas over (cutoff-w, cutoff]
RANGE_ENDS = (0, 1)  # four-year citation windows ending at cutoff-e


@dataclass(frozen=True)
class FeatureCatalog:
    """Ordered feature schema; order and ids are fixed per version."""

    entries: tuple[tuple[str, str, str], ...]  # (feature_id, description, tag)
    version: str

    @property
    def feature_ids(self) -> list[str]:
        return [fid for fid, _, _ in self.entries]

    def index(self, feature_id: str) -> int:
        return self.feature_ids.index(feature_id)

    def __len__(self) -> int:
        return len(self.entries)


def _build_catalog() -> FeatureCatalog:
    entries: list[tuple[str, str, str]] = []
    sides = (("a", "first concept"), ("b", "second concept"))
    for side, label in sides:
        for k in range(N_SLICES):
            year = f"cutoff-{k}" if k else "cutoff"
            entries.append(
                (f"{side}_degree_y{k}", f"neighbor count of the {label} until {year}", "vertex")
            )
            entries.append(
                (f"{side}_pagerank_y{k}", f"PageRank of the {label} until {year}", "vertex")
            )
            entries.append(
                (f"{side}_papers_y{k}", f"papers mentioning the {label} until {year}", "vertex")
            )
            entries.append(
                (f"{side}_citations_y{k}", f"total citations of the {label} until {year}", "vertex")
            )
            entries.append(
                (
                    f"{side}_annual_citations_y{k}",
                    f"citations of the {label} during {year}",
                    "vertex",
                )
            )
        for w in WINDOWS:
            entries.append(
                (
                    f"{side}_new_neighbors_w{w}",
                    f"new neighbors of the {label} over the last {w} year(s)",
                    "delta",
                )
            )
            entries.append(
                (
                    f"{side}_new_papers_w{w}",
                    f"new papers mentioning the {label} over the last {w} year(s)",
                    "delta",
                )
            )
            entries.append(
                (
                    f"{side}_new_citations_w{w}",
                    f"new citations of the {label} over the last {w} year(s)",
                    "delta",
                )
            )
        for e in RANGE_ENDS:
            end = f"cutoff-{e}" if e else "cutoff"
            entries.append(
                (
                    f"{side}_citations_window_r{e}",
                    f"citations of the {label} during the four years ending at {end}",
                    "window",
                )
            )
        for w in WINDOWS:
            for metric in ("new_neighbors", "new_papers", "new_citations"):
                entries.append(
                    (
                        f"{side}_rank_{metric}_w{w}",
                        f"dense descending rank of {metric.replace('_', ' ')} of the {label} "
                        f"over the last {w} year(s), normalized by vertex count",
                        "rank",
                    )
                )
    for k in range(N_SLICES):
        year = f"cutoff-{k}" if k else "cutoff"
        entries.append(
            (f"pair_either_papers_y{k}", f"papers mentioning either concept until {year}", "pair")
        )
        entries.append(
            (f"pair_cooccur_papers_y{k}", f"papers mentioning both concepts until {year}", "pair")
        )
        entries.append(
            (
                f"pair_edge_citations_y{k}",
                f"citations of the co-mentioning papers until {year}",
                "pair",
            )
        )
        entries.append(
            (f"pair_simpson_y{k}", f"Simpson similarity of the neighbor sets until {year}", "pair")
        )
        entries.append(
            (f"pair_dice_y{k}", f"Sorensen-Dice coefficient of the neighbor sets until {year}", "pair")
        )
    entries.append(("dist_concepts", "distance between the researchers' concept sets", "context"))
    entries.append(
        (
            "dist_neighborhood",
            "distance between the researchers' neighborhood-augmented concept sets",
            "context",
        )
    )
    entries.append(("impact", "externally predicted impact of the pair", "context"))
    return FeatureCatalog(entries=tuple(entries), version=f"fv1-{len(entries)}")


CATALOG = _build_catalog()

# The 25 features the interest model consumes, in its input order.
TOP25_FEATURE_IDS: tuple[str, ...] = (
    "dist_neighborhood",
    "a_new_neighbors_w1",
    "a_rank_new_citations_w1",
    "a_rank_new_papers_w2",
    "pair_either_papers_y1",
    "a_annual_citations_y3",
    "a_citations_y2",
    "b_pagerank_y0",
    "a_degree_y1",
    "a_new_papers_w2",
    "a_rank_new_neighbors_w2",
    "a_citations_window_r0",
    "b_pagerank_y1",
    "a_rank_new_neighbors_w1",
    "a_annual_citations_y1",
    "a_citations_window_r1",
    "a_degree_y0",
    "a_degree_y2",
    "b_new_neighbors_w1",
    "a_pagerank_y0",
    "a_citations_y0",
    "a_pagerank_y1",
    "pair_either_papers_y0",
    "b_degree_y2",
    "a_citations_y1",
)

assert all(fid in CATALOG.feature_ids for fid in TOP25_FEATURE_IDS)


@dataclass(frozen=True)
class FeatureVector:
    """Catalog-ordered feature values for one concept pair.

    ``pair`` keeps the (evaluating researcher concept, collaborator
    concept) orientation; the vector is not symmetric under swapping.
    """

    pair: tuple[str, str]
    values: np.ndarray
    catalog_version: str = CATALOG.version

    def __post_init__(self):
        if len(self.values) != len(CATALOG):
            raise ValueError(
                f"feature vector has {len(self.values)} values, catalog wants {len(CATALOG)}"
            )

    def as_dict(self) -> dict[str, float]:
        return dict(zip(CATALOG.feature_ids, (float(v) for v in self.values)))

    def project(self, feature_ids) -> np.ndarray:
        return np.array([self.values[CATALOG.index(fid)] for fid in feature_ids])

    def top25(self) -> np.ndarray:
        return self.project(TOP25_FEATURE_IDS)


def _dense_rank_desc(values: dict[str, float]) -> dict[str, float]:
    """Dense descending rank (1 = largest, ties share), scaled by 1/n."""
    n = len(values)
    distinct = sorted(set(values.values()), reverse=True)
    rank_of = {v: i + 1 for i, v in enumerate(distinct)}
    return {c: rank_of[v] / n for c, v in values.items()}


def _rank_tables(g: KnowledgeGraph, as_of: int) -> dict[tuple[str, int], dict[str, float]]:
    """Normalized rank of each delta metric for every vertex (memoized)."""
    cache = getattr(g, "_feature_rank_cache", None)
    if cache is None:
        cache = g._feature_rank_cache = {}
    if as_of in cache:
        return cache[as_of]
    now = g.snapshot(as_of)
    tables: dict[tuple[str, int], dict[str, float]] = {}
    for w in WINDOWS:
        then = g.snapshot(as_of - w)
        new_neighbors = {}
        new_papers = {}
        new_citations = {}
        for concept in g.vertex_stats:
            new_neighbors[concept] = float(len(now.neighbors(concept) - then.neighbors(concept)))
            new_papers[concept] = float(
                g.vertex_papers_until(concept, as_of) - g.vertex_papers_until(concept, as_of - w)
            )
            new_citations[concept] = float(
                g.vertex_citations_until(concept, as_of)
                - g.vertex_citations_until(concept, as_of - w)
            )
        tables[("new_neighbors", w)] = _dense_rank_desc(new_neighbors)
        tables[("new_papers", w)] = _dense_rank_desc(new_papers)
        tables[("new_citations", w)] = _dense_rank_desc(new_citations)
    cache[as_of] = tables
    return tables


def _similarity(na: frozenset, nb: frozenset) -> tuple[float, float]:
    inter = len(na & nb)
    min_size = min(len(na), len(nb))
    simpson = inter / min_size if min_size else 0.0
    total = len(na) + len(nb)
    dice = 2.0 * inter / total if total else 0.0
    return simpson, dice


def compute_pair_features(
    c_a: str,
    c_b: str,
    g: KnowledgeGraph,
    pair_ctx=None,
    impact: float = 0.0,
    as_of: int | None = None,
) -> FeatureVector:
    """Fill the whole catalog for one concept pair.

    ``pair_ctx`` (a SubgraphPair) supplies the two researcher distances;
    without one they are 0. ``as_of`` moves the effective cutoff back in
    time, which the impact proxy uses to train on historical slices.
    """
    if c_a == c_b:
        raise ValueError("feature vectors are defined for distinct concepts")
    for concept in (c_a, c_b):
        if concept not in g.vertex_stats:
            raise KeyError(f"unknown concept: {concept!r}")
    if as_of is None:
        as_of = g.cutoff_year
    if as_of > g.cutoff_year:
        raise ValueError(f"as_of {as_of} beyond graph cutoff {g.cutoff_year}")

    snaps = [g.snapshot(as_of - k) for k in range(N_SLICES)]
    pageranks = [snap.pagerank() for snap in snaps]
    ranks = _rank_tables(g, as_of)

    values: dict[str, float] = {}
    for side, concept in (("a", c_a), ("b", c_b)):
        for k, snap in enumerate(snaps):
            year = as_of - k
            values[f"{side}_degree_y{k}"] = float(snap.degree(concept))
            values[f"{side}_pagerank_y{k}"] = pageranks[k][concept]
            values[f"{side}_papers_y{k}"] = float(g.vertex_papers_until(concept, year))
            values[f"{side}_citations_y{k}"] = float(g.vertex_citations_until(concept, year))
            values[f"{side}_annual_citations_y{k}"] = float(g.vertex_citations_in(concept, year))
        for w in WINDOWS:
            then = g.snapshot(as_of - w)
            values[f"{side}_new_neighbors_w{w}"] = float(
                len(snaps[0].neighbors(concept) - then.neighbors(concept))
            )
            values[f"{side}_new_papers_w{w}"] = float(
                g.vertex_papers_until(concept, as_of) - g.vertex_papers_until(concept, as_of - w)
            )
            values[f"{side}_new_citations_w{w}"] = float(
                g.vertex_citations_until(concept, as_of)
                - g.vertex_citations_until(concept, as_of - w)
            )
        for e in RANGE_ENDS:
            end = as_of - e
            values[f"{side}_citations_window_r{e}"] = float(
                g.vertex_citations_until(concept, end) - g.vertex_citations_until(concept, end - 4)
            )
        for w in WINDOWS:
            for metric in ("new_neighbors", "new_papers", "new_citations"):
                values[f"{side}_rank_{metric}_w{w}"] = ranks[(metric, w)][concept]

    for k, snap in enumerate(snaps):
        year = as_of - k
        papers_a = g.vertex_papers_until(c_a, year)
        papers_b = g.vertex_papers_until(c_b, year)
        both = g.edge_papers_until(c_a, c_b, year)
        values[f"pair_either_papers_y{k}"] = float(papers_a + papers_b - both)
        values[f"pair_cooccur_papers_y{k}"] = float(both)
        values[f"pair_edge_citations_y{k}"] = float(g.edge_citations_until(c_a, c_b, year))
        simpson, dice = _similarity(snap.neighbors(c_a), snap.neighbors(c_b))
        values[f"pair_simpson_y{k}"] = simpson
        values[f"pair_dice_y{k}"] = dice

    values["dist_concepts"] = float(pair_ctx.distance_concept) if pair_ctx else 0.0
    values["dist_neighborhood"] = float(pair_ctx.distance_neighborhood) if pair_ctx else 0.0
    values["impact"] = float(impact)

    vec = np.array([values[fid] for fid in CATALOG.feature_ids])
    return FeatureVector(pair=(c_a, c_b), values=vec)


def zscore(values) -> np.ndarray:
    """(x - mean) / population std; needs >= 2 values and nonzero variance."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise ValueError("zscore needs at least 2 values")
    std = arr.std()
    if std == 0:
        raise ValueError("zscore undefined for constant input")
    return (arr - arr.mean()) / std


def bin_aggregate(feature, interest, n_bins: int = 50) -> list[tuple[float, float, float]]:
    """Sort by feature, split into n_bins near-equal contiguous groups.

    Group sizes differ by at most one, larger groups first. Returns
    (mean feature, mean interest, interest std) per group.
    """
    feature = np.asarray(feature, dtype=float)
    interest = np.asarray(interest, dtype=float)
    if feature.shape != interest.shape:
        raise ValueError("feature and interest must have the same length")
    n = len(feature)
    if n < n_bins:
        raise ValueError(f"{n} points cannot fill {n_bins} bins")
    order = np.argsort(feature, kind="stable")
    base, extra = divmod(n, n_bins)
    out = []
    start = 0
    for i in range(n_bins):
        size = base + (1 if i < extra else 0)
        idx = order[start : start + size]
        out.append(
            (float(feature[idx].mean()), float(interest[idx].mean()), float(interest[idx].std()))
        )
        start += size
    return out


def filter_top_impact(pairs, quantile: float) -> list:
    """Keep the top ``quantile`` share of (FeatureVector, impact) pairs.

    Ties at the threshold are kept; input order is preserved.
    """
    if not 0 < quantile <= 1:
        raise ValueError("quantile must be in (0, 1]")
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no pairs to filter")
    impacts = sorted((imp for _, imp in pairs), reverse=True)
    k = int(np.ceil(quantile * len(pairs)))
    threshold = impacts[k - 1]
    return [(vec, imp) for vec, imp in pairs if imp >= threshold]


def trend_rows(
    features_by_id: dict[str, np.ndarray],
    interest,
    impact=None,
    n_bins: int = 50,
    subsets: tuple[tuple[str, float], ...] = (("all", 1.0), ("top50", 0.5), ("top25", 0.25)),
) -> list[dict]:
    """Per-feature, per-impact-subset bin summaries of z-scored features.

    Rows carry (feature_id, subset, bin, mean_feature, mean_interest,
    std_interest); features with zero variance in a subset are skipped.
    """
    interest = np.asarray(interest, dtype=float)
    rows = []
    for name, quantile in subsets:
        if quantile >= 1.0 or impact is None:
            mask = np.ones(len(interest), dtype=bool)
            if quantile < 1.0:
                continue
        else:
            imp = np.asarray(impact, dtype=float)
            k = int(np.ceil(quantile * len(imp)))
            threshold = np.sort(imp)[::-1][k - 1]
            mask = imp >= threshold
        for fid, column in features_by_id.items():
            column = np.asarray(column, dtype=float)[mask]
            try:
                z = zscore(column)
            except ValueError:
                log.warning("skipping constant feature %s in subset %s", fid, name)
                continue
            for b, (mf, mi, si) in enumerate(bin_aggregate(z, interest[mask], n_bins)):
                rows.append(
                    {
                        "feature_id": fid,
                        "subset": name,
                        "bin": b,
                        "mean_feature": mf,
                        "mean_interest": mi,
                        "std_interest": si,
                    }
                )
    return rows


def export_trends(path: str | Path, rows: list[dict]) -> None:
    """Write trend_rows output as CSV (one bin per row)."""
    fields = ["feature_id", "subset", "bin", "mean_feature", "mean_interest", "std_interest"]
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def export_feature_matrix(path: str | Path, vectors: list[FeatureVector]) -> None:
    """CSV with pair identity columns and one column per catalog feature."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["concept_a", "concept_b", *CATALOG.feature_ids])
        for vec in vectors:
            writer.writerow([vec.pair[0], vec.pair[1], *(repr(float(v)) for v in vec.values)])


def load_feature_matrix(path: str | Path) -> list[FeatureVector]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[2:] != CATALOG.feature_ids:
            raise ValueError("feature matrix header does not match the catalog")
        return [
            FeatureVector(pair=(row[0], row[1]), values=np.array([float(v) for v in row[2:]]))
            for row in reader
        ]
