"""Researcher profiles, refinement prompt, and semantic distances."""

import numpy as np
import pytest

from muse.corpus import PaperRecord, parse_corpus
from muse.judge import JudgeClient
from muse.kgraph import build_graph
from muse.profiles import (
    UnusableProfileError,
    build_profile,
    build_refine_prompt,
    extract_researcher_concepts,
    load_profiles,
    make_pair,
    refine_profile,
    semantic_distance_concepts,
    semantic_distance_neighborhood,
)
from tests.test_corpus import record, write_jsonl

LEXICON = {"alpha signal", "beta signal", "gamma signal", "delta signal"}


def paper(pid, year, title, abstract=""):
    return PaperRecord(pid, title, abstract, year, {})


def test_extract_union_of_recent_papers():
    papers = [paper("p1", 2023, "alpha signal and beta signal")]
    assert extract_researcher_concepts(papers, LEXICON) == {"alpha signal", "beta signal"}


def test_extract_window_excludes_old_papers():
    papers = [
        paper("p1", 2023, "alpha signal here"),
        paper("p2", 2020, "gamma signal there"),  # outside the 2-year window
    ]
    assert extract_researcher_concepts(papers, LEXICON, window_years=2) == {"alpha signal"}


def test_extract_empty_is_error():
    with pytest.raises(UnusableProfileError):
        extract_researcher_concepts([], LEXICON)


def test_extract_matches_brute_force():
    rng = np.random.default_rng(0)
    vocab = sorted(LEXICON)
    papers = []
    for i in range(10):
        year = int(rng.integers(2019, 2024))
        k = int(rng.integers(1, 4))
        title = " with ".join(vocab[j] for j in rng.choice(4, size=k, replace=False))
        papers.append(paper(f"p{i}", year, title))
    newest = max(p.year for p in papers)
    expected = set()
    for p in papers:
        if p.year > newest - 2:
            expected |= {v for v in vocab if v in p.text}
    assert extract_researcher_concepts(papers, LEXICON) == expected


def test_refine_prompt_numbering():
    prompt = build_refine_prompt(["First title", "Second title"], ["alpha signal", "beta signal"])
    assert "0) First title\n1) Second title" in prompt
    assert "concept list=[alpha signal, beta signal]" in prompt


def keep_judge(drop=()):
    def complete(prompt):
        concepts = prompt.split("concept list=[", 1)[1].rstrip("]").split(", ")
        return "\n".join(c for c in concepts if c not in drop)

    return JudgeClient.from_callable(complete)


def test_refine_identity_and_subset():
    raw = {"alpha signal", "beta signal"}
    papers = [paper("p1", 2023, "alpha signal and beta signal")]
    assert refine_profile(raw, papers, keep_judge()) == raw
    dropped = refine_profile(raw, papers, keep_judge(drop=("beta signal",)))
    assert dropped == {"alpha signal"}
    assert dropped <= raw


def test_refine_removes_generic_term():
    raw = {"artificial intelligence", "gouy phase"}
    papers = [paper("p1", 2023, "optics work")]
    out = refine_profile(raw, papers, keep_judge(drop=("artificial intelligence",)))
    assert out == {"gouy phase"}


def test_refine_fallback_on_transport_failure():
    def broken(prompt):
        raise ConnectionError("down")

    judge = JudgeClient.from_callable(broken)
    judge.retries = 2
    raw = {"alpha signal"}
    papers = [paper("p1", 2023, "alpha signal")]
    assert refine_profile(raw, papers, judge) == raw
    profile = build_profile("r1", papers, LEXICON, judge=judge)
    assert profile.refine_fallback
    assert profile.concepts == frozenset(raw)


def test_build_profile_orders_papers_newest_first():
    papers = [
        paper("p1", 2022, "alpha signal one"),
        paper("p2", 2023, "beta signal two"),
        paper("p3", 2023, "gamma signal three"),
    ]
    profile = build_profile("r1", papers, LEXICON)
    assert [p.paper_id for p in profile.papers] == ["p2", "p3", "p1"]
    assert profile.recent_titles(2) == ["beta signal two", "gamma signal three"]


def test_distance_concepts_examples():
    a = {"w x", "y z", "q r", "s t"}
    b = {"w x", "y z", "m n", "o p"}
    assert semantic_distance_concepts(a, a) == 0.0
    assert semantic_distance_concepts({"w x"}, {"y z"}) == 1.0
    assert semantic_distance_concepts(a, b) == pytest.approx(1 - 2 / 6)
    with pytest.raises(ValueError):
        semantic_distance_concepts(set(), a)


def test_distance_symmetry():
    rng = np.random.default_rng(1)
    universe = [f"c{i} x" for i in range(20)]
    for _ in range(30):
        a = {universe[i] for i in rng.choice(20, size=int(rng.integers(1, 10)), replace=False)}
        b = {universe[i] for i in rng.choice(20, size=int(rng.integers(1, 10)), replace=False)}
        d_ab = semantic_distance_concepts(a, b)
        assert d_ab == semantic_distance_concepts(b, a)
        assert 0.0 <= d_ab <= 1.0
        assert (d_ab == 0.0) == (a == b)


def graph_for_distance(tmp_path):
    rows = [
        record(0, year=2020, title="alpha signal and beta signal"),
        record(1, year=2021, title="gamma signal and delta signal"),
        record(2, year=2022, title="beta signal and gamma signal"),
    ]
    corpus = parse_corpus(write_jsonl(tmp_path / "c.jsonl", rows), cutoff_year=2023)
    return build_graph(corpus, LEXICON)


def test_distance_neighborhood(tmp_path):
    g = graph_for_distance(tmp_path)
    snap = g.snapshot(2023)
    assert semantic_distance_neighborhood({"alpha signal"}, {"alpha signal"}, snap) == 0.0
    # expansions: {alpha,beta} vs {gamma,delta,beta} -> intersection {beta}
    d = semantic_distance_neighborhood({"alpha signal"}, {"gamma signal"}, snap)
    union = {"alpha signal", "beta signal", "gamma signal", "delta signal"}
    assert d == pytest.approx(1 - 1 / len(union))


def test_distance_neighborhood_disjoint(tmp_path):
    rows = [
        record(0, year=2020, title="alpha signal and beta signal"),
        record(1, year=2021, title="gamma signal and delta signal"),
    ]
    corpus = parse_corpus(write_jsonl(tmp_path / "c.jsonl", rows), cutoff_year=2023)
    snap = build_graph(corpus, LEXICON).snapshot(2023)
    assert semantic_distance_neighborhood({"alpha signal"}, {"gamma signal"}, snap) == 1.0


def test_distance_neighborhood_matches_expansion_oracle(tmp_path):
    rng = np.random.default_rng(2)
    vocab = [f"n{i:02d} node" for i in range(20)]
    rows = []
    for i in range(60):
        picks = rng.choice(20, size=2, replace=False)
        rows.append(record(i, year=2020, title=f"{vocab[picks[0]]} and {vocab[picks[1]]}"))
    corpus = parse_corpus(write_jsonl(tmp_path / "d.jsonl", rows), cutoff_year=2023)
    g = build_graph(corpus, set(vocab))
    snap = g.snapshot(2023)
    present = sorted(g.vertex_stats)
    for _ in range(20):
        a = {present[i] for i in rng.choice(len(present), size=3, replace=False)}
        b = {present[i] for i in rng.choice(len(present), size=3, replace=False)}
        expanded_a = set(a)
        expanded_b = set(b)
        for c in a:
            expanded_a |= snap.neighbors(c)
        for c in b:
            expanded_b |= snap.neighbors(c)
        want = 1 - len(expanded_a & expanded_b) / len(expanded_a | expanded_b)
        assert semantic_distance_neighborhood(a, b, snap) == pytest.approx(want)


def test_make_pair_symmetric(tmp_path):
    g = graph_for_distance(tmp_path)
    snap = g.snapshot(2023)
    pa = build_profile("ra", [paper("p1", 2023, "alpha signal and beta signal")], LEXICON)
    pb = build_profile("rb", [paper("p2", 2023, "gamma signal and delta signal")], LEXICON)
    ab = make_pair(pa, pb, snap)
    ba = make_pair(pb, pa, snap)
    assert ab.distance_concept == ba.distance_concept
    assert ab.distance_neighborhood == ba.distance_neighborhood


def test_load_profiles(tmp_path):
    rows = [record(i, year=2023, title="alpha signal and beta signal") for i in range(3)]
    corpus = parse_corpus(write_jsonl(tmp_path / "c.jsonl", rows), cutoff_year=2023)
    lines = [
        {"researcher_id": "r1", "paper_ids": ["p000", "p001"]},
        {"researcher_id": "r2", "papers": [record(9, year=2022, title="gamma signal and delta signal")]},
    ]
    path = write_jsonl(tmp_path / "profiles.jsonl", lines)
    loaded = load_profiles(path, corpus)
    assert [d["researcher_id"] for d in loaded] == ["r1", "r2"]
    assert [p.paper_id for p in loaded[0]["papers"]] == ["p000", "p001"]
    assert loaded[1]["papers"][0].title == "gamma signal and delta signal"
