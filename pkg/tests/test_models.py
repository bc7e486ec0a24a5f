"""Network gradients, ranking metrics, cross-validation, impact proxy."""

import math

import numpy as np
import pytest

from muse.kgraph import KnowledgeGraph
from muse.models import (
    LabeledExample,
    InterestModel,
    TrainingConfig,
    auc,
    init_params,
    loss_and_grads,
    mc_cross_validate,
    predict,
    random_hit_probability,
    roc_curve,
    select_top_features,
    topn_hit_probability,
    topn_precision,
    train_impact_proxy,
    train_interest_model,
)


# -- gradients ----------------------------------------------------------


def numerical_gradient(params, x, y, weight_decay, mask, key, h=1e-6):
    grad = np.zeros_like(params[key])
    flat = params[key].reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up, _ = loss_and_grads(params, x, y, weight_decay, mask)
        flat[i] = orig - h
        down, _ = loss_and_grads(params, x, y, weight_decay, mask)
        flat[i] = orig
        gflat[i] = (up - down) / (2 * h)
    return grad


def relative_error(a, b):
    denom = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return np.linalg.norm(a - b) / denom


def gradient_check_instances(n_instances, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        n = int(rng.integers(3, 8))
        params = init_params(rng)
        x = rng.normal(size=(n, 25))
        y = rng.integers(0, 2, size=n).astype(float)
        decay = float(rng.choice([0.0, 7e-4, 1e-2]))
        mask = None
        if rng.random() < 0.5:
            mask = (rng.random((n, 50)) < 0.8) / 0.8  # fixed dropout mask
        _, grads = loss_and_grads(params, x, y, decay, mask)
        for key in params:
            num = numerical_gradient(params, x, y, decay, mask, key)
            worst = max(worst, relative_error(grads[key], num))
    return worst


def test_gradients_match_central_differences():
    assert gradient_check_instances(10, seed=1) < 1e-4


# -- training ------------------------------------------------------------


def separable_examples(n, rng, informative=1.0):
    x = rng.normal(size=(n, 25))
    score = informative * x[:, 0] + 0.3 * rng.normal(size=n)
    labels = (score > 0).astype(int)
    return [LabeledExample.from_rating(x[i], 5 if labels[i] else 1) for i in range(n)]


def test_training_deterministic_and_zero_epochs():
    rng = np.random.default_rng(2)
    data = separable_examples(80, rng)
    m1 = train_interest_model(data, TrainingConfig(epochs=30), seed=9)
    m2 = train_interest_model(data, TrainingConfig(epochs=30), seed=9)
    for key in m1.params:
        assert np.array_equal(m1.params[key], m2.params[key])
    frozen = train_interest_model(data, TrainingConfig(epochs=0), seed=9)
    init = init_params(np.random.default_rng(9))
    for key in init:
        assert np.array_equal(frozen.params[key], init[key])


def test_training_rejects_bad_data():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(60, 25))
    with pytest.raises(ValueError):
        train_interest_model((x, np.ones(60)))  # single class
    with pytest.raises(ValueError):
        train_interest_model((x[:10], np.r_[np.ones(5), np.zeros(5)]))  # too few


def test_training_learns_separable_signal():
    rng = np.random.default_rng(4)
    train = separable_examples(400, rng)
    test = separable_examples(200, rng)
    model = train_interest_model(train, TrainingConfig(epochs=300), seed=0)
    scores = predict(model, np.stack([e.values for e in test]))
    assert auc(scores, [e.label for e in test]) >= 0.9


def test_predict_contract():
    rng = np.random.default_rng(5)
    data = separable_examples(80, rng)
    model = train_interest_model(data, TrainingConfig(epochs=10), seed=1)
    x = rng.normal(size=25)
    assert predict(model, x) == predict(model, x)
    assert 0.0 <= predict(model, x) <= 1.0
    with pytest.raises(ValueError):
        predict(model, np.zeros(24))
    with pytest.raises(ValueError):
        predict(model, np.full(25, np.nan))
    zero = {k: np.zeros_like(v) for k, v in model.params.items()}
    constant = InterestModel(zero, 0.2, 0, TrainingConfig())
    assert predict(constant, x) == 0.5  # logistic of zero bias


def test_predict_matches_forward_oracle():
    rng = np.random.default_rng(6)
    model = train_interest_model(separable_examples(80, rng), TrainingConfig(epochs=5), seed=2)
    x = rng.normal(size=(4, 25))
    h = np.maximum(x @ model.params["w1"] + model.params["b1"], 0)
    z = h @ model.params["w2"] + model.params["b2"]
    want = 1 / (1 + np.exp(-z[:, 0]))
    assert predict(model, x) == pytest.approx(want, abs=1e-10)


def test_model_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    model = train_interest_model(separable_examples(80, rng), TrainingConfig(epochs=5), seed=3)
    path = tmp_path / "model.npz"
    model.save(path)
    loaded = InterestModel.load(path)
    for key in model.params:
        assert np.array_equal(loaded.params[key], model.params[key])
    assert loaded.config == model.config
    assert loaded.feature_ids == model.feature_ids


# -- auc / roc ------------------------------------------------------------


def auc_pairwise(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else (0.5 if p == q else 0.0)
    return total / (len(pos) * len(neg))


def test_auc_basics():
    assert auc([0.9, 0.1], [1, 0]) == 1.0
    assert auc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0]) == 0.5
    with pytest.raises(ValueError):
        auc([0.1, 0.2], [1, 1])


def test_auc_matches_pairwise_oracle():
    rng = np.random.default_rng(8)
    for _ in range(20):
        n = 100
        scores = np.round(rng.random(n), 2)  # ties likely
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        assert abs(auc(scores, labels) - auc_pairwise(scores, labels)) < 1e-12


def test_auc_invariant_under_monotone_transform():
    rng = np.random.default_rng(9)
    scores = rng.random(60)
    labels = rng.integers(0, 2, size=60)
    labels[0], labels[1] = 0, 1
    base = auc(scores, labels)
    assert auc(np.exp(scores) * 3 + 1, labels) == pytest.approx(base, abs=1e-12)
    assert topn_precision(scores, labels, 5) == topn_precision(scores * 10 + 2, labels, 5)


def trapezoid(points):
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2
    return area


def test_roc_curve_properties_and_area():
    rng = np.random.default_rng(10)
    for _ in range(10):
        n = 80
        scores = np.round(rng.random(n), 1)
        labels = rng.integers(0, 2, size=n)
        labels[0], labels[1] = 0, 1
        points = roc_curve(scores, labels)
        assert points[0] == (0.0, 0.0) and points[-1] == (1.0, 1.0)
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        assert xs == sorted(xs) and ys == sorted(ys)
        assert abs(trapezoid(points) - auc(scores, labels)) < 1e-12


def test_roc_perfect_separation_passes_corner():
    points = roc_curve([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
    assert (0.0, 1.0) in points


# -- top-n ------------------------------------------------------------------


def test_topn_precision():
    scores = [0.9, 0.8, 0.7, 0.1]
    labels = [1, 1, 0, 1]
    assert topn_precision(scores, labels, 3) == pytest.approx(2 / 3)
    assert topn_precision(scores, labels, 4) == pytest.approx(3 / 4)  # base rate at n=N
    with pytest.raises(ValueError):
        topn_precision(scores, labels, 0)
    with pytest.raises(ValueError):
        topn_precision(scores, labels, 5)


def test_topn_precision_matches_sort_oracle():
    rng = np.random.default_rng(11)
    scores = rng.random(10)
    labels = rng.integers(0, 2, size=10)
    order = np.argsort(-scores, kind="stable")
    for n in range(1, 11):
        want = labels[order[:n]].mean()
        assert topn_precision(scores, labels, n) == pytest.approx(want)


def test_topn_hit_probability_extremes():
    scores = [0.4, 0.3, 0.2, 0.1]
    assert topn_hit_probability(scores, [1, 1, 1, 1], 2, trials=50, seed=0) == 1.0
    assert topn_hit_probability(scores, [0, 0, 0, 0], 2, trials=50, seed=0) == 0.0


def test_random_hit_probability_hand_computed():
    assert random_hit_probability(4, 1, 2) == pytest.approx(0.5)
    assert random_hit_probability(10, 0, 3) == 0.0
    assert random_hit_probability(10, 8, 3) == 1.0  # n > N - P forces a positive


def test_random_hit_probability_matches_enumeration():
    import itertools

    n_items = 10
    for n_pos in range(0, n_items + 1):
        labels = [1] * n_pos + [0] * (n_items - n_pos)
        for n in range(1, n_items + 1):
            hits = sum(
                1 for combo in itertools.combinations(range(n_items), n)
                if any(labels[i] for i in combo)
            )
            want = hits / math.comb(n_items, n)
            assert random_hit_probability(n_items, n_pos, n) == pytest.approx(want, abs=1e-12)


# -- cross-validation --------------------------------------------------------


def test_mc_cv_separable_converges():
    rng = np.random.default_rng(12)
    data = separable_examples(500, rng, informative=2.0)
    report = mc_cross_validate(
        data, TrainingConfig(epochs=150), target_sem=0.02, max_iters=40, min_iters=5, seed=0
    )
    assert report.converged
    assert report.mean_auc >= 0.9
    assert report.std_of_mean < 0.02
    assert report.iterations >= 5


def test_mc_cv_shuffled_labels_near_half():
    rng = np.random.default_rng(13)
    x = rng.normal(size=(300, 25))
    labels = rng.integers(0, 2, size=300).astype(float)
    report = mc_cross_validate(
        (x, labels), TrainingConfig(epochs=30), target_sem=0.012, max_iters=40, min_iters=8, seed=1
    )
    assert 0.4 <= report.mean_auc <= 0.6


def test_mc_cv_bad_split():
    rng = np.random.default_rng(14)
    data = separable_examples(100, rng)
    with pytest.raises(ValueError):
        mc_cross_validate(data, split=(0.8, 0.3, 0.1))


def test_mc_cv_sem_shrinks_with_iterations():
    rng = np.random.default_rng(19)
    data = separable_examples(200, rng)
    report = mc_cross_validate(
        data, TrainingConfig(epochs=20), target_sem=0.0, max_iters=40, min_iters=40, seed=3
    )
    aucs = np.array(report.aucs)
    sem_early = aucs[:10].std(ddof=1) / np.sqrt(10)
    sem_late = aucs.std(ddof=1) / np.sqrt(len(aucs))
    # stationary data: the standard error of the mean shrinks roughly as 1/sqrt(n)
    assert sem_late < sem_early
    assert report.std_of_mean == pytest.approx(sem_late)


def test_mc_cv_nonconverged_flag():
    rng = np.random.default_rng(15)
    data = separable_examples(120, rng, informative=0.2)
    report = mc_cross_validate(
        data, TrainingConfig(epochs=5), target_sem=1e-9, max_iters=4, min_iters=2, seed=2
    )
    assert not report.converged
    assert report.iterations == 4


# -- feature selection ---------------------------------------------------------


def test_select_top_features_planted():
    rng = np.random.default_rng(16)
    n = 400
    x = rng.normal(size=(n, 6))
    labels = (x[:, 3] + 0.1 * rng.normal(size=n) > 0).astype(int)
    ids = [f"f{i}" for i in range(6)]
    picked = select_top_features(x, labels, ids, k=3)
    assert picked[0] == "f3"
    x[:, 1] = 7.0  # constant feature ties at 0.5
    ranked = select_top_features(x, labels, ids, k=6)
    assert set(ranked) == set(ids)
    full = select_top_features(x, labels, ids, k=6)
    assert len(full) == 6


def test_select_top_features_negative_signal_counts():
    rng = np.random.default_rng(17)
    n = 400
    x = rng.normal(size=(n, 3))
    labels = (x[:, 2] < 0).astype(int)  # anti-correlated
    picked = select_top_features(x, labels, [f"f{i}" for i in range(3)], k=1)
    assert picked == ["f2"]


# -- impact proxy -----------------------------------------------------------


def planted_growth_graph(alpha=3.0):
    """Edges gain citations after the base year proportional to their degree sum."""
    rng = np.random.default_rng(18)
    g = KnowledgeGraph(cutoff_year=2023)
    names = [f"v{i:02d} node" for i in range(16)]
    edges = set()
    while len(edges) < 40:
        i, j = rng.choice(16, size=2, replace=False)
        edges.add((min(i, j), max(i, j)))
    for i, j in sorted(edges):
        year = int(rng.integers(2016, 2021))
        g._edge(names[i], names[j]).papers_by_year[year] = 1
        g._vertex(names[i]).papers_by_year[year] = g._vertex(names[i]).papers_by_year.get(year, 0) + 1
        g._vertex(names[j]).papers_by_year[year] = g._vertex(names[j]).papers_by_year.get(year, 0) + 1
    g.freeze()
    base_snap_degrees = {}
    for name in names:
        base_snap_degrees[name] = sum(
            1 for (a, b) in g.edges if name in (a, b)
        )
    for (a, b), stats in g.edges.items():
        gain = alpha * (base_snap_degrees[a] + base_snap_degrees[b])
        stats.citations_by_year[2023] = int(gain)
    return g, names, base_snap_degrees


def test_impact_proxy_recovers_degree_rule():
    from scipy.stats import spearmanr

    g, names, degrees = planted_growth_graph()
    model = train_impact_proxy(g, horizon_years=2, seed=0, config=TrainingConfig(epochs=400))
    pairs = sorted(g.edges)
    scores = model.score_pairs(pairs)
    truth = [degrees[a] + degrees[b] for a, b in pairs]
    rho = spearmanr(scores, truth).statistic
    assert rho >= 0.8


def test_impact_proxy_errors():
    g = KnowledgeGraph(cutoff_year=2023)
    g._edge("a node", "b node").papers_by_year[2023] = 1
    g.freeze()
    with pytest.raises(ValueError):
        train_impact_proxy(g, horizon_years=0)
    with pytest.raises(ValueError):
        train_impact_proxy(g, horizon_years=2)  # nothing alive at 2021


def test_impact_proxy_deterministic():
    g, _, _ = planted_growth_graph()
    m1 = train_impact_proxy(g, horizon_years=2, seed=5, config=TrainingConfig(epochs=20))
    m2 = train_impact_proxy(g, horizon_years=2, seed=5, config=TrainingConfig(epochs=20))
    for key in m1.net.params:
        assert np.array_equal(m1.net.params[key], m2.net.params[key])
