"""Interest prediction and ranking metrics.

The interest model is a small fully connected network (25 inputs, one
hidden layer of 50 rectified-linear units with inverted dropout, one
logistic output) trained full-batch on mean squared error against the
binary high-interest label, with L2 weight decay and Adam-style adaptive
moments (a 0.003 learning rate presumes them). Training is
bit-deterministic given a seed. Monte Carlo cross-validation repeatedly
re-splits the data and stops once the standard error of the mean test
AUC falls below a target.

Everything numeric lives on float64 numpy; gradients are analytic and are
checked against central finite differences in the test suite, so the
loss/gradient helpers are part of the module surface.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .features import CATALOG, TOP25_FEATURE_IDS, compute_pair_features

__all__ = [
    "TrainingConfig",
    "LabeledExample",
    "InterestModel",
    "CvReport",
    "ImpactModel",
    "train_interest_model",
    "predict",
    "mc_cross_validate",
    "auc",
    "roc_curve",
    "topn_precision",
    "topn_hit_probability",
    "random_hit_probability",
    "select_top_features",
    "train_impact_proxy",
    "init_params",
    "loss_and_grads",
    "PROXY_FEATURE_IDS",
]

N_INPUTS = 25
N_HIDDEN = 50


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.003
    dropout_rate: float = 0.20
    weight_decay: float = 0.0007
    epochs: int = 200
    split: tuple[float, float, float] = (0.75, 0.15, 0.10)


@dataclass(frozen=True)
class LabeledExample:
    """Top-25 feature values with a 1-5 rating and its binary label."""

    values: np.ndarray
    rating: int
    label: int

    def __post_init__(self):
        if self.rating not in (1, 2, 3, 4, 5):
            raise ValueError(f"rating must be 1..5, got {self.rating}")
        if self.label != int(self.rating >= 4):
            raise ValueError("label must be 1 iff rating >= 4")

    @classmethod
    def from_rating(cls, values, rating: int) -> "LabeledExample":
        return cls(np.asarray(values, dtype=float), rating, int(rating >= 4))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def init_params(rng: np.random.Generator, n_inputs: int = N_INPUTS, n_hidden: int = N_HIDDEN) -> dict:
    """He-scaled weights, zero biases."""
    return {
        "w1": rng.standard_normal((n_inputs, n_hidden)) * math.sqrt(2.0 / n_inputs),
        "b1": np.zeros(n_hidden),
        "w2": rng.standard_normal((n_hidden, 1)) * math.sqrt(2.0 / n_hidden),
        "b2": np.zeros(1),
    }


class _Adam:
    """Standard first/second-moment updates with bias correction."""

    def __init__(self, params: dict, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        for key in params:
            self.m[key] = self.beta1 * self.m[key] + (1 - self.beta1) * grads[key]
            self.v[key] = self.beta2 * self.v[key] + (1 - self.beta2) * grads[key] ** 2
            m_hat = self.m[key] / (1 - self.beta1**self.t)
            v_hat = self.v[key] / (1 - self.beta2**self.t)
            params[key] = params[key] - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _forward(params: dict, x: np.ndarray, dropout_mask: np.ndarray | None = None):
    z1 = x @ params["w1"] + params["b1"]
    h = np.maximum(z1, 0.0)
    if dropout_mask is not None:
        h = h * dropout_mask
    z2 = h @ params["w2"] + params["b2"]
    return _sigmoid(z2)[:, 0], (z1, h)


def loss_and_grads(
    params: dict,
    x: np.ndarray,
    y: np.ndarray,
    weight_decay: float = 0.0,
    dropout_mask: np.ndarray | None = None,
) -> tuple[float, dict]:
    """MSE + (decay/2)*||W||^2 and its analytic gradients.

    ``dropout_mask`` is an already-scaled inverted-dropout mask (or None);
    passing it explicitly keeps the function deterministic and checkable.
    """
    n = len(y)
    p, (z1, h) = _forward(params, x, dropout_mask)
    diff = p - y
    loss = float(diff @ diff) / n
    loss += 0.5 * weight_decay * (float((params["w1"] ** 2).sum()) + float((params["w2"] ** 2).sum()))

    dp = 2.0 * diff / n
    dz2 = dp * p * (1.0 - p)
    grads = {
        "w2": h.T @ dz2[:, None] + weight_decay * params["w2"],
        "b2": np.array([dz2.sum()]),
    }
    dh = dz2[:, None] @ params["w2"].T
    if dropout_mask is not None:
        dh = dh * dropout_mask
    dz1 = dh * (z1 > 0)
    grads["w1"] = x.T @ dz1 + weight_decay * params["w1"]
    grads["b1"] = dz1.sum(axis=0)
    return loss, grads


@dataclass
class InterestModel:
    """Trained 25-50-1 network with its provenance."""

    params: dict
    dropout_rate: float
    seed: int
    config: TrainingConfig
    catalog_version: str = CATALOG.version
    feature_ids: tuple[str, ...] = TOP25_FEATURE_IDS
    best_epoch: int = -1

    def save(self, path: str | Path) -> None:
        meta = {
            "schema": "muse.model/v1",
            "architecture": [self.params["w1"].shape[0], self.params["w1"].shape[1], 1],
            "dropout_rate": self.dropout_rate,
            "seed": self.seed,
            "config": {
                "learning_rate": self.config.learning_rate,
                "dropout_rate": self.config.dropout_rate,
                "weight_decay": self.config.weight_decay,
                "epochs": self.config.epochs,
                "split": list(self.config.split),
            },
            "catalog_version": self.catalog_version,
            "feature_ids": list(self.feature_ids),
            "best_epoch": self.best_epoch,
        }
        np.savez(
            Path(path),
            meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8),
            **self.params,
        )

    @classmethod
    def load(cls, path: str | Path) -> "InterestModel":
        with np.load(Path(path)) as data:
            meta = json.loads(bytes(data["meta"]).decode("utf-8"))
            params = {k: data[k] for k in ("w1", "b1", "w2", "b2")}
        cfg = meta["config"]
        return cls(
            params=params,
            dropout_rate=meta["dropout_rate"],
            seed=meta["seed"],
            config=TrainingConfig(
                learning_rate=cfg["learning_rate"],
                dropout_rate=cfg["dropout_rate"],
                weight_decay=cfg["weight_decay"],
                epochs=cfg["epochs"],
                split=tuple(cfg["split"]),
            ),
            catalog_version=meta["catalog_version"],
            feature_ids=tuple(meta["feature_ids"]),
            best_epoch=meta["best_epoch"],
        )


def _as_xy(data) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(data, tuple):
        x, y = data
        return np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    x = np.stack([ex.values for ex in data]).astype(float)
    y = np.array([ex.label for ex in data], dtype=float)
    return x, y


def train_interest_model(
    data,
    config: TrainingConfig | None = None,
    seed: int = 0,
    val_data=None,
    min_examples: int = 50,
) -> InterestModel:
    """Full-batch gradient descent on MSE with dropout and weight decay.

    With ``val_data`` the epoch with the best validation AUC wins (epoch
    selection); otherwise the final epoch's weights are kept. Identical
    seeds give bit-identical models.
    """
    config = config or TrainingConfig()
    x, y = _as_xy(data)
    if len(y) < min_examples:
        raise ValueError(f"need at least {min_examples} examples, got {len(y)}")
    if len(np.unique(y)) < 2:
        raise ValueError("training data must contain both classes")
    rng = np.random.default_rng(seed)
    params = init_params(rng, n_inputs=x.shape[1])
    keep = 1.0 - config.dropout_rate
    opt = _Adam(params, config.learning_rate)

    best = None
    if val_data is not None:
        xv, yv = _as_xy(val_data)

    for epoch in range(config.epochs):
        mask = None
        if config.dropout_rate > 0:
            mask = (rng.random((len(y), N_HIDDEN)) < keep) / keep
        loss, grads = loss_and_grads(params, x, y, config.weight_decay, mask)
        if not np.isfinite(loss):
            raise ArithmeticError(f"training diverged at epoch {epoch}: loss={loss}")
        opt.step(params, grads)
        if val_data is not None:
            scores, _ = _forward(params, xv)
            val_auc = auc(scores, yv)
            if best is None or val_auc > best[0]:
                best = (val_auc, epoch, {k: v.copy() for k, v in params.items()})

    best_epoch = config.epochs - 1
    if best is not None:
        _, best_epoch, params = best
    return InterestModel(
        params=params,
        dropout_rate=config.dropout_rate,
        seed=seed,
        config=config,
        best_epoch=best_epoch,
    )


def predict(model: InterestModel, features) -> np.ndarray | float:
    """Deterministic score in [0, 1]; dropout is inference-disabled."""
    arr = np.asarray(features, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.shape[1] != model.params["w1"].shape[0]:
        raise ValueError(
            f"expected {model.params['w1'].shape[0]} features, got {arr.shape[1]}"
        )
    if not np.isfinite(arr).all():
        raise ValueError("features must be finite")
    scores, _ = _forward(model.params, arr)
    return float(scores[0]) if single else scores


def auc(scores, labels) -> float:
    """Rank-based AUC: P(score+ > score-) + 0.5 P(tie)."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes")
    order = np.argsort(s, kind="mergesort")
    sorted_s = s[order]
    _, inverse, counts = np.unique(sorted_s, return_inverse=True, return_counts=True)
    cum = np.cumsum(counts)
    avg_rank = (cum - counts + 1 + cum) / 2.0
    ranks = np.empty(len(s))
    ranks[order] = avg_rank[inverse]
    pos_rank_sum = ranks[y == 1].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def roc_curve(scores, labels) -> list[tuple[float, float]]:
    """Threshold-sweep ROC from (0,0) to (1,1); ties grouped.

    The trapezoid area under the returned points equals :func:`auc`.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both classes")
    order = np.argsort(-s, kind="mergesort")
    sorted_s = s[order]
    sorted_y = y[order]
    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    n = len(s)
    while i < n:
        j = i
        while j < n and sorted_s[j] == sorted_s[i]:
            j += 1
        tp += int((sorted_y[i:j] == 1).sum())
        fp += int((sorted_y[i:j] == 0).sum())
        points.append((fp / n_neg, tp / n_pos))
        i = j
    return points


def topn_precision(scores, labels, n: int) -> float:
    """Fraction of positives among the n highest-scored items.

    Ties break by stable input order, so rankings are reproducible.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels)
    if n <= 0:
        raise ValueError("n must be positive")
    if n > len(s):
        raise ValueError(f"n={n} exceeds {len(s)} items")
    top = np.argsort(-s, kind="stable")[:n]
    return float((y[top] == 1).sum() / n)


def topn_hit_probability(scores, labels, n: int, trials: int = 2000, seed: int = 0) -> float:
    """Probability that the model's top-n contains at least one positive.

    Estimated over bootstrap resamples of the evaluation set, so the
    number reflects ranking stability rather than a single fixed split.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels)
    if n <= 0:
        raise ValueError("n must be positive")
    if n > len(s):
        raise ValueError(f"n={n} exceeds {len(s)} items")
    rng = np.random.default_rng(seed)
    hits = 0
    n_items = len(s)
    for _ in range(trials):
        idx = rng.integers(0, n_items, n_items)
        top = np.argsort(-s[idx], kind="stable")[:n]
        if (y[idx][top] == 1).any():
            hits += 1
    return hits / trials


def random_hit_probability(n_items: int, n_pos: int, n: int) -> float:
    """Exact chance that a uniform random top-n contains a positive."""
    if not 0 < n <= n_items or not 0 <= n_pos <= n_items:
        raise ValueError("need 0 < n <= n_items and 0 <= n_pos <= n_items")
    if n_pos == 0:
        return 0.0
    if n > n_items - n_pos:
        return 1.0
    return 1.0 - math.comb(n_items - n_pos, n) / math.comb(n_items, n)


@dataclass(frozen=True)
class CvReport:
    aucs: tuple[float, ...]
    mean_auc: float
    std_of_mean: float
    iterations: int
    converged: bool


def _split_indices(rng, n, split, y, max_tries=100):
    n_train = int(round(split[0] * n))
    n_val = int(round(split[1] * n))
    for _ in range(max_tries):
        perm = rng.permutation(n)
        train = perm[:n_train]
        val = perm[n_train : n_train + n_val]
        test = perm[n_train + n_val :]
        parts = (train, val, test)
        if all(len(p) and len(np.unique(y[p])) == 2 for p in parts):
            return parts
    raise ValueError("could not draw a split with both classes in every part")


def mc_cross_validate(
    data,
    config: TrainingConfig | None = None,
    split: tuple[float, float, float] = (0.75, 0.15, 0.10),
    target_sem: float = 0.01 / 3,
    max_iters: int = 200,
    min_iters: int = 10,
    seed: int = 0,
) -> CvReport:
    """Repeated random re-splitting with a standard-error stopping rule.

    Each iteration re-splits the data, trains with validation-based epoch
    selection, and records the test AUC. Iteration stops once the sample
    standard deviation of the mean AUC drops below ``target_sem`` (after
    ``min_iters``), or at ``max_iters`` with the report flagged as not
    converged.
    """
    config = config or TrainingConfig()
    if abs(sum(split) - 1.0) > 1e-9:
        raise ValueError(f"split fractions must sum to 1, got {split}")
    x, y = _as_xy(data)
    rng = np.random.default_rng(seed)
    aucs: list[float] = []
    converged = False
    while len(aucs) < max_iters:
        iter_seed = int(rng.integers(0, 2**63 - 1))
        split_rng = np.random.default_rng(iter_seed)
        train, val, test = _split_indices(split_rng, len(y), split, y)
        model = train_interest_model(
            (x[train], y[train]),
            config=config,
            seed=iter_seed,
            val_data=(x[val], y[val]),
            min_examples=2,
        )
        aucs.append(auc(predict(model, x[test]), y[test]))
        if len(aucs) >= max(2, min_iters):
            sem = float(np.std(aucs, ddof=1) / math.sqrt(len(aucs)))
            if sem < target_sem:
                converged = True
                break
    arr = np.array(aucs)
    sem = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else float("inf")
    return CvReport(
        aucs=tuple(float(a) for a in arr),
        mean_auc=float(arr.mean()),
        std_of_mean=sem,
        iterations=len(arr),
        converged=converged,
    )


def select_top_features(x_full: np.ndarray, labels, feature_ids, k: int = 25) -> list[str]:
    """Rank features by single-feature AUC (sign-folded), keep the top k.

    A feature's importance is max(AUC, 1-AUC) of using the raw column as
    the score; constant columns tie at 0.5. Ties break by input order.
    """
    x_full = np.asarray(x_full, dtype=float)
    y = np.asarray(labels)
    feature_ids = list(feature_ids)
    if x_full.shape[1] != len(feature_ids):
        raise ValueError("column count does not match feature_ids")
    importances = np.empty(len(feature_ids))
    for j in range(x_full.shape[1]):
        a = auc(x_full[:, j], y)
        importances[j] = max(a, 1.0 - a)
    order = np.argsort(-importances, kind="stable")
    return [feature_ids[j] for j in order[:k]]


# Graph-only feature projection used by the impact proxy: the interest
# model's input list contains a researcher-pair distance, which has no
# meaning for arbitrary graph edges, so the proxy uses this fixed list.
PROXY_FEATURE_IDS: tuple[str, ...] = (
    "a_degree_y0", "b_degree_y0", "a_degree_y1", "b_degree_y1",
    "a_pagerank_y0", "b_pagerank_y0",
    "a_papers_y0", "b_papers_y0",
    "a_citations_y0", "b_citations_y0",
    "a_annual_citations_y0", "b_annual_citations_y0",
    "a_new_neighbors_w1", "b_new_neighbors_w1",
    "a_new_papers_w1", "b_new_papers_w1",
    "a_new_citations_w1", "b_new_citations_w1",
    "a_rank_new_neighbors_w1", "b_rank_new_neighbors_w1",
    "pair_cooccur_papers_y0", "pair_either_papers_y0",
    "pair_edge_citations_y0", "pair_simpson_y0", "pair_dice_y0",
)

assert len(PROXY_FEATURE_IDS) == N_INPUTS


@dataclass
class ImpactModel:
    """Citation-gain regressor over concept pairs, bound to its graph."""

    net: InterestModel
    graph: KnowledgeGraph
    horizon_years: int
    base_year: int
    feature_ids: tuple[str, ...] = PROXY_FEATURE_IDS

    def score_pairs(self, pairs, as_of: int | None = None) -> np.ndarray:
        """Predicted impact for (c_a, c_b) pairs at the current cutoff."""
        rows = [
            compute_pair_features(a, b, self.graph, as_of=as_of).project(self.feature_ids)
            for a, b in pairs
        ]
        return predict(self.net, np.stack(rows))

    def score_pair(self, c_a: str, c_b: str) -> float:
        return float(self.score_pairs([(c_a, c_b)])[0])


def train_impact_proxy(
    g: KnowledgeGraph,
    horizon_years: int,
    seed: int = 0,
    config: TrainingConfig | None = None,
    max_edges: int = 5000,
) -> ImpactModel:
    """Regress an edge's future citation gain from its past-slice features.

    Edges alive at cutoff - horizon_years become training rows: features
    are computed as of that year, the target is the dense-rank-normalized
    citation gain over the following horizon. Deterministic per seed.
    """
    if horizon_years < 1:
        raise ValueError("horizon must be at least one year")
    base_year = g.cutoff_year - horizon_years
    snap = g.snapshot(base_year)
    edges = sorted(
        (a, b) for (a, b) in g.edges if g.edge_papers_until(a, b, base_year) > 0
    )
    if not edges:
        raise ValueError(f"no edges alive at {base_year}; not enough history")
    rng = np.random.default_rng(seed)
    if len(edges) > max_edges:
        idx = rng.choice(len(edges), size=max_edges, replace=False)
        edges = [edges[i] for i in sorted(idx)]

    x = np.stack(
        [
            compute_pair_features(a, b, g, as_of=base_year).project(PROXY_FEATURE_IDS)
            for a, b in edges
        ]
    )
    gains = np.array(
        [
            g.edge_citations_until(a, b, g.cutoff_year) - g.edge_citations_until(a, b, base_year)
            for a, b in edges
        ],
        dtype=float,
    )
    # dense ascending rank -> (0, 1]; scale-free target for the logistic output
    distinct = np.unique(gains)
    rank_of = {v: (i + 1) / len(distinct) for i, v in enumerate(distinct)}
    targets = np.array([rank_of[v] for v in gains])

    config = config or TrainingConfig()
    net = _train_regressor(x, targets, config, seed)
    return ImpactModel(net=net, graph=g, horizon_years=horizon_years, base_year=base_year)


def _train_regressor(x: np.ndarray, targets: np.ndarray, config: TrainingConfig, seed: int) -> InterestModel:
    rng = np.random.default_rng(seed)
    params = init_params(rng, n_inputs=x.shape[1])
    keep = 1.0 - config.dropout_rate
    opt = _Adam(params, config.learning_rate)
    for epoch in range(config.epochs):
        mask = None
        if config.dropout_rate > 0:
            mask = (rng.random((len(targets), N_HIDDEN)) < keep) / keep
        loss, grads = loss_and_grads(params, x, targets, config.weight_decay, mask)
        if not np.isfinite(loss):
            raise ArithmeticError(f"impact training diverged at epoch {epoch}")
        opt.step(params, grads)
    return InterestModel(
        params=params,
        dropout_rate=config.dropout_rate,
        seed=seed,
        config=config,
        feature_ids=PROXY_FEATURE_IDS,
    )
