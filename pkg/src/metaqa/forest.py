"""Random Forest classifier for predicting quality control from metadata.

Trees are CART with Gini impurity. At each node the features are visited in
a random order until ``max_features`` non-constant ones have been examined;
candidate thresholds are midpoints between consecutive distinct values, and
samples with ``x <= threshold`` go left. Among equally good splits the lowest
feature index wins, then the lowest threshold.

Each tree draws from its own stream seeded by ``(seed, tree_index)``, so the
forest is identical whether trees are grown serially or in worker processes.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import TrainingError
from .model import FEATURE_NAMES, Field, LabeledFeatures, OerRecord, ProfileSet, QualityControl
from .scoring import score_record

log = logging.getLogger(__name__)

# class index -> label; index 1 is the positive ("high quality") class
CLASSES = (QualityControl.WITHOUT, QualityControl.WITH)
_TIE_EPS = 1e-12


def label_index(label: QualityControl) -> int:
    if label is QualityControl.UNKNOWN:
        raise TrainingError("records labelled Unknown cannot be used for training or evaluation")
    return CLASSES.index(QualityControl(label))


# -- features -----------------------------------------------------------------


def extract_features(
    record: OerRecord, profiles: ProfileSet, for_training: bool = False
) -> LabeledFeatures:
    if for_training and record.quality_control is QualityControl.UNKNOWN:
        raise TrainingError(f"{record.url}: quality_control is Unknown")
    report = score_record(record, profiles)
    vector = (
        report.avail_score,
        report.norm_score,
        1.0 if report.per_field_available[Field.LEVEL] else 0.0,
        float(record.length(Field.DESCRIPTION)),
        float(record.length(Field.TITLE)),
        float(record.length(Field.SUBJECTS)),
    )
    return LabeledFeatures(record.url, vector, record.quality_control)


def feature_matrix(data: Sequence[LabeledFeatures]) -> np.ndarray:
    if not data:
        return np.empty((0, len(FEATURE_NAMES)))
    return np.array([d.features for d in data], dtype=float)


def label_vector(data: Sequence[LabeledFeatures]) -> np.ndarray:
    return np.array([label_index(d.label) for d in data], dtype=np.int64)


# -- train/test split -----------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    stratified: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie strictly between 0 and 1")


def _n_train(n: int, fraction: float) -> int:
    return int(math.floor(n * fraction + 0.5))


def split(
    data: Sequence[LabeledFeatures], spec: SplitSpec = SplitSpec()
) -> tuple[list[LabeledFeatures], list[LabeledFeatures]]:
    """Deterministic train/test partition; both halves keep input order."""
    rng = np.random.default_rng(spec.seed)
    if spec.stratified:
        train_idx: list[int] = []
        for label in sorted({d.label for d in data}, key=lambda q: q.value):
            members = [i for i, d in enumerate(data) if d.label is label]
            if len(members) < 2:
                raise TrainingError(
                    f"stratified split needs at least 2 records of {label.value}, got {len(members)}"
                )
            k = min(max(_n_train(len(members), spec.train_fraction), 1), len(members) - 1)
            chosen = rng.permutation(len(members))[:k]
            train_idx.extend(members[j] for j in chosen)
    else:
        k = _n_train(len(data), spec.train_fraction)
        train_idx = list(rng.permutation(len(data))[:k])
    in_train = np.zeros(len(data), dtype=bool)
    in_train[np.asarray(train_idx, dtype=np.int64)] = True
    train = [d for d, t in zip(data, in_train) if t]
    test = [d for d, t in zip(data, in_train) if not t]
    return train, test


# -- impurity -----------------------------------------------------------------


def gini(class_counts: Sequence[float]) -> float:
    total = sum(class_counts)
    if total <= 0:
        raise ValueError("gini impurity is undefined for an empty node")
    return 1.0 - sum((c / total) ** 2 for c in class_counts)


def _gini_pair(pos: np.ndarray, n: np.ndarray) -> np.ndarray:
    p = pos / n
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


# -- trees --------------------------------------------------------------------


class Tree:
    """Flat array representation; ``feature == -1`` marks a leaf."""

    def __init__(self, feature, threshold, left, right, counts):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64).reshape(-1, 2)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_splits(self) -> int:
        return int((self.feature >= 0).sum())

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        active = self.feature[node] >= 0
        while active.any():
            r = rows[active]
            nd = node[r]
            go_left = X[r, self.feature[nd]] <= self.threshold[nd]
            node[r] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return node

    def predict_class(self, X: np.ndarray) -> np.ndarray:
        counts = self.counts[self.apply(X)]
        # leaf ties go to index 0 (WithoutControl)
        return (counts[:, 1] > counts[:, 0]).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        tree = cls(d["feature"], d["threshold"], d["left"], d["right"], d["counts"])
        n = tree.n_nodes
        if not (len(tree.threshold) == len(tree.left) == len(tree.right) == len(tree.counts) == n) or n == 0:
            raise ValueError("inconsistent tree arrays")
        return tree

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tree):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, a), getattr(other, a))
            for a in ("feature", "threshold", "left", "right", "counts")
        )

    def __repr__(self) -> str:
        return f"Tree(n_nodes={self.n_nodes}, n_splits={self.n_splits})"


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    max_features: Optional[int] = None  # None: ceil(sqrt(n_features))
    bootstrap: bool = True

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be positive")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be positive")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")
        if self.max_features is not None and self.max_features < 1:
            raise ValueError("max_features must be positive")

    def features_per_node(self, n_features: int) -> int:
        if self.max_features is None:
            return math.ceil(math.sqrt(n_features))
        return min(self.max_features, n_features)


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    decrease: float  # parent gini minus weighted child gini
    n_left: int


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    features: Sequence[int],
    max_features: int,
    min_samples_leaf: int = 1,
) -> Optional[Split]:
    """Best Gini split over ``features`` visited in the given order.

    Visiting stops once ``max_features`` non-constant features have been
    examined. Returns None when no admissible split exists.
    """
    n = len(y)
    pos = float(y.sum())
    parent = float(_gini_pair(np.array(pos), np.array(float(n))))
    best: Optional[Split] = None
    examined = 0
    for f in features:
        if examined >= max_features:
            break
        x = X[:, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        if xs[0] == xs[-1]:
            continue
        examined += 1
        boundary = np.flatnonzero(xs[1:] != xs[:-1])
        n_left = boundary + 1
        n_right = n - n_left
        ok = (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
        if not ok.any():
            continue
        boundary, n_left, n_right = boundary[ok], n_left[ok], n_right[ok]
        pos_left = np.cumsum(y[order])[boundary].astype(float)
        weighted = (
            n_left * _gini_pair(pos_left, n_left.astype(float))
            + n_right * _gini_pair(pos - pos_left, n_right.astype(float))
        ) / n
        decrease = parent - weighted
        j = int(np.flatnonzero(decrease >= decrease.max() - _TIE_EPS)[0])
        dec = float(decrease[j])
        if best is not None:
            if dec < best.decrease - _TIE_EPS:
                continue
            if dec <= best.decrease + _TIE_EPS and f > best.feature:
                continue
        lo, hi = xs[boundary[j]], xs[boundary[j] + 1]
        threshold = (lo + hi) / 2.0
        if threshold >= hi:  # adjacent floats: midpoint rounded up
            threshold = lo
        best = Split(int(f), float(threshold), dec, int(n_left[j]))
    return best


def grow_tree(
    X: np.ndarray, y: np.ndarray, params: ForestParams, rng: np.random.Generator
) -> tuple[Tree, np.ndarray]:
    """Grow one tree; returns it with its raw (unnormalized) impurity decreases per feature."""
    n_features = X.shape[1]
    max_features = params.features_per_node(n_features)
    feature, threshold, left, right, counts = [], [], [], [], []
    importance = np.zeros(n_features)

    def new_node(idx: np.ndarray) -> int:
        k = len(feature)
        pos = int(y[idx].sum())
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append((len(idx) - pos, pos))
        return k

    stack = [(new_node(np.arange(len(y))), np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        n_neg, n_pos = counts[node]
        if n_neg == 0 or n_pos == 0:
            continue
        if params.max_depth is not None and depth >= params.max_depth:
            continue
        if len(idx) < 2 * params.min_samples_leaf:
            continue
        Xn, yn = X[idx], y[idx]
        s = best_split(Xn, yn, rng.permutation(n_features), max_features, params.min_samples_leaf)
        if s is None:
            continue
        go_left = Xn[:, s.feature] <= s.threshold
        importance[s.feature] += len(idx) * max(s.decrease, 0.0)
        feature[node] = s.feature
        threshold[node] = s.threshold
        li, ri = idx[go_left], idx[~go_left]
        left[node] = new_node(li)
        right[node] = new_node(ri)
        # push right first so the left subtree is numbered first
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))
    return Tree(feature, threshold, left, right, counts), importance


def _grow_one(args) -> tuple[Tree, np.ndarray]:
    X, y, params, seed, index = args
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    if params.bootstrap:
        sample = rng.integers(0, len(y), size=len(y))
        return grow_tree(X[sample], y[sample], params, rng)
    return grow_tree(X, y, params, rng)


# -- forest -------------------------------------------------------------------


@dataclass
class ForestModel:
    trees: list[Tree]
    seed: int
    params: ForestParams
    feature_names: tuple[str, ...] = FEATURE_NAMES
    importances: tuple[float, ...] = ()
    importances_degenerate: bool = False
    single_class: Optional[QualityControl] = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        d = len(self.feature_names)
        for t in self.trees:
            used = t.feature[t.feature >= 0]
            if used.size and used.max() >= d:
                raise ValueError(f"split feature index {used.max()} out of range for {d} features")
            leaves = t.counts[t.feature < 0]
            if (leaves < 0).any() or (leaves.sum(axis=1) <= 0).any():
                raise ValueError("leaf class counts must be non-negative with positive total")

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)


def _combine_importances(raw: Sequence[np.ndarray], n_features: int) -> tuple[tuple[float, ...], bool]:
    per_tree = [r / r.sum() for r in raw if r.sum() > 0]
    if not per_tree:
        return tuple([1.0 / n_features] * n_features), True
    mean = np.mean(per_tree, axis=0)
    mean = mean / mean.sum()
    return tuple(float(v) for v in mean), False


def fit_forest(
    X: np.ndarray,
    y: np.ndarray,
    params: ForestParams = ForestParams(),
    seed: int = 0,
    feature_names: Sequence[str] = FEATURE_NAMES,
    n_jobs: int = 1,
) -> ForestModel:
    """Fit on a numeric matrix and 0/1 labels (1 = WithControl)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != len(y) or X.shape[1] != len(feature_names):
        raise TrainingError(f"feature matrix shape {X.shape} does not match {len(feature_names)} features")
    if len(y) == 0:
        raise TrainingError("no training records")
    if not np.isin(y, (0, 1)).all():
        raise TrainingError("labels must be 0 or 1")
    if seed < 0:
        raise TrainingError("seed must be non-negative")
    jobs = [(X, y, params, seed, i) for i in range(params.n_trees)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            grown = list(pool.map(_grow_one, jobs, chunksize=max(1, params.n_trees // (4 * n_jobs))))
    else:
        grown = [_grow_one(j) for j in jobs]
    trees = [t for t, _ in grown]
    importances, degenerate = _combine_importances([r for _, r in grown], X.shape[1])
    present = np.unique(y)
    single = CLASSES[int(present[0])] if len(present) == 1 else None
    if single is not None:
        log.warning("training data contains only %s; the model will always predict it", single.value)
    return ForestModel(
        trees=trees,
        seed=seed,
        params=params,
        feature_names=tuple(feature_names),
        importances=importances,
        importances_degenerate=degenerate,
        single_class=single,
    )


def train_forest(
    train: Sequence[LabeledFeatures],
    params: ForestParams = ForestParams(),
    seed: int = 0,
    n_jobs: int = 1,
) -> ForestModel:
    if not train:
        raise TrainingError("no training records")
    return fit_forest(feature_matrix(train), label_vector(train), params, seed, FEATURE_NAMES, n_jobs)


def vote(model: ForestModel, X: np.ndarray) -> np.ndarray:
    """Number of trees voting WithControl for each row."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(f"expected feature vectors of length {model.n_features}, got shape {X.shape}")
    votes = np.zeros(len(X), dtype=np.int64)
    for tree in model.trees:
        votes += tree.predict_class(X)
    return votes


def predict_many(model: ForestModel, X: np.ndarray) -> tuple[list[QualityControl], np.ndarray]:
    with_votes = vote(model, X)
    without_votes = model.n_trees - with_votes
    # ties resolve to WithoutControl
    is_with = with_votes > without_votes
    labels = [QualityControl.WITH if w else QualityControl.WITHOUT for w in is_with]
    confidence = np.maximum(with_votes, without_votes) / model.n_trees
    return labels, confidence


def predict(model: ForestModel, features: Sequence[float]) -> tuple[QualityControl, float]:
    if len(features) != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {len(features)}")
    labels, confidence = predict_many(model, np.asarray([features], dtype=float))
    return labels[0], float(confidence[0])


def feature_importances(model: ForestModel) -> tuple[float, ...]:
    return model.importances


# -- evaluation -----------------------------------------------------------------


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    f1_with_control: float
    f1_without_control: float
    # rows: actual (WithControl, WithoutControl); columns: predicted, same order
    confusion: tuple[tuple[int, int], tuple[int, int]]

    @property
    def n(self) -> int:
        return sum(map(sum, self.confusion))

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "f1_with_control": self.f1_with_control,
            "f1_without_control": self.f1_without_control,
            "confusion": [list(r) for r in self.confusion],
        }

    def summary(self) -> str:
        (ww, wo), (ow, oo) = self.confusion
        return (
            f"accuracy {self.accuracy:.4f}  F1 WithControl {self.f1_with_control:.4f}  "
            f"F1 WithoutControl {self.f1_without_control:.4f}\n"
            f"confusion (actual x predicted, With/Without): [[{ww}, {wo}], [{ow}, {oo}]]"
        )


def _f1(tp: int, fp: int, fn: int) -> float:
    # a class that is neither present nor predicted has no errors
    denom = 2 * tp + fp + fn
    return 1.0 if denom == 0 else 2 * tp / denom


def metrics_from_labels(actual: Sequence[QualityControl], predicted: Sequence[QualityControl]) -> Metrics:
    if not actual or len(actual) != len(predicted):
        raise ValueError("need equally many actual and predicted labels, at least one")
    W, O = QualityControl.WITH, QualityControl.WITHOUT
    ww = sum(1 for a, p in zip(actual, predicted) if a is W and p is W)
    wo = sum(1 for a, p in zip(actual, predicted) if a is W and p is O)
    ow = sum(1 for a, p in zip(actual, predicted) if a is O and p is W)
    oo = sum(1 for a, p in zip(actual, predicted) if a is O and p is O)
    n = len(actual)
    return Metrics(
        accuracy=(ww + oo) / n,
        f1_with_control=_f1(ww, ow, wo),
        f1_without_control=_f1(oo, wo, ow),
        confusion=((ww, wo), (ow, oo)),
    )


def evaluate(model: ForestModel, test: Sequence[LabeledFeatures]) -> Metrics:
    if not test:
        raise ValueError("cannot evaluate on an empty test set")
    for d in test:
        label_index(d.label)
    predicted, _ = predict_many(model, feature_matrix(test))
    return metrics_from_labels([d.label for d in test], predicted)
