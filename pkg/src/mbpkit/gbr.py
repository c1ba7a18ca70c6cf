"""Gradient-boosted regression trees, written here rather than imported.

Squared-error CART trees with mean leaves, shrinkage, no subsampling.
Defaults mirror the common library defaults (100 trees, learning rate 0.1,
depth 3).  Two trained models predict the lower/upper multiplier of the
penalty-weight range from the features (node count, density, analytic
midpoint estimate).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ._rng import make_rng

_MIN_GAIN = 1e-12


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # (m, k) float64
    targets: np.ndarray   # (m,) float64

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.targets, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if y.shape != (x.shape[0],):
            raise ValueError(f"target length {y.shape} does not match {x.shape[0]} rows")
        if x.shape[0] == 0:
            raise ValueError("empty dataset")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError("features and targets must be finite")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "targets", y)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass
class TreeNode:
    feature: int = -1                       # -1 marks a leaf
    threshold: float = 0.0
    value: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


@dataclass(frozen=True)
class RegressionTree:
    root: TreeNode
    max_depth: int

    def predict_one(self, f: np.ndarray) -> float:
        node = self.root
        while not node.is_leaf:
            node = node.left if f[node.feature] <= node.threshold else node.right
        return node.value

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.array([self.predict_one(row) for row in x], dtype=np.float64)

    def depth(self) -> int:
        def walk(node, d):
            if node.is_leaf:
                return d
            return max(walk(node.left, d + 1), walk(node.right, d + 1))
        return walk(self.root, 0)


def _best_split(x: np.ndarray, y: np.ndarray, min_samples_leaf: int):
    """Best (feature, threshold) by squared-error reduction, or None.

    Exhaustive over distinct adjacent sorted values per feature; ties go to
    the lowest feature index, then the lowest threshold.
    """
    m, k = x.shape
    total = y.sum()
    base = total * total / m
    best_gain = 0.0
    best = None
    for f in range(k):
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        csum = np.cumsum(y[order])
        counts = np.arange(1, m)
        left_sum = csum[:-1]
        score = left_sum ** 2 / counts + (total - left_sum) ** 2 / (m - counts)
        valid = (xs[1:] > xs[:-1]) & (counts >= min_samples_leaf) & (m - counts >= min_samples_leaf)
        if not valid.any():
            continue
        gains = np.where(valid, score - base, -np.inf)
        pos = int(np.argmax(gains))
        gain = gains[pos]
        if gain > best_gain + _MIN_GAIN * max(1.0, abs(base)):
            best_gain = gain
            best = (f, (xs[pos] + xs[pos + 1]) / 2.0)
    return best


def fit_tree(ds: Dataset, residuals: np.ndarray, max_depth: int, min_samples_leaf: int) -> RegressionTree:
    """Grow a CART regression tree on the residuals; leaves store means."""
    y = np.asarray(residuals, dtype=np.float64)
    if y.shape != (ds.n_rows,):
        raise ValueError("residual length must match the dataset")
    if max_depth < 0 or min_samples_leaf < 1:
        raise ValueError("max_depth must be >= 0 and min_samples_leaf >= 1")
    x = ds.features

    def grow(idx: np.ndarray, depth: int) -> TreeNode:
        node = TreeNode(value=float(y[idx].mean()))
        if depth >= max_depth or idx.size < 2 * min_samples_leaf:
            return node
        found = _best_split(x[idx], y[idx], min_samples_leaf)
        if found is None:
            return node
        f, thr = found
        mask = x[idx, f] <= thr
        node.feature = f
        node.threshold = float(thr)
        node.left = grow(idx[mask], depth + 1)
        node.right = grow(idx[~mask], depth + 1)
        return node

    return RegressionTree(root=grow(np.arange(ds.n_rows), 0), max_depth=max_depth)


@dataclass(frozen=True)
class GbrParams:
    n_trees: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    min_samples_leaf: int = 1

    def __post_init__(self):
        if self.n_trees < 0 or self.learning_rate < 0 or self.max_depth < 0 or self.min_samples_leaf < 1:
            raise ValueError(f"bad boosting parameters {self}")


@dataclass
class GbrModel:
    init_value: float
    learning_rate: float
    trees: list[RegressionTree]
    params: GbrParams
    n_features: int
    split_seed: Optional[int] = None
    train_mse: list[float] = field(default_factory=list)


def fit_gbr(ds: Dataset, params: GbrParams = GbrParams()) -> GbrModel:
    """Boost mean-leaf trees on residuals with shrinkage; records per-round
    training MSE."""
    if ds.n_rows < 2:
        raise ValueError(f"need at least 2 samples, got {ds.n_rows}")
    y = ds.targets
    init = float(y.mean())
    pred = np.full(ds.n_rows, init)
    model = GbrModel(init_value=init, learning_rate=params.learning_rate,
                     trees=[], params=params, n_features=ds.n_features)
    for _ in range(params.n_trees):
        tree = fit_tree(ds, y - pred, params.max_depth, params.min_samples_leaf)
        pred += params.learning_rate * tree.predict(ds.features)
        model.trees.append(tree)
        model.train_mse.append(float(np.mean((y - pred) ** 2)))
    return model


def predict(m: GbrModel, f: Sequence[float]) -> float:
    fv = np.asarray(f, dtype=np.float64)
    if fv.shape != (m.n_features,):
        raise ValueError(f"feature row has shape {fv.shape}, model expects ({m.n_features},)")
    total = m.init_value
    for tree in m.trees:
        total += m.learning_rate * tree.predict_one(fv)
    return float(total)


def predict_many(m: GbrModel, x: np.ndarray) -> np.ndarray:
    xv = np.asarray(x, dtype=np.float64)
    if xv.ndim != 2 or xv.shape[1] != m.n_features:
        raise ValueError(f"feature matrix has shape {xv.shape}, model expects (*, {m.n_features})")
    out = np.full(xv.shape[0], m.init_value)
    for tree in m.trees:
        out += m.learning_rate * tree.predict(xv)
    return out


@dataclass(frozen=True)
class EvalMetrics:
    rmse: float
    mae: float
    r2: float

    def to_dict(self) -> dict:
        return {"rmse": self.rmse, "mae": self.mae, "r2": self.r2}


def metrics_from_predictions(predictions, targets) -> EvalMetrics:
    """RMSE, MAE and R^2; R^2 is 1.0 for a perfect fit of a constant
    target, 0.0 for an imperfect one."""
    pred = np.asarray(predictions, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    err = pred - y
    rmse = float(np.sqrt(np.mean(err ** 2)))
    mae = float(np.mean(np.abs(err)))
    ss_res = float(np.sum(err ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return EvalMetrics(rmse=rmse, mae=mae, r2=r2)


def evaluate(m: GbrModel, ds: Dataset) -> EvalMetrics:
    return metrics_from_predictions(predict_many(m, ds.features), ds.targets)


@dataclass(frozen=True)
class TrainReport:
    model_min: GbrModel
    model_max: GbrModel
    metrics_min: EvalMetrics
    metrics_max: EvalMetrics
    n_train: int
    n_test: int
    split_seed: int


def train_lambda_models(rows, split_seed: int = 0, params: GbrParams = GbrParams()) -> TrainReport:
    """Fit the multiplier-range regressors from extracted range rows.

    Rows need attributes n, density, lambda_est, lambda_min, lambda_max.
    Deterministic seeded shuffle, 80/20 train/test split, held-out metrics.
    """
    rows = list(rows)
    if len(rows) < 10:
        raise ValueError(f"need at least 10 rows to train, got {len(rows)}")
    x = np.array([[r.n, r.density, r.lambda_est] for r in rows], dtype=np.float64)
    y_min = np.array([r.lambda_min for r in rows], dtype=np.float64)
    y_max = np.array([r.lambda_max for r in rows], dtype=np.float64)
    perm = make_rng(split_seed, stream=2).permutation(len(rows))
    n_test = max(1, round(0.2 * len(rows)))
    test_idx, train_idx = perm[:n_test], perm[n_test:]

    def fit_one(y):
        model = fit_gbr(Dataset(x[train_idx], y[train_idx]), params)
        model.split_seed = split_seed
        metrics = evaluate(model, Dataset(x[test_idx], y[test_idx]))
        return model, metrics

    model_min, metrics_min = fit_one(y_min)
    model_max, metrics_max = fit_one(y_max)
    return TrainReport(model_min=model_min, model_max=model_max,
                       metrics_min=metrics_min, metrics_max=metrics_max,
                       n_train=len(train_idx), n_test=len(test_idx), split_seed=split_seed)


def save_model(m: GbrModel, path) -> None:
    """Versioned text format; floats written with repr so reloads are exact."""
    lines = [
        "mbpkit-gbr v1",
        f"n_features {m.n_features}",
        f"learning_rate {m.learning_rate!r}",
        f"init_value {m.init_value!r}",
        f"n_trees {m.params.n_trees}",
        f"max_depth {m.params.max_depth}",
        f"min_samples_leaf {m.params.min_samples_leaf}",
        f"split_seed {m.split_seed if m.split_seed is not None else 'none'}",
        f"final_train_mse {m.train_mse[-1]!r}" if m.train_mse else "final_train_mse none",
    ]
    for tree in m.trees:
        nodes = []

        def emit(node):
            if node.is_leaf:
                nodes.append(f"leaf {node.value!r}")
            else:
                nodes.append(f"split {node.feature} {node.threshold!r}")
                emit(node.left)
                emit(node.right)

        emit(tree.root)
        lines.append(f"tree {len(nodes)} {tree.max_depth}")
        lines.extend(nodes)
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path) -> GbrModel:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "mbpkit-gbr v1":
        raise ValueError(f"{path}: not a v1 model file")
    header = {}
    pos = 1
    while pos < len(lines) and not lines[pos].startswith("tree "):
        key, _, value = lines[pos].partition(" ")
        header[key] = value
        pos += 1
    params = GbrParams(n_trees=int(header["n_trees"]),
                       learning_rate=float(header["learning_rate"]),
                       max_depth=int(header["max_depth"]),
                       min_samples_leaf=int(header["min_samples_leaf"]))
    split_seed = None if header["split_seed"] == "none" else int(header["split_seed"])
    train_mse = [] if header["final_train_mse"] == "none" else [float(header["final_train_mse"])]
    trees = []
    while pos < len(lines):
        head = lines[pos].split()
        if head[0] != "tree":
            raise ValueError(f"{path}: expected tree header at line {pos + 1}")
        n_nodes, tree_depth = int(head[1]), int(head[2])
        body = lines[pos + 1:pos + 1 + n_nodes]
        pos += 1 + n_nodes

        it = iter(body)

        def parse() -> TreeNode:
            parts = next(it).split()
            if parts[0] == "leaf":
                return TreeNode(value=float(parts[1]))
            node = TreeNode(feature=int(parts[1]), threshold=float(parts[2]))
            node.left = parse()
            node.right = parse()
            return node

        trees.append(RegressionTree(root=parse(), max_depth=tree_depth))
    return GbrModel(init_value=float(header["init_value"]),
                    learning_rate=float(header["learning_rate"]),
                    trees=trees, params=params, n_features=int(header["n_features"]),
                    split_seed=split_seed, train_mse=train_mse)
