"""Random-forest impurity importance with a minimal CART.

Only importances are kept; trees are never stored or used for prediction.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from . import kernels
from ._parallel import pmap
from .errors import UniformImportance


def _tree_importance(X, y, task, n_classes, max_features, rng):
    n, f = X.shape
    boot = rng.integers(0, n, n)
    imp = np.zeros(f)
    stack = [boot]
    while stack:
        idx = stack.pop()
        if len(idx) < 2:
            continue
        yn = y[idx]
        if np.all(yn == yn[0]):
            continue
        Xn = X[idx]
        nonconst = Xn.max(axis=0) > Xn.min(axis=0)
        perm = rng.permutation(f)
        cand = perm[nonconst[perm]][:max_features]
        if len(cand) == 0:
            continue
        Xc = np.ascontiguousarray(Xn[:, cand])
        order = np.argsort(Xc, axis=0, kind="stable").astype(np.int64)
        if task == "classification":
            col, thr, score = kernels.best_split_class(Xc, order, yn, n_classes)
            counts = np.bincount(yn, minlength=n_classes)
            parent = float(np.dot(counts, counts)) / len(idx)
        else:
            col, thr, score = kernels.best_split_reg(Xc, order, yn)
            s = float(np.cumsum(yn)[-1])
            parent = s * s / len(idx)
        if col < 0:
            continue
        feat = cand[col]
        imp[feat] += max(0.0, score - parent)
        go_left = Xn[:, feat] <= thr
        stack.append(idx[~go_left])
        stack.append(idx[go_left])
    return imp


def forest_importance(X, y, trees: int = 100, seed=0, task: str = "classification",
                      max_features: int | None = None) -> np.ndarray:
    """Mean impurity decrease per feature over bootstrap CART trees, summing to 1.

    ``y`` holds class codes 0..C-1 for classification and reals for regression.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    n, f = X.shape
    if n < 2 or f < 1:
        raise ValueError("need at least 2 rows and 1 feature column")
    if task == "classification":
        y = np.asarray(y, dtype=np.int64)
        n_classes = int(y.max()) + 1
        degenerate = len(np.unique(y)) < 2
    else:
        y = np.asarray(y, dtype=np.float64)
        n_classes = 0
        degenerate = bool(np.all(y == y[0]))
    if degenerate:
        warnings.warn("label has a single value; importance is uniform", UniformImportance,
                      stacklevel=2)
        return np.full(f, 1.0 / f)
    k = max_features or max(1, math.ceil(math.sqrt(f)))
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seeds = ss.spawn(trees)

    def one(ss):
        raw = _tree_importance(X, y, task, n_classes, k, np.random.default_rng(ss))
        total = raw.sum()
        return raw / total if total > 0 else None

    per_tree = [v for v in pmap(one, seeds) if v is not None]
    if not per_tree:
        warnings.warn("no tree found a split; importance is uniform", UniformImportance,
                      stacklevel=2)
        return np.full(f, 1.0 / f)
    out = np.mean(per_tree, axis=0)
    return out / out.sum()
