"""Fake feature tables sampled from bounds, ensemble importance, rank recall."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .bounds import BoundTable
from .errors import SchemaError
from .forest import forest_importance


@dataclass
class FakeFeatureTable:
    entity_ids: list[str]
    columns: list[str]
    values: np.ndarray
    seed: object = None
    ensemble: int | None = None


def _child_seed(master_seed: int, i: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(i,))


def sample_fake_tf(bounds: BoundTable, seed, ensemble: int | None = None) -> FakeFeatureTable:
    """Draw every cell uniformly inside its bound; null bounds become 0."""
    lo, hi = bounds.as_arrays()
    rng = np.random.default_rng(seed)
    u = rng.random(lo.shape)
    vals = np.minimum(np.maximum(lo + (hi - lo) * u, lo), hi)
    vals = np.where(lo == hi, lo, vals)
    vals = np.where(np.isnan(lo), 0.0, vals)
    return FakeFeatureTable(list(bounds.entity_ids), list(bounds.columns), vals, seed, ensemble)


@dataclass
class ImportanceReport:
    columns: list[str]
    mean_importance: np.ndarray
    per_ensemble: np.ndarray

    @property
    def std_importance(self) -> np.ndarray:
        return self.per_ensemble.std(axis=0)

    def order(self) -> list[int]:
        """Column indices from most to least important; ties by name."""
        return sorted(range(len(self.columns)),
                      key=lambda j: (-self.mean_importance[j], self.columns[j]))

    @property
    def rank(self) -> np.ndarray:
        r = np.empty(len(self.columns), dtype=np.int64)
        r[self.order()] = np.arange(1, len(self.columns) + 1)
        return r

    def ranked_columns(self) -> list[str]:
        return [self.columns[j] for j in self.order()]

    def importance_of(self, column: str) -> float:
        return float(self.mean_importance[self.columns.index(column)])

    def write_csv(self, path) -> None:
        std = self.std_importance
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rank", "feature_column", "mean_importance", "std_importance"])
            for r, j in enumerate(self.order(), start=1):
                w.writerow([r, self.columns[j], repr(float(self.mean_importance[j])),
                            repr(float(std[j]))])

    def write_ensembles_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["feature_column", *(f"ensemble_{i}" for i in range(len(self.per_ensemble)))])
            for j, name in enumerate(self.columns):
                w.writerow([name, *(repr(float(v)) for v in self.per_ensemble[:, j])])

    @classmethod
    def read_csv(cls, path) -> "ImportanceReport":
        cols, means = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            for rec in csv.DictReader(fh):
                cols.append(rec["feature_column"])
                means.append(float(rec["mean_importance"]))
        means = np.array(means)
        return cls(cols, means, means[None, :])


def ensemble_select(bounds: BoundTable, labels, ensembles: int = 10, trees: int = 100,
                    master_seed: int = 0, task: str = "classification") -> ImportanceReport:
    """Average forest importance over ``ensembles`` independently sampled fake tables."""
    if ensembles < 1:
        raise ValueError("ensembles must be >= 1")
    runs = []
    for i in range(ensembles):
        sample_ss, forest_ss = _child_seed(master_seed, i).spawn(2)
        fake = sample_fake_tf(bounds, sample_ss, ensemble=i)
        runs.append(forest_importance(fake.values, labels, trees, forest_ss, task))
    per = np.vstack(runs)
    mean = per.mean(axis=0)
    return ImportanceReport(list(bounds.columns), mean / mean.sum(), per)


def top_k(report: ImportanceReport, fraction: float) -> set[str]:
    f = len(report.columns)
    k = max(1, math.ceil(fraction * f - 1e-9))
    return set(report.ranked_columns()[:k])


def rank_recall(estimated: ImportanceReport, actual: ImportanceReport,
                top_fraction: float) -> float:
    """Share of the actual top-k columns that are also in the estimated top-k."""
    if set(estimated.columns) != set(actual.columns) or len(estimated.columns) != len(actual.columns):
        raise SchemaError("reports cover different feature columns")
    f = len(actual.columns)
    k = max(1, math.ceil(top_fraction * f - 1e-9))
    return len(top_k(estimated, top_fraction) & top_k(actual, top_fraction)) / k


def relative_error_quartiles(estimated: ImportanceReport, actual: ImportanceReport):
    """25/50/75% quartiles of (estimated - actual) / actual over columns with actual > 0."""
    act = np.array([actual.importance_of(c) for c in estimated.columns])
    est = estimated.mean_importance
    keep = act > 0
    if not keep.any():
        return (math.nan, math.nan, math.nan)
    rel = (est[keep] - act[keep]) / act[keep]
    return tuple(float(q) for q in np.percentile(rel, [25, 50, 75]))
