"""Ground truth: brute-force feature tables and Monte-Carlo window chains.

Both generators sum window frames with exactly-rounded summation, which
makes them agree bit for bit however their traversal differs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._parallel import pmap
from .bounds import column_name, column_specs
from .data_core import (ActionTable, Assumption, AssumptionParams, EntityTable, grid_length,
                        resample)
from .errors import SchemaError
from .window_model import WindowKind

EDGE_POLICIES = ("full-only", "partial-start")
# positions of (avg, max, min) for each window in the kernel result tuple
_SLOTS = {"sum": {"avg": 1, "max": 2, "min": 3}, "avg": {"avg": 4, "max": 5, "min": 6}}


@dataclass
class FeatureTable:
    """Real aggregate features; NaN marks an entity with no non-empty window."""

    entity_ids: list[str]
    columns: list[str]
    values: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["entity_id", *self.columns])
            for e, row in zip(self.entity_ids, self.values):
                w.writerow([e, *("" if math.isnan(v) else repr(float(v)) for v in row)])

    @classmethod
    def read_csv(cls, path) -> "FeatureTable":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header[:1] != ["entity_id"]:
                raise SchemaError(f"{path}: first column must be entity_id")
            ids, rows = [], []
            for rec in reader:
                ids.append(rec[0])
                rows.append([math.nan if c == "" else float(c) for c in rec[1:]])
        values = np.array(rows, dtype=np.float64).reshape(len(ids), len(header) - 1)
        return cls(entity_ids=ids, columns=header[1:], values=values)


def _window_start(w: int, edge_policy: str) -> int:
    if edge_policy not in EDGE_POLICIES:
        raise ValueError(f"edge_policy must be one of {EDGE_POLICIES}")
    return w - 1 if edge_policy == "full-only" else 0


def _generate(actions: ActionTable, entities: EntityTable, periods, windows, aggregators,
              edge_policy: str, freq: float, per_column, t0=None, horizon=None) -> FeatureTable:
    periods = list(periods)
    for w in periods:
        _window_start(w, edge_policy)
    features = actions.feature_names
    specs = column_specs(features, windows, aggregators, periods)
    gt0, ghz = actions.time_range()
    t0 = gt0 if t0 is None else t0
    horizon = ghz if horizon is None else horizon
    ell = grid_length(t0, freq, horizon)

    def run_entity(entity):
        cells = {}
        for feature in features:
            ts, vals = actions.column(entity, feature)
            results = per_column(ts, vals, t0, freq, horizon, ell, periods, edge_policy)
            for w, res in zip(periods, results):
                for win in windows:
                    for agg in aggregators:
                        cells[(feature, win, agg, w)] = res[_SLOTS[win][agg]]
        return [cells[s] for s in specs]

    values = np.array(pmap(run_entity, entities.entity_ids), dtype=np.float64)
    values = values.reshape(len(entities), len(specs))
    return FeatureTable(entity_ids=list(entities.entity_ids),
                        columns=[column_name(*s) for s in specs], values=values)


def _timecut_column(ts, vals, t0, freq, horizon, ell, periods, edge_policy):
    col = resample((ts, vals), t0, freq, horizon, allow_empty=True)
    return [kernels.window_aggregates_timecut(col.offsets, col.flat_values, w,
                                              _window_start(w, edge_policy))
            for w in periods]


def _sparse_column(ts, vals, t0, freq, horizon, ell, periods, edge_policy):
    inside = (ts >= t0) & (ts <= horizon)
    ts, vals = ts[inside], vals[inside]
    buckets = np.minimum(np.floor((ts - t0) / freq).astype(np.int64), ell - 1)
    order = np.lexsort((vals, buckets))
    buckets = np.ascontiguousarray(buckets[order])
    vals = np.ascontiguousarray(vals[order])
    return [kernels.window_aggregates_sparse(buckets, vals, ell, w, _window_start(w, edge_policy))
            for w in periods]


def generate_tf_timecut(actions: ActionTable, entities: EntityTable, periods,
                        windows=("sum", "avg"), aggregators=("avg", "max", "min"),
                        edge_policy: str = "full-only", freq: float = 86400.0,
                        t0=None, horizon=None) -> FeatureTable:
    """Real T_f by slicing every window frame out of the dense bucket grid."""
    return _generate(actions, entities, periods, windows, aggregators, edge_policy, freq,
                     _timecut_column, t0, horizon)


def generate_tf_sparse(actions: ActionTable, entities: EntityTable, periods,
                       windows=("sum", "avg"), aggregators=("avg", "max", "min"),
                       edge_policy: str = "full-only", freq: float = 86400.0,
                       t0=None, horizon=None) -> FeatureTable:
    """Real T_f by rolling a window over time-sorted records only."""
    return _generate(actions, entities, periods, windows, aggregators, edge_policy, freq,
                     _sparse_column, t0, horizon)


# --- Monte Carlo ------------------------------------------------------------

@dataclass(frozen=True)
class ChainSample:
    values: np.ndarray
    counts: np.ndarray
    seed: int

    def nonempty(self) -> np.ndarray:
        return self.values[self.counts > 0]


def draw_counts(kind: Assumption, p: float, m: int, steps: int, rng) -> np.ndarray:
    """Records per bucket under a count assumption (Poisson capped at m)."""
    kind = Assumption(kind)
    if kind is Assumption.ALWAYS:
        return np.ones(steps, dtype=np.int64)
    if kind is Assumption.BINOMIAL:
        return (rng.random(steps) < p).astype(np.int64)
    return np.minimum(rng.poisson(p, steps), m).astype(np.int64)


def draw_records(kind, p, m, mu, sigma, steps, rng) -> tuple[np.ndarray, np.ndarray]:
    """(bucket index per record, value per record) drawn per the assumptions."""
    counts = draw_counts(kind, p, m, steps, rng)
    buckets = np.repeat(np.arange(steps, dtype=np.int64), counts)
    values = rng.normal(mu, sigma, len(buckets)) if sigma > 0 else np.full(len(buckets), float(mu))
    return buckets, values


def simulate_chain(kind: WindowKind | str, params: AssumptionParams, w: int, steps: int,
                   seed: int) -> ChainSample:
    """Roll full windows over ``steps`` buckets of synthetic records (PCG64 stream)."""
    if steps < w:
        raise ValueError("steps must be at least the period")
    kind = WindowKind(kind)
    rng = np.random.default_rng(seed)
    buckets, values = draw_records(params.kind, params.p, params.m, params.mu, params.sigma,
                                   steps, rng)
    counts = np.bincount(buckets, minlength=steps)
    sums = np.bincount(buckets, weights=values, minlength=steps)
    csum = np.concatenate([[0.0], np.cumsum(sums)])
    ccount = np.concatenate([[0], np.cumsum(counts)])
    win_sum = csum[w:] - csum[:-w]
    win_count = ccount[w:] - ccount[:-w]
    win_sum = np.where(win_count > 0, win_sum, 0.0)
    if kind is WindowKind.AVG:
        win_sum = np.where(win_count > 0, win_sum / np.maximum(win_count, 1), 0.0)
    return ChainSample(values=win_sum, counts=win_count.astype(np.int64), seed=seed)


# --- bound coverage ---------------------------------------------------------

@dataclass
class CoverageResult:
    aggregators: list[str]
    entities: int
    covered: dict[str, int]
    skipped: int = 0

    def rate(self, agg: str) -> float:
        n = self.entities - self.skipped
        return self.covered[agg] / n if n else math.nan


def coverage_trial(kind: WindowKind | str, assumption, p: float, mu: float, sigma: float,
                   w: int, ell: int, entities: int, seed: int, m: int = 1,
                   aggregators=("avg", "max", "min"), rho: float = 0.9, rho_l: float = 0.05,
                   rho_r: float = 0.95, lambda_method: str = "full",
                   m_cap: int | None = None) -> CoverageResult:
    """Draw ``entities`` columns per the assumptions, fit them, and count how often
    the true full-window aggregate falls inside its estimated bound.

    Entities with no record, or whose windows are all empty, are skipped.
    """
    from .bounds import bound_column
    from .data_core import fit_parameters
    from .errors import EmptyColumn

    kind = WindowKind(kind)
    slot = _SLOTS[kind.value]
    covered = dict.fromkeys(aggregators, 0)
    skipped = 0
    children = np.random.SeedSequence(seed).spawn(entities)
    for ss in children:
        rng = np.random.default_rng(ss)
        buckets, values = draw_records(assumption, p, m, mu, sigma, ell, rng)
        try:
            col = resample((buckets.astype(np.float64), values), 0.0, 1.0, float(ell - 1))
            params = fit_parameters(col, assumption, m_cap)
        except EmptyColumn:
            skipped += 1
            continue
        truth = kernels.window_aggregates_sparse(col.bucket_index(), col.flat_values, ell, w,
                                                 w - 1)
        if truth[0] == 0:
            skipped += 1
            continue
        bounds = bound_column(params, kind, w, aggregators, rho, rho_l, rho_r, lambda_method)
        for agg in aggregators:
            b = bounds[agg]
            if b is not None and b.contains(truth[slot[agg]]):
                covered[agg] += 1
    return CoverageResult(list(aggregators), entities, covered, skipped)
