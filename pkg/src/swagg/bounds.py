"""Confidence bounds on the avg/max/min aggregate of a window chain, and the
driver that fills a BoundTable straight from the action table."""

from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from ._parallel import pmap
from .data_core import (ActionTable, Assumption, AssumptionParams, EntityTable,
                        fit_parameters, resample)
from .errors import DegenerateChain, EmptyColumn, NoRecords, SwaggError
from .spectral import SpectralQuantities, spectral_quantities
from .window_model import StationaryMixture, WindowKind, stationary_mixture

log = logging.getLogger(__name__)

EVT_MIN_LENGTH = 3


class Aggregator(str, enum.Enum):
    AVG = "avg"
    MAX = "max"
    MIN = "min"


@dataclass(frozen=True)
class AggregateBound:
    lo: float
    hi: float
    aggregator: Aggregator
    clipped: bool = False
    exact: bool = False
    lambda_used: float = math.nan
    rho_params: tuple = ()

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"bound lo={self.lo} exceeds hi={self.hi}")

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo


def chain_length(params: AssumptionParams, w: int) -> int:
    """Number of full windows on the grid."""
    return params.ell - w + 1


def gumbel_quantile(q: float) -> float:
    """x with exp(-exp(-x)) = q."""
    return math.log(1.0 / math.log(1.0 / q))


def gaussian_max_norming(i: int) -> tuple[float, float]:
    """Norming constants (scale, shift) for the max of i standard Gaussians."""
    t = 2.0 * math.log(i)
    scale = t ** -0.5
    shift = t ** 0.5 - 0.5 * scale * (math.log(math.log(i)) + math.log(4.0 * math.pi))
    return scale, shift


def hoeffding_halfwidths(mixture: StationaryMixture, tau: float, alpha: float,
                         ell_w: int, rho: float) -> np.ndarray:
    """Per-component half-widths of the bound on the window-sum total."""
    a, b = mixture.weights, mixture.scale_means
    return b * tau * np.sqrt(2.0 * alpha * a * ell_w * math.log(2.0 / (1.0 - rho)))


def _exact_avg(mixture: StationaryMixture, params: AssumptionParams, w: int, rho: float):
    value = w * params.mu if mixture.kind is WindowKind.SUM else params.mu
    return AggregateBound(value, value, Aggregator.AVG, exact=True, lambda_used=math.nan,
                          rho_params=(rho,))


def avg_bound(mixture: StationaryMixture, spectral: SpectralQuantities | None,
              params: AssumptionParams, w: int, rho: float) -> AggregateBound:
    """Bound on the mean of the non-empty windows.

    ``spectral=None`` means the chain is degenerate: every component falls
    back to its real bound.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    if params.kind is Assumption.ALWAYS:
        return _exact_avg(mixture, params, w, rho)
    ell_w = chain_length(params, w)
    if ell_w < 1:
        raise NoRecords(f"period {w} exceeds the grid length {params.ell}")
    a, b = mixture.weights[1:], mixture.scale_means[1:]
    denom = float(a.sum()) * ell_w
    if denom == 0.0:
        raise NoRecords("no window ever holds a record")

    tau = max(abs(params.mu - params.c_min), abs(params.c_max - params.mu))
    center = a * b * ell_w * params.mu
    real_lo = a * b * ell_w * params.c_min
    real_hi = a * b * ell_w * params.c_max
    if spectral is None:
        lam = math.nan
        lo, hi = real_lo, real_hi
        clip = np.ones(len(a), dtype=bool)
    else:
        lam = spectral.lam
        alpha = spectral.alpha
        half = hoeffding_halfwidths(mixture, tau, alpha, ell_w, rho)[1:]
        lo, hi = center - half, center + half
        clip = a * ell_w < 2.0 * alpha * math.log(2.0 / (1.0 - rho))
        lo = np.where(clip, np.clip(lo, real_lo, real_hi), lo)
        hi = np.where(clip, np.clip(hi, real_lo, real_hi), hi)
    used = a > 0
    return AggregateBound(float(lo.sum()) / denom, float(hi.sum()) / denom, Aggregator.AVG,
                          clipped=bool((clip & used).any()), exact=False, lambda_used=lam,
                          rho_params=(rho,))


def _max_core(weights, means, stds, real_lo, real_hi, ell_w, rho_l, rho_r):
    """[max of component lower ends, max of component upper ends]."""
    xl, xr = gumbel_quantile(rho_l), gumbel_quantile(rho_r)
    ell_n = np.rint(weights[1:] * ell_w)
    means, stds = means[1:], stds[1:]
    real_lo, real_hi = real_lo[1:], real_hi[1:]
    live = weights[1:] > 0.0
    evt = live & (ell_n >= EVT_MIN_LENGTH)
    # components expected fewer than EVT_MIN_LENGTH times use their real bound
    real = live & (ell_n > 0) & ~evt
    if not (evt.any() or real.any()):
        # every component is expected fewer than once: fall back to real bounds
        real = live
    if not real.any() and not evt.any():
        raise NoRecords("no window ever holds a record")
    lows, highs = [real_lo[real]], [real_hi[real]]
    clipped = bool(real.any())
    if evt.any():
        i = ell_n[evt]
        t = 2.0 * np.log(i)
        scale = t ** -0.5
        shift = t ** 0.5 - 0.5 * scale * (np.log(np.log(i)) + math.log(4.0 * math.pi))
        rl, rh = real_lo[evt], real_hi[evt]
        lo = means[evt] + stds[evt] * (scale * xl + shift)
        hi = means[evt] + stds[evt] * (scale * xr + shift)
        clo = np.minimum(np.maximum(lo, rl), rh)
        chi = np.minimum(np.maximum(hi, rl), rh)
        clipped = clipped or bool(np.any(clo != lo) or np.any(chi != hi))
        lows.append(clo)
        highs.append(chi)
    return float(np.concatenate(lows).max()), float(np.concatenate(highs).max()), clipped


def _check_rho_pair(rho_l, rho_r):
    if not 0.0 < rho_l < rho_r < 1.0:
        raise ValueError("need 0 < rho_l < rho_r < 1")


def max_bound(mixture: StationaryMixture, params: AssumptionParams, w: int,
              rho_l: float, rho_r: float) -> AggregateBound:
    """Bound on the max over non-empty windows from per-component Gaussian extremes."""
    _check_rho_pair(rho_l, rho_r)
    ell_w = chain_length(params, w)
    if ell_w < 1:
        raise NoRecords(f"period {w} exceeds the grid length {params.ell}")
    b = mixture.scale_means
    lo, hi, clipped = _max_core(mixture.weights, b * params.mu, mixture.component_stds(),
                                b * params.c_min, b * params.c_max, ell_w, rho_l, rho_r)
    return AggregateBound(lo, hi, Aggregator.MAX, clipped=clipped, rho_params=(rho_l, rho_r))


def min_bound(mixture: StationaryMixture, params: AssumptionParams, w: int,
              rho_l: float, rho_r: float) -> AggregateBound:
    """Bound on the min, as minus the max bound of the negated chain."""
    _check_rho_pair(rho_l, rho_r)
    ell_w = chain_length(params, w)
    if ell_w < 1:
        raise NoRecords(f"period {w} exceeds the grid length {params.ell}")
    nb = -mixture.scale_means
    lo, hi, clipped = _max_core(mixture.weights, nb * params.mu, mixture.component_stds(),
                                nb * params.c_max, nb * params.c_min, ell_w, rho_l, rho_r)
    return AggregateBound(-hi, -lo, Aggregator.MIN, clipped=clipped, rho_params=(rho_l, rho_r))


def bound_column(params: AssumptionParams, kind: WindowKind | str, w: int, aggregators,
                 rho: float = 0.9, rho_l: float = 0.05, rho_r: float = 0.95,
                 lambda_method: str = "full") -> dict[str, AggregateBound | None]:
    """All requested aggregate bounds for one (entity, feature, window, period)."""
    kind = WindowKind(kind)
    mixture = stationary_mixture(kind, params, w)
    out: dict[str, AggregateBound | None] = {}
    spectral: SpectralQuantities | None = None
    if "avg" in aggregators and params.kind is not Assumption.ALWAYS:
        try:
            spectral = spectral_quantities(kind, params, mixture, w, lambda_method)
        except DegenerateChain:
            spectral = None
    for agg in aggregators:
        try:
            if agg == "avg":
                out[agg] = avg_bound(mixture, spectral, params, w, rho)
            elif agg == "max":
                out[agg] = max_bound(mixture, params, w, rho_l, rho_r)
            else:
                out[agg] = min_bound(mixture, params, w, rho_l, rho_r)
        except NoRecords:
            out[agg] = None
    return out


# --- BoundTable --------------------------------------------------------------

def column_name(feature: str, window: str, aggregator: str, period: int) -> str:
    return f"{feature}__{window}__{aggregator}__{period}"


def column_specs(features, windows, aggregators, periods) -> list[tuple[str, str, str, int]]:
    return [(f, win, agg, p) for f in features for win in windows
            for agg in aggregators for p in periods]


@dataclass(frozen=True)
class BoundRow:
    entity_id: str
    feature: str
    window: str
    aggregator: str
    period: int
    bound: AggregateBound | None

    @property
    def column(self) -> str:
        return column_name(self.feature, self.window, self.aggregator, self.period)


@dataclass
class BoundTable:
    rows: list[BoundRow]
    entity_ids: list[str]
    columns: list[str]

    def __len__(self):
        return len(self.rows)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(lo, hi) matrices of shape (entities, columns); NaN marks null bounds."""
        lo = np.full((len(self.entity_ids), len(self.columns)), np.nan)
        hi = lo.copy()
        r = {e: i for i, e in enumerate(self.entity_ids)}
        c = {name: j for j, name in enumerate(self.columns)}
        for row in self.rows:
            if row.bound is not None:
                i, j = r[row.entity_id], c[row.column]
                lo[i, j], hi[i, j] = row.bound.lo, row.bound.hi
        return lo, hi

    @classmethod
    def from_point_table(cls, entity_ids, columns, values: np.ndarray) -> "BoundTable":
        """Exact bounds lo = hi = value; NaN becomes a null bound."""
        rows = []
        for i, e in enumerate(entity_ids):
            for j, name in enumerate(columns):
                feature, window, agg, period = name.rsplit("__", 3)
                v = values[i, j]
                bound = None if math.isnan(v) else AggregateBound(
                    float(v), float(v), Aggregator(agg), exact=True)
                rows.append(BoundRow(e, feature, window, agg, int(period), bound))
        return cls(rows=rows, entity_ids=list(entity_ids), columns=list(columns))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["entity_id", "feature", "window", "aggregator", "period",
                        "lo", "hi", "clipped", "exact"])
            for row in self.rows:
                b = row.bound
                if b is None:
                    w.writerow([row.entity_id, row.feature, row.window, row.aggregator,
                                row.period, "", "", "", ""])
                else:
                    w.writerow([row.entity_id, row.feature, row.window, row.aggregator,
                                row.period, repr(b.lo), repr(b.hi), int(b.clipped), int(b.exact)])

    @classmethod
    def read_csv(cls, path) -> "BoundTable":
        rows, entities, columns = [], {}, {}
        with open(path, newline="", encoding="utf-8") as fh:
            for rec in csv.DictReader(fh):
                bound = None
                if rec["lo"] != "":
                    bound = AggregateBound(float(rec["lo"]), float(rec["hi"]),
                                           Aggregator(rec["aggregator"]),
                                           clipped=rec["clipped"] == "1", exact=rec["exact"] == "1")
                row = BoundRow(rec["entity_id"], rec["feature"], rec["window"],
                               rec["aggregator"], int(rec["period"]), bound)
                rows.append(row)
                entities.setdefault(row.entity_id, None)
                columns.setdefault(row.column, None)
        return cls(rows=rows, entity_ids=list(entities), columns=list(columns))


def fit_all(actions: ActionTable, entities: EntityTable, freq: float,
            assumption: str | None = None, m_cap: int | None = None,
            t0: float | None = None, horizon: float | None = None
            ) -> dict[tuple[str, str], AssumptionParams | None]:
    """Resample and fit every (entity, feature) on the shared global grid."""
    gt0, ghz = actions.time_range()
    t0 = gt0 if t0 is None else t0
    horizon = ghz if horizon is None else horizon

    def fit_entity(entity):
        out = {}
        for feature in actions.feature_names:
            ts, vals = actions.column(entity, feature)
            try:
                col = resample((ts, vals), t0, freq, horizon)
                out[(entity, feature)] = fit_parameters(col, assumption, m_cap)
            except EmptyColumn:
                out[(entity, feature)] = None
            except SwaggError as exc:
                raise type(exc)(f"entity {entity!r}, feature {feature!r}: {exc}") from exc
        return out

    fits: dict = {}
    for part in pmap(fit_entity, entities.entity_ids):
        fits.update(part)
    return fits


def estimate_from_params(fits, entity_ids, features, periods, windows=("sum", "avg"),
                         aggregators=("avg", "max", "min"), rho=0.9, rho_l=0.05, rho_r=0.95,
                         lambda_method="full") -> BoundTable:
    """Bounds for every (entity, feature, window, aggregator, period) from fitted parameters.

    Nothing here touches individual records.
    """
    if not periods:
        raise ValueError("periods must be non-empty")
    specs = column_specs(features, windows, aggregators, periods)

    def run_entity(entity):
        cells = {}
        for feature in features:
            params = fits.get((entity, feature))
            for win in windows:
                for p in periods:
                    if params is None:
                        res = dict.fromkeys(aggregators)
                    else:
                        try:
                            res = bound_column(params, win, p, aggregators, rho, rho_l, rho_r,
                                               lambda_method)
                        except SwaggError as exc:
                            raise type(exc)(f"entity {entity!r}, feature {feature!r}: {exc}") from exc
                    for agg, b in res.items():
                        cells[(feature, win, agg, p)] = b
        return [BoundRow(entity, *spec, cells[spec]) for spec in specs]

    rows = [row for part in pmap(run_entity, entity_ids) for row in part]
    return BoundTable(rows=rows, entity_ids=list(entity_ids),
                      columns=[column_name(*s) for s in specs])


def estimate_all(actions: ActionTable, entities: EntityTable, periods, windows=("sum", "avg"),
                 aggregators=("avg", "max", "min"), *, freq: float = 86400.0,
                 assumption=None, m_cap=None, rho=0.9, rho_l=0.05, rho_r=0.95,
                 lambda_method="full") -> BoundTable:
    fits = fit_all(actions, entities, freq, assumption, m_cap)
    return estimate_from_params(fits, list(entities.entity_ids), actions.feature_names,
                                list(periods), windows, aggregators, rho, rho_l, rho_r,
                                lambda_method)
