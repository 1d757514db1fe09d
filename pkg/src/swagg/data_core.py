"""Entity/action tables, per-entity resampling and parameter fitting."""

from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Sequence

import numpy as np

from .errors import AssumptionViolation, EmptyColumn, SchemaError

log = logging.getLogger(__name__)


class Assumption(str, enum.Enum):
    ALWAYS = "always"
    BINOMIAL = "binomial"
    POISSON = "poisson"


@dataclass(frozen=True)
class EntityTable:
    entity_ids: tuple[str, ...]
    labels: tuple

    def __post_init__(self):
        if len(self.entity_ids) != len(self.labels):
            raise SchemaError("entity_ids and labels differ in length")
        if len(set(self.entity_ids)) != len(self.entity_ids):
            raise SchemaError("entity_id values must be unique")

    def __len__(self):
        return len(self.entity_ids)


@dataclass
class ActionTable:
    """Timestamped records; missing feature values are stored as NaN."""

    entity_ids: np.ndarray
    timestamps: np.ndarray
    features: dict[str, np.ndarray]
    _groups: dict[str, np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.entity_ids = np.asarray(self.entity_ids, dtype=object)
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64)
        n = len(self.entity_ids)
        if len(self.timestamps) != n:
            raise SchemaError("timestamps and entity_ids differ in length")
        for name, col in list(self.features.items()):
            col = np.asarray(col, dtype=np.float64)
            if len(col) != n:
                raise SchemaError(f"feature {name!r} has {len(col)} rows, expected {n}")
            if np.isinf(col).any():
                raise SchemaError(f"feature {name!r} has non-finite values")
            self.features[name] = col

    def __len__(self):
        return len(self.entity_ids)

    @property
    def feature_names(self) -> list[str]:
        return list(self.features)

    def time_range(self) -> tuple[float, float]:
        if len(self.timestamps) == 0:
            return 0.0, 0.0
        return float(self.timestamps.min()), float(self.timestamps.max())

    def rows_for(self, entity_id: str) -> np.ndarray:
        if self._groups is None:
            keys, inverse = np.unique(self.entity_ids.astype(str), return_inverse=True)
            order = np.argsort(inverse, kind="stable")
            cuts = np.cumsum(np.bincount(inverse, minlength=len(keys)))[:-1]
            self._groups = dict(zip(keys.tolist(), np.split(order.astype(np.int64), cuts)))
        return self._groups.get(entity_id, np.empty(0, dtype=np.int64))

    def column(self, entity_id: str, feature: str) -> tuple[np.ndarray, np.ndarray]:
        """(timestamps, values) of one entity's feature, missing values removed."""
        rows = self.rows_for(entity_id)
        vals = self.features[feature][rows]
        keep = ~np.isnan(vals)
        return self.timestamps[rows][keep], vals[keep]

    def validate_against(self, entities: EntityTable) -> None:
        known = set(entities.entity_ids)
        unknown = sorted(set(self.entity_ids) - known)
        if unknown:
            raise SchemaError(f"action rows reference unknown entity_id {unknown[0]!r}"
                              f" ({len(unknown)} unknown in total)")


@dataclass(frozen=True)
class ResampledColumn:
    """Records of one column placed on a fixed-width bucket grid.

    ``flat_values[offsets[i]:offsets[i + 1]]`` holds the values of bucket ``i``,
    sorted ascending so the layout does not depend on input order.
    """

    counts: np.ndarray
    flat_values: np.ndarray
    offsets: np.ndarray
    freq: float
    dropped: int = 0

    @property
    def ell(self) -> int:
        return len(self.counts)

    @property
    def values(self) -> list[list[float]]:
        return [self.flat_values[self.offsets[i]:self.offsets[i + 1]].tolist()
                for i in range(self.ell)]

    @property
    def n_records(self) -> int:
        return len(self.flat_values)

    def bucket_index(self) -> np.ndarray:
        """Bucket of every entry of ``flat_values``."""
        return np.repeat(np.arange(self.ell, dtype=np.int64), self.counts)


def grid_length(t0: float, freq: float, horizon: float) -> int:
    return int(math.floor((horizon - t0) / freq)) + 1


def resample(records, t0: float, freq: float, horizon: float,
             allow_empty: bool = False) -> ResampledColumn:
    """Place (timestamp, value) records onto buckets of width ``freq``.

    Bucket of a record is ``floor((t - t0) / freq)``; records outside
    ``[t0, horizon]`` are dropped and counted.
    """
    if freq <= 0:
        raise ValueError("freq must be positive")
    if horizon < t0:
        raise ValueError("horizon must not precede t0")
    if isinstance(records, tuple) and len(records) == 2 and isinstance(records[0], np.ndarray):
        ts, vals = records
    else:
        arr = np.asarray(list(records), dtype=np.float64).reshape(-1, 2)
        ts, vals = arr[:, 0], arr[:, 1]
    ts = np.asarray(ts, dtype=np.float64)
    vals = np.asarray(vals, dtype=np.float64)

    ell = grid_length(t0, freq, horizon)
    inside = (ts >= t0) & (ts <= horizon)
    dropped = int((~inside).sum())
    if dropped:
        log.warning("resample dropped %d record(s) outside [%r, %r]", dropped, t0, horizon)
    ts, vals = ts[inside], vals[inside]
    if len(ts) == 0 and not allow_empty:
        raise EmptyColumn("no records left after filtering")

    idx = np.floor((ts - t0) / freq).astype(np.int64)
    np.minimum(idx, ell - 1, out=idx)
    order = np.lexsort((vals, idx))
    counts = np.bincount(idx, minlength=ell).astype(np.int64)
    offsets = np.zeros(ell + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return ResampledColumn(counts=counts, flat_values=vals[order], offsets=offsets,
                           freq=float(freq), dropped=dropped)


@dataclass(frozen=True)
class AssumptionParams:
    kind: Assumption
    mu: float
    sigma: float
    p: float
    m: int
    ell: int
    c_min: float
    c_max: float


def default_m_cap(counts: np.ndarray) -> int:
    return max(1, int(math.ceil(np.percentile(counts, 99.9))))


def fit_parameters(col: ResampledColumn, override: Assumption | str | None = None,
                   m_cap: int | None = None) -> AssumptionParams:
    """Fit the count assumption and value moments of a resampled column."""
    if col.n_records == 0:
        raise EmptyColumn("cannot fit parameters of an empty column")
    counts = col.counts
    cmin, cmax = int(counts.min()), int(counts.max())
    if override is None:
        if cmin == 1 and cmax == 1:
            kind = Assumption.ALWAYS
        elif cmax <= 1:
            kind = Assumption.BINOMIAL
        else:
            kind = Assumption.POISSON
    else:
        kind = Assumption(override)
        if kind is Assumption.ALWAYS and cmin == 0:
            raise AssumptionViolation("Always assumption but some bucket is empty")
        if kind is Assumption.ALWAYS and cmax > 1:
            raise AssumptionViolation("Always assumption but some bucket has several records")
        if kind is Assumption.BINOMIAL and cmax > 1:
            raise AssumptionViolation("Binomial assumption but some bucket has several records")

    vals = col.flat_values
    mu = math.fsum(vals) / len(vals)
    sigma = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
    ell = col.ell
    if kind is Assumption.ALWAYS:
        p, m = 1.0, 1
    elif kind is Assumption.BINOMIAL:
        p, m = min(1.0, int((counts > 0).sum()) / ell), 1
    else:
        cap = default_m_cap(counts) if m_cap is None else int(m_cap)
        p, m = int(counts.sum()) / ell, max(1, min(cmax, cap))
    c_min, c_max = float(vals.min()), float(vals.max())
    # fsum/len can land one ulp outside [min, max] for constant columns
    mu = min(max(mu, c_min), c_max)
    return AssumptionParams(kind=kind, mu=mu, sigma=sigma, p=p, m=m, ell=ell,
                            c_min=c_min, c_max=c_max)


# --- CSV ingest -------------------------------------------------------------

def _parse_timestamps(raw: Sequence[str]) -> np.ndarray:
    try:
        return np.array([int(s) for s in raw], dtype=np.float64)
    except ValueError:
        pass
    out = np.empty(len(raw), dtype=np.float64)
    for i, s in enumerate(raw):
        try:
            out[i] = int(s)
            continue
        except ValueError:
            pass
        try:
            dt = datetime.fromisoformat(s.strip().replace("Z", "+00:00"))
        except ValueError as exc:
            raise SchemaError(f"unparseable timestamp {s!r} on data row {i + 1}") from exc
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        out[i] = dt.timestamp()
    return out


def read_action_csv(path) -> ActionTable:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, header required") from None
        if header[:2] != ["entity_id", "timestamp"]:
            raise SchemaError(f"{path}: header must start with entity_id,timestamp")
        names = header[2:]
        if len(set(names)) != len(names):
            raise SchemaError(f"{path}: duplicate feature column")
        ids, stamps, cols = [], [], [[] for _ in names]
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            ids.append(row[0])
            stamps.append(row[1])
            for j, cell in enumerate(row[2:]):
                if cell == "":
                    cols[j].append(math.nan)
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise SchemaError(f"{path}:{lineno}: non-numeric value {cell!r} "
                                      f"in column {names[j]!r}") from None
                if not math.isfinite(v):
                    raise SchemaError(f"{path}:{lineno}: non-finite value in column {names[j]!r}")
                cols[j].append(v)
    return ActionTable(entity_ids=np.array(ids, dtype=object),
                       timestamps=_parse_timestamps(stamps),
                       features={n: np.array(c, dtype=np.float64) for n, c in zip(names, cols)})


def read_entity_csv(path) -> EntityTable:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["entity_id", "label"]:
            raise SchemaError(f"{path}: header must be entity_id,label")
        ids, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise SchemaError(f"{path}:{lineno}: expected 2 fields")
            ids.append(row[0])
            labels.append(row[1])
    return EntityTable(entity_ids=tuple(ids), labels=tuple(labels))


def write_action_csv(path, table: ActionTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["entity_id", "timestamp", *table.feature_names])
        cols = [table.features[n] for n in table.feature_names]
        for i in range(len(table)):
            t = table.timestamps[i]
            w.writerow([table.entity_ids[i], int(t) if float(t).is_integer() else repr(float(t)),
                        *("" if math.isnan(c[i]) else repr(float(c[i])) for c in cols)])


def write_entity_csv(path, table: EntityTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["entity_id", "label"])
        for e, y in zip(table.entity_ids, table.labels):
            w.writerow([e, y])


def encode_labels(labels: Iterable) -> tuple[np.ndarray, str]:
    """Numeric array for labels plus the task they imply.

    String or integral labels are classes; any non-integral number makes
    the target numeric.
    """
    labels = list(labels)
    try:
        nums = np.array([float(v) for v in labels], dtype=np.float64)
    except (TypeError, ValueError):
        nums = None
    if nums is not None and np.all(np.isfinite(nums)) and not np.all(nums == np.round(nums)):
        return nums, "regression"
    keys = [str(v) for v in labels] if nums is None else [float(v) for v in labels]
    classes = sorted(set(keys))
    lookup = {c: i for i, c in enumerate(classes)}
    return np.array([lookup[k] for k in keys], dtype=np.int64), "classification"
