import numpy as np
import pytest
from hypothesis import given, strategies as st

from swagg.bounds import AggregateBound, Aggregator, BoundRow, BoundTable
from swagg.errors import SchemaError
from swagg.selector import (ImportanceReport, ensemble_select, rank_recall,
                            relative_error_quartiles, sample_fake_tf, top_k)


def interval_table(lo, hi, columns=None):
    n, f = lo.shape
    columns = columns or [f"x{j}__sum__avg__{j + 1}" for j in range(f)]
    rows = []
    for i in range(n):
        for j, name in enumerate(columns):
            feat, win, agg, per = name.rsplit("__", 3)
            b = None if np.isnan(lo[i, j]) else AggregateBound(lo[i, j], hi[i, j], Aggregator(agg))
            rows.append(BoundRow(f"e{i}", feat, win, agg, int(per), b))
    return BoundTable(rows=rows, entity_ids=[f"e{i}" for i in range(n)], columns=columns)


def test_exact_bounds_give_point_table(rng):
    v = rng.normal(size=(5, 3))
    bt = BoundTable.from_point_table([f"e{i}" for i in range(5)],
                                     ["a__sum__avg__1", "b__sum__max__2", "c__avg__min__3"], v)
    for seed in (0, 1):
        assert np.array_equal(sample_fake_tf(bt, seed).values, v)


def test_null_bounds_become_zero():
    lo = np.array([[np.nan, 1.0]])
    fake = sample_fake_tf(interval_table(lo, lo + 1), 0)
    assert fake.values[0, 0] == 0.0 and 1.0 <= fake.values[0, 1] <= 2.0


def test_uniform_mean():
    bt = interval_table(np.zeros((100000, 1)), np.ones((100000, 1)))
    assert sample_fake_tf(bt, 3).values.mean() == pytest.approx(0.5, abs=0.01)


def test_seed_sensitivity_and_containment(rng):
    lo = rng.normal(0, 1e3, (1000, 1000))
    hi = lo + rng.exponential(10 ** rng.uniform(-12, 3, (1000, 1000)))
    bt = interval_table(lo[:2], hi[:2])
    assert not np.array_equal(sample_fake_tf(bt, 1).values, sample_fake_tf(bt, 2).values)
    # containment over 10**6 cells, bypassing row objects for speed
    fast = BoundTable(rows=[], entity_ids=[], columns=[])
    fast.as_arrays = lambda: (lo, hi)
    vals = sample_fake_tf(fast, 9).values
    assert np.all(vals >= lo) and np.all(vals <= hi)


def planted_bounds(rng, n=120, f=8):
    y = rng.integers(0, 2, n)
    lo = rng.normal(size=(n, f))
    lo[:, 0] = y + 0.1 * rng.normal(size=n)
    return interval_table(lo, lo + 0.05), y


def test_ensemble_report(rng):
    bt, y = planted_bounds(rng)
    rep = ensemble_select(bt, y, ensembles=3, trees=20, master_seed=4)
    assert rep.mean_importance.sum() == pytest.approx(1.0, abs=1e-9)
    assert rep.ranked_columns()[0] == bt.columns[0]
    assert sorted(rep.rank.tolist()) == list(range(1, 9))
    assert rep.per_ensemble.shape == (3, 8)


def test_single_ensemble_equals_run(rng):
    bt, y = planted_bounds(rng)
    rep = ensemble_select(bt, y, ensembles=1, trees=10, master_seed=0)
    assert np.allclose(rep.mean_importance, rep.per_ensemble[0])


def test_deterministic_report_bytes(rng, tmp_path):
    bt, y = planted_bounds(rng)
    for k in range(2):
        ensemble_select(bt, y, 2, 10, 7).write_csv(tmp_path / f"r{k}.csv")
    assert (tmp_path / "r0.csv").read_bytes() == (tmp_path / "r1.csv").read_bytes()


@pytest.mark.slow
def test_more_ensembles_reduce_variance():
    rng = np.random.default_rng(0)
    bt, y = planted_bounds(rng, n=80, f=6)
    lo = bt.as_arrays()[0]
    wide = interval_table(lo, lo + 1.5, bt.columns)
    one = [ensemble_select(wide, y, 1, 10, s).mean_importance for s in range(20)]
    ten = [ensemble_select(wide, y, 10, 10, 100 + s).mean_importance for s in range(20)]
    assert np.var(ten, axis=0).sum() < np.var(one, axis=0).sum()


def report(values, columns=None):
    columns = columns or [f"c{j}" for j in range(len(values))]
    v = np.asarray(values, dtype=float)
    return ImportanceReport(columns, v / v.sum(), (v / v.sum())[None, :])


def test_rank_recall_examples():
    r = report([4, 3, 2, 1])
    assert rank_recall(r, r, 0.25) == 1.0
    assert rank_recall(report([1, 2, 3, 4]), r, 0.5) == 0.0
    assert rank_recall(report([4, 2, 3, 1]), r, 0.5) == 0.5
    with pytest.raises(SchemaError):
        rank_recall(r, report([1, 2, 3, 4], ["a", "b", "c", "d"]), 0.5)


def test_ties_broken_by_name():
    r = report([1, 1, 1], ["b", "a", "c"])
    assert r.ranked_columns() == ["a", "b", "c"]
    assert top_k(r, 0.34) == {"a", "b"}


@given(st.lists(st.floats(0.01, 100), min_size=2, max_size=30, unique=True),
       st.floats(0.05, 1.0))
def test_recall_monotone_transform_invariant(vals, frac):
    a = report(vals)
    b = report(np.log1p(np.asarray(vals)) + 5)
    other = report(list(reversed(vals)))
    assert rank_recall(other, a, frac) == rank_recall(other, b, frac)
    assert 0.0 <= rank_recall(other, a, frac) <= 1.0


def test_relative_error_quartiles():
    a = report([1, 1, 2])
    q = relative_error_quartiles(a, a)
    assert q == (0.0, 0.0, 0.0)
    est = report([2, 1, 1])
    q = relative_error_quartiles(est, a)
    assert len(q) == 3 and q[0] <= q[1] <= q[2]


def test_report_csv(tmp_path, rng):
    bt, y = planted_bounds(rng)
    rep = ensemble_select(bt, y, 2, 5, 0)
    rep.write_csv(tmp_path / "r.csv")
    rep.write_ensembles_csv(tmp_path / "e.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "rank,feature_column,mean_importance,std_importance"
    assert (tmp_path / "e.csv").read_text().splitlines()[0] == \
        "feature_column,ensemble_0,ensemble_1"
    back = ImportanceReport.read_csv(tmp_path / "r.csv")
    assert back.ranked_columns() == rep.ranked_columns()
