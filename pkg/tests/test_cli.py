import csv

import numpy as np
import pytest

from swagg.cli import main
from swagg.oracle import FeatureTable


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    assert main(["--make-synthetic", "40", "2", "3", "--output-dir", str(d), "--seed", "1"]) == 0
    return d


def args(dataset, out, *extra):
    return ["--entities", str(dataset / "entities.csv"), "--actions", str(dataset / "actions.csv"),
            "--output-dir", str(out), "--periods", "3,7", "--ensembles", "2", "--trees", "10",
            *extra]


def test_estimate(dataset, tmp_path, capsys):
    assert main(["estimate", *args(dataset, tmp_path / "a"), "--emit-ensembles"]) == 0
    out = capsys.readouterr().out
    assert "fit" in out and "estimate" in out and "select" in out
    with open(tmp_path / "a" / "importance.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 5 * 2 * 3 * 2
    assert sum(float(r["mean_importance"]) for r in rows) == pytest.approx(1.0, abs=1e-9)
    assert (tmp_path / "a" / "bounds.csv").exists()
    assert (tmp_path / "a" / "importance_ensembles.csv").exists()


def test_estimate_byte_identical(dataset, tmp_path):
    for k in ("a", "b"):
        assert main(["estimate", *args(dataset, tmp_path / k)]) == 0
    for name in ("bounds.csv", "importance.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_estimate_poisson_config(dataset, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("periods=7,15,30,60\nassumption=poisson\nm_cap=10\nensembles=1\ntrees=5\n")
    assert main(["estimate", "--config", str(cfg), "--entities", str(dataset / "entities.csv"),
                 "--actions", str(dataset / "actions.csv"), "--output-dir",
                 str(tmp_path / "o")]) == 0


def test_generate_methods_identical(dataset, tmp_path):
    for m in ("timecut", "sparse"):
        assert main(["generate", *args(dataset, tmp_path / m), "--method", m]) == 0
    a = (tmp_path / "timecut" / "feature_table.csv").read_bytes()
    assert a == (tmp_path / "sparse" / "feature_table.csv").read_bytes()
    t = FeatureTable.read_csv(tmp_path / "sparse" / "feature_table.csv")
    assert len(t.columns) == 5 * 2 * 3 * 2


def test_generate_empty_actions(tmp_path, caplog):
    (tmp_path / "e.csv").write_text("entity_id,label\na,0\nb,1\n")
    (tmp_path / "a.csv").write_text("entity_id,timestamp,x\n")
    with caplog.at_level("WARNING"):
        code = main(["generate", "--entities", str(tmp_path / "e.csv"), "--actions",
                     str(tmp_path / "a.csv"), "--periods", "2", "--output-dir", str(tmp_path)])
    assert code == 0 and "empty" in caplog.text
    t = FeatureTable.read_csv(tmp_path / "feature_table.csv")
    assert np.all(np.isnan(t.values))


def test_compare_debug_self(dataset, tmp_path):
    assert main(["compare", *args(dataset, tmp_path), "--debug-real-fake"]) == 0
    with open(tmp_path / "recall.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["fraction"] for r in rows][:2] == ["0.05", "0.10"] and len(rows) == 20
    assert all(float(r["recall"]) == 1.0 for r in rows)
    with open(tmp_path / "relative_error.csv") as fh:
        q = list(csv.reader(fh))
    assert q[0] == ["q25", "q50", "q75"] and len(q[1]) == 3


def test_simulate(tmp_path):
    common = ["--steps", "50000", "--coverage-entities", "20", "--seed", "3"]
    for k in ("a", "b"):
        assert main(["simulate", "--output-dir", str(tmp_path / k), *common]) == 0
    a = (tmp_path / "a" / "histogram.csv").read_bytes()
    assert a == (tmp_path / "b" / "histogram.csv").read_bytes()
    header = a.decode().splitlines()[0]
    assert header == "bin_lo,bin_hi,density,component_count,mixture_density"
    cov = (tmp_path / "a" / "coverage.csv").read_text().splitlines()
    assert cov[0] == "aggregator,entities,covered,rate" and len(cov) == 4


def test_simulate_p_zero(tmp_path):
    assert main(["simulate", "--p", "0", "--steps", "100", "--output-dir", str(tmp_path)]) == 0
    assert len((tmp_path / "histogram.csv").read_text().splitlines()) == 1
    assert "NoRecords" in (tmp_path / "coverage.csv").read_text()


def test_exit_codes(dataset, tmp_path, capsys):
    assert main(["estimate", *args(dataset, tmp_path), "--rho", "1.5"]) == 3
    assert main(["estimate", "--output-dir", str(tmp_path)]) == 3
    bad = tmp_path / "bad.csv"
    bad.write_text("entity_id,timestamp,x\nzzz,0,1\n")
    assert main(["estimate", "--entities", str(dataset / "entities.csv"), "--actions", str(bad),
                 "--output-dir", str(tmp_path)]) == 2
    assert "zzz" in capsys.readouterr().err
    assert main(["estimate", "--entities", str(tmp_path / "missing.csv"), "--actions", str(bad),
                 "--output-dir", str(tmp_path)]) == 2


def test_assumption_violation_context(tmp_path, capsys):
    (tmp_path / "e.csv").write_text("entity_id,label\na,0\nb,1\n")
    (tmp_path / "a.csv").write_text("entity_id,timestamp,x\na,0,1\na,1,2\nb,0,1\nb,86400,3\n")
    code = main(["estimate", "--entities", str(tmp_path / "e.csv"), "--actions",
                 str(tmp_path / "a.csv"), "--assumption", "binomial", "--periods", "1",
                 "--output-dir", str(tmp_path)])
    assert code == 2
    err = capsys.readouterr().err
    assert "'a'" in err and "'x'" in err


def test_no_input_mutation(dataset, tmp_path):
    before = (dataset / "actions.csv").read_bytes()
    main(["estimate", *args(dataset, tmp_path)])
    assert (dataset / "actions.csv").read_bytes() == before
