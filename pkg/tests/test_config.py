import pytest

from swagg.config import RunConfig, build_config, parse_value, read_config_file
from swagg.errors import ConfigError


def test_defaults():
    cfg = build_config()
    assert (cfg.rho, cfg.rho_l, cfg.rho_r) == (0.9, 0.05, 0.95)
    assert (cfg.trees, cfg.ensembles) == (100, 10)
    assert cfg.periods == [7, 15, 30]


def test_file_and_overrides(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# comment\nperiods = 30, 7,15,7\nrho=0.8\nassumption=auto\nm_cap = 10\n\n")
    values = read_config_file(path)
    assert values["assumption"] is None
    cfg = build_config(values, rho=0.7, seed=None)
    assert cfg.periods == [7, 15, 30]
    assert cfg.rho == 0.7 and cfg.m_cap == 10 and cfg.seed == 0


@pytest.mark.parametrize("kw", [
    {"rho": 1.0}, {"rho": 0.0}, {"rho_l": 0.5, "rho_r": 0.4}, {"rho_r": 1.0}, {"periods": []},
    {"periods": [0]}, {"windows": ["max"]}, {"aggregators": []}, {"assumption": "gamma"},
    {"m_cap": 0}, {"trees": 0}, {"seed": -1}, {"lambda_method": "x"}, {"edge_policy": "x"},
    {"freq_seconds": 0.0}, {"unknown": 1},
])
def test_invalid(kw):
    with pytest.raises(ConfigError):
        build_config(**kw)


def test_bad_file(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("rho 0.9\n")
    with pytest.raises(ConfigError):
        read_config_file(path)
    path.write_text("colour=red\n")
    with pytest.raises(ConfigError):
        read_config_file(path)
    with pytest.raises(ConfigError):
        parse_value("rho", "high")


def test_subsets_canonical_order():
    cfg = RunConfig(windows=["avg", "sum"], aggregators=["min", "avg"]).validate()
    assert cfg.windows == ["sum", "avg"] and cfg.aggregators == ["avg", "min"]
