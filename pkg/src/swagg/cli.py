"""Command-line entry point: ``swagg {estimate,generate,compare,simulate}``."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import kernels
from .bounds import BoundTable, estimate_from_params, fit_all
from .config import (AGGREGATORS, ASSUMPTIONS, EDGE_POLICIES, LAMBDA_METHODS, WINDOWS,
                     RunConfig, build_config, read_config_file)
from .data_core import (AssumptionParams, Assumption, encode_labels, read_action_csv,
                        read_entity_csv, write_action_csv, write_entity_csv)
from .errors import ConfigError, SchemaError, SwaggError
from .oracle import coverage_trial, generate_tf_sparse, generate_tf_timecut, simulate_chain
from .selector import ensemble_select, rank_recall, relative_error_quartiles
from .synthetic import make_synthetic
from .window_model import stationary_mixture

log = logging.getLogger("swagg")

EXIT_SCHEMA = 2
EXIT_CONFIG = 3
RECALL_FRACTIONS = [round(0.05 * i, 2) for i in range(1, 21)]


def _csv_list(text):
    return [t for t in text.replace(" ", "").split(",") if t]


def _int_csv_list(text):
    try:
        return [int(t) for t in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _run_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run configuration (overrides --config)")
    g.add_argument("--config", type=Path, help="key=value config file")
    g.add_argument("--entities", dest="entity_csv", type=Path, help="entity CSV (entity_id,label)")
    g.add_argument("--actions", dest="action_csv", type=Path,
                   help="action CSV (entity_id,timestamp,<features>)")
    g.add_argument("--output-dir", dest="output_dir", type=Path)
    g.add_argument("--freq-seconds", dest="freq_seconds", type=float)
    g.add_argument("--periods", type=_int_csv_list, help="e.g. 7,15,30")
    g.add_argument("--windows", type=_csv_list, help=f"subset of {','.join(WINDOWS)}")
    g.add_argument("--aggregators", type=_csv_list, help=f"subset of {','.join(AGGREGATORS)}")
    g.add_argument("--assumption", choices=ASSUMPTIONS)
    g.add_argument("--m-cap", dest="m_cap", type=int)
    g.add_argument("--rho", type=float)
    g.add_argument("--rho-l", dest="rho_l", type=float)
    g.add_argument("--rho-r", dest="rho_r", type=float)
    g.add_argument("--ensembles", type=int)
    g.add_argument("--trees", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--lambda-method", dest="lambda_method", choices=LAMBDA_METHODS)
    g.add_argument("--edge-policy", dest="edge_policy", choices=EDGE_POLICIES)
    return p


_CONFIG_KEYS = ("entity_csv", "action_csv", "output_dir", "freq_seconds", "periods", "windows",
                "aggregators", "assumption", "m_cap", "rho", "rho_l", "rho_r", "ensembles",
                "trees", "seed", "lambda_method", "edge_policy")


def build_parser() -> argparse.ArgumentParser:
    run = _run_options()
    parser = argparse.ArgumentParser(
        prog="swagg",
        description="Feature selection for sliding-window aggregates without generating them.")
    parser.add_argument("--make-synthetic", nargs=3, type=int,
                        metavar=("N_ENTITIES", "N_INFORMATIVE", "N_NOISE"),
                        help="write a planted synthetic dataset to --output-dir and exit")
    parser.add_argument("--output-dir", dest="top_output_dir", type=Path, default=None)
    parser.add_argument("--seed", dest="top_seed", type=int, default=0)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    est = sub.add_parser("estimate", parents=[run], help="bounds + fake-table importance")
    est.add_argument("--emit-ensembles", action="store_true",
                     help="also write per-ensemble importances")

    gen = sub.add_parser("generate", parents=[run], help="real feature table (brute force)")
    gen.add_argument("--method", choices=("timecut", "sparse"), default="sparse")

    cmp_ = sub.add_parser("compare", parents=[run], help="estimated vs actual importance ranking")
    cmp_.add_argument("--debug-real-fake", action="store_true",
                      help="feed the real feature table as the fake samples")

    sim = sub.add_parser("simulate", parents=[run], help="Monte-Carlo window chain vs mixture")
    sim.add_argument("--window", choices=WINDOWS, default="sum")
    sim.add_argument("--period", type=int, default=10)
    sim.add_argument("--mu", type=float, default=10.0)
    sim.add_argument("--sigma", type=float, default=1.0)
    sim.add_argument("--p", type=float, default=0.3)
    sim.add_argument("--m", type=int, default=1, help="Poisson count cap")
    sim.add_argument("--steps", type=int, default=500000)
    sim.add_argument("--bin-width", type=float, default=1.0)
    sim.add_argument("--coverage-entities", type=int, default=200)
    sim.add_argument("--coverage-ell", type=int, default=200)
    return parser


def config_from_args(args) -> RunConfig:
    file_values = read_config_file(args.config) if getattr(args, "config", None) else {}
    overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    return build_config(file_values, **overrides)


def _load(cfg: RunConfig):
    if cfg.entity_csv is None or cfg.action_csv is None:
        raise ConfigError("--entities and --actions are required")
    entities = read_entity_csv(cfg.entity_csv)
    actions = read_action_csv(cfg.action_csv)
    actions.validate_against(entities)
    return actions, entities


def _out(cfg: RunConfig) -> Path:
    path = Path(cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _estimate_bounds(cfg: RunConfig, actions, entities) -> tuple[BoundTable, dict]:
    t = time.perf_counter()
    fits = fit_all(actions, entities, cfg.freq_seconds, cfg.assumption, cfg.m_cap)
    t_fit = time.perf_counter() - t
    t = time.perf_counter()
    bounds = estimate_from_params(fits, list(entities.entity_ids), actions.feature_names,
                                  cfg.periods, cfg.windows, cfg.aggregators, cfg.rho, cfg.rho_l,
                                  cfg.rho_r, cfg.lambda_method)
    t_est = time.perf_counter() - t
    return bounds, {"fit": t_fit, "estimate": t_est}


def _select(cfg, bounds, entities):
    y, task = encode_labels(entities.labels)
    return ensemble_select(bounds, y, cfg.ensembles, cfg.trees, cfg.seed, task)


def cmd_estimate(cfg: RunConfig, emit_ensembles: bool = False, actions=None,
                 entities=None) -> dict:
    """Write bounds.csv and importance.csv; return wall-clock seconds per phase."""
    if actions is None:
        actions, entities = _load(cfg)
    bounds, timing = _estimate_bounds(cfg, actions, entities)
    t = time.perf_counter()
    report = _select(cfg, bounds, entities)
    timing["select"] = time.perf_counter() - t
    out = _out(cfg)
    bounds.write_csv(out / "bounds.csv")
    report.write_csv(out / "importance.csv")
    if emit_ensembles:
        report.write_ensembles_csv(out / "importance_ensembles.csv")
    print(f"estimate: {len(entities)} entities, {len(bounds.columns)} columns | "
          f"fit {timing['fit']:.3f}s / estimate {timing['estimate']:.3f}s / "
          f"select {timing['select']:.3f}s")
    return timing


def _generate(cfg: RunConfig, actions, entities, method: str):
    fn = generate_tf_timecut if method == "timecut" else generate_tf_sparse
    return fn(actions, entities, cfg.periods, cfg.windows, cfg.aggregators, cfg.edge_policy,
              cfg.freq_seconds)


def cmd_generate(cfg: RunConfig, method: str = "sparse") -> dict:
    actions, entities = _load(cfg)
    if len(actions) == 0:
        log.warning("action table is empty; every feature value is null")
    t = time.perf_counter()
    table = _generate(cfg, actions, entities, method)
    elapsed = time.perf_counter() - t
    table.write_csv(_out(cfg) / "feature_table.csv")
    print(f"generate ({method}): {len(entities)} entities, {len(table.columns)} columns | "
          f"{elapsed:.3f}s")
    return {"generate": elapsed}


def cmd_compare(cfg: RunConfig, debug_real_fake: bool = False) -> dict:
    """Recall of the estimated ranking against the ranking on the real feature table."""
    actions, entities = _load(cfg)
    real = _generate(cfg, actions, entities, "sparse")
    actual_bounds = BoundTable.from_point_table(real.entity_ids, real.columns, real.values)
    if debug_real_fake:
        est_bounds = actual_bounds
    else:
        est_bounds, _ = _estimate_bounds(cfg, actions, entities)
    estimated = _select(cfg, est_bounds, entities)
    actual = _select(cfg, actual_bounds, entities)
    recall = {f: rank_recall(estimated, actual, f) for f in RECALL_FRACTIONS}
    quartiles = relative_error_quartiles(estimated, actual)
    out = _out(cfg)
    with open(out / "recall.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fraction", "recall"])
        for f, r in recall.items():
            w.writerow([f"{f:.2f}", repr(r)])
    with open(out / "relative_error.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["q25", "q50", "q75"])
        w.writerow([repr(q) for q in quartiles])
    estimated.write_csv(out / "importance_estimated.csv")
    actual.write_csv(out / "importance_actual.csv")
    print(f"compare: recall@0.20 = {recall[0.2]:.3f}; relative error quartiles "
          f"{quartiles[0]:.3f} / {quartiles[1]:.3f} / {quartiles[2]:.3f}")
    return {"recall": recall, "quartiles": quartiles}


def histogram(values: np.ndarray, counts: np.ndarray, mixture, bin_width: float):
    """Rows (lo, hi, empirical density, modal count, mixture density) over non-empty windows."""
    keep = counts > 0
    values, counts = values[keep], counts[keep]
    if len(values) == 0:
        return []
    start = math.floor(values.min() / bin_width) * bin_width
    nbins = int(math.floor((values.max() - start) / bin_width)) + 1
    edges = start + bin_width * np.arange(nbins + 1)
    idx = np.minimum(((values - start) // bin_width).astype(np.int64), nbins - 1)
    hist = np.bincount(idx, minlength=nbins)
    density = hist / (len(values) * bin_width)
    predicted = mixture.bin_density(edges[:-1], edges[1:], drop_empty=True)
    rows = []
    for k in range(nbins):
        in_bin = counts[idx == k]
        modal = int(np.bincount(in_bin).argmax()) if len(in_bin) else 0
        rows.append((float(edges[k]), float(edges[k + 1]), float(density[k]), modal,
                     float(predicted[k])))
    return rows


def cmd_simulate(cfg: RunConfig, window="sum", period=10, mu=10.0, sigma=1.0, p=0.3, m=1,
                 steps=500000, bin_width=1.0, coverage_entities=200, coverage_ell=200) -> dict:
    kind = Assumption(cfg.assumption or "binomial")
    if kind is not Assumption.POISSON:
        m = 1
    if kind is Assumption.ALWAYS:
        p = 1.0
    params = AssumptionParams(kind=kind, mu=mu, sigma=sigma, p=p, m=m, ell=steps,
                              c_min=-math.inf, c_max=math.inf)
    sample = simulate_chain(window, params, period, steps, cfg.seed)
    mixture = stationary_mixture(window, params, period)
    rows = histogram(sample.values, sample.counts, mixture, bin_width)
    out = _out(cfg)
    with open(out / "histogram.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", "density", "component_count", "mixture_density"])
        for lo, hi, d, c, md in rows:
            w.writerow([repr(lo), repr(hi), repr(d), c, repr(md)])

    coverage = None
    with open(out / "coverage.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["aggregator", "entities", "covered", "rate"])
        if p == 0.0:
            w.writerow(["NoRecords", 0, 0, ""])
        else:
            coverage = coverage_trial(window, kind.value, p, mu, sigma, period, coverage_ell,
                                      coverage_entities, cfg.seed, m, cfg.aggregators, cfg.rho,
                                      cfg.rho_l, cfg.rho_r, cfg.lambda_method, cfg.m_cap)
            used = coverage.entities - coverage.skipped
            for agg in coverage.aggregators:
                w.writerow([agg, used, coverage.covered[agg], repr(coverage.rate(agg))])
    gap = max((abs(r[2] - r[4]) for r in rows), default=0.0)
    print(f"simulate: {len(rows)} bins, max density gap {gap:.4f}")
    return {"rows": rows, "gap": gap, "coverage": coverage}


def write_synthetic(out_dir: Path, n_entities: int, n_informative: int, n_noise: int,
                    seed: int = 0) -> tuple[Path, Path]:
    actions, entities = make_synthetic(n_entities, n_informative, n_noise, seed=seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_entity_csv(out_dir / "entities.csv", entities)
    write_action_csv(out_dir / "actions.csv", actions)
    return out_dir / "entities.csv", out_dir / "actions.csv"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    log.info("kernel backend: %s", kernels.BACKEND)
    try:
        if args.make_synthetic:
            out = args.top_output_dir or Path(".")
            ent, act = write_synthetic(out, *args.make_synthetic, seed=args.top_seed)
            print(f"wrote {ent} and {act}")
            return 0
        if args.command is None:
            parser.print_help()
            return EXIT_CONFIG
        cfg = config_from_args(args)
        if args.command == "estimate":
            cmd_estimate(cfg, args.emit_ensembles)
        elif args.command == "generate":
            cmd_generate(cfg, args.method)
        elif args.command == "compare":
            cmd_compare(cfg, args.debug_real_fake)
        else:
            cmd_simulate(cfg, args.window, args.period, args.mu, args.sigma, args.p, args.m,
                         args.steps, args.bin_width, args.coverage_entities, args.coverage_ell)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SchemaError, SwaggError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    return 0


if __name__ == "__main__":
    sys.exit(main())
