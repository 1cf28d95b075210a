"""Command-line front end.

Exit codes: 0 success, 1 usage or input error, 2 partial inference (the
network search stopped early), 3 numerical failure inside a routine.

Global flags (``--seed --jobs --window --alpha --report``) may appear
before or after the subcommand. ``NONSTAT_CAUSAL_SEED`` overrides
``--seed`` when set.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import lagop, spectra, stationarity, svg, synthgen
from .bivariate import InferenceConfig, infer_direction, fit_direction
from .errors import (DegenerateInputError, DimensionError, EnumerationLimitError, InsufficientDataError,
                     ModelViolationError, NonInvertibleError, ParameterError)
from .harness import experiment_tag, run_harness
from .network import NetworkConfig, infer_dag
from .table import TableError, detrend, load_csv, write_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2
EXIT_NUMERIC = 3
SEED_ENV = "NONSTAT_CAUSAL_SEED"
GLOBAL_DEFAULTS = {"seed": 0, "jobs": 1, "window": 128, "alpha": 0.05, "report": None, "verbose": False}

log = logging.getLogger("nonstat_causal")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    s = argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=s, help="base seed (env %s wins)" % SEED_ENV)
    p.add_argument("--jobs", type=int, default=s, help="worker processes for the harness")
    p.add_argument("--window", type=int, default=s, help="block length N_F (power of two, default 128)")
    p.add_argument("--alpha", type=float, default=s, help="significance level for all tests (default 0.05)")
    p.add_argument("--report", default=s, help="write the JSON report to this path")
    p.add_argument("-v", "--verbose", action="store_true", default=s)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = _Parser(prog="nonstat-causal", parents=[common],
                     description="Causal inference for nonstationary time series.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic experiment")
    p.add_argument("--experiment", required=True, help="1..5")
    p.add_argument("--params", default="", help="k=v,... overrides, e.g. L=200,sigma_n=25")
    p.add_argument("--length", type=int, default=synthgen.DEFAULT_LENGTH)
    p.add_argument("--structure-seed", type=int, default=None)
    p.add_argument("--out", default="simulated.csv")
    p.add_argument("--truth", default=None, help="ground-truth JSON (default: <out>_truth.json)")
    p.add_argument("--dump-operator", default=None, metavar="PREFIX",
                   help="write each true filter to PREFIX<cause>_<effect>.csv")

    p = sub.add_parser("spectra", parents=[common], help="multitaper evolutionary spectrum of one column")
    _input_args(p)
    p.add_argument("--column", required=True)
    p.add_argument("--tapers", type=int, default=spectra.DEFAULT_K)
    p.add_argument("--nw", type=float, default=spectra.DEFAULT_NW)
    p.add_argument("--out", default=None, help="CSV grid (default: stdout)")
    p.add_argument("--svg", default=None, help="heatmap output")

    p = sub.add_parser("psr-test", parents=[common], help="stationarity test on one column")
    _input_args(p)
    p.add_argument("--column", required=True)
    p.add_argument("--tapers", type=int, default=spectra.DEFAULT_K)
    p.add_argument("--nw", type=float, default=spectra.DEFAULT_NW)
    p.add_argument("--adjust", choices=stationarity.ADJUSTMENTS, default="sidak")

    p = sub.add_parser("infer-bivariate", parents=[common], help="direction between two columns")
    _input_args(p)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    _inference_args(p)
    p.add_argument("--filter-svg", default=None, help="plot the x->y filter estimate")
    p.add_argument("--truth-operator", default=None, help="operator CSV to overlay on --filter-svg")

    p = sub.add_parser("infer-network", parents=[common], help="DAG over several columns")
    _input_args(p)
    p.add_argument("--columns", default=None, help="comma-separated names (default: all)")
    _inference_args(p)
    p.add_argument("--mean-filter-a", type=float, default=0.15)
    p.add_argument("--mean-filter-lags", type=int, default=3)
    p.add_argument("--mean-filter-first-lag", type=int, default=1)
    p.add_argument("--independence-method", choices=("mean_filter", "kernel"), default="mean_filter")
    p.add_argument("--max-ancestors", type=int, default=12)
    p.add_argument("--parent-fallback", action="store_true")
    p.add_argument("--greedy", action="store_true")

    p = sub.add_parser("harness", parents=[common], help="run an experiment batch and tally the results")
    p.add_argument("--experiment", required=True, help="1..5")
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--params", default="")
    p.add_argument("--length", type=int, default=synthgen.DEFAULT_LENGTH)
    p.add_argument("--stationarity", choices=("psr", "ump"), default=None,
                   help="default: ump for experiment 3, psr otherwise")
    p.add_argument("--order-rule", default="bic")
    p.add_argument("--mean-filter-a", type=float, default=0.15)
    return parser


def _input_args(p):
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--detrend", default="linear", help="none | linear | polynomial(k), k <= 5")


def _inference_args(p):
    p.add_argument("--order-rule", default="bic", help="aic | bic | fixed(p)")
    p.add_argument("--stationarity", choices=("psr", "ump"), default="psr")
    p.add_argument("--independence", choices=("auto", "wild_bootstrap", "gamma"), default="auto")
    p.add_argument("--n-resamples", type=int, default=300)
    p.add_argument("--alpha-stat", type=float, default=None, help="stationarity level (default: --alpha)")


def resolve_globals(ns) -> argparse.Namespace:
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(ns, key):
            setattr(ns, key, value)
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip() != "":
        try:
            ns.seed = int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    if ns.jobs == 0 or ns.jobs < -1:
        raise UsageError("--jobs must be a positive count or -1 for all cores")
    return ns


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _emit(ns, payload: dict) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=False)
    if ns.report:
        Path(ns.report).write_text(text + "\n")
    print(text)


def _series(ns, name):
    table = load_csv(ns.input, [name])
    return detrend(table.column(table.columns[0]), ns.detrend)


def _inference_config(ns, cls=InferenceConfig, **extra):
    return cls(window=ns.window, alpha_ind=ns.alpha,
               alpha_stat=ns.alpha if ns.alpha_stat is None else ns.alpha_stat,
               order_rule=ns.order_rule, seed=ns.seed, n_resamples=ns.n_resamples,
               stationarity=ns.stationarity, independence=ns.independence, **extra)


def _config_dict(cfg) -> dict:
    d = asdict(cfg)
    d["order_rule"] = str(d["order_rule"])
    return d


# ---------------------------------------------------------------- commands

def cmd_simulate(ns) -> int:
    tag = experiment_tag(ns.experiment)
    params = synthgen.parse_params(ns.params)
    spec = synthgen.SynthModelSpec(tag, ns.length, params, ns.seed, ns.structure_seed)
    data = synthgen.generate(spec)
    out = Path(ns.out)
    write_csv(out, data.names, data.series.T)
    truth_path = Path(ns.truth) if ns.truth else out.with_name(out.stem + "_truth.json")
    truth = {"experiment": tag, "seed": ns.seed, "structure_seed": ns.structure_seed, "length": ns.length,
             "names": data.names, **data.truth, "params": data.params}
    truth_path.write_text(json.dumps(_jsonable(truth), indent=2) + "\n")
    dumped = []
    if ns.dump_operator:
        prefix = ns.dump_operator
        if os.path.isdir(prefix):
            prefix = os.path.join(prefix, "operator_")
        for (i, j), op in sorted(data.filters.items()):
            path = f"{prefix}{i}_{j}.csv"
            lagop.write_operator_csv(op, path)
            dumped.append(path)
    _emit(ns, {"command": "simulate", "experiment": tag, "series": str(out), "truth": str(truth_path),
               "operators": dumped, "length": ns.length, "columns": data.names})
    return EXIT_OK


def cmd_spectra(ns) -> int:
    x = _series(ns, ns.column)
    tapers = spectra.dpss_tapers(ns.window, ns.nw, ns.tapers)
    spec = spectra.auto_spectrum(x, tapers)
    cols = ["t"] + [f"w={w:.6f}" for w in spec.freqs]
    grid = np.column_stack([spec.block_centers, spec.values])
    if ns.out:
        write_csv(ns.out, cols, grid)
    else:
        np.savetxt(sys.stdout, grid, fmt="%.17g", delimiter=",", header=",".join(cols), comments="")
    if ns.svg:
        svg.heatmap(spec.values, spec.block_centers, spec.freqs, ns.svg, title=f"evolutionary spectrum: {ns.column}")
    if ns.report:
        payload = {"command": "spectra", "column": ns.column, "block_centers": spec.block_centers,
                   "freqs": spec.freqs, "values": spec.values, "taper_count": spec.taper_count,
                   "block_length": spec.block_length}
        Path(ns.report).write_text(json.dumps(_jsonable(payload)) + "\n")
    return EXIT_OK


def cmd_psr_test(ns) -> int:
    x = _series(ns, ns.column)
    tapers = spectra.dpss_tapers(ns.window, ns.nw, ns.tapers)
    rep = stationarity.psr_test(spectra.auto_spectrum(x, tapers), ns.alpha, ns.adjust)
    _emit(ns, {"command": "psr-test", "column": ns.column, **rep.to_dict(),
               "stationary": rep.stationary, "is_ump": rep.is_ump})
    return EXIT_OK


def cmd_infer_bivariate(ns) -> int:
    x = _series(ns, ns.x)
    y = _series(ns, ns.y)
    cfg = _inference_config(ns)
    dec = infer_direction(x, y, cfg)
    if ns.filter_svg:
        fit = fit_direction(x, y, cfg)
        truth = lagop.read_operator_csv(ns.truth_operator).coeffs if ns.truth_operator else None
        svg.filter_overlay(fit.filter, truth, path=ns.filter_svg, title=f"filter {ns.x} -> {ns.y}")
    _emit(ns, {"command": "infer-bivariate", "x": ns.x, "y": ns.y, **dec.to_dict(),
               "config": _config_dict(cfg)})
    return EXIT_OK


def cmd_infer_network(ns) -> int:
    cols = [c.strip() for c in ns.columns.split(",")] if ns.columns else None
    table = load_csv(ns.input, cols)
    series = np.vstack([detrend(table.column(c), ns.detrend) for c in table.columns])
    cfg = _inference_config(ns, NetworkConfig, mean_filter_a=ns.mean_filter_a,
                            mean_filter_lags=ns.mean_filter_lags,
                            mean_filter_first_lag=ns.mean_filter_first_lag,
                            max_ancestors_enumerated=ns.max_ancestors,
                            parent_fallback=ns.parent_fallback,
                            independence_method=ns.independence_method, greedy=ns.greedy)
    res = infer_dag(series, cfg, table.columns)
    payload = {"command": "infer-network", "names": table.columns, **res.to_dict(),
               "config": _config_dict(cfg)}
    _emit(ns, payload)
    if not res.complete:
        log.warning("search stopped early: no remaining residual passed the UMP screen")
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_harness(ns) -> int:
    tag = experiment_tag(ns.experiment)
    params = synthgen.parse_params(ns.params)
    if tag == "exp5":
        cfg = NetworkConfig(window=ns.window, alpha_ind=ns.alpha, alpha_stat=ns.alpha, seed=ns.seed,
                            order_rule=ns.order_rule, mean_filter_a=ns.mean_filter_a)
    else:
        mode = ns.stationarity or ("ump" if tag == "exp3" else "psr")
        cfg = InferenceConfig(window=ns.window, alpha_ind=ns.alpha, alpha_stat=ns.alpha, seed=ns.seed,
                              order_rule=ns.order_rule, stationarity=mode)
    rep = run_harness(tag, ns.replicates, cfg, ns.seed, params, ns.jobs, ns.length)
    payload = rep.to_dict()
    if ns.report:
        Path(ns.report).write_text(json.dumps(_jsonable(payload), indent=2) + "\n")
    width = max(len(c) for c in rep.categories)
    print(f"{tag}: {rep.replicates} replicates, {rep.wall_clock:.1f}s")
    for c in rep.categories:
        print(f"  {c:<{width}}  {rep.counts[c]:>5}  {rep.percentages[c]:6.2f}%")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "spectra": cmd_spectra,
    "psr-test": cmd_psr_test,
    "infer-bivariate": cmd_infer_bivariate,
    "infer-network": cmd_infer_network,
    "harness": cmd_harness,
}

_USAGE_ERRORS = (UsageError, TableError, ParameterError, DimensionError, InsufficientDataError,
                 EnumerationLimitError, FileNotFoundError, IsADirectoryError, PermissionError, ValueError)
_NUMERIC_ERRORS = (ModelViolationError, NonInvertibleError, DegenerateInputError, ArithmeticError,
                   np.linalg.LinAlgError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a parse error already reported
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        ns = resolve_globals(ns)
        logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[ns.command](ns)
    # numeric errors first: DegenerateInputError is also a ValueError
    except _NUMERIC_ERRORS as exc:
        print(f"nonstat-causal: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _USAGE_ERRORS as exc:
        print(f"nonstat-causal: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
