#!/usr/bin/env python3
"""
pose_flc_cli.py -- fuzzy-tuned SE(3) pose filter: tuning, simulation, benchmarks

Subcommands:
  tune       --config FILE --out params.txt [--nodes N] [--iters T] [--seed S]
             writes params.txt, trace.csv and membership.csv (same directory)
  simulate   --params params.txt --config FILE --out series.csv [--seed S]
             [--gain-mode fuzzy|constant:<k_op>] [--error-mode measurable|oracle]
  gsa-bench  --function sphere|rosenbrock|rastrigin --dim D --iters T --seed S
             [--nodes N] [--out trace.csv]
  compare    --config FILE [--params params.txt] [--seed S] [--out compare.csv]

Exit codes: 0 success, 2 configuration/validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from pose_flc import __version__
from pose_flc.config import settings
from pose_flc.errors import EXIT_OK, ConfigurationError, PoseFlcError, exit_code_for
from pose_flc.fuzzy_gain import build_model
from pose_flc.gsa import run_gsa
from pose_flc.models import GsaConfig, RunConfig, validated
from pose_flc.objectives import get_objective
from pose_flc.persistence import (
    export_comparison_csv,
    export_csv,
    export_membership_csv,
    export_trace_csv,
    load_params_file,
    load_run_config,
    save_params,
)
from pose_flc.simulator import initial_estimate
from pose_flc.tuning_harness import (
    compare_gains,
    episode_cost,
    evaluate_held_out,
    run_episode,
    tune_flc,
)

logger = logging.getLogger("pose_flc")


# -------------------------
# Helpers
# -------------------------

def _load_config(path: Optional[str]) -> RunConfig:
    return load_run_config(path) if path else RunConfig()


def _with(model, **changes):
    """Re-validated copy of a frozen pydantic model."""
    return validated(type(model), **{**model.model_dump(), **changes})


def _workers(flag: Optional[int], cfg: GsaConfig) -> int:
    if flag:
        return flag
    return cfg.workers if cfg.workers > 1 else settings.workers


def _output(path: Optional[str], default: str) -> Path:
    return Path(path) if path else Path(settings.output_dir) / default


def _parse_gain_mode(mode: str) -> Optional[float]:
    """None for 'fuzzy', k_op for 'constant:<k_op>'."""
    if mode == "fuzzy":
        return None
    if mode.startswith("constant:"):
        try:
            k_op = float(mode.split(":", 1)[1])
        except ValueError:
            raise ConfigurationError(f"invalid gain mode '{mode}'") from None
        if not np.isfinite(k_op) or k_op < 0:
            raise ConfigurationError(f"constant k_op must be finite and >= 0, got {k_op}")
        return k_op
    raise ConfigurationError(f"invalid gain mode '{mode}' (expected fuzzy or constant:<k>)")


# -------------------------
# Subcommands
# -------------------------

def cmd_tune(args) -> int:
    cfg = _load_config(args.config)
    scenario = cfg.scenario
    gsa_changes = {"workers": _workers(args.workers, cfg.gsa)}
    if args.nodes is not None:
        gsa_changes["nodes"] = args.nodes
    if args.iters is not None:
        gsa_changes["iterations"] = args.iters
    if args.seed is not None:
        scenario = _with(scenario, seed=args.seed)
        gsa_changes["seed"] = args.seed
    gsa = _with(cfg.gsa, **gsa_changes)

    init = initial_estimate(cfg.init_rotation, cfg.init_position)
    result = tune_flc(scenario, gsa, cfg.cost, scenario.seed, init, cfg.filter, progress=not args.no_progress)

    out = Path(args.out)
    save_params(result.params, out, cfg.filter.gamma, cfg.filter.s_delta, scenario.seed)
    export_trace_csv(result.gsa, out.with_name("trace.csv"))
    export_membership_csv(build_model(result.params), out.with_name("membership.csv"))

    held_out = evaluate_held_out(result.params, scenario, cfg.cost, None, init, cfg.filter)
    print(f"best cost: {result.gsa.best_cost:.6f}")
    print(f"held-out mean cost ({len(held_out)} seeds): {np.mean(held_out):.6f}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    scenario = cfg.scenario if args.seed is None else _with(cfg.scenario, seed=args.seed)
    filter_config = cfg.filter if args.error_mode is None else _with(cfg.filter, error_mode=args.error_mode)

    k_op = _parse_gain_mode(args.gain_mode)
    if k_op is None:
        if not args.params:
            raise ConfigurationError("--params is required with --gain-mode fuzzy")
        params_file = load_params_file(args.params)
        filter_config = _with(filter_config, gamma=params_file.gamma, s_delta=params_file.s_delta)
        gain = params_file.params
    else:
        gain = k_op

    init = initial_estimate(cfg.init_rotation, cfg.init_position)
    series = run_episode(gain, scenario, init, None, filter_config)
    export_csv(series, args.out)
    print(f"cost: {episode_cost(series, cfg.cost):.6f}")
    return EXIT_OK


def cmd_gsa_bench(args) -> int:
    objective = get_objective(args.function)
    config = validated(
        GsaConfig,
        nodes=args.nodes,
        iterations=args.iters,
        seed=args.seed,
        workers=1,
    )
    result = run_gsa(objective.space(args.dim), objective.fn, config, progress=not args.no_progress)
    export_trace_csv(result, _output(args.out, "trace.csv"))
    print(f"{objective.name} dim={args.dim}: best cost {result.best_cost:.6g}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _load_config(args.config)
    params = None
    filter_config = cfg.filter
    if args.params:
        params_file = load_params_file(args.params)
        params = params_file.params
        filter_config = _with(filter_config, gamma=params_file.gamma, s_delta=params_file.s_delta)

    init = initial_estimate(cfg.init_rotation, cfg.init_position)
    results = compare_gains(cfg.scenario, cfg.cost, args.seed, params, init=init, filter_config=filter_config)
    export_comparison_csv(results, _output(args.out, "compare.csv"))

    print(f"{'gain':>8}  {'e_tr':>12}  {'e_ss':>12}  {'cost':>12}")
    for r in results:
        print(f"{r.label:>8}  {r.e_tr:12.4f}  {r.e_ss:12.4f}  {r.total:12.4f}")
    return EXIT_OK


# -------------------------
# Main
# -------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pose_flc_cli.py",
        description="Fuzzy-tuned nonlinear pose filter on SE(3)",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tune", help="optimize the membership parameters with GSA")
    p.add_argument("--config", help="scenario/filter/search config file")
    p.add_argument("--out", required=True, help="params file to write")
    p.add_argument("--nodes", type=int)
    p.add_argument("--iters", type=int)
    p.add_argument("--seed", type=int, help="measurement and search seed")
    p.add_argument("--workers", type=int, help="parallel cost evaluations")
    p.add_argument("--no-progress", action="store_true")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("simulate", help="run one episode and export the series")
    p.add_argument("--params", help="params file (fuzzy gain mode)")
    p.add_argument("--config", help="scenario/filter config file")
    p.add_argument("--out", required=True, help="series CSV to write")
    p.add_argument("--seed", type=int)
    p.add_argument("--gain-mode", default="fuzzy", help="fuzzy or constant:<k_op>")
    p.add_argument("--error-mode", choices=["measurable", "oracle"])
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gsa-bench", help="run GSA on a benchmark function")
    p.add_argument("--function", required=True, choices=["sphere", "rosenbrock", "rastrigin"])
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--nodes", type=int, default=30)
    p.add_argument("--out", help="trace CSV (default: trace.csv in the output dir)")
    p.add_argument("--no-progress", action="store_true")
    p.set_defaults(func=cmd_gsa_bench)

    p = sub.add_parser("compare", help="constant gains vs. fuzzy gain on one seed")
    p.add_argument("--config", help="scenario/filter config file")
    p.add_argument("--params", help="params file; adds the fuzzy controller")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="comparison CSV (default: compare.csv in the output dir)")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, settings.log_level, logging.INFO),
        format='[%(asctime)s] %(levelname)s: %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    logger.debug("pose_flc %s: %s", __version__, args.command)

    try:
        return args.func(args)
    except (PoseFlcError, FloatingPointError) as e:
        code = exit_code_for(e)
        if code is None:
            raise
        print(f"error: {e}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
