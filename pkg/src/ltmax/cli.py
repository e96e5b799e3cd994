"""Command-line interface.

Exit codes: 0 success, 1 parameter error, 2 I/O or file-format error,
3 assortativity tuning did not converge and --strict was given.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import harness
from .errors import EdgeListFormatError, ParameterError
from .gpi import gpi_select
from .graphgen import (generate_er, load_edge_list, save_edge_list,
                       spearman_assortativity, tune_assortativity)
from .strategies import StrategySpec, select_seeds
from .thresholds import (ThresholdSpec, load_thresholds, resistances,
                         sample_thresholds, save_thresholds)
from .cascade import cascade_size


def _add_config_flags(p: argparse.ArgumentParser, need_seed: bool = True):
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--master-seed", type=int, required=False,
                   help="master seed (required unless set in --config)")
    p.add_argument("--n", type=int)
    p.add_argument("--avg-degree", type=float)
    p.add_argument("--rho-list", help="comma-separated assortativity targets")
    p.add_argument("--sigma-list", help="comma-separated threshold stds")
    p.add_argument("--mean-threshold", type=float)
    p.add_argument("--strategies", help="space-separated strategy tokens")
    p.add_argument("--realizations", type=int)
    p.add_argument("--goal", type=float, help="stop at cascade fraction")
    p.add_argument("--budget", type=float, help="stop at seed fraction")
    p.add_argument("--output-dir")
    p.add_argument("--gpi-v", type=int)
    p.add_argument("--gpi-s", type=float)
    p.add_argument("--gpi-mode", choices=("alg_literal", "per_simulation",
                                          "seeds_only"))
    p.add_argument("--gpi-realizations", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--strict", action="store_true", default=None)
    p.add_argument("--timings", action="store_true", default=None)
    p.add_argument("--out", help="output CSV path")


def _config_from_args(args) -> harness.ExperimentConfig:
    overrides = {}
    mapping = {
        "master_seed": args.master_seed, "n": args.n,
        "avg_degree": args.avg_degree, "mean_threshold": args.mean_threshold,
        "realizations": args.realizations, "goal": args.goal,
        "budget": args.budget, "output_dir": args.output_dir,
        "gpi_v": args.gpi_v, "gpi_s": args.gpi_s, "gpi_mode": args.gpi_mode,
        "gpi_realizations": args.gpi_realizations, "workers": args.workers,
        "strict": args.strict, "timings": args.timings,
    }
    for key, value in mapping.items():
        if value is not None:
            overrides[key] = value
    if args.rho_list is not None:
        overrides["rho_list"] = tuple(float(x) for x in args.rho_list.split(","))
    if args.sigma_list is not None:
        overrides["sigma_list"] = tuple(float(x) for x in args.sigma_list.split(","))
    if args.strategies is not None:
        overrides["strategies"] = tuple(args.strategies.split())
    if overrides.get("budget") is not None and "goal" not in overrides:
        overrides["goal"] = None
    if args.config:
        cfg = harness.config_from_file(args.config, **overrides)
    else:
        cfg = harness.ExperimentConfig(**overrides)
    if args.master_seed is None and (not args.config or "master_seed" not in open(args.config).read()):
        raise ParameterError("--master-seed is required for experiment commands")
    return cfg


def _out_path(args, cfg, default_name: str) -> str:
    if args.out:
        return args.out
    os.makedirs(cfg.output_dir, exist_ok=True)
    return os.path.join(cfg.output_dir, default_name)


def _cmd_gen_graph(args) -> int:
    g = generate_er(args.n, args.avg_degree, args.seed)
    save_edge_list(g, args.out)
    print(f"wrote {g.node_count} nodes, {g.edge_count} edges to {args.out}")
    return 0


def _cmd_tune_rho(args) -> int:
    g = load_edge_list(args.graph)
    tuned, report = tune_assortativity(g, args.rho, tol=args.tol,
                                       max_swaps=args.max_swaps,
                                       rng_seed=args.seed)
    save_edge_list(tuned, args.out)
    print(f"rho={report.rho:.4f} after {report.swap_count} swaps "
          f"(converged={report.converged}); wrote {args.out}")
    if not report.converged and args.strict:
        return 3
    return 0


def _cmd_sample_thresholds(args) -> int:
    if args.graph:
        n = load_edge_list(args.graph).node_count
    elif args.n:
        n = args.n
    else:
        raise ParameterError("give --n or --graph")
    spec = ThresholdSpec.from_sigma(args.sigma, args.mean)
    phi = sample_thresholds(spec, n, args.seed)
    save_thresholds(phi, args.out)
    print(f"wrote {n} thresholds (kind={spec.kind}) to {args.out}")
    return 0


def _cmd_run_cascade(args) -> int:
    g = load_edge_list(args.graph)
    phi = load_thresholds(args.thresholds)
    r = resistances(g, phi)
    seeds = [int(x) for x in args.seeds.split(",")] if args.seeds else []
    size = cascade_size(g, r, seeds)
    print(f"f(X)={size} S={size / g.node_count!r}")
    return 0


def _cmd_select(args) -> int:
    g = load_edge_list(args.graph)
    phi = load_thresholds(args.thresholds)
    r = resistances(g, phi)
    if args.strategy == "gpi":
        from .gpi import GPIParams
        if args.seed is None:
            raise ParameterError("gpi selection requires --seed")
        params = GPIParams(s=args.gpi_s, v=args.gpi_v,
                           s_goal=args.goal if args.goal is not None else 0.5,
                           budget_fraction=args.budget)
        traj = gpi_select(g, r, params, args.seed)
    else:
        spec = StrategySpec.parse(args.strategy)
        traj = select_seeds(g, r, spec, budget_fraction=args.budget,
                            goal_fraction=args.goal, phi=phi)
    rows = []
    for idx, (p, s) in enumerate(traj.curve):
        node = str(traj.seeds[idx - 1]) if idx else ""
        rows.append((str(idx), node, repr(p), repr(s)))
    harness.write_csv(args.out, "step,node,p,S", rows)
    pc = "" if traj.p_c is None else repr(traj.p_c)
    print(f"{len(traj.seeds)} seeds, final S={traj.curve[-1][1]!r}, p_c={pc}; "
          f"wrote {args.out}")
    return 0


def _cmd_compare(args) -> int:
    cfg = _config_from_args(args)
    rows, warnings = harness.run_comparison(cfg)
    path = _out_path(args, cfg, "comparison.csv")
    harness.write_csv(path, harness.COMPARISON_HEADER, rows)
    print(f"wrote {len(rows)} rows to {path}")
    return harness.emit_warnings(warnings, cfg.strict)


def _cmd_pc_curve(args) -> int:
    cfg = _config_from_args(args)
    rows = None
    if args.input:
        with open(args.input) as fh:
            header = fh.readline().strip()
            if header != harness.COMPARISON_HEADER:
                raise EdgeListFormatError(
                    f"{args.input}: expected comparison CSV header")
            rows = [line.strip().split(",") for line in fh if line.strip()]
    out_rows, warnings = harness.pc_curve(cfg, s_target=args.s_target, rows=rows)
    path = _out_path(args, cfg, "pc_curve.csv")
    harness.write_csv(path, harness.PC_HEADER, out_rows)
    print(f"wrote {len(out_rows)} rows to {path}")
    return harness.emit_warnings(warnings, cfg.strict)


def _cmd_weight_scan(args) -> int:
    cfg = _config_from_args(args)
    rows, best = harness.weight_scan(cfg, grid_step=args.grid_step)
    path = _out_path(args, cfg, "weight_scan.csv")
    harness.write_csv(path, harness.WEIGHT_HEADER, rows)
    print(f"wrote {len(rows)} rows to {path}")
    print(f"argmin weights: a={best[0]!r} b={best[1]!r} c={best[2]!r}")
    return 0


def _cmd_best_prob(args) -> int:
    cfg = _config_from_args(args)
    p_grid = [float(x) for x in args.p_grid.split(",")]
    rows = harness.best_strategy_probability(cfg, p_grid)
    path = _out_path(args, cfg, "best_prob.csv")
    harness.write_csv(path, harness.BEST_PROB_HEADER, rows)
    print(f"wrote {len(rows)} rows to {path}")
    return 0


def _cmd_gpi_sweep(args) -> int:
    cfg = _config_from_args(args)
    v_list = [int(x) for x in args.v_list.split(",")]
    s_list = [float(x) for x in args.s_list.split(",")]
    rows = harness.gpi_sweep(cfg, v_list, s_list, repeats=args.repeats)
    path = _out_path(args, cfg, "gpi_sweep.csv")
    harness.write_csv(path, harness.GPI_SWEEP_HEADER, rows)
    print(f"wrote {len(rows)} rows to {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ltmax",
        description="Linear-threshold-model influence maximization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="generate an Erdos-Renyi graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--avg-degree", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen_graph)

    p = sub.add_parser("tune-rho", help="rewire toward a target assortativity")
    p.add_argument("--graph", required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--tol", type=float, default=0.01)
    p.add_argument("--max-swaps", type=int, default=None)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(fn=_cmd_tune_rho)

    p = sub.add_parser("sample-thresholds", help="draw node thresholds")
    p.add_argument("--n", type=int)
    p.add_argument("--graph")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--mean", type=float, default=0.5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sample_thresholds)

    p = sub.add_parser("run-cascade", help="cascade size of a seed set")
    p.add_argument("--graph", required=True)
    p.add_argument("--thresholds", required=True)
    p.add_argument("--seeds", default="", help="comma-separated node ids")
    p.set_defaults(fn=_cmd_run_cascade)

    p = sub.add_parser("select", help="run one seed-selection strategy")
    p.add_argument("--graph", required=True)
    p.add_argument("--thresholds", required=True)
    p.add_argument("--strategy", required=True,
                   help="thres|deg|res|dd|id|bi:a,b,c|citm:L|greedy|gpi")
    p.add_argument("--goal", type=float)
    p.add_argument("--budget", type=float)
    p.add_argument("--seed", type=int, help="RNG seed (gpi only)")
    p.add_argument("--gpi-v", type=int, default=20_000)
    p.add_argument("--gpi-s", type=float, default=2.5e-3)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_select)

    p = sub.add_parser("compare", help="strategy comparison over a grid")
    _add_config_flags(p)
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("pc-curve", help="aggregate p_c per strategy")
    _add_config_flags(p)
    p.add_argument("--s-target", type=float, default=0.5)
    p.add_argument("--input", help="existing comparison CSV to aggregate")
    p.set_defaults(fn=_cmd_pc_curve)

    p = sub.add_parser("weight-scan", help="p_c surface over BI weights")
    _add_config_flags(p)
    p.add_argument("--grid-step", type=float, default=None)
    p.set_defaults(fn=_cmd_weight_scan)

    p = sub.add_parser("best-prob", help="probability of being the best strategy")
    _add_config_flags(p)
    p.add_argument("--p-grid", required=True,
                   help="comma-separated seed fractions")
    p.set_defaults(fn=_cmd_best_prob)

    p = sub.add_parser("gpi-sweep", help="GPI p_c over (v, s) grids")
    _add_config_flags(p)
    p.add_argument("--v-list", required=True)
    p.add_argument("--s-list", required=True)
    p.add_argument("--repeats", type=int, default=1)
    p.set_defaults(fn=_cmd_gpi_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (EdgeListFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
