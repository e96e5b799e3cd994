"""Experiment orchestration: instance generation over (rho, sigma) grids,
strategy comparisons, p_c aggregation, BI weight scans, best-strategy
probabilities, GPI parameter sweeps, and reproducible CSV output.

Every random draw is seeded from the master seed through a named
SeedSequence spawn key (domain tag plus grid indices), so output bytes are
a pure function of the configuration, independent of worker count or
scheduling.
"""

from __future__ import annotations

import hashlib
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .errors import ParameterError
from .gpi import GPIParams, gpi_select
from .graphgen import Graph, generate_er, tune_assortativity
from .strategies import SelectionTrajectory, StrategySpec, select_seeds
from .thresholds import SIGMA_UNIFORM, ThresholdSpec, resistances, sample_thresholds

# seed-derivation domain tags
_TAG_GRAPH = 0
_TAG_TUNE = 1
_TAG_PHI = 2
_TAG_STRATEGY = 3
_TAG_SWEEP = 4

COMPARISON_HEADER = "strategy,rho,sigma,instance_hash,realization_seed,p,S,wall_ms"
PC_HEADER = "strategy,rho,sigma,mean_pc,std_pc"
WEIGHT_HEADER = "a,b,c,mean_pc,std_pc"
BEST_PROB_HEADER = "p,strategy,probability"
GPI_SWEEP_HEADER = "v,s,repeat,p_c"


def derive_seed(master: int, *key: int) -> int:
    """Named splittable derivation from the master seed."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def instance_hash(g: Graph, phi: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(g.offsets).tobytes())
    h.update(np.ascontiguousarray(g.neighbors).tobytes())
    h.update(np.ascontiguousarray(phi).tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class ExperimentConfig:
    """Desk-scale defaults; the paper-scale run is the same shape with
    n=10000 and 500 realizations.
    """

    n: int = 2000
    avg_degree: float = 10.0
    rho_list: tuple[float, ...] = (0.0,)
    sigma_list: tuple[float, ...] = (0.0, 0.2, SIGMA_UNIFORM)
    mean_threshold: float = 0.5
    strategies: tuple[str, ...] = ("thres", "deg", "res", "dd", "id", "citm:6")
    realizations: int = 20
    master_seed: int = 0
    goal: float | None = 0.5
    budget: float | None = None
    output_dir: str = "."
    weight_grid_step: float = 0.05
    gpi_v: int = 20_000
    gpi_s: float = 2.5e-3
    gpi_mode: str = "alg_literal"
    gpi_realizations: int | None = None
    tune_tol: float = 0.01
    tune_max_swaps: int | None = None
    workers: int = 1
    strict: bool = False
    timings: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError("n must be >= 2")
        if self.realizations < 1:
            raise ParameterError("realizations must be >= 1")
        if not self.rho_list or not self.sigma_list:
            raise ParameterError("rho_list and sigma_list must be non-empty")
        if (self.goal is None) == (self.budget is None):
            raise ParameterError("set exactly one of goal / budget")
        for frac in (self.goal, self.budget):
            if frac is not None and not 0.0 < frac <= 1.0:
                raise ParameterError("stop fraction must lie in (0, 1]")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")
        for token in self.strategies:
            if token != "gpi":
                StrategySpec.parse(token)

    def gpi_params(self, budget_fraction: float | None = None) -> GPIParams:
        return GPIParams(s=self.gpi_s, v=self.gpi_v,
                         s_goal=self.goal if self.goal is not None else 0.5,
                         mode=self.gpi_mode, budget_fraction=budget_fraction)


_CONFIG_LIST_FIELDS = {"rho_list", "sigma_list"}


def config_from_file(path, **overrides) -> ExperimentConfig:
    """Parse a 'key = value' config file ('#' comments; lists are
    comma-separated; strategies are whitespace-separated tokens).
    Keyword overrides win over file values.
    """
    raw: dict[str, str] = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ParameterError(f"config line {ln}: expected key = value")
            key, _, value = text.partition("=")
            raw[key.strip()] = value.strip()

    kwargs = {}
    valid = {f.name: f for f in fields(ExperimentConfig)}
    for key, value in raw.items():
        if key not in valid:
            raise ParameterError(f"unknown config key {key!r}")
        if key in _CONFIG_LIST_FIELDS:
            kwargs[key] = tuple(float(x) for x in value.split(","))
        elif key == "strategies":
            kwargs[key] = tuple(value.split())
        elif key in ("goal", "budget"):
            kwargs[key] = None if value.lower() == "none" else float(value)
        elif key in ("n", "realizations", "master_seed", "gpi_v", "workers"):
            kwargs[key] = int(value)
        elif key in ("gpi_realizations", "tune_max_swaps"):
            kwargs[key] = None if value.lower() == "none" else int(value)
        elif key in ("strict", "timings"):
            kwargs[key] = value.lower() in ("1", "true", "yes")
        elif key in ("output_dir", "gpi_mode"):
            kwargs[key] = value
        else:
            kwargs[key] = float(value)
    kwargs.update(overrides)
    # a budget from file or overrides displaces the default goal
    if kwargs.get("budget") is not None and "goal" not in kwargs:
        kwargs["goal"] = None
    return ExperimentConfig(**kwargs)


@dataclass
class Instance:
    graph: Graph
    phi: np.ndarray
    r: np.ndarray
    hash: str
    realization_seed: int
    tune_converged: bool


def build_instance(cfg: ExperimentConfig, rho_idx: int, sigma_idx: int,
                   real_idx: int, phi_idx: int | None = None) -> Instance:
    """Graph tuned to rho_list[rho_idx] plus thresholds for
    sigma_list[sigma_idx]; phi_idx (default real_idx) indexes the threshold
    draw so one graph can carry many threshold generations.
    """
    graph_seed = derive_seed(cfg.master_seed, _TAG_GRAPH, real_idx)
    g = generate_er(cfg.n, cfg.avg_degree, graph_seed)
    rho = cfg.rho_list[rho_idx]
    converged = True
    if abs(rho) > cfg.tune_tol:
        tune_seed = derive_seed(cfg.master_seed, _TAG_TUNE, rho_idx, real_idx)
        g, report = tune_assortativity(g, rho, tol=cfg.tune_tol,
                                       max_swaps=cfg.tune_max_swaps,
                                       rng_seed=tune_seed)
        converged = report.converged
    if phi_idx is None:
        phi_idx = real_idx
    phi_seed = derive_seed(cfg.master_seed, _TAG_PHI, sigma_idx, phi_idx)
    spec = ThresholdSpec.from_sigma(cfg.sigma_list[sigma_idx], cfg.mean_threshold)
    phi = sample_thresholds(spec, cfg.n, phi_seed)
    r = resistances(g, phi)
    return Instance(graph=g, phi=phi, r=r, hash=instance_hash(g, phi),
                    realization_seed=graph_seed, tune_converged=converged)


def run_strategy(cfg: ExperimentConfig, inst: Instance, token: str,
                 strat_idx: int, rho_idx: int, sigma_idx: int, real_idx: int,
                 budget: float | None = None,
                 goal: float | None = None) -> SelectionTrajectory:
    """One trajectory; `token` is a StrategySpec token or 'gpi'."""
    if budget is None and goal is None:
        budget, goal = cfg.budget, cfg.goal
    if token == "gpi":
        params = cfg.gpi_params(budget_fraction=budget)
        seed = derive_seed(cfg.master_seed, _TAG_STRATEGY, strat_idx,
                           rho_idx, sigma_idx, real_idx)
        return gpi_select(inst.graph, inst.r, params, seed)
    spec = StrategySpec.parse(token)
    return select_seeds(inst.graph, inst.r, spec, budget_fraction=budget,
                        goal_fraction=goal, phi=inst.phi)


def _comparison_job(args):
    cfg, rho_idx, sigma_idx, real_idx = args
    inst = build_instance(cfg, rho_idx, sigma_idx, real_idx)
    rows = []
    warnings = []
    if not inst.tune_converged:
        warnings.append(
            f"assortativity tuning did not converge for rho={cfg.rho_list[rho_idx]}, "
            f"realization {real_idx}")
    for strat_idx, token in enumerate(cfg.strategies):
        if (token == "gpi" and cfg.gpi_realizations is not None
                and real_idx >= cfg.gpi_realizations):
            continue
        start = time.perf_counter()
        traj = run_strategy(cfg, inst, token, strat_idx, rho_idx, sigma_idx,
                            real_idx)
        wall_ms = int((time.perf_counter() - start) * 1000) if cfg.timings else 0
        for p, s in traj.curve:
            rows.append((traj.label, repr(cfg.rho_list[rho_idx]),
                         repr(cfg.sigma_list[sigma_idx]), inst.hash,
                         str(inst.realization_seed), repr(p), repr(s),
                         str(wall_ms)))
    return rows, warnings


def _run_jobs(job_fn, job_args, workers: int):
    """Run jobs preserving argument order regardless of worker count."""
    if workers <= 1 or len(job_args) <= 1:
        return [job_fn(a) for a in job_args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job_fn, job_args))


def run_comparison(cfg: ExperimentConfig):
    """Trajectory rows for every (rho, sigma, realization, strategy).

    All strategies inside one realization consume the identical graph and
    threshold vector. Returns (rows, warnings); row order is fixed by the
    grid indices, never by completion order.
    """
    job_args = [(cfg, ri, si, xi)
                for ri in range(len(cfg.rho_list))
                for si in range(len(cfg.sigma_list))
                for xi in range(cfg.realizations)]
    results = _run_jobs(_comparison_job, job_args, cfg.workers)
    rows = []
    warnings = []
    for job_rows, job_warnings in results:
        rows.extend(job_rows)
        warnings.extend(job_warnings)
    return rows, warnings


def _trajectories_from_rows(rows):
    """Group comparison rows back into per-trajectory (p, S) curves."""
    grouped: dict[tuple, list[tuple[float, float]]] = {}
    for row in rows:
        key = (row[0], row[1], row[2], row[4])
        grouped.setdefault(key, []).append((float(row[5]), float(row[6])))
    return grouped


def pc_curve(cfg: ExperimentConfig, s_target: float = 0.5, rows=None):
    """Mean/std of the first seed fraction whose cascade reaches s_target,
    per (strategy, rho, sigma). Runs the comparison when rows not given.
    """
    warnings = []
    if rows is None:
        rows, warnings = run_comparison(cfg)
    grouped = _trajectories_from_rows(rows)
    pcs: dict[tuple, list[float]] = {}
    order: list[tuple] = []
    for (strategy, rho, sigma, _seed), curve in grouped.items():
        pc = next((p for p, s in curve if s >= s_target - 1e-12), None)
        if pc is None:
            raise ParameterError(
                f"trajectory for {strategy} never reached S={s_target}; "
                "rerun with a goal stop at or above the target")
        key = (strategy, rho, sigma)
        if key not in pcs:
            pcs[key] = []
            order.append(key)
        pcs[key].append(pc)
    out = []
    for key in order:
        values = np.asarray(pcs[key])
        std = float(values.std(ddof=1)) if values.size > 1 else 0.0
        out.append((key[0], key[1], key[2], repr(float(values.mean())), repr(std)))
    return out, warnings


def weight_grid(step: float):
    """(a, b, c) triples with a+b <= 1 on a regular grid of the given step."""
    if not 0.0 < step <= 1.0:
        raise ParameterError("grid step must lie in (0, 1]")
    m = int(round(1.0 / step))
    if abs(m * step - 1.0) > 1e-9:
        raise ParameterError("grid step must divide 1")
    points = []
    for i in range(m + 1):
        for j in range(m + 1 - i):
            a = i * step
            b = j * step
            c = 1.0 - a - b
            points.append((a, b, max(c, 0.0)))
    return points


def _weight_scan_job(args):
    cfg, real_idx, points = args
    inst = build_instance(cfg, 0, 0, real_idx)
    goal = cfg.goal if cfg.goal is not None else 0.5
    pcs = []
    for a, b, c in points:
        spec = StrategySpec.parse(f"bi:{a!r},{b!r},{c!r}")
        traj = select_seeds(inst.graph, inst.r, spec, goal_fraction=goal,
                            phi=inst.phi)
        pcs.append(traj.p_c)
    return pcs


def weight_scan(cfg: ExperimentConfig, grid_step: float | None = None):
    """p_c surface over the BI weight simplex at (rho_list[0],
    sigma_list[0]); returns (rows, argmin weights). Instances are shared
    across grid points within each realization.
    """
    step = grid_step if grid_step is not None else cfg.weight_grid_step
    points = weight_grid(step)
    job_args = [(cfg, real_idx, points) for real_idx in range(cfg.realizations)]
    per_real = _run_jobs(_weight_scan_job, job_args, cfg.workers)
    matrix = np.asarray(per_real)  # (realizations, n_points)
    means = matrix.mean(axis=0)
    stds = (matrix.std(axis=0, ddof=1) if cfg.realizations > 1
            else np.zeros(means.size))
    rows = []
    for (a, b, c), mean, std in zip(points, means, stds):
        rows.append((repr(a), repr(b), repr(c), repr(float(mean)), repr(float(std))))
    best = points[int(np.argmin(means))]
    return rows, best


def _best_prob_job(args):
    cfg, gen_idx, p_max = args
    inst = build_instance(cfg, 0, 0, 0, phi_idx=gen_idx)
    trajs = {}
    for strat_idx, token in enumerate(cfg.strategies):
        trajs[token] = run_strategy(cfg, inst, token, strat_idx, 0, 0, gen_idx,
                                    budget=p_max, goal=None)
    return trajs


def best_strategy_probability(cfg: ExperimentConfig, p_grid):
    """Fraction of threshold generations (one fixed graph) in which each
    strategy attains the maximum cascade size at each seed fraction; ties
    share the credit equally.
    """
    p_grid = sorted(float(p) for p in p_grid)
    if not p_grid or p_grid[0] <= 0 or p_grid[-1] > 1:
        raise ParameterError("p_grid values must lie in (0, 1]")
    p_max = p_grid[-1]
    job_args = [(cfg, gen_idx, p_max) for gen_idx in range(cfg.realizations)]
    per_gen = _run_jobs(_best_prob_job, job_args, cfg.workers)
    credit = {(p, token): 0.0 for p in p_grid for token in cfg.strategies}
    for trajs in per_gen:
        for p in p_grid:
            values = {token: trajs[token].s_at(p) for token in cfg.strategies}
            best = max(values.values())
            winners = [t for t, v in values.items() if v >= best - 1e-12]
            for t in winners:
                credit[(p, t)] += 1.0 / len(winners)
    rows = []
    for p in p_grid:
        for token in cfg.strategies:
            prob = credit[(p, token)] / cfg.realizations
            rows.append((repr(p), token, repr(prob)))
    return rows


def _gpi_sweep_job(args):
    cfg, v, s, v_idx, s_idx, rep = args
    inst = build_instance(cfg, 0, 0, 0)
    params = GPIParams(s=s, v=v,
                       s_goal=cfg.goal if cfg.goal is not None else 0.5,
                       mode=cfg.gpi_mode)
    seed = derive_seed(cfg.master_seed, _TAG_SWEEP, v_idx, s_idx, rep)
    traj = gpi_select(inst.graph, inst.r, params, seed)
    return traj.p_c


def gpi_sweep(cfg: ExperimentConfig, v_list, s_list, repeats: int = 1):
    """p_c per (v, s, repeat) on the fixed instance (rho_list[0],
    sigma_list[0], realization 0); repeats vary only the GPI RNG stream.
    """
    job_args = [(cfg, int(v), float(s), v_idx, s_idx, rep)
                for v_idx, v in enumerate(v_list)
                for s_idx, s in enumerate(s_list)
                for rep in range(repeats)]
    pcs = _run_jobs(_gpi_sweep_job, job_args, cfg.workers)
    rows = []
    for (_cfg, v, s, _vi, _si, rep), pc in zip(job_args, pcs):
        rows.append((str(v), repr(s), str(rep), repr(pc)))
    return rows


def write_csv(path, header: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def emit_warnings(warnings, strict: bool) -> int:
    """Print tuning warnings; returns the exit code (3 under --strict)."""
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 3 if warnings and strict else 0
