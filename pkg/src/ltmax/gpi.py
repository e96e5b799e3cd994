"""Group Performance Index seed selection.

Each selection step runs v independent simulations that grow random
initiator sets on a copy of the current state until the remaining cascade
goal is met; a node's score is the accumulated size of the sets it appeared
in divided by the number of appearances (lower is better). The top ceil(sN)
scorers are then seeded for real, and the loop repeats until the goal
cascade fraction is reached.

Three accumulator-update readings are provided:

* ``alg_literal`` (default): members include spread-activated nodes and
  every current member is updated after each seeding step.
* ``per_simulation``: same membership, one update per simulation using the
  final set size.
* ``seeds_only``: membership and set size count only the randomly drawn
  seeds; spread-activated nodes merely leave the candidate pool.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .cascade import CascadeState, init_state, seed_and_spread
from .errors import ParameterError, UsageError
from .graphgen import Graph
from .strategies import SelectionTrajectory, _count_for_budget, _count_for_goal

MODES = ("alg_literal", "per_simulation", "seeds_only")


@dataclass(frozen=True)
class GPIParams:
    """Control parameters: batch granularity s, randomizations v, goal
    fraction, accumulator mode, optional spread sphere inside simulations,
    and an optional seed-budget cap.
    """

    s: float = 1e-3
    v: int = 100_000
    s_goal: float = 0.5
    mode: str = "alg_literal"
    spread_levels: int | None = None
    budget_fraction: float | None = None

    def __post_init__(self):
        if not 0.0 < self.s <= 1.0:
            raise ParameterError(f"s must lie in (0, 1], got {self.s}")
        if self.v < 1:
            raise ParameterError(f"v must be positive, got {self.v}")
        if not 0.0 < self.s_goal <= 1.0:
            raise ParameterError(f"s_goal must lie in (0, 1], got {self.s_goal}")
        if self.mode not in MODES:
            raise ParameterError(f"unknown GPI mode {self.mode!r}")
        if self.spread_levels is not None and self.spread_levels < 1:
            raise ParameterError("spread_levels must be >= 1 when given")
        if self.budget_fraction is not None and not 0.0 < self.budget_fraction <= 1.0:
            raise ParameterError("budget_fraction must lie in (0, 1] when given")


@dataclass
class GPIAccumulators:
    """Per-node numerator/denominator sums from one scoring step plus the
    total member count across simulations (for consistency checks).
    score = nu / de where de > 0; unsampled nodes score +inf.
    """

    nu: np.ndarray
    de: np.ndarray
    total_members: int

    def scores(self) -> np.ndarray:
        out = np.full(self.de.size, np.inf, dtype=np.float64)
        sampled = self.de > 0
        out[sampled] = self.nu[sampled] / self.de[sampled]
        return out


def gpi_score_step(state: CascadeState, params: GPIParams,
                   rng_seed: int) -> GPIAccumulators:
    """Run the v random-set simulations against the current state."""
    n = state.node_count
    goal_count = _count_for_goal(params.s_goal, n)
    if state.active_count >= goal_count:
        raise UsageError("cascade goal already met; nothing to score")
    g = state.graph
    nu = np.zeros(n, dtype=np.int64)
    de = np.zeros(n, dtype=np.int64)
    level = params.spread_levels if params.spread_levels is not None else 0
    total = _kernels.gpi_accumulate(
        g.offsets, g.neighbors, state.active, state.residual,
        np.int64(state.active_count), np.int64(goal_count),
        np.int64(params.v), np.uint64(rng_seed),
        np.int64(MODES.index(params.mode)), np.int64(level), nu, de)
    return GPIAccumulators(nu=nu, de=de, total_members=int(total))


def gpi_select(g: Graph, r: np.ndarray, params: GPIParams,
               rng_seed: int) -> SelectionTrajectory:
    """Batch-select seeds by GPI rank until the goal fraction is active.

    Per step, inactive nodes are ranked by ascending score (unsampled nodes
    last; ties to the lowest id) and the top ceil(sN) are seeded in rank
    order; nodes activated by an earlier member of the same batch are
    skipped and never join the initiator set. Per-step RNG streams derive
    from (rng_seed, step), so results do not depend on scheduling.
    """
    n = g.node_count
    goal_count = _count_for_goal(params.s_goal, n)
    budget_count = (n if params.budget_fraction is None
                    else _count_for_budget(params.budget_fraction, n))
    batch_size = int(np.ceil(params.s * n - 1e-9))
    state = init_state(g, r)
    seeds: list[int] = []
    curve = [(0.0, state.active_count / n)]
    step = 0
    while state.active_count < goal_count and len(seeds) < budget_count:
        step_seed = np.random.SeedSequence(
            int(rng_seed), spawn_key=(step,)).generate_state(1, np.uint64)[0]
        acc = gpi_score_step(state, params, int(step_seed))
        scores = acc.scores()
        cands = state.inactive_nodes()
        order = cands[np.argsort(scores[cands], kind="stable")]
        for node in order[:batch_size]:
            if state.active[node]:
                continue  # activated by an earlier batch member: excluded
            if len(seeds) >= budget_count:
                break
            seed_and_spread(state, int(node))
            seeds.append(int(node))
        curve.append((len(seeds) / n, state.active_count / n))
        step += 1
    traj = SelectionTrajectory(seeds=seeds, curve=curve, label="gpi")
    traj.p_c = traj.p_c_for(params.s_goal)
    return traj
