"""Sequential one-at-a-time seed selection on the inactive subgraph.

Strategies score inactive nodes and repeatedly seed the argmax (ties go to
the lowest node id). The balanced-index family combines a node's residual
resistance, live out-degree, and the out-degree surplus of its subcritical
neighbors with weights (a, b, c); deg/res/dd/id are the special cases
(0,1,0), (1,0,0), (1/2,1/2,0), (1/3,1/3,1/3). For ordering, weights are
mapped to exact small-denominator rationals so equal underlying scores
never split on float rounding and the special-case equivalences hold
exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .cascade import CascadeState, init_state, seed_and_spread
from .errors import ParameterError, UsageError
from .graphgen import Graph

KINDS = ("thres", "deg", "res", "dd", "id", "bi", "citm", "greedy")

# integer key weights for the fixed special cases
_FIXED_WEIGHTS = {
    "deg": (0, 1, 0),
    "res": (1, 0, 0),
    "dd": (1, 1, 0),
    "id": (1, 1, 1),
}

_MAX_DENOMINATOR = 10_000


@dataclass(frozen=True)
class BIWeights:
    """Balanced-index weights; must be nonnegative and sum to 1."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if min(self.a, self.b, self.c) < 0:
            raise ParameterError(f"weights must be nonnegative, got {self}")
        if abs(self.a + self.b + self.c - 1.0) > 1e-9:
            raise ParameterError(f"weights must sum to 1, got {self}")

    def integer_key_weights(self) -> tuple[int, int, int]:
        """Exact integer multiples of the weights for tie-stable ordering.

        Each weight is snapped to its nearest rational with denominator
        <= 10^4 (exact for grid weights like 0.05 steps and for thirds),
        then scaled by the common denominator.
        """
        fracs = [Fraction(w).limit_denominator(_MAX_DENOMINATOR)
                 for w in (self.a, self.b, self.c)]
        denom = math.lcm(*(f.denominator for f in fracs))
        return tuple(int(f * denom) for f in fracs)


@dataclass(frozen=True)
class StrategySpec:
    """Tagged strategy choice: weights only for 'bi', L only for 'citm'."""

    kind: str
    weights: BIWeights | None = None
    L: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown strategy kind {self.kind!r}")
        if self.kind == "bi":
            if self.weights is None:
                raise ParameterError("bi strategy requires weights")
        elif self.weights is not None:
            raise ParameterError(f"weights are only valid for 'bi', not {self.kind!r}")
        if self.kind == "citm":
            if self.L is None:
                object.__setattr__(self, "L", 6)
            if self.L < 1:
                raise ParameterError("citm requires L >= 1")
        elif self.L is not None:
            raise ParameterError(f"L is only valid for 'citm', not {self.kind!r}")

    @classmethod
    def parse(cls, token: str) -> "StrategySpec":
        """Parse CLI tokens like 'deg', 'bi:0.5,0.3,0.2', 'citm:6'."""
        kind, _, arg = token.partition(":")
        kind = kind.strip()
        if kind == "bi":
            try:
                a, b, c = (float(x) for x in arg.split(","))
            except ValueError:
                raise ParameterError(
                    f"bi strategy needs three weights, got {token!r}") from None
            return cls("bi", weights=BIWeights(a, b, c))
        if kind == "citm":
            level = 6
            if arg:
                try:
                    level = int(arg)
                except ValueError:
                    raise ParameterError(f"bad citm level in {token!r}") from None
            return cls("citm", L=level)
        if arg:
            raise ParameterError(f"strategy {kind!r} takes no arguments")
        return cls(kind)

    def label(self) -> str:
        if self.kind == "bi":
            w = self.weights
            return f"bi:{w.a!r},{w.b!r},{w.c!r}"
        if self.kind == "citm":
            return f"citm:{self.L}"
        return self.kind


@dataclass
class SelectionTrajectory:
    """Ordered seeds plus the (seed fraction, active fraction) curve.

    curve[0] is the pre-seeding point (0, S0); one point follows per
    accepted seed. p_c is the first seed fraction meeting the goal when a
    goal stop was used.
    """

    seeds: list[int]
    curve: list[tuple[float, float]]
    p_c: float | None = None
    label: str = ""
    final_keys: np.ndarray | None = field(default=None, repr=False)

    def s_at(self, p: float) -> float:
        """Active fraction reached with a seed budget p (step function)."""
        best = 0.0
        for pp, ss in self.curve:
            if pp <= p + 1e-12:
                best = ss
            else:
                break
        return best

    def p_c_for(self, target: float) -> float | None:
        for pp, ss in self.curve:
            if ss >= target - 1e-12:
                return pp
        return None


def _count_for_goal(goal: float, n: int) -> int:
    return int(math.ceil(goal * n - 1e-9))


def _count_for_budget(budget: float, n: int) -> int:
    return int(math.floor(budget * n + 1e-9))


def _subcritical_sum(state: CascadeState, node: int) -> int:
    total = 0
    for j in state.graph.neighbors_of(node):
        if not state.active[j] and state.residual[j] == 1:
            total += int(state.live_degree[j]) - 1
    return total


def metric_value(state: CascadeState, node: int, spec: StrategySpec,
                 phi: np.ndarray | None = None) -> float:
    """Score of an inactive node under `spec`, using the dynamic state."""
    node = int(node)
    if state.active[node]:
        raise UsageError(f"node {node} is already active")
    kind = spec.kind
    if kind == "thres":
        if phi is None:
            raise ParameterError("thres metric requires the threshold vector")
        return float(phi[node])
    if kind == "deg":
        return float(state.live_degree[node])
    if kind == "res":
        return float(state.residual[node])
    if kind == "dd":
        return float(state.residual[node] + state.live_degree[node])
    if kind == "id":
        return float(state.residual[node] + state.live_degree[node]
                     + _subcritical_sum(state, node))
    if kind == "bi":
        w = spec.weights
        return (w.a * float(state.residual[node])
                + w.b * float(state.live_degree[node])
                + w.c * float(_subcritical_sum(state, node)))
    if kind == "citm":
        return metric_citm(state, node, spec.L)
    raise ParameterError(f"metric_value does not apply to kind {kind!r}")


def metric_citm(state: CascadeState, node: int, L: int) -> float:
    """Live degree of `node` plus the live-degree surplus of every inactive
    node reachable through chains of residual-1 nodes within L hops.
    At L=1 this equals the id metric minus the node's own residual.
    """
    node = int(node)
    if state.active[node]:
        raise UsageError(f"node {node} is already active")
    if L < 1:
        raise ParameterError("citm requires L >= 1")
    g = state.graph
    epoch = state.next_epoch()
    value = _kernels.citm_key(g.offsets, g.neighbors, state.active,
                              state.residual, state.live_degree, node, L,
                              state._stamp, epoch, state._queue, state._depth)
    return float(value)


def greedy_step(state: CascadeState) -> int:
    """Inactive node whose seeding maximizes the cascade gain (scratch
    evaluation; the state is unchanged). Ties break to the lowest id.
    """
    if state.active_count >= state.node_count:
        raise UsageError("no inactive node to select")
    g = state.graph
    node, _gain, epoch = _kernels.greedy_best(
        g.offsets, g.neighbors, state.active, state.residual,
        state._stamp, state._sres, state._queue, state._depth, state._epoch)
    state._epoch = int(epoch)
    return int(node)


def _key_weights_for(spec: StrategySpec) -> tuple[int, int, int]:
    if spec.kind in _FIXED_WEIGHTS:
        return _FIXED_WEIGHTS[spec.kind]
    return spec.weights.integer_key_weights()


def fresh_metric_keys(state: CascadeState, spec: StrategySpec) -> np.ndarray:
    """Integer ordering keys recomputed from scratch for every inactive node
    (-1 for active nodes). Used to verify the lazily maintained keys.
    """
    g = state.graph
    n = state.node_count
    keys = np.full(n, -1, dtype=np.int64)
    nodes = state.inactive_nodes()
    if spec.kind == "citm":
        for u in nodes:
            keys[u] = int(metric_citm(state, int(u), spec.L))
        return keys
    wa, wb, wc = _key_weights_for(spec)
    out = np.empty(nodes.size, dtype=np.int64)
    _kernels.bi_keys(g.offsets, g.neighbors, state.active, state.residual,
                     state.live_degree, nodes.astype(np.int64),
                     np.int64(wa), np.int64(wb), np.int64(wc), out)
    keys[nodes] = out
    return keys


def select_seeds(g: Graph, r: np.ndarray, spec: StrategySpec, *,
                 budget_fraction: float | None = None,
                 goal_fraction: float | None = None,
                 phi: np.ndarray | None = None) -> SelectionTrajectory:
    """Run a full sequential selection until the budget or goal stop.

    Exactly one stop criterion must be given. The thres strategy needs the
    threshold vector phi (its score is the static fractional threshold,
    evaluated over the inactive subgraph only).
    """
    if (budget_fraction is None) == (goal_fraction is None):
        raise ParameterError("give exactly one of budget_fraction / goal_fraction")
    n = g.node_count
    if budget_fraction is not None:
        if not 0.0 <= budget_fraction <= 1.0:
            raise ParameterError("budget_fraction must lie in [0, 1]")
        max_seeds = _count_for_budget(budget_fraction, n)
        goal_count = 0
    else:
        if not 0.0 < goal_fraction <= 1.0:
            raise ParameterError("goal_fraction must lie in (0, 1]")
        max_seeds = n
        goal_count = _count_for_goal(goal_fraction, n)
    if spec.kind == "thres" and phi is None:
        raise ParameterError("thres strategy requires the threshold vector phi")

    state = init_state(g, r)
    curve = [(0.0, state.active_count / n)]
    seeds: list[int] = []
    final_keys = None

    def record():
        curve.append((len(seeds) / n, state.active_count / n))

    def stop() -> bool:
        if goal_count and state.active_count >= goal_count:
            return True
        return len(seeds) >= max_seeds or state.active_count >= n

    if spec.kind == "greedy":
        while not stop():
            node = greedy_step(state)
            seed_and_spread(state, node)
            seeds.append(node)
            record()
    elif spec.kind == "thres":
        order = np.argsort(-np.asarray(phi, dtype=np.float64), kind="stable")
        for cand in order:
            if stop():
                break
            if state.active[cand]:
                continue
            seed_and_spread(state, int(cand))
            seeds.append(int(cand))
            record()
    else:
        if n >= _kernels.NODE_LIMIT:
            raise ParameterError("graph too large for the selection kernel")
        if spec.kind == "citm":
            wa = wb = wc = 0
            use_citm = True
            level = spec.L
        else:
            wa, wb, wc = _key_weights_for(spec)
            use_citm = False
            level = 0
            bound = max(wa, wb, wc) * (2 * n + 2 * g.edge_count + 2)
            if bound >= _kernels.KEY_LIMIT:
                raise ParameterError("metric keys would overflow the heap encoding")
        out_seeds = np.empty(n, dtype=np.int64)
        out_counts = np.empty(n, dtype=np.int64)
        cur_key = np.empty(n, dtype=np.int64)
        nsel = _kernels.select_direct(
            g.offsets, g.neighbors, state.active, state.residual,
            state.live_degree, state.active_count,
            np.int64(wa), np.int64(wb), np.int64(wc),
            np.int64(level), use_citm,
            np.int64(max_seeds), np.int64(goal_count),
            out_seeds, out_counts, cur_key)
        for t in range(nsel):
            seeds.append(int(out_seeds[t]))
            curve.append((len(seeds) / n, int(out_counts[t]) / n))
        state.active_count = int(out_counts[nsel - 1]) if nsel else state.active_count
        final_keys = cur_key

    traj = SelectionTrajectory(seeds=seeds, curve=curve, label=spec.label(),
                               final_keys=final_keys)
    if goal_fraction is not None:
        traj.p_c = traj.p_c_for(goal_fraction)
    return traj
