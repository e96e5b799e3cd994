"""Deterministic linear-threshold spread on integer residuals.

A node activates once its residual (remaining number of active neighbors it
needs) reaches zero or below; activation is monotone and propagates through
a FIFO queue to a fixpoint. Comparisons never touch the fractional
thresholds again: all dynamics run on the integers r_i = ceil(phi_i * k_i).
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import ParameterError, UsageError
from .graphgen import Graph


class CascadeState:
    """Mutable activation state over an immutable graph.

    Tracks per-node activation, signed residual resistance, and live degree
    (count of currently inactive neighbors). One state has a single owner;
    independent states over a shared Graph may run concurrently. Scratch
    buffers for what-if evaluations are epoch-stamped so repeated
    evaluations avoid O(N) clears.
    """

    def __init__(self, graph: Graph, residual: np.ndarray,
                 active: np.ndarray, live_degree: np.ndarray, active_count: int):
        self.graph = graph
        self.residual = residual
        self.active = active
        self.live_degree = live_degree
        self.active_count = active_count
        n = graph.node_count
        self._queue = np.empty(n, dtype=np.int64)
        self._depth = np.empty(n, dtype=np.int64)
        self._stamp = np.zeros(n, dtype=np.int64)
        self._sres = np.empty(n, dtype=np.int64)
        self._epoch = 0

    @property
    def node_count(self) -> int:
        return self.graph.node_count

    @property
    def active_fraction(self) -> float:
        return self.active_count / self.graph.node_count

    def inactive_nodes(self) -> np.ndarray:
        return np.flatnonzero(~self.active)

    def clone(self) -> "CascadeState":
        return CascadeState(self.graph, self.residual.copy(), self.active.copy(),
                            self.live_degree.copy(), self.active_count)

    def next_epoch(self) -> int:
        self._epoch += 1
        return self._epoch


def init_state(g: Graph, r: np.ndarray) -> CascadeState:
    """Fresh state; nodes with zero resistance activate immediately and their
    activations propagate to a fixpoint before the state is returned.
    """
    r = np.asarray(r, dtype=np.int64)
    if r.size != g.node_count:
        raise ParameterError(
            f"resistance vector length {r.size} != node count {g.node_count}")
    if r.size and r.min() < 0:
        raise ParameterError("resistances must be nonnegative")
    residual = r.copy()
    active = np.zeros(g.node_count, dtype=np.bool_)
    live_degree = g.degrees.astype(np.int64)
    state = CascadeState(g, residual, active, live_degree, 0)
    zero = np.flatnonzero(r == 0)
    if zero.size:
        active[zero] = True
        state._queue[:zero.size] = zero
        tail = _kernels.run_spread(g.offsets, g.neighbors, active, residual,
                                   live_degree, state._queue, zero.size)
        state.active_count = int(tail)
    return state


def seed_and_spread(state: CascadeState, node: int) -> list[int]:
    """Force `node` active and propagate; returns every node activated by
    this call, seed first, in activation order.
    """
    node = int(node)
    if not 0 <= node < state.node_count:
        raise ParameterError(f"node {node} out of range")
    if state.active[node]:
        raise UsageError(f"node {node} is already active")
    g = state.graph
    state.active[node] = True
    state.residual[node] = 0
    state._queue[0] = node
    tail = _kernels.run_spread(g.offsets, g.neighbors, state.active,
                               state.residual, state.live_degree,
                               state._queue, 1)
    state.active_count += int(tail)
    return [int(x) for x in state._queue[:tail]]


def cascade_size(g: Graph, r: np.ndarray, seeds) -> int:
    """f(X): active count after seeding every member of X on a fresh state.

    The value does not depend on the order of X.
    """
    seeds = [int(s) for s in seeds]
    if len(set(seeds)) != len(seeds):
        raise ParameterError("seed set contains duplicates")
    state = init_state(g, r)
    for s in seeds:
        if not state.active[s]:
            seed_and_spread(state, s)
    return state.active_count


def bounded_spread(state: CascadeState, node: int, L: int) -> int:
    """Nodes that seeding `node` would activate when propagation is cut off
    L levels from the seed (nodes at level L activate but do not propagate).
    Scratch evaluation: the state is not modified.
    """
    node = int(node)
    if state.active[node]:
        raise UsageError(f"node {node} is already active")
    if L < 0:
        raise ParameterError("L must be nonnegative")
    g = state.graph
    epoch = state.next_epoch()
    count = _kernels.whatif_spread(g.offsets, g.neighbors, state.active,
                                   state.residual, state._stamp, state._sres,
                                   epoch, state._queue, state._depth,
                                   node, L)
    return int(count)


def whatif_gain(state: CascadeState, node: int) -> int:
    """Unbounded scratch evaluation of the cascade a seed would cause."""
    node = int(node)
    if state.active[node]:
        raise UsageError(f"node {node} is already active")
    g = state.graph
    epoch = state.next_epoch()
    return int(_kernels.whatif_spread(g.offsets, g.neighbors, state.active,
                                      state.residual, state._stamp,
                                      state._sres, epoch, state._queue,
                                      state._depth, node, state.node_count + 1))
