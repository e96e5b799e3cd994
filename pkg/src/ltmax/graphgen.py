"""Erdos-Renyi generation, Spearman degree assortativity, and degree-preserving
rewiring toward a target assortativity, on an immutable compressed-adjacency
graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EdgeListFormatError, ParameterError


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph in compressed sparse adjacency form.

    offsets[i]:offsets[i+1] indexes the sorted neighbor list of node i in
    `neighbors`. Both directions of every edge are stored, so
    len(neighbors) == 2 * edge_count. Instances are treated as immutable
    and are safe to share across workers.
    """

    offsets: np.ndarray
    neighbors: np.ndarray

    @property
    def node_count(self) -> int:
        return self.offsets.size - 1

    @property
    def edge_count(self) -> int:
        return self.neighbors.size // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def degree(self, node: int) -> int:
        return int(self.offsets[node + 1] - self.offsets[node])

    def neighbors_of(self, node: int) -> np.ndarray:
        return self.neighbors[self.offsets[node]:self.offsets[node + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors_of(u)
        i = np.searchsorted(nbrs, v)
        return i < nbrs.size and nbrs[i] == v

    def edge_array(self) -> np.ndarray:
        """(E, 2) array of edges with u < v, in ascending order."""
        src = np.repeat(np.arange(self.node_count, dtype=np.int64), self.degrees)
        mask = self.neighbors > src
        return np.column_stack((src[mask], self.neighbors[mask]))

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build from an iterable of (u, v) pairs, one per undirected edge."""
        edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise ParameterError("edge endpoint out of range")
            if (edges[:, 0] == edges[:, 1]).any():
                raise ParameterError("self-loop in edge set")
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            canon = lo * n + hi
            if np.unique(canon).size != canon.size:
                raise ParameterError("duplicate edge in edge set")
        return cls._from_valid_edges(n, edges)

    @classmethod
    def _from_valid_edges(cls, n: int, edges: np.ndarray) -> "Graph":
        both_src = np.concatenate((edges[:, 0], edges[:, 1]))
        both_dst = np.concatenate((edges[:, 1], edges[:, 0]))
        order = np.lexsort((both_dst, both_src))
        both_src = both_src[order]
        both_dst = both_dst[order]
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.add.at(offsets, both_src + 1, 1)
        np.cumsum(offsets, out=offsets)
        return cls(offsets=offsets, neighbors=both_dst)


@dataclass
class AssortativityReport:
    rho: float
    swap_count: int
    converged: bool


def generate_er(n: int, avg_degree: float, rng_seed: int) -> Graph:
    """G(n, p) with p = avg_degree / (n - 1), via geometric skip sampling.

    The same seed always yields the same edge set.
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ParameterError(f"n must be an integer >= 2, got {n!r}")
    if not 0 <= avg_degree <= n - 1:
        raise ParameterError(f"avg_degree must lie in [0, n-1], got {avg_degree}")
    p = avg_degree / (n - 1)
    rng = np.random.default_rng(rng_seed)
    us: list[int] = []
    vs: list[int] = []
    if p >= 1.0:
        for v in range(1, n):
            for w in range(v):
                us.append(v)
                vs.append(w)
    elif p > 0.0:
        log_q = math.log1p(-p)
        v = 1
        w = -1
        while v < n:
            w += 1 + int(math.log1p(-rng.random()) / log_q)
            while w >= v and v < n:
                w -= v
                v += 1
            if v < n:
                us.append(v)
                vs.append(w)
    edges = np.column_stack((np.asarray(vs, dtype=np.int64),
                             np.asarray(us, dtype=np.int64))) \
        if us else np.empty((0, 2), dtype=np.int64)
    return Graph._from_valid_edges(n, edges)


def _incidence_ranks(degrees: np.ndarray) -> np.ndarray:
    """Tie-averaged rank of each node's degree over the 2E edge incidences.

    A node of degree k occurs k times as an incidence endpoint, so the rank
    of degree value d averages the positions of all its occurrences.
    """
    order = np.argsort(degrees, kind="stable")
    sorted_deg = degrees[order].astype(np.float64)
    ranks = np.empty(degrees.size, dtype=np.float64)
    pos = 0.0
    i = 0
    while i < degrees.size:
        j = i
        while j < degrees.size and sorted_deg[j] == sorted_deg[i]:
            j += 1
        block = sorted_deg[i] * (j - i)  # incidences carried by this tie group
        rank = pos + (block + 1.0) / 2.0
        for t in range(i, j):
            ranks[order[t]] = rank
        pos += block
        i = j
    return ranks


def _rank_moments(g: Graph):
    degrees = g.degrees.astype(np.float64)
    ranks = _incidence_ranks(g.degrees)
    two_e = 2.0 * g.edge_count
    mu = float(np.dot(degrees, ranks)) / two_e
    var = float(np.dot(degrees, ranks * ranks)) / two_e - mu * mu
    return ranks, mu, var


def _rho_from_cross(cross_sum: float, mu: float, var: float, edge_count: int) -> float:
    # cross_sum = sum over undirected edges of rank(u) * rank(v)
    return (cross_sum / edge_count - mu * mu) / var


def spearman_assortativity(g: Graph) -> float:
    """Spearman rank correlation of endpoint degrees over all edge incidences.

    Both orderings of each edge contribute, so the two marginals coincide.
    Returns 0.0 when every degree is equal (zero rank variance).
    """
    if g.edge_count == 0:
        raise ParameterError("assortativity is undefined for an edgeless graph")
    ranks, mu, var = _rank_moments(g)
    if var <= 1e-12:
        return 0.0
    edges = g.edge_array()
    cross = float(np.dot(ranks[edges[:, 0]], ranks[edges[:, 1]]))
    return _rho_from_cross(cross, mu, var, g.edge_count)


def tune_assortativity(g: Graph, rho_target: float, tol: float = 0.01,
                       max_swaps: int | None = None, rng_seed: int = 0,
                       temperature: float = 0.0) -> tuple[Graph, AssortativityReport]:
    """Rewire toward a target Spearman assortativity with double-edge swaps.

    Two distinct edges (a,b), (c,d) are drawn uniformly with random endpoint
    orientation and rewired to (a,d), (c,b); proposals creating self-loops
    or duplicate edges are rejected. A proposal is accepted when it moves
    rho strictly closer to the target (with temperature > 0, worse moves are
    accepted with Metropolis probability). Degrees never change, so the
    degree ranks are computed once and rho is maintained incrementally from
    the rank cross-product sum. max_swaps bounds proposals; the report's
    swap_count counts accepted swaps.
    """
    if not -1.0 <= rho_target <= 1.0:
        raise ParameterError(f"rho_target must lie in [-1, 1], got {rho_target}")
    if tol <= 0:
        raise ParameterError("tol must be positive")
    m = g.edge_count
    if m < 2:
        rho = spearman_assortativity(g) if m else 0.0
        return g, AssortativityReport(rho, 0, abs(rho - rho_target) <= tol)
    if max_swaps is None:
        max_swaps = 100 * m

    ranks, mu, var = _rank_moments(g)
    edges = g.edge_array()
    eu = edges[:, 0].copy()
    ev = edges[:, 1].copy()
    n = g.node_count
    edge_set = set((int(a) * n + int(b)) for a, b in zip(eu, ev))

    if var <= 1e-12:
        # all degrees equal: rho is 0 by convention and no swap can change it
        converged = abs(0.0 - rho_target) <= tol
        return g, AssortativityReport(0.0, 0, converged)

    cross = float(np.dot(ranks[eu], ranks[ev]))
    rho = _rho_from_cross(cross, mu, var, m)
    rng = np.random.default_rng(rng_seed)
    swaps = 0
    proposals = 0
    converged = abs(rho - rho_target) <= tol

    BLOCK = 4096
    while not converged and proposals < max_swaps:
        k = min(BLOCK, max_swaps - proposals)
        idx = rng.integers(0, m, size=(k, 2))
        flips = rng.integers(0, 2, size=(k, 2))
        accept_draw = rng.random(k) if temperature > 0 else None
        for t in range(k):
            proposals += 1
            i, j = int(idx[t, 0]), int(idx[t, 1])
            if i == j:
                continue
            a, b = (int(eu[i]), int(ev[i])) if flips[t, 0] == 0 else (int(ev[i]), int(eu[i]))
            c, d = (int(eu[j]), int(ev[j])) if flips[t, 1] == 0 else (int(ev[j]), int(eu[j]))
            if a == d or c == b:
                continue
            k1 = a * n + d if a < d else d * n + a
            k2 = c * n + b if c < b else b * n + c
            if k1 == k2 or k1 in edge_set or k2 in edge_set:
                continue
            delta = (ranks[a] * ranks[d] + ranks[c] * ranks[b]
                     - ranks[a] * ranks[b] - ranks[c] * ranks[d])
            rho_new = _rho_from_cross(cross + delta, mu, var, m)
            gap_new = abs(rho_new - rho_target)
            gap_cur = abs(rho - rho_target)
            take = gap_new < gap_cur
            if not take and temperature > 0:
                take = accept_draw[t] < math.exp(-(gap_new - gap_cur) / temperature)
            if not take:
                continue
            edge_set.discard(int(eu[i]) * n + int(ev[i]))
            edge_set.discard(int(eu[j]) * n + int(ev[j]))
            edge_set.add(k1)
            edge_set.add(k2)
            eu[i], ev[i] = (a, d) if a < d else (d, a)
            eu[j], ev[j] = (c, b) if c < b else (b, c)
            cross += delta
            rho = rho_new
            swaps += 1
            if gap_new <= tol:
                converged = True
                break

    tuned = Graph._from_valid_edges(n, np.column_stack((eu, ev)))
    return tuned, AssortativityReport(rho, swaps, converged)


def save_edge_list(g: Graph, path) -> None:
    """One 'u v' line per undirected edge, ascending, 0-based ids."""
    with open(path, "w") as fh:
        for u, v in g.edge_array():
            fh.write(f"{u} {v}\n")


def load_edge_list(path) -> Graph:
    """Parse an edge-list file; node count is max id + 1.

    Lines starting with '#' and blank lines are skipped. Malformed lines,
    self-loops, and duplicate edges raise EdgeListFormatError naming the
    1-based line number.
    """
    edges = []
    seen = {}
    max_id = -1
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise EdgeListFormatError(
                    f"line {ln}: expected two node ids, got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListFormatError(
                    f"line {ln}: non-integer node id in {line!r}") from None
            if u < 0 or v < 0:
                raise EdgeListFormatError(f"line {ln}: negative node id")
            if u == v:
                raise EdgeListFormatError(f"line {ln}: self-loop {u} {v}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise EdgeListFormatError(
                    f"line {ln}: duplicate edge {u} {v} (first at line {seen[key]})")
            seen[key] = ln
            edges.append(key)
            max_id = max(max_id, u, v)
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return Graph._from_valid_edges(max_id + 1, arr)
