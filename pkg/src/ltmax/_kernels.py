"""Numba kernels for cascade propagation, seed selection, and GPI scoring.

Everything here operates on the compressed adjacency arrays of a Graph
(offsets, neighbors) plus flat per-node state arrays, so the hot loops run
at native speed on a single core. All randomness is drawn from an inline
splitmix64 stream seeded per simulation index, which keeps results
independent of scheduling.
"""

import numpy as np
from numba import njit

# max-heap entries encode (key, node) into one int64:
#   enc = key * 2^21 + (2^21 - 1 - node)
# so popping the max yields the highest key, ties resolved to the lowest
# node id. Requires node < 2^21 and key < 2^42.
_NODE_BITS = 21
_NODE_CAP = 1 << _NODE_BITS
KEY_LIMIT = 1 << (63 - _NODE_BITS)
NODE_LIMIT = _NODE_CAP

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def _sm64(state):
    """Advance a splitmix64 state; returns (new_state, output)."""
    state = state + _GOLDEN
    z = state
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True)
def run_spread(offsets, neighbors, active, residual, live_degree, queue, tail):
    """FIFO propagation from pre-activated queue[0:tail]; returns final tail.

    Callers mark the initial nodes active (and zero their residuals for
    forced seeds) before the call. Each processed activation decrements
    live_degree of every neighbor and residual of every inactive neighbor;
    nodes whose residual reaches <= 0 are appended and marked active.
    """
    head = 0
    while head < tail:
        u = queue[head]
        head += 1
        for e in range(offsets[u], offsets[u + 1]):
            j = neighbors[e]
            live_degree[j] -= 1
            if not active[j]:
                residual[j] -= 1
                if residual[j] <= 0:
                    active[j] = True
                    queue[tail] = j
                    tail += 1
    return tail


@njit(cache=True)
def whatif_spread(offsets, neighbors, active, residual,
                  stamp, sres, epoch, queue, depth, seed, limit):
    """Count nodes that seeding `seed` would activate, without mutation.

    Scratch residuals live in `sres`, valid only where stamp == epoch, so
    repeated calls need no O(N) clearing. Propagation is restricted to
    activation-tree depth <= limit from the seed; nodes activated at the
    limit do not propagate further. Pass limit >= n for unbounded spread.
    """
    stamp[seed] = epoch
    sres[seed] = -1  # flags "activated in this evaluation"
    queue[0] = seed
    depth[0] = 0
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        d = depth[head]
        head += 1
        if d >= limit:
            continue
        for e in range(offsets[u], offsets[u + 1]):
            j = neighbors[e]
            if active[j]:
                continue
            if stamp[j] != epoch:
                stamp[j] = epoch
                sres[j] = residual[j]
            if sres[j] > 0:
                sres[j] -= 1
                if sres[j] <= 0:
                    sres[j] = -1
                    queue[tail] = j
                    depth[tail] = d + 1
                    tail += 1
    return tail


@njit(cache=True)
def greedy_best(offsets, neighbors, active, residual,
                stamp, sres, queue, depth, epoch):
    """Inactive node whose seeding activates the most nodes; lowest id wins ties.

    Returns (best_node, best_gain, next_epoch). best_node is -1 when every
    node is already active.
    """
    n = offsets.size - 1
    best_node = -1
    best_gain = -1
    for cand in range(n):
        if active[cand]:
            continue
        epoch += 1
        gain = whatif_spread(offsets, neighbors, active, residual,
                             stamp, sres, epoch, queue, depth, cand, n + 1)
        if gain > best_gain:
            best_gain = gain
            best_node = cand
    return best_node, best_gain, epoch


@njit(cache=True, inline="always")
def _bi_key(offsets, neighbors, active, residual, live_degree, node, wa, wb, wc):
    acc = np.int64(0)
    if wc != 0:
        for e in range(offsets[node], offsets[node + 1]):
            j = neighbors[e]
            if not active[j] and residual[j] == 1:
                acc += live_degree[j] - 1
    return wa * residual[node] + wb * live_degree[node] + wc * acc


@njit(cache=True)
def bi_keys(offsets, neighbors, active, residual, live_degree, nodes, wa, wb, wc, out):
    for idx in range(nodes.size):
        out[idx] = _bi_key(offsets, neighbors, active, residual, live_degree,
                           nodes[idx], wa, wb, wc)


@njit(cache=True)
def citm_key(offsets, neighbors, active, residual, live_degree,
             node, level_cap, stamp, epoch, queue, depth):
    """Dynamic out-degree of `node` plus (out-degree - 1) of every inactive
    node reachable through chains of residual-1 nodes within `level_cap`
    hops. The seed itself need not be subcritical; every traversed node is.
    """
    total = live_degree[node]
    stamp[node] = epoch
    queue[0] = node
    depth[0] = 0
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        d = depth[head]
        head += 1
        if d >= level_cap:
            continue
        for e in range(offsets[u], offsets[u + 1]):
            j = neighbors[e]
            if stamp[j] == epoch or active[j] or residual[j] != 1:
                continue
            stamp[j] = epoch
            total += live_degree[j] - 1
            queue[tail] = j
            depth[tail] = d + 1
            tail += 1
    return total


@njit(cache=True, inline="always")
def _heap_push(heap, size, value):
    i = size
    heap[i] = value
    while i > 0:
        parent = (i - 1) >> 1
        if heap[parent] >= heap[i]:
            break
        heap[parent], heap[i] = heap[i], heap[parent]
        i = parent
    return size + 1


@njit(cache=True, inline="always")
def _heap_pop(heap, size):
    top = heap[0]
    size -= 1
    heap[0] = heap[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        big = left
        right = left + 1
        if right < size and heap[right] > heap[left]:
            big = right
        if heap[i] >= heap[big]:
            break
        heap[i], heap[big] = heap[big], heap[i]
        i = big
    return top, size


@njit(cache=True)
def _heap_compact(heap, size, active, cur_key, mark, epoch):
    """Drop stale or duplicate entries, then restore the heap property."""
    kept = 0
    for i in range(size):
        enc = heap[i]
        node = _NODE_CAP - 1 - (enc & (_NODE_CAP - 1))
        key = enc >> _NODE_BITS
        if active[node] or key != cur_key[node] or mark[node] == epoch:
            continue
        mark[node] = epoch
        heap[kept] = enc
        kept += 1
    # sift-down heapify
    for i in range(kept // 2 - 1, -1, -1):
        j = i
        while True:
            left = 2 * j + 1
            if left >= kept:
                break
            big = left
            right = left + 1
            if right < kept and heap[right] > heap[left]:
                big = right
            if heap[j] >= heap[big]:
                break
            heap[j], heap[big] = heap[big], heap[j]
            j = big
    return kept


@njit(cache=True)
def select_direct(offsets, neighbors, active, residual, live_degree,
                  active_count, wa, wb, wc, citm_level, use_citm,
                  max_seeds, goal_count, out_seeds, out_counts, cur_key):
    """Sequential argmax seed selection for the integer-keyed metrics.

    Mutates the state arrays in place. Keys are maintained lazily in a
    max-heap; after each seeding only nodes within graph distance 2 of a
    new activation (citm: citm_level + 1) are re-keyed, which covers every
    node whose residual, live degree, or subcritical-neighbor term can have
    changed. Returns the number of seeds placed; out_counts[t] holds the
    active count after seed t; cur_key is left holding the maintained key
    of every node for verification against a fresh recompute.
    """
    n = offsets.size - 1
    queue = np.empty(n, np.int64)
    abuf = np.empty(n, np.int64)
    adist = np.empty(n, np.int64)
    alist = np.empty(n, np.int64)
    cqueue = np.empty(n, np.int64)
    cdepth = np.empty(n, np.int64)
    stamp = np.zeros(n, np.int64)
    epoch = np.int64(0)
    cap = 32 * n + 1024
    heap = np.empty(cap, np.int64)
    hsize = 0

    radius = citm_level + 1 if use_citm else 2

    for node in range(n):
        if active[node]:
            cur_key[node] = -1
            continue
        if use_citm:
            epoch += 1
            key = citm_key(offsets, neighbors, active, residual, live_degree,
                           node, citm_level, stamp, epoch, cqueue, cdepth)
        else:
            key = _bi_key(offsets, neighbors, active, residual, live_degree,
                          node, wa, wb, wc)
        cur_key[node] = key
        hsize = _heap_push(heap, hsize,
                           (key << _NODE_BITS) + (_NODE_CAP - 1 - node))

    nsel = 0
    while nsel < max_seeds and (goal_count <= 0 or active_count < goal_count):
        # pop until a fresh entry surfaces
        node = -1
        while hsize > 0:
            enc, hsize = _heap_pop(heap, hsize)
            cand = _NODE_CAP - 1 - (enc & (_NODE_CAP - 1))
            if active[cand] or (enc >> _NODE_BITS) != cur_key[cand]:
                continue
            node = cand
            break
        if node == -1:
            break

        active[node] = True
        residual[node] = 0
        queue[0] = node
        tail = run_spread(offsets, neighbors, active, residual, live_degree,
                          queue, 1)
        active_count += tail
        out_seeds[nsel] = node
        out_counts[nsel] = active_count
        nsel += 1

        # collect inactive nodes within `radius` of any new activation
        epoch += 1
        na = 0
        head = 0
        atail = 0
        for q in range(tail):
            u = queue[q]
            stamp[u] = epoch
            abuf[atail] = u
            adist[atail] = 0
            atail += 1
        while head < atail:
            u = abuf[head]
            d = adist[head]
            head += 1
            if d > 0 and not active[u]:
                alist[na] = u
                na += 1
            if d >= radius:
                continue
            for e in range(offsets[u], offsets[u + 1]):
                j = neighbors[e]
                if stamp[j] != epoch:
                    stamp[j] = epoch
                    abuf[atail] = j
                    adist[atail] = d + 1
                    atail += 1

        for idx in range(na):
            u = alist[idx]
            if use_citm:
                epoch += 1
                key = citm_key(offsets, neighbors, active, residual,
                               live_degree, u, citm_level, stamp, epoch,
                               cqueue, cdepth)
            else:
                key = _bi_key(offsets, neighbors, active, residual,
                              live_degree, u, wa, wb, wc)
            if key != cur_key[u]:
                cur_key[u] = key
                if hsize >= cap:
                    epoch += 1
                    hsize = _heap_compact(heap, hsize, active, cur_key,
                                          stamp, epoch)
                hsize = _heap_push(heap, hsize,
                                   (key << _NODE_BITS) + (_NODE_CAP - 1 - u))
    return nsel


@njit(cache=True)
def gpi_accumulate(offsets, neighbors, base_active, base_residual,
                   base_active_count, goal_count, v, seed, mode, level_cap,
                   nu, de):
    """Accumulate GPI numerators/denominators over v random-set simulations.

    Each simulation restarts from the base state, repeatedly seeds a
    uniformly random inactive node and spreads, and stops once the
    combined active count reaches goal_count. mode 0 updates every current
    member after each seeding step, mode 1 updates members once at
    termination, mode 2 does the terminal update over seeds only.
    Simulation `i` draws from a splitmix64 stream derived from (seed, i),
    so the result does not depend on evaluation order. Returns the summed
    member-set sizes across simulations.
    """
    n = offsets.size - 1
    act = base_active.copy()
    res = base_residual.copy()
    queue = np.empty(n, np.int64)
    depth = np.empty(n, np.int64)
    activated = np.empty(n, np.int64)
    astep = np.empty(n, np.int64)
    seeds_buf = np.empty(n, np.int64)
    sizes = np.empty(n + 1, np.int64)
    sufsum = np.empty(n + 2, np.int64)
    lbound = level_cap if level_cap > 0 else n + 1
    un = np.uint64(n)
    total_members = np.int64(0)

    for sim in range(v):
        state = np.uint64(seed) + np.uint64(sim + 1) * _GOLDEN
        state, _ = _sm64(state)
        count = 0
        nact = 0
        nseeds = 0
        steps = 0
        while base_active_count + count < goal_count:
            while True:
                state, z = _sm64(state)
                cand = np.int64(z % un)
                if not act[cand]:
                    break
            act[cand] = True
            res[cand] = 0
            queue[0] = cand
            depth[0] = 0
            head = 0
            tail = 1
            while head < tail:
                u = queue[head]
                d = depth[head]
                head += 1
                if d >= lbound:
                    continue
                for e in range(offsets[u], offsets[u + 1]):
                    j = neighbors[e]
                    if not act[j]:
                        res[j] -= 1
                        if res[j] <= 0:
                            act[j] = True
                            queue[tail] = j
                            depth[tail] = d + 1
                            tail += 1
            seeds_buf[nseeds] = cand
            nseeds += 1
            for q in range(tail):
                activated[nact + q] = queue[q]
                astep[nact + q] = steps
            nact += tail
            count += tail
            steps += 1
            sizes[steps] = nseeds if mode == 2 else nact

        if mode == 0:
            acc = np.int64(0)
            for t in range(steps, 0, -1):
                acc += sizes[t]
                sufsum[t] = acc
            for m in range(nact):
                node = activated[m]
                t = astep[m] + 1
                de[node] += steps - t + 1
                nu[node] += sufsum[t]
            total_members += nact
        elif mode == 1:
            for m in range(nact):
                node = activated[m]
                de[node] += 1
                nu[node] += nact
            total_members += nact
        else:
            for m in range(nseeds):
                node = seeds_buf[m]
                de[node] += 1
                nu[node] += nseeds
            total_members += nseeds

        for m in range(nact):
            u = activated[m]
            act[u] = False
            res[u] = base_residual[u]
            for e in range(offsets[u], offsets[u + 1]):
                j = neighbors[e]
                res[j] = base_residual[j]
    return total_members
