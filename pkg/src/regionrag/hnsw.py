"""Hierarchical Navigable Small World graph over unit-normalized rows.

Distances are ``1 - dot(x, q)``, i.e. cosine distance for unit vectors.
The graph is stored densely: ``adj[level, node, slot]`` with per-node fill
counts in ``cnt[level, node]``. Level 0 holds up to ``2*M`` links, upper
levels up to ``M``. Construction follows Malkov & Yashunin (2018) with the
neighbor-selection heuristic, no extended candidates, and pruned candidates
kept to fill free slots. A new node links to as many neighbors as its level
allows (``2*M`` on level 0), which matters for high intrinsic dimension.

All kernels are numba-compiled; construction is deterministic for a given
seed because levels come from a seeded generator and insertion order is the
row order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

MAX_LEVEL_CAP = 16


@njit(cache=True, inline="always")
def _less(k1, v1, k2, v2):
    return k1 < k2 or (k1 == k2 and v1 < v2)


@njit(cache=True)
def _push(keys, vals, size, k, v):
    i = size
    keys[i] = k
    vals[i] = v
    while i > 0:
        p = (i - 1) >> 1
        if _less(keys[p], vals[p], keys[i], vals[i]):
            break
        keys[p], keys[i] = keys[i], keys[p]
        vals[p], vals[i] = vals[i], vals[p]
        i = p
    return size + 1


@njit(cache=True)
def _pop(keys, vals, size):
    k = keys[0]
    v = vals[0]
    size -= 1
    keys[0] = keys[size]
    vals[0] = vals[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        c = left
        r = left + 1
        if r < size and _less(keys[r], vals[r], keys[left], vals[left]):
            c = r
        if _less(keys[i], vals[i], keys[c], vals[c]):
            break
        keys[c], keys[i] = keys[i], keys[c]
        vals[c], vals[i] = vals[i], vals[c]
        i = c
    return size, k, v


@njit(cache=True, inline="always")
def _dist(data, a, q):
    s = 0.0
    row = data[a]
    for t in range(row.shape[0]):
        s += row[t] * q[t]
    return 1.0 - s


@njit(cache=True)
def _greedy(data, q, cur, adj, cnt, level):
    curd = _dist(data, cur, q)
    changed = True
    while changed:
        changed = False
        for j in range(cnt[level, cur]):
            e = adj[level, cur, j]
            d = _dist(data, e, q)
            if _less(d, e, curd, cur):
                curd = d
                cur = e
                changed = True
    return cur


@njit(cache=True)
def _search_layer(
    data, q, eps, ef, adj, cnt, level, visited, stamp, allowed, use_filter, ck, cv, rk, rv
):
    """Best-first search on one level; returns (ids, dists) sorted ascending."""
    csize = 0
    rsize = 0
    for ep in eps:
        if visited[ep] == stamp:
            continue
        visited[ep] = stamp
        d = _dist(data, ep, q)
        csize = _push(ck, cv, csize, d, ep)
        if not use_filter or allowed[ep]:
            rsize = _push(rk, rv, rsize, -d, -ep)
            if rsize > ef:
                rsize, _, _ = _pop(rk, rv, rsize)
    while csize > 0:
        csize, d, c = _pop(ck, cv, csize)
        if rsize >= ef and d > -rk[0]:
            break
        for j in range(cnt[level, c]):
            e = adj[level, c, j]
            if visited[e] == stamp:
                continue
            visited[e] = stamp
            de = _dist(data, e, q)
            if rsize < ef or de < -rk[0]:
                csize = _push(ck, cv, csize, de, e)
                if not use_filter or allowed[e]:
                    rsize = _push(rk, rv, rsize, -de, -e)
                    if rsize > ef:
                        rsize, _, _ = _pop(rk, rv, rsize)
    ids = np.empty(rsize, dtype=np.int64)
    dists = np.empty(rsize, dtype=np.float64)
    # drain the max-heap from the worst end so the output is ascending
    for t in range(rsize - 1, -1, -1):
        rsize, k, v = _pop(rk, rv, rsize)
        ids[t] = -v
        dists[t] = -k
    return ids, dists


@njit(cache=True)
def _select_heuristic(data, ids, dists, m, keep_pruned):
    """Keep a candidate only if it is closer to the base than to every kept one.

    With ``keep_pruned`` the remaining slots are topped up with the closest
    rejected candidates.
    """
    out = np.empty(min(m, ids.shape[0]), dtype=np.int64)
    taken = np.zeros(ids.shape[0], dtype=np.bool_)
    n = 0
    for i in range(ids.shape[0]):
        if n >= m:
            break
        c = ids[i]
        good = True
        for s in range(n):
            if _dist(data, out[s], data[c]) < dists[i]:
                good = False
                break
        if good:
            out[n] = c
            taken[i] = True
            n += 1
    if keep_pruned:
        for i in range(ids.shape[0]):
            if n >= m:
                break
            if not taken[i]:
                out[n] = ids[i]
                n += 1
    return out[:n]


@njit(cache=True)
def _sort_pairs(ids, dists):
    order = np.argsort(ids, kind="mergesort")
    ids = ids[order]
    dists = dists[order]
    order = np.argsort(dists, kind="mergesort")
    return ids[order], dists[order]


@njit(cache=True)
def _connect(data, adj, cnt, level, e, new, mmax, keep_pruned):
    if cnt[level, e] < mmax:
        adj[level, e, cnt[level, e]] = new
        cnt[level, e] += 1
        return
    k = cnt[level, e] + 1
    ids = np.empty(k, dtype=np.int64)
    dists = np.empty(k, dtype=np.float64)
    for j in range(k - 1):
        ids[j] = adj[level, e, j]
    ids[k - 1] = new
    for j in range(k):
        dists[j] = _dist(data, ids[j], data[e])
    ids, dists = _sort_pairs(ids, dists)
    sel = _select_heuristic(data, ids, dists, mmax, keep_pruned)
    for j in range(sel.shape[0]):
        adj[level, e, j] = sel[j]
    cnt[level, e] = sel.shape[0]


@njit(cache=True)
def _build(data, levels, m, ef_construction, adj, cnt, keep_pruned):
    n = data.shape[0]
    visited = np.zeros(n, dtype=np.int64)
    ck = np.empty(n + 1, dtype=np.float64)
    cv = np.empty(n + 1, dtype=np.int64)
    rk = np.empty(n + 1, dtype=np.float64)
    rv = np.empty(n + 1, dtype=np.int64)
    allowed = np.ones(1, dtype=np.bool_)
    stamp = 0
    ep = 0
    maxl = levels[0]
    for i in range(1, n):
        q = data[i]
        lvl = levels[i]
        cur = ep
        for lev in range(maxl, lvl, -1):
            cur = _greedy(data, q, cur, adj, cnt, lev)
        eps = np.empty(1, dtype=np.int64)
        eps[0] = cur
        for lev in range(min(lvl, maxl), -1, -1):
            stamp += 1
            ids, dists = _search_layer(
                data, q, eps, ef_construction, adj, cnt, lev, visited, stamp,
                allowed, False, ck, cv, rk, rv,
            )
            ids, dists = _sort_pairs(ids, dists)
            mmax = 2 * m if lev == 0 else m
            sel = _select_heuristic(data, ids, dists, mmax, keep_pruned)
            for j in range(sel.shape[0]):
                adj[lev, i, j] = sel[j]
            cnt[lev, i] = sel.shape[0]
            for j in range(sel.shape[0]):
                _connect(data, adj, cnt, lev, sel[j], i, mmax, keep_pruned)
            eps = ids
        if lvl > maxl:
            maxl = lvl
            ep = i
    return ep


@njit(cache=True)
def _search(data, q, k, ef, adj, cnt, entry, max_level, allowed, use_filter):
    n = data.shape[0]
    cur = entry
    for lev in range(max_level, 0, -1):
        cur = _greedy(data, q, cur, adj, cnt, lev)
    visited = np.zeros(n, dtype=np.int64)
    ck = np.empty(n + 1, dtype=np.float64)
    cv = np.empty(n + 1, dtype=np.int64)
    rk = np.empty(n + 1, dtype=np.float64)
    rv = np.empty(n + 1, dtype=np.int64)
    eps = np.empty(1, dtype=np.int64)
    eps[0] = cur
    return _search_layer(
        data, q, eps, max(ef, k), adj, cnt, 0, visited, 1, allowed, use_filter, ck, cv, rk, rv
    )


def assign_levels(n: int, m: int, seed: int) -> np.ndarray:
    """Exponentially distributed levels with normalization ``1/ln(M)``."""
    rng = np.random.default_rng(seed)
    ml = 1.0 / math.log(m) if m > 1 else 1.0
    u = rng.random(n)
    # 1 - u lies in (0, 1]; log is finite
    lv = np.floor(-np.log1p(-u) * ml).astype(np.int64)
    return np.minimum(lv, MAX_LEVEL_CAP)


@dataclass
class HNSWGraph:
    adj: np.ndarray  # (levels, n, 2*M) int32
    cnt: np.ndarray  # (levels, n) int32
    levels: np.ndarray  # (n,) int64
    entry: int
    m: int
    ef_construction: int
    seed: int
    keep_pruned: bool = True

    @property
    def n_nodes(self) -> int:
        return int(self.levels.shape[0])

    @property
    def n_layers(self) -> int:
        return int(self.adj.shape[0])

    @classmethod
    def build(
        cls,
        data: np.ndarray,
        m: int = 16,
        ef_construction: int = 200,
        seed: int = 0,
        keep_pruned: bool = True,
    ) -> HNSWGraph:
        n = data.shape[0]
        if n == 0:
            raise ValueError("cannot build an HNSW graph over zero vectors")
        if m < 2:
            raise ValueError("M must be at least 2")
        data = np.ascontiguousarray(data, dtype=np.float64)
        levels = assign_levels(n, m, seed)
        n_layers = int(levels.max()) + 1
        adj = np.zeros((n_layers, n, 2 * m), dtype=np.int32)
        cnt = np.zeros((n_layers, n), dtype=np.int32)
        entry = int(_build(data, levels, m, ef_construction, adj, cnt, keep_pruned))
        return cls(adj, cnt, levels, entry, m, ef_construction, seed, keep_pruned)

    def search(
        self,
        data: np.ndarray,
        q: np.ndarray,
        k: int,
        ef: int,
        allowed: np.ndarray | None = None,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Approximate nearest rows to ``q``; returns (row ids, cosine distances) ascending.

        ``allowed`` is an optional boolean row mask: masked-out rows are still
        traversed but never returned.
        """
        q = np.ascontiguousarray(q, dtype=np.float64)
        use_filter = allowed is not None
        mask = allowed if use_filter else np.ones(1, dtype=np.bool_)
        return _search(
            data, q, k, ef, self.adj, self.cnt, self.entry, self.n_layers - 1, mask, use_filter
        )

    def stats(self) -> dict:
        return {
            "nodes": self.n_nodes,
            "layers": self.n_layers,
            "M": self.m,
            "ef_construction": self.ef_construction,
            "seed": self.seed,
            "mean_degree_l0": float(self.cnt[0].mean()),
        }
