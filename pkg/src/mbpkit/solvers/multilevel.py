"""Multilevel bisection: heavy-edge coarsening, coarsest split, refined
uncoarsening, exact balance repair.

Coarsening halts at 32 supernodes (or when matching stops shrinking the
graph).  The coarsest split is exhaustive up to 16 supernodes, otherwise
greedy region growing.  Each level is polished by single-move refinement
with weight-aware gains inside a balance band; the finest level ends with
minimum-gain-loss moves to exact n/2, so the result is always balanced.
The pre-repair cut and balance are kept in extras for reporting against
partitioners that do not enforce balance.
"""

from __future__ import annotations

import time

import numpy as np

from .._rng import make_rng
from ..graph import Graph
from .result import SolveResult, finish_result

COARSEST_NODES = 32
EXHAUSTIVE_NODES = 16


def solve_multilevel(g: Graph, seed: int = 0) -> SolveResult:
    n = g.node_count
    if n % 2 != 0:
        raise ValueError(f"bisection needs an even node count, got {n}")
    start = time.perf_counter()
    rng = make_rng(seed)

    levels = [(g.adjacency_matrix().astype(np.int64), np.ones(n, dtype=np.int64))]
    maps: list[np.ndarray] = []  # maps[k]: level-k node -> level-(k+1) node
    while levels[-1][0].shape[0] > COARSEST_NODES:
        w, node_w = levels[-1]
        cid = _heavy_edge_matching(w, rng)
        n_coarse = int(cid.max()) + 1
        if n_coarse == w.shape[0]:
            break
        maps.append(cid)
        levels.append(_contract(w, node_w, cid, n_coarse))

    w, node_w = levels[-1]
    x = _initial_split(w, node_w, rng)
    x = _refine(w, node_w, x)
    for k in range(len(maps) - 1, -1, -1):
        x = x[maps[k]]
        w, node_w = levels[k]
        x = _refine(w, node_w, x)

    w0 = levels[0][0]
    pre_cut = _cut_weight(w0, x)
    pre_dev = abs(int(x.sum()) - n // 2)
    x = _repair_balance(w0, x, n // 2)
    elapsed = time.perf_counter() - start
    result = finish_result(g, x, "multilevel", wall_time=elapsed, seed=seed,
                           iterations=len(levels),
                           extras={"pre_repair_cut": pre_cut,
                                   "pre_repair_balanced": pre_dev == 0})
    return result


def _heavy_edge_matching(w: np.ndarray, rng) -> np.ndarray:
    """Randomized heavy-edge matching; returns fine->coarse id array.

    Visits nodes in random order, pairing each unmatched node with its
    heaviest unmatched neighbor (ties to the lowest index).  Coarse ids are
    assigned in ascending fine-node order, so the numbering is stable."""
    n = w.shape[0]
    partner = np.full(n, -1, dtype=np.int64)
    for v in rng.permutation(n):
        v = int(v)
        if partner[v] >= 0:
            continue
        row = w[v].copy()
        row[partner >= 0] = 0
        row[v] = 0
        u = int(np.argmax(row))
        if row[u] > 0:
            partner[v] = u
            partner[u] = v
        else:
            partner[v] = v
    cid = np.full(n, -1, dtype=np.int64)
    next_id = 0
    for v in range(n):
        if cid[v] < 0:
            cid[v] = next_id
            cid[partner[v]] = next_id
            next_id += 1
    return cid


def _contract(w: np.ndarray, node_w: np.ndarray, cid: np.ndarray, n_coarse: int):
    wc = np.zeros((n_coarse, n_coarse), dtype=np.int64)
    ii, jj = np.nonzero(np.triu(w, k=1))
    np.add.at(wc, (cid[ii], cid[jj]), w[ii, jj])
    np.add.at(wc, (cid[jj], cid[ii]), w[ii, jj])
    np.fill_diagonal(wc, 0)
    nwc = np.zeros(n_coarse, dtype=np.int64)
    np.add.at(nwc, cid, node_w)
    return wc, nwc


def _cut_weight(w: np.ndarray, x: np.ndarray) -> int:
    xv = x.astype(np.int64)
    return int(xv @ w @ (1 - xv))


def _initial_split(w: np.ndarray, node_w: np.ndarray, rng) -> np.ndarray:
    """Split the coarsest graph: exhaustive for tiny graphs, else the best
    of greedy region growings and a weight-sorted fill."""
    n = w.shape[0]
    total = int(node_w.sum())
    if n <= EXHAUSTIVE_NODES:
        return _exhaustive_split(w, node_w)
    candidates = []
    seeds = rng.permutation(n)[:4]
    for s in seeds:
        candidates.append(_grow_region(w, node_w, int(s)))
    order = np.argsort(-node_w, kind="stable")
    greedy = np.zeros(n, dtype=np.int8)
    w1 = 0
    for v in order:
        if w1 + node_w[v] <= total - w1:
            greedy[v] = 1
            w1 += int(node_w[v])
    candidates.append(greedy)

    def key(x):
        return (abs(2 * int(node_w @ x.astype(np.int64)) - total), _cut_weight(w, x))

    best = min(candidates, key=key)
    return best.astype(np.int8)


def _exhaustive_split(w: np.ndarray, node_w: np.ndarray) -> np.ndarray:
    n = w.shape[0]
    total = int(node_w.sum())
    codes = np.arange(1 << (n - 1), dtype=np.uint64)  # node n-1 fixed on side 0
    bits = ((codes[:, None] >> np.arange(n, dtype=np.uint64)[None, :]) & 1).astype(np.int64)
    w1 = bits @ node_w
    cuts = np.einsum("bi,bi->b", bits @ w, 1 - bits)
    imbalance = np.abs(2 * w1 - total)
    pick = np.lexsort((cuts, imbalance))[0]
    return bits[pick].astype(np.int8)


def _grow_region(w: np.ndarray, node_w: np.ndarray, seed_node: int) -> np.ndarray:
    """BFS region growing from a seed until half the total weight is absorbed."""
    n = w.shape[0]
    total = int(node_w.sum())
    x = np.zeros(n, dtype=np.int8)
    visited = np.zeros(n, dtype=bool)
    queue = [seed_node]
    visited[seed_node] = True
    w1 = 0
    while w1 * 2 < total:
        if not queue:
            remaining = np.flatnonzero(~visited)
            if remaining.size == 0:
                break
            queue.append(int(remaining[0]))
            visited[remaining[0]] = True
            continue
        v = queue.pop(0)
        x[v] = 1
        w1 += int(node_w[v])
        for u in np.flatnonzero(w[v] > 0):
            if not visited[u]:
                visited[u] = True
                queue.append(int(u))
    return x


def _move_gains(w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Weighted gain of moving each node to the other side (cut decrease)."""
    xv = x.astype(np.int64)
    cnt1 = w @ xv
    degw = w.sum(axis=1)
    side = 2 * xv - 1
    return side * (degw - 2 * cnt1)


def _refine(w: np.ndarray, node_w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Greedy single-node moves with positive gain, keeping the weight
    imbalance inside a band (never worse than where it started)."""
    x = x.astype(np.int8).copy()
    total = int(node_w.sum())
    band = int(node_w.max())
    d = _move_gains(w, x)
    imb = 2 * int(node_w @ x.astype(np.int64)) - total  # signed, in weight units
    while True:
        new_imb = imb - 2 * node_w * (2 * x.astype(np.int64) - 1)
        allowed = (np.abs(new_imb) <= max(band, abs(imb))) & (d > 0)
        if not allowed.any():
            break
        cand = np.flatnonzero(allowed)
        v = int(cand[np.argmax(d[cand])])
        x[v] ^= 1
        imb = int(new_imb[v])
        d = _apply_move(w, x, d, v)
    return x


def _apply_move(w: np.ndarray, x: np.ndarray, d: np.ndarray, v: int) -> np.ndarray:
    """Update move gains after node v changed sides (x already flipped)."""
    old_dv = d[v]
    side = 2 * x.astype(np.int64) - 1
    d = d - 2 * w[:, v] * side[v] * side
    d[v] = -old_dv
    return d


def _repair_balance(w: np.ndarray, x: np.ndarray, half: int) -> np.ndarray:
    """Move nodes from the heavy side, best gain first, until exactly half
    are on each side (unit node weights)."""
    x = x.astype(np.int8).copy()
    d = _move_gains(w, x)
    ones = int(x.sum())
    while ones != half:
        heavy = 1 if ones > half else 0
        cand = np.flatnonzero(x == heavy)
        v = int(cand[np.argmax(d[cand])])
        x[v] ^= 1
        ones += 1 if heavy == 0 else -1
        d = _apply_move(w, x, d, v)
    return x
