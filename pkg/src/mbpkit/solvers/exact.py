"""Brute-force oracles: global QUBO minimum and definitional best bisection.

Both enumerate exhaustively (capped at 24 nodes) in vectorized blocks, so
they stay usable as test oracles up to the cap.
"""

from __future__ import annotations

import time
from itertools import combinations

import numpy as np

from .. import qubo
from ..graph import Graph
from .result import CapabilityError, SolveResult, finish_result

EXACT_MAX_NODES = 24
_BLOCK_BITS = 18


def solve_exact_qubo(q: qubo.QuboMatrix, g: Graph | None = None) -> SolveResult:
    """Global minimizer of the matrix energy over all 2^n assignments.

    Ties break toward the lowest binary value of x (bit i of the value is
    x_i).  Reported energy includes the offset.  Passing the source graph
    lets the result carry an independently recomputed cut.
    """
    n = q.order
    if n > EXACT_MAX_NODES:
        raise CapabilityError(f"exhaustive enumeration capped at {EXACT_MAX_NODES} nodes, got {n}")
    start = time.perf_counter()
    d = q.diagonal()
    upper = np.triu(q.offdiag_sym())  # strict upper half, as floats
    bits = np.arange(n, dtype=np.uint32)
    best_energy = np.inf
    best_code = -1
    total = 1 << n
    block = 1 << min(_BLOCK_BITS, n)
    for base in range(0, total, block):
        codes = np.arange(base, min(base + block, total), dtype=np.uint64)
        x = ((codes[:, None] >> bits[None, :]) & 1).astype(np.float64)
        e = x @ d + np.einsum("bi,bi->b", x @ upper, x)
        pos = int(np.argmin(e))
        if e[pos] < best_energy:
            best_energy = float(e[pos])
            best_code = int(codes[pos])
    x_best = np.array([(best_code >> i) & 1 for i in range(n)], dtype=np.int8)
    elapsed = time.perf_counter() - start
    energy = qubo.energy(q, x_best) + q.offset
    if g is not None:
        result = finish_result(g, x_best, "exact-qubo", wall_time=elapsed, iterations=total)
        return SolveResult(assignment=result.assignment, energy=energy,
                           inter_edges=result.inter_edges,
                           balance_deviation=result.balance_deviation,
                           balanced=result.balanced, solver_id="exact-qubo",
                           wall_time=elapsed, iterations=total)
    ones = int(x_best.sum())
    deviation = abs(ones - n // 2)
    return SolveResult(assignment=x_best, energy=energy, inter_edges=0,
                       balance_deviation=deviation, balanced=(deviation == 0),
                       solver_id="exact-qubo", wall_time=elapsed, iterations=total,
                       extras={"no_graph": True})


def solve_exact_bisection(g: Graph) -> SolveResult:
    """Minimum-cut exactly-balanced partition by enumerating all balanced
    assignments with node 0 fixed on side S1 (complement symmetry)."""
    n = g.node_count
    if n % 2 != 0:
        raise ValueError(f"bisection needs an even node count, got {n}")
    if n > EXACT_MAX_NODES:
        raise CapabilityError(f"exhaustive enumeration capped at {EXACT_MAX_NODES} nodes, got {n}")
    start = time.perf_counter()
    edges = g.sorted_edges()
    half = n // 2
    best_cut = None
    best_x = None
    count = 0
    chunk = []
    chunk_size = 1 << 14

    def flush(chunk_rows):
        nonlocal best_cut, best_x
        if not chunk_rows:
            return
        x = np.zeros((len(chunk_rows), n), dtype=np.int8)
        x[:, 0] = 1
        for r, others in enumerate(chunk_rows):
            x[r, list(others)] = 1
        cuts = np.zeros(len(chunk_rows), dtype=np.int64)
        for i, j in edges:
            cuts += x[:, i] != x[:, j]
        pos = int(np.argmin(cuts))
        if best_cut is None or cuts[pos] < best_cut:
            best_cut = int(cuts[pos])
            best_x = x[pos].copy()

    for others in combinations(range(1, n), half - 1):
        chunk.append(others)
        count += 1
        if len(chunk) >= chunk_size:
            flush(chunk)
            chunk = []
    flush(chunk)
    elapsed = time.perf_counter() - start
    return finish_result(g, best_x, "exact-bisection", wall_time=elapsed, iterations=count)
