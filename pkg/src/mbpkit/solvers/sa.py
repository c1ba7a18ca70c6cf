"""Simulated-annealing QUBO solvers (the local stand-in for a remote
hybrid annealing service).

Two entry points share one schedule and one move sequence:

  solve_sa      any QUBO matrix; local fields stored densely, O(n) per
                accepted flip
  solve_sa_mbp  bisection instances; works off adjacency + integer
                counters, O(deg) per accepted flip, no matrix needed

The sweep kernel is the compiled extension when it is importable, else the
pure-Python twin; set MBPKIT_PURE_SA=1 to force the fallback.  Both kernels
consume identical Philox streams, so results do not depend on the choice.
"""

from __future__ import annotations

import os
import time
from typing import Optional

import numpy as np

from .. import qubo
from .._rng import MASK64, make_rng
from ..graph import Graph
from .result import SaParams, SolveResult, finish_result

if os.environ.get("MBPKIT_PURE_SA", "") not in ("", "0"):
    from . import _sa_pure as _default_kernels
    KERNEL_NAME = "pure (forced)"
else:
    try:
        from . import _sa_core as _default_kernels
        KERNEL_NAME = "compiled"
    except ImportError:  # extension not built; identical but slower
        from . import _sa_pure as _default_kernels
        KERNEL_NAME = "pure"


def kernel_name() -> str:
    return KERNEL_NAME


def _resolve_schedule(params: SaParams, probe) -> tuple[float, float]:
    t0 = params.t_initial if params.t_initial is not None else probe()
    t_floor = params.t_final if params.t_final is not None else 1e-3 * t0
    return t0, t_floor


def _percentile_t0(abs_deltas: np.ndarray) -> float:
    t0 = float(np.percentile(abs_deltas, 95))
    return t0 if t0 > 0.0 else 1.0


def solve_sa(q: qubo.QuboMatrix, params: Optional[SaParams] = None, seed: int = 0,
             graph: Optional[Graph] = None, kernels=None) -> SolveResult:
    """Best-of-restarts annealing on a dense QUBO; deterministic given seed.

    Restart r runs from its own stream keyed seed^r.  The auto initial
    temperature is the 95th percentile of |dE| over 1000 random single
    flips from a random start (its own substream).
    """
    params = params or SaParams()
    kern = kernels or _default_kernels
    n = q.order
    d = q.diagonal()
    sym = q.offdiag_sym()
    start = time.perf_counter()

    def probe() -> float:
        rng = make_rng(seed, stream=1)
        x0 = (rng.random(n) < 0.5).astype(np.int8)
        idx = rng.integers(0, n, size=1000)
        f0 = d + sym @ x0.astype(np.float64)
        de = (1.0 - 2.0 * x0[idx]) * f0[idx]
        return _percentile_t0(np.abs(de))

    t0, t_floor = _resolve_schedule(params, probe)
    best_e = None
    best_x = None
    for r in range(params.restarts):
        rng = make_rng((seed ^ r) & MASK64)
        x = (rng.random(n) < 0.5).astype(np.int8)
        xf = x.astype(np.float64)
        f = d + sym @ xf
        e0 = float(d @ xf + 0.5 * xf @ (sym @ xf))
        e_run, x_run, _ = kern.anneal_dense(sym, x, f, e0, params.sweeps,
                                            t0, params.cooling, t_floor, rng)
        if best_e is None or e_run < best_e:
            best_e = e_run
            best_x = x_run
    elapsed = time.perf_counter() - start
    energy = qubo.energy(q, best_x) + q.offset
    if graph is not None:
        cut = qubo.e_cut(graph, best_x)
        extras = {}
    else:
        cut = 0
        extras = {"no_graph": True}
    ones = int(best_x.sum())
    deviation = abs(ones - n // 2)
    return SolveResult(assignment=best_x, energy=energy, inter_edges=cut,
                       balance_deviation=deviation, balanced=(deviation == 0),
                       solver_id="sa", wall_time=elapsed, seed=seed,
                       iterations=params.restarts * params.sweeps, extras=extras)


def solve_sa_mbp(g: Graph, lam: float, params: Optional[SaParams] = None,
                 seed: int = 0, kernels=None, solver_id: str = "sa-mbp") -> SolveResult:
    """Annealing specialized to bisection instances.

    Same schedule and move sequence as solve_sa on the corresponding matrix,
    but dE comes from adjacency counts and a running imbalance counter, so
    no dense matrix is ever built.  Reported energy is recomputed exactly
    from the returned assignment.
    """
    params = params or SaParams()
    kern = kernels or _default_kernels
    n = g.node_count
    if n % 2 != 0:
        raise ValueError(f"bisection needs an even node count, got {n}")
    if lam <= 0:
        raise ValueError(f"penalty weight must be positive, got {lam}")
    lam = float(lam)
    half = n // 2
    indptr, indices = g.adjacency_csr()
    deg = np.diff(indptr).astype(np.int64)
    edge_arr = np.array(g.sorted_edges(), dtype=np.int64).reshape(-1, 2)
    start = time.perf_counter()

    def seg_counts(x: np.ndarray) -> np.ndarray:
        cs = np.concatenate(([0], np.cumsum(x[indices], dtype=np.int64)))
        return cs[indptr[1:]] - cs[indptr[:-1]]

    def probe() -> float:
        rng = make_rng(seed, stream=1)
        x0 = (rng.random(n) < 0.5).astype(np.int8)
        idx = rng.integers(0, n, size=1000)
        nb1 = seg_counts(x0)
        dev = int(x0.sum()) - half
        dc = 1 - 2 * x0[idx].astype(np.int64)
        dcut = dc * (deg[idx] - 2 * nb1[idx])
        de = dcut + lam * (2 * dev * dc + 1)
        return _percentile_t0(np.abs(de))

    t0, t_floor = _resolve_schedule(params, probe)
    best_e = None
    best_x = None
    for r in range(params.restarts):
        rng = make_rng((seed ^ r) & MASK64)
        x = (rng.random(n) < 0.5).astype(np.int8)
        nb1 = seg_counts(x)
        if edge_arr.size:
            cut0 = int((x[edge_arr[:, 0]] != x[edge_arr[:, 1]]).sum())
        else:
            cut0 = 0
        e_run, x_run, _ = kern.anneal_mbp(indptr, indices, deg, x, nb1,
                                          cut0, int(x.sum()), lam, half,
                                          params.sweeps, t0, params.cooling,
                                          t_floor, rng)
        if best_e is None or e_run < best_e:
            best_e = e_run
            best_x = x_run
    elapsed = time.perf_counter() - start
    return finish_result(g, best_x, solver_id, lam, wall_time=elapsed, seed=seed,
                         iterations=params.restarts * params.sweeps)


def dense_flip_delta(q: qubo.QuboMatrix, x, i: int) -> float:
    """dE of flipping bit i, from the stored matrix rows (test helper)."""
    xv = np.asarray(x, dtype=np.float64)
    f_i = q.diagonal()[i] + q.offdiag_sym()[i] @ xv
    return float((1.0 - 2.0 * xv[i]) * f_i)


def mbp_flip_delta(g: Graph, lam: float, x, i: int) -> float:
    """dE of flipping bit i, from adjacency and the imbalance counter."""
    xv = np.asarray(x, dtype=np.int64)
    n = g.node_count
    adj = g.adjacency_lists()[i]
    nb1 = int(xv[adj].sum()) if adj else 0
    dc = 1 - 2 * int(xv[i])
    dev = int(xv.sum()) - n // 2
    return dc * (len(adj) - 2 * nb1) + lam * (2 * dev * dc + 1)
