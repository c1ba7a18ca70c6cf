"""Partitioning backends behind one registry.

Built-in ids: exact-qubo, exact-bisection, sa, sa-mbp, hybrid-standin
(sa-mbp with default schedule), kl, multilevel.  A remote annealing-service
adapter would register here the same way; none ships.
"""

from __future__ import annotations

from typing import Optional

from .. import qubo
from ..graph import Graph
from .exact import EXACT_MAX_NODES, solve_exact_bisection, solve_exact_qubo
from .kl import kl_refine, solve_kl
from .multilevel import solve_multilevel
from .result import BackendInfo, CapabilityError, SaParams, SolveResult, SolverBackend, finish_result
from .sa import kernel_name, solve_sa, solve_sa_mbp

__all__ = [
    "BackendInfo", "CapabilityError", "SaParams", "SolveResult", "SolverBackend",
    "EXACT_MAX_NODES", "solve_exact_bisection", "solve_exact_qubo", "solve_kl",
    "kl_refine", "solve_multilevel", "solve_sa", "solve_sa_mbp", "kernel_name",
    "finish_result", "register_backend", "get_backend", "solve_with", "backend_ids",
]


class UnknownBackendError(KeyError):
    pass


_REGISTRY: dict[str, SolverBackend] = {}


def register_backend(backend: SolverBackend) -> None:
    if backend.info.solver_id in _REGISTRY:
        raise ValueError(f"backend id {backend.info.solver_id!r} already registered")
    _REGISTRY[backend.info.solver_id] = backend


def get_backend(solver_id: str) -> SolverBackend:
    try:
        return _REGISTRY[solver_id]
    except KeyError:
        raise UnknownBackendError(f"no backend registered under {solver_id!r}") from None


def backend_ids() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def solve_with(solver_id: str, g: Graph, lam: Optional[float] = None,
               q: Optional[qubo.QuboMatrix] = None, seed: int = 0,
               params: Optional[SaParams] = None) -> SolveResult:
    """Dispatch one solve.  QUBO-consuming backends get `q` (built here from
    (g, lam) if absent); graph-native ones get the graph directly."""
    backend = get_backend(solver_id)
    info = backend.info
    if info.max_nodes is not None and g.node_count > info.max_nodes:
        raise CapabilityError(
            f"{solver_id} handles at most {info.max_nodes} nodes, got {g.node_count}")
    if info.needs_qubo:
        if q is None:
            if lam is None:
                raise ValueError(f"{solver_id} needs a QUBO; provide q or lam")
            q = qubo.build_mbp_qubo(g, lam)
        return backend.run(g=g, q=q, lam=lam, seed=seed, params=params)
    return backend.run(g=g, lam=lam, seed=seed, params=params)


def _run_exact_qubo(g, q, lam, seed, params):
    return solve_exact_qubo(q, g)


def _run_exact_bisection(g, lam, seed, params):
    return solve_exact_bisection(g)


def _run_sa(g, q, lam, seed, params):
    result = solve_sa(q, params=params, seed=seed, graph=g)
    return result


def _run_sa_mbp(g, lam, seed, params):
    if lam is None:
        raise ValueError("sa-mbp needs a penalty weight")
    return solve_sa_mbp(g, lam, params=params, seed=seed)


def _run_hybrid_standin(g, lam, seed, params):
    if lam is None:
        raise ValueError("hybrid-standin needs a penalty weight")
    return solve_sa_mbp(g, lam, params=SaParams(), seed=seed, solver_id="hybrid-standin")


def _run_kl(g, lam, seed, params):
    return solve_kl(g, seed=seed)


def _run_multilevel(g, lam, seed, params):
    return solve_multilevel(g, seed=seed)


register_backend(SolverBackend(
    info=BackendInfo("exact-qubo", needs_qubo=True, max_nodes=EXACT_MAX_NODES, deterministic=True),
    run=_run_exact_qubo))
register_backend(SolverBackend(
    info=BackendInfo("exact-bisection", needs_qubo=False, max_nodes=EXACT_MAX_NODES, deterministic=True),
    run=_run_exact_bisection))
register_backend(SolverBackend(
    info=BackendInfo("sa", needs_qubo=True, max_nodes=None, deterministic=False),
    run=_run_sa))
register_backend(SolverBackend(
    info=BackendInfo("sa-mbp", needs_qubo=False, max_nodes=None, deterministic=False),
    run=_run_sa_mbp))
register_backend(SolverBackend(
    info=BackendInfo("hybrid-standin", needs_qubo=False, max_nodes=None, deterministic=False),
    run=_run_hybrid_standin))
register_backend(SolverBackend(
    info=BackendInfo("kl", needs_qubo=False, max_nodes=None, deterministic=False),
    run=_run_kl))
register_backend(SolverBackend(
    info=BackendInfo("multilevel", needs_qubo=False, max_nodes=None, deterministic=False),
    run=_run_multilevel))
