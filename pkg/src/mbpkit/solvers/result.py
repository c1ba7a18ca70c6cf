"""Common solver result/parameter types and the backend descriptor."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .. import qubo
from ..graph import Graph


class CapabilityError(RuntimeError):
    """Instance exceeds what the requested solver can handle."""


@dataclass(frozen=True)
class SolveResult:
    assignment: np.ndarray          # int8 vector, 1 = side S1
    energy: float                   # full objective (matrix energy + offset when a QUBO was solved)
    inter_edges: int
    balance_deviation: int
    balanced: bool
    solver_id: str
    wall_time: float
    seed: Optional[int] = None
    iterations: Optional[int] = None
    extras: dict = field(default_factory=dict)


def finish_result(g: Graph, x, solver_id: str, lam: Optional[float] = None, *,
                  wall_time: float = 0.0, seed: Optional[int] = None,
                  iterations: Optional[int] = None, extras: Optional[dict] = None) -> SolveResult:
    """Recompute the reported quantities from the assignment itself.

    Cut and balance always come from the graph, never from solver-internal
    bookkeeping.  When no penalty weight applies (purely combinatorial
    solvers, which return balanced partitions), the energy equals the cut.
    """
    xv = np.asarray(x, dtype=np.int8)
    cut = qubo.e_cut(g, xv)
    ones = int(xv.sum())
    deviation = abs(ones - g.node_count // 2)
    if lam is None:
        energy = float(cut)
    else:
        energy = qubo.e_mbp(g, lam, xv)
    return SolveResult(assignment=xv, energy=energy, inter_edges=cut,
                       balance_deviation=deviation, balanced=(deviation == 0),
                       solver_id=solver_id, wall_time=wall_time, seed=seed,
                       iterations=iterations, extras=extras or {})


@dataclass(frozen=True)
class SaParams:
    sweeps: int = 2000
    restarts: int = 8
    t_initial: Optional[float] = None   # None = auto (95th percentile of |dE| probe)
    cooling: float = 0.97
    t_final: Optional[float] = None     # None = 1e-3 * t_initial

    def __post_init__(self):
        if self.sweeps < 1 or self.restarts < 1:
            raise ValueError("sweeps and restarts must be >= 1")
        if not (0.0 < self.cooling < 1.0):
            raise ValueError(f"cooling must be in (0, 1), got {self.cooling}")
        if self.t_initial is not None and self.t_initial <= 0:
            raise ValueError("t_initial must be positive")
        if self.t_final is not None and self.t_final <= 0:
            raise ValueError("t_final must be positive")


@dataclass(frozen=True)
class BackendInfo:
    solver_id: str
    needs_qubo: bool        # True: solve(qubo, seed); False: solve(graph, lam, seed)
    max_nodes: Optional[int]
    deterministic: bool     # output independent of the seed argument


@dataclass(frozen=True)
class SolverBackend:
    info: BackendInfo
    run: Callable[..., SolveResult]
