"""Penalty-weight selection for the bisection QUBO.

Five strategies, each producing a fully-documented LambdaSpec so results
always carry their provenance:

  MAXCUT_P       n^2 p / 4 (needs the generation probability p)
  EST            midpoint of the analytic interval [1, min(maxdeg, n/2-1)]
  EST_TIMES_MULT EST scaled by an empirical multiplier from the size table
  GBR            EST scaled by the midpoint of two regressor predictions
  FIXED          caller-supplied constant
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from . import gbr
from .graph import Graph, density, max_degree

MAXCUT_P = "MAXCUT_P"
EST = "EST"
EST_TIMES_MULT = "EST_TIMES_MULT"
GBR = "GBR"
FIXED = "FIXED"

STRATEGIES = (MAXCUT_P, EST, EST_TIMES_MULT, GBR, FIXED)


class StrategyError(ValueError):
    """A penalty strategy cannot be resolved for the given graph."""


class DegenerateInstanceError(StrategyError):
    """Penalty interval collapses (empty graph: upper bound 0 < lower bound 1)."""


@dataclass(frozen=True)
class LambdaSpec:
    strategy: str
    value: float                                   # final weight used in the matrix
    lambda_est: Optional[float] = None
    multiplier: Optional[float] = None
    bounds: Optional[tuple[float, float]] = None
    gbr_pred: Optional[tuple[float, float]] = None  # (min, max) multiplier predictions
    p_used: Optional[float] = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not self.value > 0:
            raise ValueError(f"penalty weight must be positive, got {self.value}")
        if self.strategy == EST_TIMES_MULT:
            if self.lambda_est is None or self.multiplier is None:
                raise ValueError("EST_TIMES_MULT needs lambda_est and multiplier")
            if abs(self.value - self.lambda_est * self.multiplier) > 1e-12 * max(1.0, abs(self.value)):
                raise ValueError("value must equal lambda_est * multiplier")
        if self.strategy == GBR:
            if self.lambda_est is None or self.gbr_pred is None:
                raise ValueError("GBR needs lambda_est and gbr_pred")
            mid = (self.gbr_pred[0] + self.gbr_pred[1]) / 2.0
            if abs(self.value - self.lambda_est * mid) > 1e-12 * max(1.0, abs(self.value)):
                raise ValueError("value must equal lambda_est * midpoint(gbr_pred)")

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "value": self.value,
            "lambda_est": self.lambda_est,
            "multiplier": self.multiplier,
            "bounds": list(self.bounds) if self.bounds is not None else None,
            "gbr_pred": list(self.gbr_pred) if self.gbr_pred is not None else None,
            "p_used": self.p_used,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LambdaSpec":
        return cls(
            strategy=d["strategy"],
            value=d["value"],
            lambda_est=d.get("lambda_est"),
            multiplier=d.get("multiplier"),
            bounds=tuple(d["bounds"]) if d.get("bounds") is not None else None,
            gbr_pred=tuple(d["gbr_pred"]) if d.get("gbr_pred") is not None else None,
            p_used=d.get("p_used"),
        )


def lambda_maxcut(n: int, p: float) -> float:
    """Expected-maximum-cut estimate n^2 p / 4."""
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"edge probability must be in [0, 1], got {p}")
    return n * n * p / 4.0


def lambda_bounds(g: Graph) -> tuple[float, float]:
    """Analytic interval [1, min(maxdeg, n/2 - 1)] for the penalty weight."""
    n = g.node_count
    if n % 2 != 0 or n < 4:
        raise ValueError(f"bounds need an even node count >= 4, got {n}")
    upper = float(min(max_degree(g), n // 2 - 1))
    if upper < 1.0:
        raise DegenerateInstanceError(
            f"penalty interval collapsed (upper bound {upper}); graph has no edges")
    return 1.0, upper


def lambda_est(g: Graph) -> float:
    """Midpoint of the analytic interval."""
    lower, upper = lambda_bounds(g)
    return (lower + upper) / 2.0


# Empirical multiplier sets keyed by the node counts they were tuned on.
_MULT_TABLE: tuple[tuple[tuple[int, ...], tuple[float, ...]], ...] = (
    ((100, 200), (0.05, 0.1, 0.2, 0.4)),
    ((300, 400, 500), (0.005, 0.01, 0.03, 0.05, 0.1, 0.2)),
    ((600, 700, 800, 900), (0.005, 0.01, 0.03, 0.05, 0.1)),
    ((1000, 1200, 1400), (0.002, 0.005, 0.01, 0.03, 0.05, 0.1)),
    ((1600, 1800, 2000), (0.002, 0.005, 0.01, 0.03, 0.05, 0.1)),
    ((2500, 3000, 3500, 4000), (0.0005, 0.001, 0.002, 0.005, 0.01, 0.03, 0.05, 0.1)),
)


def lambda_mult_candidates(n: int) -> tuple[float, ...]:
    """Multiplier set for the size bucket nearest to n (ties go to the
    smaller listed size)."""
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    best_size = None
    best_set = None
    for sizes, mults in _MULT_TABLE:
        for size in sizes:
            if best_size is None or abs(n - size) < abs(n - best_size) or (
                    abs(n - size) == abs(n - best_size) and size < best_size):
                best_size = size
                best_set = mults
    return best_set


def lambda_final(lam_est: float, mult: float) -> float:
    """Scaled weight lam_est * mult."""
    if lam_est <= 0 or mult <= 0:
        raise ValueError("both factors must be positive")
    return lam_est * mult


def lambda_from_gbr(model_min: "gbr.GbrModel", model_max: "gbr.GbrModel", g: Graph) -> LambdaSpec:
    """Predict the multiplier range with the two regressors and take its midpoint."""
    for m in (model_min, model_max):
        if m.n_features != 3:
            raise ValueError(f"model expects {m.n_features} features, need (n, density, lambda_est)")
    bounds = lambda_bounds(g)
    est = (bounds[0] + bounds[1]) / 2.0
    features = (float(g.node_count), density(g), est)
    pred_min = gbr.predict(model_min, features)
    pred_max = gbr.predict(model_max, features)
    value = est * (pred_min + pred_max) / 2.0
    if value <= 0:
        raise StrategyError(
            f"regressors predicted a non-positive multiplier midpoint ({pred_min}, {pred_max})")
    return LambdaSpec(strategy=GBR, value=value, lambda_est=est, bounds=bounds,
                      gbr_pred=(pred_min, pred_max))


def tradeoff_terms(n: int, lam: float, moved: int) -> tuple[float, float]:
    """Worst-case cut term x(x-n) and penalty term lam*(n/2-x)^2 after moving
    x nodes out of one full side; used by the bound-derivation property tests."""
    if not (0 <= moved <= n):
        raise ValueError(f"moved count must be in [0, n], got {moved}")
    x = float(moved)
    return x * (x - n), lam * (n / 2.0 - x) ** 2


@dataclass(frozen=True)
class LambdaStrategy:
    """Parsed strategy request; resolve against a concrete graph with resolve_lambda."""
    kind: str                    # "maxcut" | "est" | "mult" | "gbr" | "fixed"
    mult: Optional[float] = None
    fixed: Optional[float] = None
    models: Optional[tuple] = None   # (GbrModel, GbrModel) for kind="gbr"

    @classmethod
    def parse(cls, text: str, models: Optional[tuple] = None) -> "LambdaStrategy":
        """Parse CLI syntax: maxcut | est | mult:<v> | gbr | fixed:<v>."""
        kind, _, arg = text.partition(":")
        if kind == "maxcut":
            return cls(kind="maxcut")
        if kind == "est":
            return cls(kind="est")
        if kind == "mult":
            return cls(kind="mult", mult=float(arg))
        if kind == "fixed":
            return cls(kind="fixed", fixed=float(arg))
        if kind == "gbr":
            return cls(kind="gbr", models=models)
        raise StrategyError(f"unknown penalty strategy {text!r}")


def resolve_lambda(g: Graph, strategy: LambdaStrategy) -> LambdaSpec:
    """Turn a strategy request into a concrete LambdaSpec for graph g."""
    if strategy.kind == "fixed":
        if strategy.fixed is None or strategy.fixed <= 0:
            raise StrategyError(f"fixed strategy needs a positive value, got {strategy.fixed}")
        return LambdaSpec(strategy=FIXED, value=float(strategy.fixed))
    if strategy.kind == "maxcut":
        if g.gen_meta is None:
            raise StrategyError("maxcut strategy needs the generation probability p; "
                                "this graph has no generation metadata")
        p = g.gen_meta.edge_probability
        value = lambda_maxcut(g.node_count, p)
        if value <= 0:
            raise StrategyError(f"maxcut estimate is {value} for p={p}; not usable as a weight")
        return LambdaSpec(strategy=MAXCUT_P, value=value, p_used=p)
    if strategy.kind == "est":
        bounds = lambda_bounds(g)
        est = (bounds[0] + bounds[1]) / 2.0
        return LambdaSpec(strategy=EST, value=est, lambda_est=est, bounds=bounds)
    if strategy.kind == "mult":
        if strategy.mult is None or strategy.mult <= 0:
            raise StrategyError(f"mult strategy needs a positive multiplier, got {strategy.mult}")
        bounds = lambda_bounds(g)
        est = (bounds[0] + bounds[1]) / 2.0
        return LambdaSpec(strategy=EST_TIMES_MULT, value=lambda_final(est, strategy.mult),
                          lambda_est=est, multiplier=strategy.mult, bounds=bounds)
    if strategy.kind == "gbr":
        if not strategy.models:
            raise StrategyError("gbr strategy needs a trained model pair")
        return lambda_from_gbr(strategy.models[0], strategy.models[1], g)
    raise StrategyError(f"unknown strategy kind {strategy.kind!r}")
