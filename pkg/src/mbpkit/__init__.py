"""Minimum-bisection toolkit.

Builds the bisection QUBO, tunes its penalty weight analytically or with
gradient-boosted regressors, solves with annealing or classical
partitioners, and drives reproducible experiment sweeps.
"""

__version__ = "0.1.0"

from . import gbr, graph, harness, penalty, qubo, solvers  # noqa: F401
