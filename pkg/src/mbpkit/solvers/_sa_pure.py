"""Pure-Python annealing sweep kernels.

Reference semantics for the compiled module `_sa_core`; the two must make
identical accept decisions and return identical results when fed the same
arrays and random stream.  Slow (per-bit Python loop) but always available.
"""

from __future__ import annotations

from math import exp

import numpy as np


def anneal_dense(sym, x, f, energy0, sweeps, t0, cooling, t_floor, rng):
    """One restart of single-bit-flip Metropolis on a dense QUBO.

    `f` holds the local fields diag + sym @ x and is updated in O(n) per
    accepted flip; `x` and `f` are modified in place.  Consumes one
    rng.random(n) block per sweep.  Returns (best_energy, best_x, accepted)
    with best_energy tracked incrementally (excludes the offset).
    """
    n = x.shape[0]
    e = float(energy0)
    best_e = e
    best_x = x.copy()
    t = float(t0)
    accepted = 0
    for _ in range(sweeps):
        u = rng.random(n)
        for i in range(n):
            dc = 1 - 2 * int(x[i])
            de = dc * f[i]
            if de <= 0.0 or u[i] < exp(-de / t):
                x[i] += dc
                e += de
                f += dc * sym[i]
                accepted += 1
                if e < best_e:
                    best_e = e
                    best_x[:] = x
        t = t * cooling
        if t < t_floor:
            t = t_floor
    return best_e, best_x, accepted


def anneal_mbp(indptr, indices, deg, x, nb1, cut0, ones0, lam, half,
               sweeps, t0, cooling, t_floor, rng):
    """One restart of the bisection-specialized kernel.

    State is exact integers: cut size, imbalance, and per-node counts of
    neighbors on side S1; a candidate flip costs O(1) and an accepted flip
    O(deg).  Same move sequence as anneal_dense on the matching matrix.
    """
    n = x.shape[0]
    cut = int(cut0)
    dev = int(ones0) - int(half)
    best_e = cut + lam * (dev * dev)
    best_x = x.copy()
    t = float(t0)
    accepted = 0
    for _ in range(sweeps):
        u = rng.random(n)
        for i in range(n):
            dc = 1 - 2 * int(x[i])
            dcut = dc * (int(deg[i]) - 2 * int(nb1[i]))
            de = dcut + lam * (2 * dev * dc + 1)
            if de <= 0.0 or u[i] < exp(-de / t):
                x[i] += dc
                cut += dcut
                dev += dc
                nb1[indices[indptr[i]:indptr[i + 1]]] += dc
                accepted += 1
                e = cut + lam * (dev * dev)
                if e < best_e:
                    best_e = e
                    best_x[:] = x
        t = t * cooling
        if t < t_floor:
            t = t_floor
    return float(best_e), best_x, accepted
