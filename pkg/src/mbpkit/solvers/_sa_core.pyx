# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled annealing sweep kernels; semantics mirror `_sa_pure` exactly.

The uniform stream is drawn per sweep under the GIL; the bit loop runs
without it, so sweep cells can overlap on threads.
"""

from libc.math cimport exp

import numpy as np


def anneal_dense(double[:, ::1] sym, signed char[::1] x, double[::1] f,
                 double energy0, Py_ssize_t sweeps, double t0, double cooling,
                 double t_floor, object rng):
    cdef Py_ssize_t n = x.shape[0]
    cdef double e = energy0
    cdef double best_e = energy0
    cdef double t = t0
    cdef double de
    cdef Py_ssize_t s, i, j
    cdef int dc
    cdef long long accepted = 0
    best_x_arr = np.asarray(x).copy()
    cdef signed char[::1] best_x = best_x_arr
    cdef double[::1] u
    for s in range(sweeps):
        u_arr = rng.random(n)
        u = u_arr
        with nogil:
            for i in range(n):
                dc = 1 - 2 * x[i]
                de = dc * f[i]
                if de <= 0.0 or u[i] < exp(-de / t):
                    x[i] += dc
                    e += de
                    for j in range(n):
                        f[j] += dc * sym[i, j]
                    accepted += 1
                    if e < best_e:
                        best_e = e
                        for j in range(n):
                            best_x[j] = x[j]
        t = t * cooling
        if t < t_floor:
            t = t_floor
    return best_e, best_x_arr, accepted


def anneal_mbp(int[::1] indptr, int[::1] indices, long long[::1] deg,
               signed char[::1] x, long long[::1] nb1, long long cut0,
               long long ones0, double lam, long long half, Py_ssize_t sweeps,
               double t0, double cooling, double t_floor, object rng):
    cdef Py_ssize_t n = x.shape[0]
    cdef long long cut = cut0
    cdef long long dev = ones0 - half
    cdef long long dcut, term
    cdef long long accepted = 0
    cdef double best_e = cut + lam * (dev * dev)
    cdef double t = t0
    cdef double de, e
    cdef Py_ssize_t s, i, k
    cdef int dc
    best_x_arr = np.asarray(x).copy()
    cdef signed char[::1] best_x = best_x_arr
    cdef double[::1] u
    for s in range(sweeps):
        u_arr = rng.random(n)
        u = u_arr
        with nogil:
            for i in range(n):
                dc = 1 - 2 * x[i]
                dcut = dc * (deg[i] - 2 * nb1[i])
                term = 2 * dev * dc + 1
                de = dcut + lam * term
                if de <= 0.0 or u[i] < exp(-de / t):
                    x[i] += dc
                    cut += dcut
                    dev += dc
                    for k in range(indptr[i], indptr[i + 1]):
                        nb1[indices[k]] += dc
                    accepted += 1
                    e = cut + lam * (dev * dev)
                    if e < best_e:
                        best_e = e
                        for k in range(n):
                            best_x[k] = x[k]
        t = t * cooling
        if t < t_floor:
            t = t_floor
    return best_e, best_x_arr, accepted
