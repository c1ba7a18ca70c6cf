"""QUBO matrix for balanced graph bisection, energy functions, Ising form.

The matrix construction walks the edges (cut term) and then every node and
node pair (balance term), so the result is dense by nature; coefficients
live in a packed upper-triangular float64 array.  The constant part of the
balance term, lam*n^2/4, is not representable in the matrix and is carried
separately as `offset`, so that matrix energy + offset reproduces the full
bisection objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph


@dataclass(frozen=True)
class QuboMatrix:
    order: int
    coeffs: np.ndarray  # packed upper triangle, length n(n+1)/2, row-major
    offset: float
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        expected = self.order * (self.order + 1) // 2
        if self.coeffs.shape != (expected,):
            raise ValueError(f"packed coefficient array must have length {expected}")

    def index(self, i: int, j: int) -> int:
        n = self.order
        if not (0 <= i <= j < n):
            raise IndexError(f"only upper-triangular entries (i <= j) exist, got ({i},{j})")
        return i * n - i * (i - 1) // 2 + (j - i)

    def get(self, i: int, j: int) -> float:
        return float(self.coeffs[self.index(i, j)])

    def diagonal(self) -> np.ndarray:
        if "diag" not in self._cache:
            n = self.order
            idx = np.array([self.index(i, i) for i in range(n)], dtype=np.intp)
            self._cache["diag"] = self.coeffs[idx].copy()
        return self._cache["diag"]

    def offdiag_sym(self) -> np.ndarray:
        """Full symmetric matrix of the quadratic terms, zero diagonal."""
        if "sym" not in self._cache:
            n = self.order
            sym = np.zeros((n, n), dtype=np.float64)
            iu = np.triu_indices(n, k=1)
            sym[iu] = self.coeffs[_packed_strict_upper_indices(n)]
            sym += sym.T
            self._cache["sym"] = sym
        return self._cache["sym"]


def _packed_strict_upper_indices(n: int) -> np.ndarray:
    idx = []
    for i in range(n):
        base = i * n - i * (i - 1) // 2
        idx.extend(range(base + 1, base + (n - i)))
    return np.array(idx, dtype=np.intp)


def build_mbp_qubo(g: Graph, lam: float) -> QuboMatrix:
    """Coefficient matrix for minimum bisection with penalty weight `lam`.

    Per edge (i,j): Q[i,i] += 1, Q[j,j] += 1, Q[i,j] -= 2.
    Per node: Q[i,i] += lam*(1-n).  Per pair i<j: Q[i,j] += 2*lam.
    Offset lam*n^2/4 carried separately.
    """
    n = g.node_count
    if n % 2 != 0:
        raise ValueError(f"bisection needs an even node count, got {n}")
    if lam <= 0:
        raise ValueError(f"penalty weight must be positive, got {lam}")
    lam = float(lam)
    packed = np.full(n * (n + 1) // 2, 2.0 * lam, dtype=np.float64)
    diag_idx = np.array([i * n - i * (i - 1) // 2 for i in range(n)], dtype=np.intp)
    deg = g.degrees()
    packed[diag_idx] = deg + lam * (1.0 - n)
    for i, j in g.edges:
        packed[i * n - i * (i - 1) // 2 + (j - i)] -= 2.0
    return QuboMatrix(order=n, coeffs=packed, offset=lam * n * n / 4.0)


def energy(q: QuboMatrix, x) -> float:
    """Matrix energy sum(Q[i,i] x_i) + sum_{i<j}(Q[i,j] x_i x_j); no offset."""
    xv = np.asarray(x, dtype=np.float64)
    if xv.shape != (q.order,):
        raise ValueError(f"assignment length {xv.shape} does not match order {q.order}")
    d = q.diagonal()
    s = q.offdiag_sym()
    return float(d @ xv + 0.5 * xv @ (s @ xv))


def e_cut(g: Graph, x) -> int:
    """Number of edges with endpoints in different sets."""
    xv = np.asarray(x)
    if xv.shape != (g.node_count,):
        raise ValueError(f"assignment length {xv.shape} does not match node count {g.node_count}")
    cut = 0
    for i, j in g.edges:
        if xv[i] != xv[j]:
            cut += 1
    return cut


def e_balance(n: int, lam: float, x) -> float:
    """lam * (sum(x) - n/2)^2."""
    xv = np.asarray(x)
    if xv.shape != (n,):
        raise ValueError(f"assignment length {xv.shape} does not match n={n}")
    dev = float(int(xv.sum()) - n / 2.0)
    return lam * dev * dev


def e_mbp(g: Graph, lam: float, x) -> float:
    """Full bisection objective: cut size plus balance penalty."""
    return e_cut(g, x) + e_balance(g.node_count, lam, x)


@dataclass(frozen=True)
class IsingProblem:
    h: np.ndarray          # local fields, length n
    j: np.ndarray          # couplings, strictly upper-triangular matrix
    constant: float

    def spin_energy(self, s) -> float:
        sv = np.asarray(s, dtype=np.float64)
        return float(self.h @ sv + sv @ (self.j @ sv))


def to_ising(q: QuboMatrix) -> IsingProblem:
    """Spin form via x_i = (s_i + 1)/2; spin_energy(s) + constant == energy(q, x)."""
    d = q.diagonal()
    s = q.offdiag_sym()
    h = d / 2.0 + s.sum(axis=1) / 4.0
    constant = float(d.sum() / 2.0 + s.sum() / 8.0)
    return IsingProblem(h=h, j=np.triu(s, k=1) / 4.0, constant=constant)


def dump_qubo(q: QuboMatrix, path) -> None:
    """Debug dump: `qubo <n> <nnz>`, nonzero `<i> <j> <value>` lines (i <= j),
    then `offset <value>`."""
    lines = []
    entries = []
    n = q.order
    for i in range(n):
        for j in range(i, n):
            v = q.get(i, j)
            if v != 0.0:
                entries.append((i, j, v))
    lines.append(f"qubo {n} {len(entries)}")
    for i, j, v in entries:
        lines.append(f"{i} {j} {v!r}")
    lines.append(f"offset {q.offset!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def parse_qubo(path) -> QuboMatrix:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    head = lines[0].split()
    if len(head) != 3 or head[0] != "qubo":
        raise ValueError(f"bad qubo header: {lines[0]!r}")
    n, nnz = int(head[1]), int(head[2])
    packed = np.zeros(n * (n + 1) // 2, dtype=np.float64)
    offset = 0.0
    q = QuboMatrix(order=n, coeffs=packed, offset=0.0)
    count = 0
    for line in lines[1:]:
        parts = line.split()
        if parts[0] == "offset":
            offset = float(parts[1])
            continue
        i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        packed[q.index(i, j)] = v
        count += 1
    if count != nnz:
        raise ValueError(f"header declares {nnz} entries, found {count}")
    return QuboMatrix(order=n, coeffs=packed, offset=offset)
