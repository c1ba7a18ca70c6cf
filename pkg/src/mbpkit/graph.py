"""Undirected simple graphs: generation, characterization, file round-trip.

Graphs are immutable; node ids are always 0..n-1.  The generator follows a
fixed contract so that a stored (n, p, seed) triple reproduces the exact
edge set anywhere: pairs are visited in lexicographic order (i < j) and one
Philox draw decides each pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from ._rng import make_rng


class GraphFormatError(ValueError):
    """Raised when an edge-list file cannot be parsed; carries the line number."""

    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


@dataclass(frozen=True)
class GenMeta:
    edge_probability: float
    seed: int


@dataclass(frozen=True)
class Graph:
    node_count: int
    edges: frozenset  # frozenset of (i, j) tuples with i < j
    gen_meta: Optional[GenMeta] = None

    def __post_init__(self):
        n = self.node_count
        for i, j in self.edges:
            if not (0 <= i < j < n):
                raise ValueError(f"bad edge ({i},{j}) for node count {n}")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.node_count, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def adjacency_lists(self) -> list[list[int]]:
        adj = [[] for _ in range(self.node_count)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        for neighbors in adj:
            neighbors.sort()
        return adj

    def adjacency_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) int32 arrays, neighbor lists sorted."""
        adj = self.adjacency_lists()
        indptr = np.zeros(self.node_count + 1, dtype=np.int32)
        for i, neighbors in enumerate(adj):
            indptr[i + 1] = indptr[i] + len(neighbors)
        indices = np.empty(indptr[-1], dtype=np.int32)
        for i, neighbors in enumerate(adj):
            indices[indptr[i]:indptr[i + 1]] = neighbors
        return indptr, indices

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.node_count, self.node_count), dtype=np.int8)
        for i, j in self.edges:
            a[i, j] = 1
            a[j, i] = 1
        return a

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def make_graph(n: int, edges: Iterable[tuple[int, int]], gen_meta: Optional[GenMeta] = None) -> Graph:
    """Normalize an edge iterable (orders endpoints, drops duplicates)."""
    normalized = set()
    for i, j in edges:
        if i == j:
            raise ValueError(f"self-loop at node {i}")
        a, b = (i, j) if i < j else (j, i)
        normalized.add((int(a), int(b)))
    return Graph(node_count=int(n), edges=frozenset(normalized), gen_meta=gen_meta)


def generate_er(n: int, p: float, seed: int) -> Graph:
    """Erdős–Rényi G(n, p) with the documented seed contract.

    Each of the n(n-1)/2 unordered pairs, visited in lexicographic order,
    becomes an edge independently with probability p.
    """
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"edge probability must be in [0, 1], got {p}")
    m = n * (n - 1) // 2
    draws = make_rng(seed).random(m)
    hits = draws < p
    edges = []
    k = 0
    for i in range(n - 1):
        row = hits[k:k + (n - 1 - i)]
        for offset in np.nonzero(row)[0]:
            edges.append((i, i + 1 + int(offset)))
        k += n - 1 - i
    return Graph(node_count=n, edges=frozenset(edges),
                 gen_meta=GenMeta(edge_probability=float(p), seed=int(seed)))


def density(g: Graph) -> float:
    """2|E| / n(n-1)."""
    n = g.node_count
    if n < 2:
        raise ValueError("density needs at least 2 nodes")
    return 2.0 * g.edge_count / (n * (n - 1))


def max_degree(g: Graph) -> int:
    if g.edge_count == 0:
        return 0
    return int(g.degrees().max())


def save_graph(g: Graph, path) -> None:
    """Edge-list text format: optional `#` metadata comment, then
    `p el <n> <m>` and one `<i> <j>` line per edge (i < j, sorted)."""
    lines = []
    if g.gen_meta is not None:
        lines.append(f"# n={g.node_count} p={g.gen_meta.edge_probability!r} seed={g.gen_meta.seed}")
    lines.append(f"p el {g.node_count} {g.edge_count}")
    for i, j in g.sorted_edges():
        lines.append(f"{i} {j}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_graph(path) -> Graph:
    text = Path(path).read_text()
    n = None
    m = None
    meta = None
    edges = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parsed = _parse_meta_comment(line)
            if parsed is not None:
                meta = parsed
            continue
        if line.startswith("p "):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "el":
                raise GraphFormatError(path, line_no, f"bad header {line!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise GraphFormatError(path, line_no, f"non-integer header fields in {line!r}") from None
            continue
        if n is None:
            raise GraphFormatError(path, line_no, "edge line before 'p el' header")
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(path, line_no, f"expected '<i> <j>', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(path, line_no, f"non-integer endpoints in {line!r}") from None
        if not (0 <= i < j < n):
            raise GraphFormatError(path, line_no, f"edge ({i},{j}) out of range for n={n}")
        edges.append((i, j))
    if n is None:
        raise GraphFormatError(path, 1, "missing 'p el' header")
    if m is not None and m != len(edges):
        raise GraphFormatError(path, len(text.splitlines()), f"header declares {m} edges, found {len(edges)}")
    edge_set = frozenset(edges)
    if len(edge_set) != len(edges):
        raise GraphFormatError(path, len(text.splitlines()), "duplicate edges in file")
    return Graph(node_count=n, edges=edge_set, gen_meta=meta)


def _parse_meta_comment(line: str) -> Optional[GenMeta]:
    fields = {}
    for token in line.lstrip("# ").split():
        if "=" in token:
            key, _, value = token.partition("=")
            fields[key] = value
    if "p" in fields and "seed" in fields:
        try:
            return GenMeta(edge_probability=float(fields["p"]), seed=int(fields["seed"]))
        except ValueError:
            return None
    return None
