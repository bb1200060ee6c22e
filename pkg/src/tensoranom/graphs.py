"""Spatial and temporal graph operators.

Provides the undirected weighted graph type used for the location mode, its
matrix operators (adjacency, Laplacian, normalized Laplacian), the forward
time-difference operator, k-NN and grid graph constructors, and breadth-first
k-hop neighborhoods.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .tensors import unfold


@dataclass(frozen=True)
class SpatialGraph:
    """Undirected weighted graph over 0-based node indices.

    Edges are canonicalized to ``(i, j, weight)`` with ``i < j`` and sorted,
    so equal graphs compare equal and downstream results are deterministic.
    """

    n_nodes: int
    edges: tuple[tuple[int, int, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("graph needs at least one node")
        canon = []
        for i, j, w in self.edges:
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not (0 <= i < self.n_nodes and 0 <= j < self.n_nodes):
                raise ValueError(f"edge ({i},{j}) outside [0,{self.n_nodes})")
            if w <= 0:
                raise ValueError(f"edge ({i},{j}) has non-positive weight {w}")
            a, b = (i, j) if i < j else (j, i)
            canon.append((int(a), int(b), float(w)))
        canon.sort()
        for (a1, b1, _), (a2, b2, _) in zip(canon, canon[1:]):
            if (a1, b1) == (a2, b2):
                raise ValueError(f"duplicate edge ({a1},{b1})")
        object.__setattr__(self, "edges", tuple(canon))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_nodes, self.n_nodes))
        for i, j, w in self.edges:
            a[i, j] = w
            a[j, i] = w
        return a

    def neighbor_lists(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for i, j, _ in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        for lst in nbrs:
            lst.sort()
        return nbrs


@dataclass(frozen=True)
class GraphOperators:
    """Matrix operators derived from a :class:`SpatialGraph`."""

    adjacency: np.ndarray
    degree: np.ndarray
    laplacian: np.ndarray
    normalized_laplacian: np.ndarray


def build_operators(g: SpatialGraph) -> GraphOperators:
    """Adjacency, degree, Laplacian D - A and normalized Laplacian.

    Isolated nodes get a zero inverse-sqrt degree, so their normalized
    Laplacian row/column equals the identity's (keeps the matrix PSD).
    """
    a = g.adjacency()
    deg = a.sum(axis=1)
    lap = np.diag(deg) - a
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    scaled = a * inv_sqrt[:, None] * inv_sqrt[None, :]
    scaled = (scaled + scaled.T) / 2.0  # enforce exact symmetry
    l_n = np.eye(g.n_nodes) - scaled
    return GraphOperators(adjacency=a, degree=deg, laplacian=lap, normalized_laplacian=l_n)


def diff_operator(n: int) -> np.ndarray:
    """(n-1) x n forward-difference matrix with rows (..., 1, -1, ...)."""
    if n < 2:
        raise ValueError(f"difference operator needs n >= 2, got {n}")
    return np.eye(n - 1, n) - np.eye(n - 1, n, k=1)


def cyclic_diff_operator(n: int) -> np.ndarray:
    """n x n cyclic difference I - C, where C shifts indices forward by one."""
    if n < 2:
        raise ValueError(f"cyclic difference operator needs n >= 2, got {n}")
    return np.eye(n) - np.roll(np.eye(n), -1, axis=1)


def grid_graph(rows: int, cols: int) -> SpatialGraph:
    """4-connected lattice with unit weights; node index = row * cols + col."""
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be positive")
    edges = []
    for r in range(rows):
        for c in range(cols):
            idx = r * cols + c
            if c + 1 < cols:
                edges.append((idx, idx + 1, 1.0))
            if r + 1 < rows:
                edges.append((idx, idx + cols, 1.0))
    return SpatialGraph(n_nodes=rows * cols, edges=tuple(edges))


def knn_graph(
    x: np.ndarray,
    mode: int,
    k: int,
    sigma2: float | None = None,
    binary: bool = False,
) -> SpatialGraph:
    """Gaussian-kernel k-NN graph over the rows of the mode-``mode`` unfolding.

    An edge (s, s') exists when either row is among the k Euclidean nearest
    neighbors of the other (OR symmetrization).  ``sigma2`` defaults to the
    median squared distance over the candidate edge set; ``binary=True``
    replaces kernel weights with 1.

    Ties in distance are broken by node index, so the construction is
    deterministic and invariant to row permutation up to relabeling.
    """
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if sigma2 is not None and sigma2 <= 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    rows = unfold(x, mode).matrix
    n = rows.shape[0]
    if k >= n:
        raise ValueError(f"k={k} must be smaller than the number of rows {n}")
    sq = np.sum(rows**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * rows @ rows.T
    np.maximum(d2, 0.0, out=d2)

    pairs: set[tuple[int, int]] = set()
    for s in range(n):
        order = np.lexsort((np.arange(n), d2[s]))
        picked = [int(t) for t in order if t != s][:k]
        for t in picked:
            pairs.add((min(s, t), max(s, t)))

    if sigma2 is None:
        cand = np.array([d2[i, j] for i, j in sorted(pairs)])
        med = float(np.median(cand)) if cand.size else 0.0
        sigma2 = med if med > 0 else 1.0

    edges = []
    for i, j in sorted(pairs):
        w = 1.0 if binary else float(np.exp(-d2[i, j] / (2.0 * sigma2)))
        edges.append((i, j, w))
    return SpatialGraph(n_nodes=n, edges=tuple(edges))


def k_hop_neighborhood(g: SpatialGraph, s: int, k: int) -> list[int]:
    """Nodes within hop distance k of s: the center first, then by
    (hop distance, node index) ascending."""
    if not 0 <= s < g.n_nodes:
        raise ValueError(f"node {s} outside [0,{g.n_nodes})")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    nbrs = g.neighbor_lists()
    dist = {s: 0}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        if dist[u] == k:
            continue
        for v in nbrs[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    rest = sorted((u for u in dist if u != s), key=lambda u: (dist[u], u))
    return [s] + rest


def save_graph_csv(path, g: SpatialGraph) -> None:
    """One edge per line ``i,j,weight`` after a ``# nodes=<n>`` header."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# nodes={g.n_nodes}\n")
        for i, j, w in g.edges:
            fh.write(f"{i},{j},{w!r}\n")


def load_graph_csv(path) -> SpatialGraph:
    text = Path(path).read_text(encoding="utf-8")
    n_nodes = None
    edges = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("nodes="):
                n_nodes = int(body.split("=", 1)[1])
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'i,j,weight', got {line!r}")
        edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
    if n_nodes is None:
        raise ValueError(f"{path}: missing '# nodes=<n>' header")
    return SpatialGraph(n_nodes=n_nodes, edges=tuple(edges))
