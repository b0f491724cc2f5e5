"""Undirected communication graphs and Laplacian consensus energy.

Graphs are immutable dense-adjacency structures over zero-based node
indices.  The directed edge count |E| (ordered adjacent pairs, twice the
number of undirected edges) is the graph quantity every cost formula
scales with.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_KINDS = ("complete", "ring", "path", "star")


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph with a symmetric boolean adjacency matrix."""

    n_nodes: int
    adjacency: np.ndarray

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        if adj.shape != (self.n_nodes, self.n_nodes):
            raise ValueError("adjacency must be square with one row per node")
        if self.n_nodes < 1:
            raise ValueError("graph needs at least one node")
        if adj.diagonal().any():
            raise ValueError("self-loops are not allowed")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        adj = adj.copy()
        adj.flags.writeable = False
        object.__setattr__(self, "adjacency", adj)

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def laplacian(self) -> np.ndarray:
        """Degree matrix minus adjacency, as float64."""
        a = self.adjacency.astype(np.float64)
        return np.diag(a.sum(axis=1)) - a


def generate(kind: str, n: int) -> Graph:
    """Build a standard topology: complete, ring, path or star on n nodes."""
    if kind not in _KINDS:
        raise ValueError(f"unknown graph kind {kind!r}; expected one of {_KINDS}")
    minimum = 3 if kind == "ring" else 2
    if n < minimum:
        raise ValueError(f"{kind} graph needs at least {minimum} nodes, got {n}")
    adj = np.zeros((n, n), dtype=bool)
    if kind == "complete":
        adj[:] = True
        np.fill_diagonal(adj, False)
    elif kind == "ring":
        idx = np.arange(n)
        adj[idx, (idx + 1) % n] = True
        adj |= adj.T
    elif kind == "path":
        idx = np.arange(n - 1)
        adj[idx, idx + 1] = True
        adj |= adj.T
    else:  # star with node 0 at the center
        adj[0, 1:] = True
        adj[1:, 0] = True
    return Graph(n, adj)


def load_edge_list(text: str) -> Graph:
    """Parse "i j" lines into a graph; '#' comments and blank lines allowed.

    Node count is 1 + the largest index seen; duplicate edges collapse.
    Connectivity is not enforced here, callers gate on is_connected.
    """
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ValueError(f"line {lineno}: expected two node indices, got {raw!r}")
        try:
            i, j = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer node index in {raw!r}") from None
        if i < 0 or j < 0:
            raise ValueError(f"line {lineno}: negative node index in {raw!r}")
        if i == j:
            raise ValueError(f"line {lineno}: self-loop {i}-{j} is not allowed")
        pairs.append((i, j))
    if not pairs:
        raise ValueError("edge list holds no edges")
    n = 1 + max(max(i, j) for i, j in pairs)
    adj = np.zeros((n, n), dtype=bool)
    for i, j in pairs:
        adj[i, j] = True
        adj[j, i] = True
    return Graph(n, adj)


def is_connected(g: Graph) -> bool:
    """True iff every node pair is joined by a path (single node counts)."""
    visited = np.zeros(g.n_nodes, dtype=bool)
    frontier = np.zeros(g.n_nodes, dtype=bool)
    frontier[0] = True
    while frontier.any():
        visited |= frontier
        frontier = g.adjacency[frontier].any(axis=0) & ~visited
    return bool(visited.all())


def directed_edge_count(g: Graph) -> int:
    """Number of ordered adjacent pairs; equals the Laplacian trace."""
    return int(g.adjacency.sum())


def consensus_energy(g: Graph, x) -> float:
    """Quadratic deviation from consensus: half the sum of (x_i - x_j)^2
    over ordered adjacent pairs, identical to the Laplacian form x'Lx."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (g.n_nodes,):
        raise ValueError(f"state vector needs one entry per node, got shape {x.shape}")
    diff = x[:, None] - x[None, :]
    return 0.5 * float((diff * diff)[g.adjacency].sum())
