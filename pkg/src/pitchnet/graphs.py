"""Graphs, Laplacians, pseudoinverses and effective resistances.

This module is the substrate for everything else: a small immutable
undirected-graph type with a fixed link orientation convention (every edge
is stored as (i, j) with i < j, and the link variable over that edge is
always x_i - x_j), dense Laplacian algebra, and the cycle structure used
by the stationary-state machinery.

Graphs are deliberately dense and small-scale; eigendecompositions of
symmetric matrices with a few hundred rows are robust and deterministic,
which is what the verification suite relies on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DisconnectedGraph,
    DuplicateEdge,
    EmptyGraph,
    NumericalRankDeficiency,
    SameNode,
    SelfLoop,
)

Edge = tuple[int, int]


@dataclass(frozen=True)
class Graph:
    """Undirected simple connected graph with canonical edge order.

    ``edges`` is sorted lexicographically and every pair satisfies i < j;
    this fixes the orientation used for link variables. Instances are
    hashable and safe to share between threads.
    """

    node_count: int
    edges: tuple[Edge, ...]

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edge_index(self, i: int, j: int) -> int:
        """Index of the (unordered) edge i~j in the canonical edge list."""
        key = (i, j) if i < j else (j, i)
        try:
            return self._edge_lookup()[key]
        except KeyError:
            raise KeyError(f"no edge {key} in graph") from None

    def has_edge(self, i: int, j: int) -> bool:
        key = (i, j) if i < j else (j, i)
        return key in self._edge_lookup()

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self._adjacency()[i]

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.node_count, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    # Small memoized lookups; cheap to rebuild, cached per instance via
    # object.__setattr__ because the dataclass is frozen.
    def _edge_lookup(self) -> dict[Edge, int]:
        cached = self.__dict__.get("_edge_lookup_cache")
        if cached is None:
            cached = {e: k for k, e in enumerate(self.edges)}
            object.__setattr__(self, "_edge_lookup_cache", cached)
        return cached

    def _adjacency(self) -> tuple[tuple[int, ...], ...]:
        cached = self.__dict__.get("_adjacency_cache")
        if cached is None:
            lists: list[list[int]] = [[] for _ in range(self.node_count)]
            for i, j in self.edges:
                lists[i].append(j)
                lists[j].append(i)
            cached = tuple(tuple(sorted(l)) for l in lists)
            object.__setattr__(self, "_adjacency_cache", cached)
        return cached


def build_graph(node_count: int, edges: Iterable[Sequence[int]]) -> Graph:
    """Validate and canonicalize a graph.

    Edges are stored as (i, j) with i < j, sorted lexicographically.
    Raises EmptyGraph, SelfLoop, DuplicateEdge or DisconnectedGraph.
    """
    if node_count < 2:
        raise EmptyGraph(f"need at least 2 nodes, got {node_count}")
    canonical: list[Edge] = []
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if not (0 <= i < node_count and 0 <= j < node_count):
            raise ValueError(f"edge ({i},{j}) out of range for N={node_count}")
        if i == j:
            raise SelfLoop(f"self-loop at node {i}")
        canonical.append((i, j) if i < j else (j, i))
    if len(set(canonical)) != len(canonical):
        seen = set()
        for e in canonical:
            if e in seen:
                raise DuplicateEdge(f"duplicate edge {e}")
            seen.add(e)
    g = Graph(node_count=node_count, edges=tuple(sorted(canonical)))
    if not _connected(g):
        raise DisconnectedGraph(f"graph with N={node_count} is not connected")
    return g


def _connected(g: Graph) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in g.neighbors(u):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == g.node_count


def is_tree(g: Graph) -> bool:
    """True iff the (connected) graph has L = N - 1 links."""
    return g.edge_count == g.node_count - 1


# -- matrices ----------------------------------------------------------------

def laplacian(g: Graph) -> np.ndarray:
    """Dense combinatorial Laplacian Q = D - A."""
    q = np.zeros((g.node_count, g.node_count))
    for i, j in g.edges:
        q[i, i] += 1.0
        q[j, j] += 1.0
        q[i, j] -= 1.0
        q[j, i] -= 1.0
    return q


def incidence(g: Graph) -> np.ndarray:
    """Signed node-edge incidence matrix B (N x L).

    Column for edge (i, j) has +1 at i and -1 at j, so the link variable
    is y = B.T @ x and the node dynamics aggregate as B @ p(y).
    """
    b = np.zeros((g.node_count, g.edge_count))
    for k, (i, j) in enumerate(g.edges):
        b[i, k] = 1.0
        b[j, k] = -1.0
    return b


def pseudoinverse(q: np.ndarray, rel_tol: float = 1e-9) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a Laplacian by eigendecomposition.

    Eigenvalues above rel_tol * lambda_max are inverted, the rest are
    zeroed. A connected graph must have exactly one (near-)zero
    eigenvalue; otherwise NumericalRankDeficiency is raised.
    """
    q = np.asarray(q, dtype=float)
    w, v = np.linalg.eigh(q)
    cutoff = rel_tol * max(w[-1], 1e-300)
    small = np.count_nonzero(np.abs(w) <= cutoff)
    if small != 1:
        raise NumericalRankDeficiency(
            f"{small} near-zero eigenvalues (expected 1); input is not the "
            "Laplacian of a connected graph or is ill-conditioned"
        )
    inv = np.where(np.abs(w) > cutoff, 1.0 / np.where(w == 0, 1.0, w), 0.0)
    return (v * inv) @ v.T


def effective_resistance(g: Graph, i: int, j: int) -> float:
    """Effective resistance between nodes i and j.

    Computed as (e_i - e_j)^T Q^+ (e_i - e_j); defines a metric on the
    nodes, equal to hop distance on trees and 2/N on complete graphs.
    """
    if i == j:
        raise SameNode(f"effective resistance needs two distinct nodes, got {i}")
    qp = pseudoinverse(laplacian(g))
    return float(qp[i, i] + qp[j, j] - 2.0 * qp[i, j])


def resistance_matrix(g: Graph) -> np.ndarray:
    """All-pairs effective resistance matrix (one pseudoinverse solve)."""
    qp = pseudoinverse(laplacian(g))
    d = np.diag(qp)
    return d[:, None] + d[None, :] - 2.0 * qp


# -- cycle structure ---------------------------------------------------------

def spanning_tree(g: Graph) -> tuple[list[int], list[int]]:
    """BFS spanning tree from node 0 in canonical adjacency order.

    Returns (tree_edge_indices, parent) where parent[0] == -1. The result
    is deterministic for a given canonical edge order.
    """
    parent = [-1] * g.node_count
    seen = [False] * g.node_count
    seen[0] = True
    order = [0]
    tree_edges: list[int] = []
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        for v in g.neighbors(u):
            if not seen[v]:
                seen[v] = True
                parent[v] = u
                tree_edges.append(g.edge_index(u, v))
                order.append(v)
    return tree_edges, parent


def cycle_basis(g: Graph) -> list[list[tuple[int, int]]]:
    """Fundamental cycles relative to the BFS spanning tree.

    Each cycle is a list of (edge_index, sign) pairs; traversing the
    edges with those signs telescopes the node differences to zero.
    The basis has exactly L - N + 1 cycles (empty on trees).
    """
    tree_edges, parent = spanning_tree(g)
    in_tree = set(tree_edges)

    def path_to_root(v: int) -> list[int]:
        path = [v]
        while parent[path[-1]] >= 0:
            path.append(parent[path[-1]])
        return path

    basis: list[list[tuple[int, int]]] = []
    for k, (i, j) in enumerate(g.edges):
        if k in in_tree:
            continue
        # chord (i, j) plus the tree path j -> i closes a cycle
        pi, pj = path_to_root(i), path_to_root(j)
        anc = set(pi)
        meet = next(v for v in pj if v in anc)
        cycle: list[tuple[int, int]] = [(k, 1)]  # traverse i -> j
        for v in pj[: pj.index(meet)]:  # climb j -> meet
            e = g.edge_index(v, parent[v])
            a, _ = g.edges[e]
            cycle.append((e, 1 if a == v else -1))
        climb = pi[: pi.index(meet)]
        for v in reversed(climb):  # descend meet -> i
            e = g.edge_index(v, parent[v])
            a, _ = g.edges[e]
            cycle.append((e, -1 if a == v else 1))
        basis.append(cycle)
    return basis


# -- named generators --------------------------------------------------------

def path_graph(n: int) -> Graph:
    return build_graph(n, [(k, k + 1) for k in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return build_graph(n, [(k, (k + 1) % n) for k in range(n)])


def star_graph(n: int) -> Graph:
    """Star on n nodes: node 0 is the hub."""
    return build_graph(n, [(0, k) for k in range(1, n)])


def complete_graph(n: int) -> Graph:
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def barbell_graph(n: int) -> Graph:
    """Two K_n joined by a single bridge link (n-1, n); 2n nodes."""
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges += [(n + i, n + j) for i in range(n) for j in range(i + 1, n)]
    edges.append((n - 1, n))
    return build_graph(2 * n, edges)


def balanced_binary_tree(levels: int) -> Graph:
    """Complete binary tree with 2**levels - 1 nodes (levels >= 2)."""
    n = 2**levels - 1
    return build_graph(n, [((k - 1) // 2, k) for k in range(1, n)])


def wheel_graph(n: int) -> Graph:
    """Wheel on n nodes: hub 0 plus a cycle on 1..n-1."""
    if n < 4:
        raise ValueError("wheel needs at least 4 nodes")
    edges = [(0, k) for k in range(1, n)]
    edges += [(k, k + 1) for k in range(1, n - 1)]
    edges.append((1, n - 1))
    return build_graph(n, edges)


def parallel_paths_graph(n_paths: int = 4) -> Graph:
    """Hub pair 0~1 plus n_paths midpoints adjacent to both hubs."""
    edges = [(0, 1)]
    for k in range(n_paths):
        m = 2 + k
        edges += [(0, m), (1, m)]
    return build_graph(2 + n_paths, edges)


GENERATORS = {
    "path": path_graph,
    "cycle": cycle_graph,
    "star": star_graph,
    "complete": complete_graph,
    "barbell": barbell_graph,
    "binary_tree": balanced_binary_tree,
    "wheel": wheel_graph,
    "parallel_paths": parallel_paths_graph,
}


# -- JSON interchange --------------------------------------------------------

def graph_to_dict(g: Graph) -> dict:
    return {"nodes": g.node_count, "edges": [list(e) for e in g.edges]}


def graph_from_dict(d: dict) -> Graph:
    return build_graph(int(d["nodes"]), d["edges"])


def save_graph(g: Graph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(g)) + "\n", encoding="utf-8")


def load_graph(path: str | Path) -> Graph:
    return graph_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
