"""Detailed-balance stationary states: realization and enumeration.

A stationary state is *detailed-balance* when every link difference lies
in {0, +-sqrt(r)}: each link's coupling vanishes on its own. Such a state
is encoded as a LinkAssignment, one symbol in {-1, 0, +1} per canonical
edge (i, j) meaning x_i - x_j = s * sqrt(r). Symbols on edges are not
independent: the signed symbols must telescope to zero around every
cycle, which is exactly what spanning-tree propagation plus chord
checking enforces.

States live on X = R^N modulo constant shifts; the mean-zero vector is
used as the canonical representative throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .dynamics import SystemParams, rhs
from .errors import CycleInconsistent, NegativeR, TooLarge
from .graphs import Graph, complete_graph, spanning_tree

LinkAssignment = tuple[int, ...]

DEFAULT_ENUMERATION_CAP = 20

_SYMBOLS = frozenset((-1, 0, 1))


@dataclass
class DetailedBalanceState:
    """A detailed-balance stationary state.

    realization is the mean-zero representative; its link differences
    reproduce assignment * sqrt(r) exactly and its dissensus_count is the
    number of nonzero symbols.
    """

    assignment: LinkAssignment
    realization: np.ndarray
    dissensus_count: int

    def is_full_dissensus(self, g: Graph) -> bool:
        return self.dissensus_count == g.edge_count

    def is_consensus(self) -> bool:
        return self.dissensus_count == 0

    def consensus_edges(self, g: Graph) -> tuple[tuple[int, int], ...]:
        return tuple(e for e, s in zip(g.edges, self.assignment) if s == 0)

    def dissensus_edges(self, g: Graph) -> tuple[tuple[int, int], ...]:
        return tuple(e for e, s in zip(g.edges, self.assignment) if s != 0)


def canonical_state(x) -> np.ndarray:
    """Mean-zero representative of a state in X."""
    x = np.asarray(x, dtype=float)
    return x - x.mean()


def _heights_to_state(heights: Sequence[int], p: SystemParams) -> np.ndarray:
    h = np.asarray(heights, dtype=float)
    return (h - h.mean()) * math.sqrt(max(p.r, 0.0))


def _state_from_heights(g: Graph, heights: Sequence[int], p: SystemParams) -> DetailedBalanceState:
    assignment = tuple(int(heights[i] - heights[j]) for i, j in g.edges)
    return DetailedBalanceState(
        assignment=assignment,
        realization=_heights_to_state(heights, p),
        dissensus_count=sum(1 for s in assignment if s != 0),
    )


def realize(assignment: Sequence[int], g: Graph, p: SystemParams) -> DetailedBalanceState:
    """Turn a link assignment into a concrete mean-zero state.

    Node values are propagated along a spanning tree from the prescribed
    differences and every non-tree edge is checked for consistency.
    Raises CycleInconsistent if the signed symbols do not telescope, and
    NegativeR when dissensus symbols are requested with r <= 0.
    """
    assignment = tuple(int(s) for s in assignment)
    if len(assignment) != g.edge_count:
        raise ValueError(f"assignment has {len(assignment)} symbols, graph has {g.edge_count} links")
    if any(s not in _SYMBOLS for s in assignment):
        raise ValueError("assignment symbols must be -1, 0 or +1")
    if p.r <= 0 and any(s != 0 for s in assignment):
        raise NegativeR(f"dissensus links require r > 0, got r={p.r}")

    tree_edges, parent = spanning_tree(g)
    h = [0] * g.node_count
    # parent pointers are produced in BFS order, so children follow parents
    for e in tree_edges:
        a, b = g.edges[e]
        if parent[b] == a:
            h[b] = h[a] - assignment[e]
        else:
            h[a] = h[b] + assignment[e]
    for e, (a, b) in enumerate(g.edges):
        if h[a] - h[b] != assignment[e]:
            raise CycleInconsistent(
                f"assignment is inconsistent around a cycle through edge {(a, b)}"
            )
    return _state_from_heights(g, h, p)


def _search_heights(
    g: Graph, allowed: Sequence[frozenset[int]]
) -> Iterator[tuple[int, ...]]:
    """Depth-first search over integer node heights with h[0] = 0.

    allowed[e] constrains h_i - h_j for edge e = (i, j). Nodes are
    assigned in BFS order; every edge back to an already-assigned node
    prunes the candidate set immediately, so inconsistent branches die as
    early as possible. Yields complete height vectors, deterministically.
    """
    order = [0]
    seen = {0}
    head = 0
    while head < len(order):
        u = order[head]
        head += 1
        for v in g.neighbors(u):
            if v not in seen:
                seen.add(v)
                order.append(v)

    pos_of = {v: k for k, v in enumerate(order)}
    back_edges: list[list[tuple[int, int, bool]]] = [[] for _ in range(g.node_count)]
    for e, (a, b) in enumerate(g.edges):
        if pos_of[a] < pos_of[b]:
            back_edges[b].append((a, e, False))  # b is the tail: h_b = h_a - s
        else:
            back_edges[a].append((b, e, True))  # a is the head: h_a = h_b + s

    h = [0] * g.node_count

    def extend(k: int) -> Iterator[tuple[int, ...]]:
        if k == len(order):
            yield tuple(h)
            return
        v = order[k]
        cands: set[int] | None = None
        for u, e, v_is_head in back_edges[v]:
            offs = {h[u] + (s if v_is_head else -s) for s in allowed[e]}
            cands = offs if cands is None else cands & offs
            if not cands:
                return
        assert cands is not None
        for hv in sorted(cands):
            h[v] = hv
            yield from extend(k + 1)

    yield from extend(1)


def find_assignment(
    g: Graph, allowed: Sequence[Sequence[int]]
) -> LinkAssignment | None:
    """First cycle-consistent assignment with per-edge symbol sets, or None."""
    allowed_sets = [frozenset(a) & _SYMBOLS for a in allowed]
    if len(allowed_sets) != g.edge_count:
        raise ValueError("need one allowed-symbol set per edge")
    for heights in _search_heights(g, allowed_sets):
        return tuple(int(heights[i] - heights[j]) for i, j in g.edges)
    return None


def enumerate_detailed_balance(
    g: Graph, p: SystemParams, cap: int | None = DEFAULT_ENUMERATION_CAP
) -> list[DetailedBalanceState]:
    """All detailed-balance states of the graph, each exactly once.

    States are found by depth-first assignment over a spanning tree with
    constraint propagation on chords, and identified with their mean-zero
    representatives in X. Trees admit all 3^(N-1) assignments; cycles cut
    the count down (the complete graph keeps only the two-valued splits).

    The all-consensus state is included. Work grows like 3^(N-1), so
    graphs with more than ``cap`` links are refused with TooLarge; pass
    cap=None (or a larger value, or the PITCHNET_CAP variable for the
    CLI) to override.
    """
    if p.r <= 0:
        raise NegativeR(f"enumeration needs r > 0 (dissensus scale sqrt(r)); got r={p.r}")
    if cap is not None and g.edge_count > cap:
        raise TooLarge(
            f"graph has L={g.edge_count} links, enumeration cap is {cap}; "
            "raise cap= to override"
        )
    allowed = [_SYMBOLS] * g.edge_count
    states = [_state_from_heights(g, hts, p) for hts in _search_heights(g, allowed)]
    states.sort(key=lambda s: s.assignment)
    return states


def residual(x, g: Graph, p: SystemParams) -> float:
    """Max-norm of the time derivative; zero exactly at stationary states."""
    return float(np.max(np.abs(rhs(x, g, p))))


def state_potential(d: DetailedBalanceState, p: SystemParams) -> float:
    """Potential of a detailed-balance state: -(1/4) r^2 * dissensus_count."""
    return -0.25 * p.r**2 * d.dissensus_count


def complete_graph_states(
    n: int, p: SystemParams
) -> list[tuple[int, DetailedBalanceState]]:
    """Representative two-group states of the complete graph K_n.

    For each V in 0..n, nodes 0..V-1 sit at sqrt(r) and the rest at 0
    (then mean-shifted): consensus within groups, dissensus between, so
    the dissensus count is V*(n-V). Counting the choose(n, V) labelled
    group choices over all V gives 2^n configurations; note V=0 and V=n
    both label the same constant state in X.
    """
    if p.r <= 0:
        raise NegativeR(f"two-group states need r > 0, got r={p.r}")
    if n < 2:
        raise ValueError("need n >= 2")
    g = complete_graph(n)
    out = []
    for v in range(n + 1):
        heights = [1] * v + [0] * (n - v)
        out.append((v, _state_from_heights(g, heights, p)))
    return out


def three_cycle_circle_state(theta: float, p: SystemParams) -> np.ndarray:
    """A point on the degenerate stationary circle of the 3-cycle.

    Returns the mean-zero state at angle theta in the mean-zero plane
    with squared radius 2r/3; every such point is stationary for the
    3-cycle (the potential there is purely radial).
    """
    if p.r <= 0:
        raise NegativeR(f"the stationary circle needs r > 0, got r={p.r}")
    u1 = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)
    u2 = np.array([1.0, 1.0, -2.0]) / math.sqrt(6.0)
    rho = math.sqrt(2.0 * p.r / 3.0)
    return rho * (math.cos(theta) * u1 + math.sin(theta) * u2)


# -- JSON interchange --------------------------------------------------------

def states_to_dicts(states: Sequence[DetailedBalanceState]) -> list[dict]:
    return [
        {
            "assignment": list(s.assignment),
            "dissensus_count": s.dissensus_count,
            "realization": [float(v) for v in s.realization],
        }
        for s in states
    ]


def save_states(states: Sequence[DetailedBalanceState], path: str | Path) -> None:
    Path(path).write_text(json.dumps(states_to_dicts(states)) + "\n", encoding="utf-8")
