"""Eigenstates, closed-form solutions, and external equitable partitions.

A stationary state that is simultaneously a Laplacian eigenvector (an
*eigenstate*) spans an invariant line of the dynamics: starting from
alpha0 times the state, the solution stays on that line with a scalar
amplitude solving a Bernoulli equation in closed form.

External equitable partitions (EEPs) produce such states by lifting:
every node of a cell has the same number d_km of neighbours in each
other cell, the cell counts form a directed weighted quotient graph, and
a generalized eigenstate of the quotient lifts to an eigenstate of the
parent graph by copying cell values onto member nodes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .dynamics import SystemParams, pitchfork
from .errors import NotEquitable, OutOfDomain, PartitionMismatch
from .graphs import Graph, build_graph, laplacian
from .stationary import (
    DetailedBalanceState,
    canonical_state,
    enumerate_detailed_balance,
    residual,
)


@dataclass
class Eigenstate:
    """A stationary state that is a Laplacian eigenvector with eigenvalue mu."""

    state: np.ndarray
    mu: float


@dataclass(frozen=True)
class Partition:
    """Disjoint cells covering the nodes 0..N-1."""

    cells: tuple[tuple[int, ...], ...]

    @property
    def cell_count(self) -> int:
        return len(self.cells)

    def node_count(self) -> int:
        return sum(len(c) for c in self.cells)

    def cell_of(self) -> np.ndarray:
        out = np.empty(self.node_count(), dtype=int)
        for k, cell in enumerate(self.cells):
            for i in cell:
                out[i] = k
        return out


def make_partition(cells: Sequence[Sequence[int]]) -> Partition:
    """Validate cells: nonempty, disjoint, covering 0..N-1 contiguously."""
    tidy = tuple(tuple(sorted(int(i) for i in c)) for c in cells)
    if any(len(c) == 0 for c in tidy):
        raise PartitionMismatch("empty cell in partition")
    flat = [i for c in tidy for i in c]
    if len(set(flat)) != len(flat):
        raise PartitionMismatch("partition cells overlap")
    if sorted(flat) != list(range(len(flat))):
        raise PartitionMismatch("partition must cover nodes 0..N-1 exactly")
    return Partition(cells=tidy)


@dataclass(frozen=True)
class QuotientGraph:
    """Directed weighted quotient of an EEP.

    Edge (k, m, d_km) says every node of cell k has d_km neighbours in
    cell m. Weights satisfy |N_k| * d_km == |N_m| * d_mk.
    """

    node_count: int
    edges: tuple[tuple[int, int, int], ...]

    def weight_matrix(self) -> np.ndarray:
        d = np.zeros((self.node_count, self.node_count))
        for k, m, w in self.edges:
            d[k, m] = w
        return d


def validate_eep(g: Graph, part: Partition) -> QuotientGraph:
    """Check that a partition is externally equitable; return its quotient.

    Every node of a cell must have the same number of neighbours in each
    *other* cell (within-cell links are unconstrained). On failure raises
    NotEquitable naming the first offending node pair.
    """
    if part.node_count() != g.node_count:
        raise PartitionMismatch(
            f"partition covers {part.node_count()} nodes, graph has {g.node_count}"
        )
    k_cells = part.cell_count
    cell_of = part.cell_of()
    counts = np.zeros((g.node_count, k_cells), dtype=int)
    for i, j in g.edges:
        counts[i, cell_of[j]] += 1
        counts[j, cell_of[i]] += 1

    weights = np.zeros((k_cells, k_cells), dtype=int)
    for k, cell in enumerate(part.cells):
        ref = cell[0]
        for m in range(k_cells):
            if m == k:
                continue
            for i in cell[1:]:
                if counts[i, m] != counts[ref, m]:
                    raise NotEquitable(
                        f"nodes {ref} and {i} (cell {k}) have {counts[ref, m]} vs "
                        f"{counts[i, m]} neighbours in cell {m}"
                    )
            weights[k, m] = counts[ref, m]
    edges = tuple(
        (k, m, int(weights[k, m]))
        for k in range(k_cells)
        for m in range(k_cells)
        if weights[k, m] > 0
    )
    return QuotientGraph(node_count=k_cells, edges=edges)


def quotient_rhs(qg: QuotientGraph, y, p: SystemParams) -> np.ndarray:
    """Weighted dynamics on the quotient: sum_m d_km * p(y_k - y_m)."""
    y = np.asarray(y, dtype=float)
    d = qg.weight_matrix()
    diffs = y[:, None] - y[None, :]
    return np.sum(d * pitchfork(diffs, p), axis=1)


def quotient_laplacian(qg: QuotientGraph) -> np.ndarray:
    """Out-degree Laplacian of the quotient: (L y)_k = sum_m d_km (y_k - y_m)."""
    d = qg.weight_matrix()
    return np.diag(d.sum(axis=1)) - d


class EigenstateCheck(NamedTuple):
    is_eigenstate: bool
    mu: float


def quotient_eigenstate_check(
    qg: QuotientGraph, y, p: SystemParams, tol: float = 1e-9
) -> EigenstateCheck:
    """Test the generalized eigenstate conditions on a quotient graph.

    Both the weighted eigenvector relation sum_m d_km (y_k - y_m) = mu*y_k
    and stationarity sum_m d_km p(y_k - y_m) = 0 must hold, for every
    cell, to the given tolerance. A constant y passes trivially with
    mu = 0 (the zero vector of the shift-invariant state space).
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (qg.node_count,):
        raise PartitionMismatch(f"state has shape {y.shape}, quotient has {qg.node_count} cells")
    if np.max(y) - np.min(y) <= tol:
        return EigenstateCheck(True, 0.0)
    if np.max(np.abs(quotient_rhs(qg, y, p))) > tol:
        return EigenstateCheck(False, math.nan)
    z = quotient_laplacian(qg) @ y
    mu = float((y @ z) / (y @ y))
    if np.max(np.abs(z - mu * y)) > tol * max(1.0, float(np.max(np.abs(y)))):
        return EigenstateCheck(False, math.nan)
    return EigenstateCheck(True, mu)


def lift_state(qg: QuotientGraph, part: Partition, y) -> np.ndarray:
    """Copy quotient cell values onto the member nodes of the parent graph."""
    y = np.asarray(y, dtype=float)
    if part.cell_count != qg.node_count or y.shape != (qg.node_count,):
        raise PartitionMismatch(
            f"quotient has {qg.node_count} cells, partition {part.cell_count}, "
            f"state {y.shape}"
        )
    x = np.empty(part.node_count())
    for k, cell in enumerate(part.cells):
        for i in cell:
            x[i] = y[k]
    return x


def find_eigenstates(
    g: Graph,
    p: SystemParams,
    candidates: Sequence[np.ndarray] | None = None,
    cap: int | None = 20,
    tol: float = 1e-9,
) -> list[Eigenstate]:
    """Stationary states that are Laplacian eigenvectors.

    Scans every enumerated detailed-balance state (inheriting the
    enumeration cap) and additionally verifies any user-supplied
    candidate states, which must be stationary to the tolerance. States
    that are zero in X are skipped; results are deduplicated.
    """
    q = laplacian(g)
    found: list[Eigenstate] = []

    def consider(x: np.ndarray, must_be_stationary: bool) -> None:
        x = canonical_state(x)
        scale = float(np.max(np.abs(x)))
        if scale <= tol:
            return
        if must_be_stationary and residual(x, g, p) > tol:
            return
        z = q @ x
        mu = float((x @ z) / (x @ x))
        if np.max(np.abs(z - mu * x)) > tol * max(1.0, scale):
            return
        for e in found:
            if np.max(np.abs(e.state - x)) <= 10 * tol:
                return
        found.append(Eigenstate(state=x, mu=mu))

    for state in enumerate_detailed_balance(g, p, cap=cap):
        consider(state.realization, must_be_stationary=False)
    for cand in candidates or ():
        consider(np.asarray(cand, dtype=float), must_be_stationary=True)
    return found


def exact_solution(e: Eigenstate, alpha0: float, t: float, p: SystemParams) -> np.ndarray:
    """Closed-form state at time t starting from alpha0 * eigenstate.

    The amplitude follows alpha(t) = alpha0 * (alpha0^2 - (alpha0^2 - 1)
    * exp(-2*mu*r*t))^(-1/2); for r > 0 it relaxes to 1, i.e. onto the
    eigenstate. For r < 0 with |alpha0| >= 1 the solution blows up at
    t = ln(alpha0^2 / (alpha0^2 - 1)) / (2*mu*|r|); evaluating at or past
    that time raises OutOfDomain.
    """
    a2 = alpha0 * alpha0
    inner = a2 - (a2 - 1.0) * math.exp(-2.0 * e.mu * p.r * t)
    if inner <= 0.0:
        detail = ""
        if p.r < 0 and a2 > 1.0:
            t_blow = math.log(a2 / (a2 - 1.0)) / (2.0 * e.mu * abs(p.r))
            detail = f" (blow-up at t={t_blow:.6g} for r<0, |alpha0|>=1)"
        raise OutOfDomain(f"closed form undefined at t={t:.6g}{detail}")
    if alpha0 == 0.0:
        return np.zeros_like(e.state)
    return (alpha0 / math.sqrt(inner)) * e.state


def expand_quotient(
    qg: QuotientGraph,
    cell_sizes: Sequence[int],
    internal_edges: dict[int, Sequence[tuple[int, int]]] | None = None,
) -> tuple[Graph, Partition]:
    """Blow a quotient graph up into a parent graph with that EEP.

    Cell k becomes cell_sizes[k] nodes; node a of cell k is wired to
    d_km nodes of cell m by the circulant rule b = (a*d_km + s) mod n_m,
    which distributes the n_k*d_km cross links so that every node of m
    receives exactly d_mk of them. Within-cell links can be anything, so
    internal_edges maps a cell to local node pairs. Requires
    n_k * d_km == n_m * d_mk for every quotient link (and d_km <= n_m so
    the graph stays simple); the result must come out connected.
    """
    sizes = [int(n) for n in cell_sizes]
    if len(sizes) != qg.node_count:
        raise PartitionMismatch(f"need {qg.node_count} cell sizes, got {len(sizes)}")
    if any(n < 1 for n in sizes):
        raise ValueError("cell sizes must be positive")
    d = qg.weight_matrix().astype(int)
    for k in range(qg.node_count):
        for m in range(k + 1, qg.node_count):
            if sizes[k] * d[k, m] != sizes[m] * d[m, k]:
                raise ValueError(
                    f"cells {k},{m}: {sizes[k]}*{d[k, m]} != {sizes[m]}*{d[m, k]} "
                    "(cross-link counts must balance)"
                )
            if d[k, m] > sizes[m] or d[m, k] > sizes[k]:
                raise ValueError(f"cells {k},{m}: weight exceeds target cell size")

    offsets = np.cumsum([0] + sizes[:-1])
    edges: list[tuple[int, int]] = []
    for k in range(qg.node_count):
        for m in range(k + 1, qg.node_count):
            if d[k, m] == 0:
                continue
            for a in range(sizes[k]):
                for s in range(d[k, m]):
                    b = (a * d[k, m] + s) % sizes[m]
                    edges.append((int(offsets[k] + a), int(offsets[m] + b)))
    for k, pairs in (internal_edges or {}).items():
        for u, v in pairs:
            edges.append((int(offsets[k] + u), int(offsets[k] + v)))

    g = build_graph(int(sum(sizes)), edges)
    part = make_partition(
        [list(range(offsets[k], offsets[k] + sizes[k])) for k in range(qg.node_count)]
    )
    return g, part


# -- JSON interchange --------------------------------------------------------

def partition_to_dict(part: Partition) -> dict:
    return {"cells": [list(c) for c in part.cells]}


def partition_from_dict(d: dict) -> Partition:
    return make_partition(d["cells"])


def load_partition(path: str | Path) -> Partition:
    return partition_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def quotient_to_dict(qg: QuotientGraph) -> dict:
    return {"nodes": qg.node_count, "edges": [list(e) for e in qg.edges]}


def quotient_from_dict(d: dict) -> QuotientGraph:
    return QuotientGraph(
        node_count=int(d["nodes"]),
        edges=tuple((int(k), int(m), int(w)) for k, m, w in d["edges"]),
    )
