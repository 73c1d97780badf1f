"""Jacobians, spectral classification and resistance-based predictions.

At a detailed-balance state the Jacobian collapses to a difference of
Laplacians, J = r*(Q - 3*Q_neq), with Q_neq the Laplacian of the
dissensus subgraph. Stability is decided on the state space X (the
constant direction is neutral and projected out). For states whose
consensus set is a single link, the sign of lambda_max equals the sign
of (omega_ij - 2/3), the effective resistance criterion; for general
mixed states the sum/max resistance tests give one-sided answers only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import SystemParams
from .errors import DimensionMismatch, EigensolverFailure, NoSuchState
from .graphs import Graph, incidence, laplacian, resistance_matrix
from .stationary import DetailedBalanceState, find_assignment

STABLE = "Stable"
UNSTABLE = "Unstable"
MARGINAL = "Marginal"
INCONCLUSIVE = "Inconclusive"

#: half-width of the dead zone around omega = 2/3
OMEGA_EPS = 1e-9
_TWO_THIRDS = 2.0 / 3.0


@dataclass
class Jacobian:
    """Dense symmetric Jacobian with a provenance tag.

    provenance is "elementwise" (valid at any state) or "laplacian_form"
    (the Laplacian-difference shortcut at detailed-balance states). The
    matrix annihilates the constant vector in either case.
    """

    matrix: np.ndarray
    provenance: str


@dataclass
class ResistanceCriterion:
    """Effective-resistance verdict for a consensus edge set."""

    criterion: str  # "single" | "mixed"
    omega_sum: float
    omega_max: float
    verdict: str


@dataclass
class StabilityReport:
    """Spectral classification restricted to X.

    eigenvalues are sorted descending with the constant direction removed.
    verdict is Stable iff lambda_max < -marginal_tolerance, Unstable iff
    lambda_max > +marginal_tolerance, Marginal otherwise.
    """

    eigenvalues: np.ndarray
    verdict: str
    marginal_tolerance: float
    resistance: ResistanceCriterion | None = None

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])


def jacobian_elementwise(x, g: Graph, p: SystemParams) -> Jacobian:
    """Jacobian of the dynamics at an arbitrary state.

    Off-diagonal (i, j) is -r + 3*(x_i - x_j)^2 on links, zero otherwise;
    the diagonal makes every row sum to zero.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (g.node_count,):
        raise DimensionMismatch(f"state has shape {x.shape}, graph has {g.node_count} nodes")
    d = incidence(g).T @ x
    w = -p.r + 3.0 * d**2
    j = np.zeros((g.node_count, g.node_count))
    for e, (a, b) in enumerate(g.edges):
        j[a, b] = w[e]
        j[b, a] = w[e]
        j[a, a] -= w[e]
        j[b, b] -= w[e]
    return Jacobian(matrix=j, provenance="elementwise")


def jacobian_laplacian_form(d: DetailedBalanceState, g: Graph, p: SystemParams) -> Jacobian:
    """Jacobian at a detailed-balance state as r*(Q - 3*Q_neq)."""
    q = laplacian(g)
    q_neq = np.zeros_like(q)
    for e, (a, b) in enumerate(g.edges):
        if d.assignment[e] != 0:
            q_neq[a, a] += 1.0
            q_neq[b, b] += 1.0
            q_neq[a, b] -= 1.0
            q_neq[b, a] -= 1.0
    return Jacobian(matrix=p.r * (q - 3.0 * q_neq), provenance="laplacian_form")


def _meanzero_basis(n: int) -> np.ndarray:
    """Orthonormal basis of the mean-zero subspace, shape (n, n-1).

    Columns 1..n-1 of the Householder reflection that maps e_0 to the
    normalized constant vector; deterministic and exactly orthogonal to
    the constant direction up to roundoff.
    """
    q = np.full(n, 1.0 / math.sqrt(n))
    w = -q.copy()
    w[0] += 1.0  # e_0 - q
    h = np.eye(n) - 2.0 * np.outer(w, w) / (w @ w)
    return h[:, 1:]


def classify(j: Jacobian | np.ndarray, p: SystemParams, tol: float | None = None) -> StabilityReport:
    """Spectral stability verdict on X.

    The constant eigenvector is removed by an explicit change of basis to
    the mean-zero subspace before the symmetric eigensolve. tol defaults
    to 1e-9 * max(1, |r|), the declared dead zone around zero.
    """
    m = j.matrix if isinstance(j, Jacobian) else np.asarray(j, dtype=float)
    if tol is None:
        tol = 1e-9 * max(1.0, abs(p.r))
    u = _meanzero_basis(m.shape[0])
    try:
        eig = np.linalg.eigvalsh(u.T @ m @ u)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    eig = eig[::-1]
    lam = float(eig[0])
    if lam < -tol:
        verdict = STABLE
    elif lam > tol:
        verdict = UNSTABLE
    else:
        verdict = MARGINAL
    return StabilityReport(eigenvalues=eig, verdict=verdict, marginal_tolerance=tol)


def evaluate_consensus_set(g: Graph, consensus_edges) -> ResistanceCriterion:
    """Resistance criterion values for a consensus edge set, no existence check.

    With a single edge the criterion is tight (Stable/Unstable split at
    omega = 2/3, Marginal in the 1e-9 dead zone); with several edges the
    sum/max tests leave an Inconclusive middle ground. The empty set is
    Stable (sum zero), consistent with full dissensus.
    """
    pairs = []
    for edge in consensus_edges:
        i, j = (edge[0], edge[1]) if edge[0] < edge[1] else (edge[1], edge[0])
        if not g.has_edge(i, j):
            raise ValueError(f"({i},{j}) is not an edge of the graph")
        pairs.append((i, j))
    if pairs:
        res = resistance_matrix(g)
        omegas = [float(res[i, j]) for i, j in pairs]
        omega_sum, omega_max = sum(omegas), max(omegas)
    else:
        omega_sum = omega_max = 0.0
    if len(pairs) == 1:
        criterion = "single"
        if omega_max < _TWO_THIRDS - OMEGA_EPS:
            verdict = STABLE
        elif omega_max > _TWO_THIRDS + OMEGA_EPS:
            verdict = UNSTABLE
        else:
            verdict = MARGINAL
    else:
        criterion = "mixed"
        if omega_sum < _TWO_THIRDS - OMEGA_EPS:
            verdict = STABLE
        elif omega_max > _TWO_THIRDS + OMEGA_EPS:
            verdict = UNSTABLE
        else:
            verdict = INCONCLUSIVE
    return ResistanceCriterion(
        criterion=criterion, omega_sum=omega_sum, omega_max=omega_max, verdict=verdict
    )


def predict_single_consensus(g: Graph, edge: tuple[int, int]) -> ResistanceCriterion:
    """Resistance verdict for the state with exactly one consensus link.

    Requires that a cycle-consistent assignment with that single
    consensus link exists (NoSuchState otherwise; on many cyclic graphs
    an all-dissensus-but-one pattern is impossible). The verdict is tight:
    stable iff omega < 2/3, unstable iff omega > 2/3, Marginal inside the
    1e-9 dead zone.
    """
    i, j = (edge[0], edge[1]) if edge[0] < edge[1] else (edge[1], edge[0])
    if not g.has_edge(i, j):
        raise ValueError(f"({i},{j}) is not an edge of the graph")
    k = g.edge_index(i, j)
    allowed = [(0,) if e == k else (-1, 1) for e in range(g.edge_count)]
    if find_assignment(g, allowed) is None:
        raise NoSuchState(
            f"no cycle-consistent state has ({i},{j}) as its only consensus link"
        )
    return evaluate_consensus_set(g, [(i, j)])


def predict_mixed(g: Graph, consensus_edges) -> ResistanceCriterion:
    """Resistance verdict for a state with the given consensus edge set.

    Requires a cycle-consistent assignment whose consensus set is exactly
    the given one (NoSuchState otherwise). Stable when the resistances
    sum below 2/3, unstable when the largest exceeds 2/3; the two tests
    are not tight, so anything in between is Inconclusive.
    """
    wanted = set()
    for edge in consensus_edges:
        i, j = (edge[0], edge[1]) if edge[0] < edge[1] else (edge[1], edge[0])
        if not g.has_edge(i, j):
            raise ValueError(f"({i},{j}) is not an edge of the graph")
        wanted.add((i, j))
    indices = {g.edge_index(i, j) for i, j in wanted}
    allowed = [(0,) if e in indices else (-1, 1) for e in range(g.edge_count)]
    if find_assignment(g, allowed) is None:
        raise NoSuchState(
            f"no cycle-consistent state has consensus set exactly {sorted(wanted)}"
        )
    crit = evaluate_consensus_set(g, sorted(wanted))
    crit.criterion = "mixed"
    if len(wanted) == 1 and crit.verdict == MARGINAL:
        crit.verdict = INCONCLUSIVE
    return crit


def complete_graph_spectrum(n: int, v: int, p: SystemParams) -> np.ndarray:
    """Closed-form Jacobian spectrum for a two-group state of K_n.

    For 1 <= v <= n-1 the eigenvalues are {0, -2rn} together with
    -r(3v - n) repeated n-v-1 times and r(3v - 2n) repeated v-1 times.
    At v in {0, n} the two-group split degenerates to full consensus: the
    between-group eigenvector no longer exists, so the -2rn eigenvalue
    drops out and the spectrum is {0} plus r*n repeated n-1 times
    (matching J = r*Q on K_n). Returned sorted ascending.
    """
    if not 0 <= v <= n:
        raise ValueError(f"need 0 <= V <= N, got V={v}, N={n}")
    r = p.r
    if v in (0, n):
        eig = [0.0] + [r * n] * (n - 1)
    else:
        eig = [0.0, -2.0 * r * n]
        eig += [-r * (3 * v - n)] * (n - v - 1)
        eig += [r * (3 * v - 2 * n)] * (v - 1)
    return np.sort(np.asarray(eig))


def classify_complete(n: int, v: int) -> str:
    """Two-group stability on K_n (r > 0): stable iff 1/3 < V/N < 2/3.

    Exact integer arithmetic; the endpoints V/N in {1/3, 2/3} are
    Marginal (the linearization has a zero eigenvalue there).
    """
    if not 0 <= v <= n:
        raise ValueError(f"need 0 <= V <= N, got V={v}, N={n}")
    lo, hi = 3 * v - n, 3 * v - 2 * n
    if lo > 0 and hi < 0:
        return STABLE
    if lo == 0 or hi == 0:
        return MARGINAL
    return UNSTABLE


# -- JSON interchange --------------------------------------------------------

def report_to_dict(rep: StabilityReport) -> dict:
    d = {
        "lambda_max": rep.lambda_max,
        "eigenvalues": [float(v) for v in rep.eigenvalues],
        "verdict": rep.verdict,
        "resistance": None,
    }
    if rep.resistance is not None:
        d["resistance"] = {
            "criterion": rep.resistance.criterion,
            "omega_sum": rep.resistance.omega_sum,
            "omega_max": rep.resistance.omega_max,
            "verdict": rep.resistance.verdict,
        }
    return d
