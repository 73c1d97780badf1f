"""Basins of attraction: exact prediction on trees, sampling elsewhere.

Below the critical potential V_c = -(L-1) r^2 / 4 a tree trajectory can
never flip the sign of any link difference (doing so would force the
potential up to V_c), so the per-link signs of the initial state already
name the full-dissensus state the trajectory converges to. Above V_c no
such description exists and we fall back to seeded empirical sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dynamics import SystemParams, integrate_batch, potential, rhs_batch
from .errors import NegativeR, NotATree
from .graphs import Graph, incidence, is_tree, spanning_tree
from .stationary import (
    DetailedBalanceState,
    canonical_state,
    enumerate_detailed_balance,
    realize,
)

DEFAULT_ENUMERATION_CAP = 20


def critical_potential(g: Graph, p: SystemParams) -> float:
    """Critical potential -(L-1) r^2 / 4 separating the trapped region."""
    if p.r <= 0:
        raise NegativeR(f"critical potential needs r > 0, got r={p.r}")
    return -(g.edge_count - 1) * p.r**2 / 4.0


@dataclass
class BasinPrediction:
    """Predicted limit of a sub-critical tree trajectory.

    target is the full-dissensus state whose per-link signs match the
    initial state; sign_pattern holds those signs per canonical edge.
    """

    target: DetailedBalanceState
    sign_pattern: tuple[int, ...]
    sub_critical: bool = True


def predict_basin(x, g: Graph, p: SystemParams) -> BasinPrediction | None:
    """Name the attractor of a sub-critical state on a tree.

    Returns None when the state is not predictable: potential at or
    above V_c, or some link difference exactly zero (the measure-zero
    boundary between sign patterns). Raises NotATree off trees.
    """
    if not is_tree(g):
        raise NotATree("basin prediction is only exact on trees")
    if p.r <= 0:
        raise NegativeR(f"basin prediction needs r > 0, got r={p.r}")
    x = np.asarray(x, dtype=float)
    if potential(x, g, p) >= critical_potential(g, p):
        return None
    diffs = incidence(g).T @ x
    if np.any(diffs == 0.0):
        return None
    signs = tuple(int(s) for s in np.sign(diffs))
    return BasinPrediction(target=realize(signs, g, p), sign_pattern=signs)


def sample_subcritical(
    g: Graph,
    p: SystemParams,
    n_samples: int,
    seed: int,
    noise: float = 0.15,
    max_tries: int = 1000,
) -> np.ndarray:
    """Seeded sub-critical initial states on a tree, shape (n_samples, N).

    Draws a random dissensus sign per link, perturbs each link difference
    multiplicatively by U(-noise, noise), rebuilds node values along the
    tree and rejects anything with potential >= V_c. Uniform sampling of
    the whole box would almost never land sub-critical on larger trees,
    which is why this sampler exists alongside sample_basins.
    """
    if not is_tree(g):
        raise NotATree("sub-critical sampling is defined on trees")
    if p.r <= 0:
        raise NegativeR(f"sub-critical sampling needs r > 0, got r={p.r}")
    rng = np.random.default_rng(seed)
    v_c = critical_potential(g, p)
    sqrt_r = math.sqrt(p.r)
    tree_edges, parent = spanning_tree(g)
    out = np.empty((n_samples, g.node_count))
    for k in range(n_samples):
        for _ in range(max_tries):
            signs = rng.choice((-1.0, 1.0), size=g.edge_count)
            y = signs * sqrt_r * (1.0 + rng.uniform(-noise, noise, size=g.edge_count))
            x = np.zeros(g.node_count)
            for e in tree_edges:
                a, b = g.edges[e]
                if parent[b] == a:
                    x[b] = x[a] - y[e]
                else:
                    x[a] = x[b] + y[e]
            x -= x.mean()
            if potential(x, g, p) < v_c:
                out[k] = x
                break
        else:
            raise RuntimeError(f"no sub-critical sample found in {max_tries} tries")
    return out


@dataclass
class BasinHistogram:
    """Result of empirical basin sampling.

    counts[k] is the number of samples converging to targets[k] (mean-zero
    max-norm match within bin_tol). circle_count collects samples landing
    on the degenerate stationary circle of the 3-cycle. Samples whose
    final residual exceeds the threshold are reported in non_convergent;
    converged samples matching no target land in unbinned.
    """

    targets: list[DetailedBalanceState]
    counts: np.ndarray
    circle_count: int = 0
    non_convergent: list[int] = field(default_factory=list)
    unbinned: list[int] = field(default_factory=list)

    def to_csv(self, path: str | Path) -> None:
        lines = ["state_index,assignment,count"]
        for k, (t, c) in enumerate(zip(self.targets, self.counts)):
            sym = "".join({1: "+", 0: "0", -1: "-"}[s] for s in t.assignment)
            lines.append(f"{k},{sym},{int(c)}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def sample_basins(
    g: Graph,
    p: SystemParams,
    n_samples: int,
    seed: int,
    t_end: float,
    dt: float | None = None,
    box_halfwidth: float | None = None,
    bin_tol: float = 1e-4,
    residual_tol: float = 1e-6,
    circle_tol: float = 1e-6,
    cap: int | None = DEFAULT_ENUMERATION_CAP,
) -> BasinHistogram:
    """Integrate random initial states and bin them by limit state.

    Initial coordinates are uniform in [-b, b] with b = 2*sqrt(|r|) by
    default, then shifted to mean zero. For r > 0 the bins are the
    enumerated detailed-balance states; for r < 0 the only stationary
    state is consensus. On the 3-cycle, converged samples at squared
    radius 2r/3 are counted as hits on the degenerate circle.
    """
    if p.r == 0:
        raise ValueError("sample_basins needs r != 0")
    rng = np.random.default_rng(seed)
    b = 2.0 * math.sqrt(abs(p.r)) if box_halfwidth is None else box_halfwidth
    x0s = rng.uniform(-b, b, size=(n_samples, g.node_count))
    x0s -= x0s.mean(axis=1, keepdims=True)

    if p.r > 0:
        targets = enumerate_detailed_balance(g, p, cap=cap)
    else:
        zero = np.zeros(g.node_count)
        targets = [DetailedBalanceState(
            assignment=(0,) * g.edge_count, realization=zero, dissensus_count=0,
        )]
    target_mat = np.stack([t.realization for t in targets])

    finals = integrate_batch(x0s, g, p, t_end=t_end, dt=dt)
    residuals = np.max(np.abs(rhs_batch(finals, g, p)), axis=1)

    is_three_cycle = g.node_count == 3 and g.edge_count == 3
    hist = BasinHistogram(targets=targets, counts=np.zeros(len(targets), dtype=int))
    for k in range(n_samples):
        if residuals[k] > residual_tol:
            hist.non_convergent.append(k)
            continue
        xc = canonical_state(finals[k])
        dists = np.max(np.abs(target_mat - xc), axis=1)
        j = int(np.argmin(dists))
        if dists[j] <= bin_tol:
            hist.counts[j] += 1
        elif is_three_cycle and abs(xc @ xc - 2.0 * p.r / 3.0) <= circle_tol:
            hist.circle_count += 1
        else:
            hist.unbinned.append(k)
    return hist
