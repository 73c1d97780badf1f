"""System right-hand side, potential, and fixed-step integration.

The node dynamics couple neighbouring states through the cubic pitchfork
function p(x) = r*x - x**3 applied to link differences:

    dx_i/dt = sum_{j ~ i} p(x_i - x_j)

The system is a gradient flow dx/dt = -grad V for a potential composed of
a double-well term per link, conserves the average state, and is
translation invariant. Those three facts are what the verification
helpers in this module (gradient_check, the conservation and dissipation
assertions in the test suite) pin down numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateCubic, DimensionMismatch, NonFiniteState
from .graphs import Graph, incidence

DEFAULT_MAX_NORM = 1e6


@dataclass(frozen=True)
class SystemParams:
    """Scalar system parameter r.

    r < 0 is the diffusive regime (consensus is the only attractor);
    r > 0 is the bifurcated regime with dissensus differences +-sqrt(r).
    """

    r: float

    def __post_init__(self):
        if not np.isfinite(self.r):
            raise ValueError(f"r must be finite, got {self.r}")


def pitchfork(x, p: SystemParams):
    """Cubic coupling p(x) = r*x - x**3 (vectorized over arrays)."""
    x = np.asarray(x, dtype=float)
    out = p.r * x - x**3
    return float(out) if out.ndim == 0 else out


def _check_state(x, g: Graph) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (g.node_count,):
        raise DimensionMismatch(
            f"state has shape {x.shape}, graph has {g.node_count} nodes"
        )
    return x


def rhs(x, g: Graph, p: SystemParams) -> np.ndarray:
    """Time derivative of the node states.

    Component i is sum over neighbours j of r*(x_i-x_j) - (x_i-x_j)**3.
    The components sum to zero (pairwise antisymmetric terms), so the
    average state is conserved.
    """
    x = _check_state(x, g)
    b = incidence(g)
    return b @ pitchfork(b.T @ x, p)


def rhs_batch(xs: np.ndarray, g: Graph, p: SystemParams) -> np.ndarray:
    """rhs applied to a batch of states, shape (M, N) -> (M, N)."""
    b = incidence(g)
    return pitchfork(xs @ b, p) @ b.T


def link_rhs(y, g: Graph, p: SystemParams) -> np.ndarray:
    """Time derivative of the link variables y_l = x_i - x_j.

    Equals 2*p(y_l) plus the orientation-signed sum of p over adjacent
    links; consistent with the node form through the incidence map:
    link_rhs(B.T x) == B.T rhs(x).
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (g.edge_count,):
        raise DimensionMismatch(
            f"link state has shape {y.shape}, graph has {g.edge_count} links"
        )
    b = incidence(g)
    return b.T @ (b @ pitchfork(y, p))


def potential(x, g: Graph, p: SystemParams) -> float:
    """Gradient-flow potential; one double-well term per link.

    V(x) = 1/4 * sum over links of d**2 (d**2 - 2r) with d = x_i - x_j.
    Invariant under global shifts of x.
    """
    x = _check_state(x, g)
    d2 = (incidence(g).T @ x) ** 2
    return float(0.25 * np.sum(d2 * (d2 - 2.0 * p.r)))


def odd_coupling_reduction(f1: float, f3: float) -> tuple[float, float]:
    """Map an odd analytic coupling onto the cubic normal form.

    Given f1 = f'(0) and f3 = f'''(0), the third-order truncation of
    dx_i/dt = sum f(x_i - x_j) matches the cubic system with
    r = -6*f1/f3 after rescaling time by t' = (-6/f3) * t. Returns
    (r, time_scale). f3 == 0 leaves no cubic term to normalize.
    """
    if f3 == 0:
        raise DegenerateCubic("f'''(0) = 0: no cubic term to reduce to")
    return -6.0 * f1 / f3, -6.0 / f3


# -- integration -------------------------------------------------------------

@dataclass
class Trajectory:
    """Sampled solution of an initial value problem.

    times has strictly increasing entries starting at 0; states[k] is the
    state at times[k]; states[0] is the initial condition.
    """

    times: np.ndarray
    states: np.ndarray
    dt: float
    method: str
    steps: int

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def default_dt(p: SystemParams) -> float:
    """Step size keeping fixed-step RK4 stable on the test corpus."""
    return 1e-3 * min(1.0, 1.0 / abs(p.r)) if p.r != 0 else 1e-3


def _step_rk4(x, dt, f):
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _step_euler(x, dt, f):
    return x + dt * f(x)


_STEPPERS: dict[str, Callable] = {"rk4": _step_rk4, "euler": _step_euler}


def _plan_steps(t_end: float, dt: float) -> list[float]:
    """Step sizes covering (0, t_end] at multiples of dt, last one shortened."""
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    n_full = int(np.floor(t_end / dt + 1e-12))
    rem = t_end - n_full * dt
    steps = [dt] * n_full
    if rem > 1e-12 * max(t_end, 1.0):
        steps.append(rem)
    return steps


def integrate(
    x0,
    g: Graph,
    p: SystemParams,
    t_end: float,
    dt: float | None = None,
    method: str = "rk4",
    max_norm: float = DEFAULT_MAX_NORM,
) -> Trajectory:
    """Integrate the node dynamics with a fixed-step scheme.

    Samples at multiples of dt; the final sample lands on t_end exactly
    (the last step is shortened if needed). Raises NonFiniteState when the
    state leaves the max-norm bound, which signals genuine blow-up (for
    example r < 0 with amplitudes beyond the invariant region).
    """
    x = _check_state(x0, g).copy()
    if dt is None:
        dt = default_dt(p)
    try:
        stepper = _STEPPERS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}, want one of {sorted(_STEPPERS)}")
    b = incidence(g)
    f = lambda s: pitchfork(s @ b, p) @ b.T

    plan = _plan_steps(t_end, dt)
    times = np.empty(len(plan) + 1)
    states = np.empty((len(plan) + 1, g.node_count))
    times[0] = 0.0
    states[0] = x
    t = 0.0
    for k, h in enumerate(plan, start=1):
        x = stepper(x, h, f)
        t += h
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > max_norm:
            raise NonFiniteState(f"state diverged at t={t:.6g} (|x|_inf > {max_norm:g})")
        times[k] = t
        states[k] = x
    times[-1] = t_end
    return Trajectory(times=times, states=states, dt=dt, method=method, steps=len(plan))


def integrate_batch(
    x0s: np.ndarray,
    g: Graph,
    p: SystemParams,
    t_end: float,
    dt: float | None = None,
    method: str = "rk4",
    max_norm: float = DEFAULT_MAX_NORM,
    observer: Callable[[float, np.ndarray], None] | None = None,
) -> np.ndarray:
    """Integrate many trajectories at once; returns the final states.

    x0s has shape (M, N). Only the current states are kept; pass an
    observer(t, states) callback to inspect every accepted step. Used by
    the basin sampler where storing full trajectories would be wasteful.
    """
    xs = np.asarray(x0s, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != g.node_count:
        raise DimensionMismatch(f"batch has shape {xs.shape}, want (M, {g.node_count})")
    if dt is None:
        dt = default_dt(p)
    stepper = _STEPPERS[method]
    b = incidence(g)
    f = lambda s: pitchfork(s @ b, p) @ b.T
    xs = xs.copy()
    t = 0.0
    for h in _plan_steps(t_end, dt):
        xs = stepper(xs, h, f)
        t += h
        if not np.all(np.isfinite(xs)) or np.max(np.abs(xs)) > max_norm:
            raise NonFiniteState(f"a batch member diverged at t={t:.6g}")
        if observer is not None:
            observer(t, xs)
    return xs


def gradient_check(x, g: Graph, p: SystemParams, h: float = 1e-5) -> float:
    """Max deviation between rhs and the central-difference -grad V.

    Returns max over i of |rhs_i(x) + (V(x+h e_i) - V(x-h e_i)) / (2h)|;
    small values certify the gradient-flow property at x.
    """
    x = _check_state(x, g)
    r = rhs(x, g, p)
    worst = 0.0
    for i in range(g.node_count):
        e = np.zeros(g.node_count)
        e[i] = h
        fd = (potential(x + e, g, p) - potential(x - e, g, p)) / (2.0 * h)
        worst = max(worst, abs(r[i] + fd))
    return worst


def trajectory_to_csv(traj: Trajectory, path: str | Path) -> None:
    """Write a trajectory as CSV: header t,x0,...,x{N-1}, 17 significant digits."""
    n = traj.states.shape[1]
    lines = ["t," + ",".join(f"x{i}" for i in range(n))]
    for t, row in zip(traj.times, traj.states):
        lines.append(",".join(format(v, ".17g") for v in (t, *row)))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
