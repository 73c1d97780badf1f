"""Command-line interface.

Subcommands: simulate, enumerate, sweep, resistance, quotient. Numeric
tables go to CSV, structured reports to JSON, both at full double
precision; every command is deterministic given its flags and seed.

Exit codes: 0 success, 1 domain error (library exceptions), 2 I/O or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .basins import sample_basins  # noqa: F401  (re-exported for scripting)
from .dynamics import (
    SystemParams,
    integrate,
    potential,
    trajectory_to_csv,
)
from .errors import PitchnetError, UnknownFamily
from .exact import (
    lift_state,
    load_partition,
    quotient_eigenstate_check,
    quotient_to_dict,
    validate_eep,
)
from .graphs import GENERATORS, Graph, laplacian, load_graph, resistance_matrix
from .stability import (
    MARGINAL,
    STABLE,
    UNSTABLE,
    classify,
    classify_complete,
    evaluate_consensus_set,
    jacobian_laplacian_form,
    report_to_dict,
)
from .stationary import (
    enumerate_detailed_balance,
    find_assignment,
    residual,
    states_to_dicts,
)

_TWO_THIRDS = 2.0 / 3.0
_OMEGA_EPS = 1e-9


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _default_cap() -> int | None:
    env = os.environ.get("PITCHNET_CAP")
    if env is None:
        return 20
    cap = int(env)
    return None if cap <= 0 else cap


def _resolve_graph(args) -> Graph:
    if args.graph is not None:
        path = Path(args.graph)
        if not path.exists():
            raise FileNotFoundError(f"graph file not found: {path}")
        return load_graph(path)
    if args.family is not None:
        try:
            gen = GENERATORS[args.family]
        except KeyError:
            raise UnknownFamily(
                f"unknown family {args.family!r}; known: {', '.join(sorted(GENERATORS))}"
            ) from None
        if args.n is None:
            raise UnknownFamily(f"family {args.family!r} needs --n")
        return gen(args.n)
    raise UnknownFamily("need either --graph PATH or --family NAME --n INT")


def _add_graph_flags(sub):
    sub.add_argument("--graph", help="graph JSON file: {\"nodes\": N, \"edges\": [[i,j],...]}")
    sub.add_argument("--family", help="named generator: " + ", ".join(sorted(GENERATORS)))
    sub.add_argument("--n", type=int, help="size parameter for --family")


def _resolve_cap(args) -> int | None:
    if args.cap is not None:
        return None if args.cap <= 0 else args.cap
    return _default_cap()


# -- simulate ------------------------------------------------------------------

def _cmd_simulate(args) -> int:
    g = _resolve_graph(args)
    p = SystemParams(r=args.r)
    if args.x0 is not None:
        path = Path(args.x0)
        if not path.exists():
            raise FileNotFoundError(f"initial state file not found: {path}")
        x0 = np.asarray(json.loads(path.read_text(encoding="utf-8")), dtype=float)
    else:
        rng = np.random.default_rng(args.seed)
        b = 2.0 * math.sqrt(abs(p.r)) if p.r != 0 else 1.0
        x0 = rng.uniform(-b, b, size=g.node_count)
        x0 -= x0.mean()
    traj = integrate(x0, g, p, t_end=args.t_end, dt=args.dt, method=args.method)
    trajectory_to_csv(traj, args.out)
    summary = {
        "nodes": g.node_count,
        "links": g.edge_count,
        "r": p.r,
        "t_end": args.t_end,
        "dt": traj.dt,
        "method": traj.method,
        "steps": traj.steps,
        "final_residual": residual(traj.final, g, p),
        "potential_initial": potential(traj.states[0], g, p),
        "potential_final": potential(traj.final, g, p),
        "mean_drift_per_unit_time": abs(float(traj.final.mean() - traj.states[0].mean()))
        / args.t_end,
        "trajectory_csv": str(args.out),
    }
    print(json.dumps(summary))
    return 0


# -- enumerate -----------------------------------------------------------------

def _cmd_enumerate(args) -> int:
    g = _resolve_graph(args)
    p = SystemParams(r=args.r)
    states = enumerate_detailed_balance(g, p, cap=_resolve_cap(args))
    payload = states_to_dicts(states)
    for d, s in zip(payload, states):
        rep = classify(jacobian_laplacian_form(s, g, p), p)
        rep.resistance = evaluate_consensus_set(g, s.consensus_edges(g))
        d["stability"] = report_to_dict(rep)
    doc = {"nodes": g.node_count, "links": g.edge_count, "r": p.r,
           "count": len(states), "states": payload}
    Path(args.out).write_text(json.dumps(doc) + "\n", encoding="utf-8")
    print(f"{len(states)} detailed-balance states -> {args.out}")
    return 0


# -- sweep ---------------------------------------------------------------------

def _sweep_rows_k2(r: float) -> list[str]:
    if r <= 0:
        return [f"{_fmt(r)},{_fmt(0.0)},{STABLE}"]
    s = math.sqrt(r)
    return [
        f"{_fmt(r)},{_fmt(+s)},{STABLE}",
        f"{_fmt(r)},{_fmt(-s)},{STABLE}",
        f"{_fmt(r)},{_fmt(0.0)},{UNSTABLE}",
    ]


def _sweep_rows_complete(r: float, n: int) -> list[str]:
    if r <= 0:
        return [f"{_fmt(r)},{_fmt(0.0)},{_fmt(0.0)}"]
    s = math.sqrt(r)
    rows = []
    for v in range(n + 1):
        if classify_complete(n, v) != STABLE:
            continue
        frac = v / n
        for sign in (1.0, -1.0):
            rows.append(f"{_fmt(r)},{_fmt(frac)},{_fmt(sign * frac * s)}")
    return rows


def _sweep_rows_barbell(r: float, n: int) -> list[str]:
    if r <= 0:
        return [f"{_fmt(r)},{_fmt(0.0)},{_fmt(0.0)},{_fmt(0.0)}"]
    s = math.sqrt(r)
    stable_v = [v for v in range(n + 1) if classify_complete(n, v) == STABLE]
    rows = []
    for va in stable_v:
        for vb in stable_v:
            fa, fb = va / n, vb / n
            for sa in (1.0, -1.0):
                for sb in (1.0, -1.0):
                    diff = (1.0 + sb * fb - sa * fa) * s
                    rows.append(f"{_fmt(r)},{_fmt(fa)},{_fmt(fb)},{_fmt(diff)}")
    return rows


_SWEEP_HEADERS = {
    "k2": "r,value,verdict",
    "complete": "r,v,mean",
    "barbell": "r,v_a,v_b,mean_diff",
}


def _cmd_sweep(args) -> int:
    family = args.family
    if family not in _SWEEP_HEADERS:
        raise UnknownFamily(
            f"sweep supports families {sorted(_SWEEP_HEADERS)}, got {family!r}"
        )
    if family != "k2" and args.n is None:
        raise UnknownFamily(f"sweep family {family!r} needs --n")
    if args.r_steps < 1:
        raise UnknownFamily("--r-steps must be >= 1")
    grid = np.linspace(args.r_min, args.r_max, args.r_steps)
    lines = [_SWEEP_HEADERS[family]]
    for r in grid:
        if family == "k2":
            lines += _sweep_rows_k2(float(r))
        elif family == "complete":
            lines += _sweep_rows_complete(float(r), args.n)
        else:
            lines += _sweep_rows_barbell(float(r), args.n)
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"{len(lines) - 1} rows -> {args.out}")
    return 0


# -- resistance ----------------------------------------------------------------

def _cmd_resistance(args) -> int:
    g = _resolve_graph(args)
    res = resistance_matrix(g)
    lines = ["i,j,omega,verdict"]
    for k, (i, j) in enumerate(g.edges):
        omega = float(res[i, j])
        if omega > _TWO_THIRDS + _OMEGA_EPS:
            # any state keeping this link in consensus is unstable (max-
            # resistance criterion), whether or not the exact single-
            # consensus-link state exists
            verdict = UNSTABLE
        else:
            allowed = [(0,) if e == k else (-1, 1) for e in range(g.edge_count)]
            if find_assignment(g, allowed) is None:
                verdict = "no-state"
            elif omega < _TWO_THIRDS - _OMEGA_EPS:
                verdict = STABLE
            else:
                verdict = MARGINAL
        lines.append(f"{i},{j},{_fmt(omega)},{verdict}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"{g.edge_count} links -> {args.out}")
    return 0


# -- quotient ------------------------------------------------------------------

def _cmd_quotient(args) -> int:
    g = _resolve_graph(args)
    part_path = Path(args.partition)
    if not part_path.exists():
        raise FileNotFoundError(f"partition file not found: {part_path}")
    part = load_partition(part_path)
    qg = validate_eep(g, part)
    doc: dict = {"quotient": quotient_to_dict(qg), "state_check": None}
    if args.y is not None:
        y_path = Path(args.y)
        if not y_path.exists():
            raise FileNotFoundError(f"quotient state file not found: {y_path}")
        y = np.asarray(json.loads(y_path.read_text(encoding="utf-8")), dtype=float)
        p = SystemParams(r=args.r)
        ok, mu = quotient_eigenstate_check(qg, y, p)
        check: dict = {"is_eigenstate": bool(ok), "mu": None if math.isnan(mu) else mu}
        if ok:
            x = lift_state(qg, part, y)
            lam = laplacian(g) @ x
            check["lifted"] = [float(v) for v in x]
            check["lifted_residual"] = residual(x, g, p)
            check["laplacian_residual"] = float(np.max(np.abs(lam - mu * x)))
        doc["state_check"] = check
    Path(args.out).write_text(json.dumps(doc) + "\n", encoding="utf-8")
    print(f"quotient with {qg.node_count} cells -> {args.out}")
    return 0


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pitchnet",
        description="Pitchfork-coupled network dynamics: simulation, stationary "
        "states, stability and sweeps.",
    )
    ap.add_argument("--version", action="version", version=f"pitchnet {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate the dynamics, write a trajectory CSV")
    _add_graph_flags(sim)
    sim.add_argument("--r", type=float, default=1.0)
    sim.add_argument("--x0", help="JSON file with N initial values")
    sim.add_argument("--seed", type=int, default=0, help="seed for a random initial state")
    sim.add_argument("--dt", type=float, default=None)
    sim.add_argument("--t-end", type=float, default=10.0)
    sim.add_argument("--method", choices=("rk4", "euler"), default="rk4")
    sim.add_argument("--out", required=True, help="trajectory CSV path")
    sim.set_defaults(func=_cmd_simulate)

    enu = sub.add_parser("enumerate", help="detailed-balance states with stability verdicts")
    _add_graph_flags(enu)
    enu.add_argument("--r", type=float, default=1.0)
    enu.add_argument("--cap", type=int, default=None,
                     help="enumeration link cap (<=0 disables; default 20 or PITCHNET_CAP)")
    enu.add_argument("--out", required=True, help="state list JSON path")
    enu.set_defaults(func=_cmd_enumerate)

    sw = sub.add_parser("sweep", help="bifurcation diagram data over an r grid")
    sw.add_argument("--family", required=True, help="k2 | complete | barbell")
    sw.add_argument("--n", type=int, help="K_n size (per clique for barbell)")
    sw.add_argument("--r-min", type=float, required=True)
    sw.add_argument("--r-max", type=float, required=True)
    sw.add_argument("--r-steps", type=int, required=True)
    sw.add_argument("--out", required=True, help="CSV path")
    sw.set_defaults(func=_cmd_sweep)

    rs = sub.add_parser("resistance", help="per-edge effective resistance with verdicts")
    _add_graph_flags(rs)
    rs.add_argument("--out", required=True, help="CSV path")
    rs.set_defaults(func=_cmd_resistance)

    qt = sub.add_parser("quotient", help="validate an EEP, check and lift quotient states")
    _add_graph_flags(qt)
    qt.add_argument("--partition", required=True, help="partition JSON: {\"cells\": [[...]]}")
    qt.add_argument("--y", help="JSON file with one value per cell")
    qt.add_argument("--r", type=float, default=1.0)
    qt.add_argument("--out", required=True, help="report JSON path")
    qt.set_defaults(func=_cmd_quotient)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (json.JSONDecodeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PitchnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
