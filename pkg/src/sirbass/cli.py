"""Command-line entry point.

Subcommands: simulate (Monte Carlo marginals), solve (exact marginals),
formula (closed-form tables), compare (two methods on one scenario, with a
tolerance gate), converge (lattice-to-limit studies), front (front tracking).

Exit codes: 0 success, 1 validation failure, 2 tolerance failure, 3 I/O
failure.  Seeds default to a fixed constant, never wall-clock.  Given
identical inputs, emitted CSV bytes are identical across runs.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .config import load_continuum, load_scenario
from .continuum import CFLError, convergence_study
from .csvio import ensemble_rows, marginal_rows, write_csv, write_manifest
from .exact import (
    SolverConfig,
    SolverError,
    has_recovery,
    solve_bass_one_sided,
    solve_marginals,
    solve_sir_bass_one_sided,
    solve_two_sided,
    solve_two_sided_closed,
)
from .fields import FieldError, TimeProfile
from .formulas import FORMULAS
from .front import front_statistics
from .mc import StepSizeError, estimate_marginals
from .oracle import OracleError, closed_form_series
from .scenario import ValidationError

DEFAULT_SEED = 20260809

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_TOLERANCE = 2
EXIT_IO = 3


class ToleranceExceeded(Exception):
    pass


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _out_dir(ns) -> Path:
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_simulate(ns) -> int:
    t0 = time.perf_counter()
    scenario = load_scenario(ns.config)
    out = _out_dir(ns)
    times = np.asarray(_float_list(ns.times), dtype=float) if ns.times else None
    est = estimate_marginals(scenario, ns.replications, dt=ns.dt, seed=ns.seed, times=times)
    write_csv(
        out / "marginals.csv",
        ["t", "k", "state", "mean", "stderr"],
        ensemble_rows(est),
        meta={"kind": "ensemble", "replications": est.replications, "seed": est.seed,
              "dt": est.dt, "config": ns.config},
    )
    write_manifest(out, "simulate",
                   {"config": ns.config, "replications": ns.replications, "dt": ns.dt,
                    "times": ns.times},
                   ns.seed, time.perf_counter() - t0)
    return EXIT_OK


def cmd_solve(ns) -> int:
    t0 = time.perf_counter()
    scenario = load_scenario(ns.config)
    out = _out_dir(ns)
    cfg = SolverConfig(h=ns.h)
    method = ns.method
    if method == "auto":
        if not scenario.lattice.one_sided:
            method = "two-sided"
        elif has_recovery(scenario):
            method = "sir"
        else:
            method = "bass"
    pairs = None
    if method == "two-sided-closed":
        series, pairs = solve_two_sided_closed(scenario, cfg)
    elif method == "two-sided":
        series = solve_two_sided(scenario, cfg)
    elif method == "sir":
        series, pairs = solve_sir_bass_one_sided(scenario, cfg)
    else:
        series = solve_bass_one_sided(scenario, cfg)

    write_csv(out / "marginals.csv", ["t", "k", "S", "I", "R"], marginal_rows(series),
              meta={"kind": "marginals", "config": ns.config, "method": ns.method})
    if pairs is not None:
        cols = ["t", "k", "pair_ss"] + (["pair_sr"] if pairs.sr is not None else [])
        rows = []
        for i, k in enumerate(pairs.pairs_k):
            for j, t in enumerate(pairs.times):
                row = [t, int(k), pairs.ss[i, j]]
                if pairs.sr is not None:
                    row.append(pairs.sr[i, j])
                rows.append(row)
        write_csv(out / "pairs.csv", cols, rows,
                  meta={"kind": "pair-marginals", "config": ns.config})
    write_manifest(out, "solve", {"config": ns.config, "method": ns.method, "h": ns.h},
                   None, time.perf_counter() - t0)
    return EXIT_OK


def _parse_formula_param(raw: str):
    if raw.startswith("expdecay:"):
        _, a, b = raw.split(":")
        return TimeProfile.expdecay(float(a), float(b))
    return float(raw)


def cmd_formula(ns) -> int:
    t0 = time.perf_counter()
    if ns.id not in FORMULAS:
        raise ValidationError(f"unknown formula id {ns.id!r}; known: {', '.join(sorted(FORMULAS))}")
    fn, argnames = FORMULAS[ns.id]
    fixed = {}
    for item in ns.param or []:
        key, _, val = item.partition("=")
        if key not in argnames:
            raise ValidationError(f"{ns.id} takes {argnames}, not {key!r}")
        fixed[key] = _parse_formula_param(val)
    k_list = [int(v) for v in _float_list(ns.k_list)] if ns.k_list else [None]
    t_list = _float_list(ns.t_list) if ns.t_list else [None]

    rows = []
    last = None
    for k in k_list:
        for t in t_list:
            kwargs = dict(fixed)
            if k is not None:
                if "k" in argnames:
                    kwargs["k"] = k
                elif "K" in argnames:
                    kwargs["K"] = k
            if t is not None and "t" in argnames:
                kwargs["t"] = t
            missing = [a for a in argnames if a not in kwargs]
            if missing:
                raise ValidationError(f"{ns.id} missing parameters: {', '.join(missing)}")
            val = fn(**kwargs)
            last = val
            if isinstance(val, tuple):
                val = val[0]
            rows.append((ns.id, "" if k is None else k, "" if t is None else t, val))

    out = _out_dir(ns)
    write_csv(out / "formula.csv", ["formula", "k", "t", "value"], rows,
              meta={"kind": "formula", "id": ns.id})
    write_manifest(out, "formula", {"id": ns.id, "param": ns.param, "k_list": ns.k_list,
                                    "t_list": ns.t_list}, None, time.perf_counter() - t0)
    print(last if not isinstance(last, tuple) else " ".join(repr(v) for v in last))
    return EXIT_OK


def _method_series(method: str, scenario, ns):
    """Returns (times, nodes, values dict state->(K,T), stderr or None)."""
    if method == "exact":
        s = solve_marginals(scenario, SolverConfig(h=ns.h))
        return s.times, s.nodes, {"S": s.S, "I": s.I, "R": s.R}, None
    if method == "two-sided-closed":
        s, _ = solve_two_sided_closed(scenario, SolverConfig(h=ns.h))
        return s.times, s.nodes, {"S": s.S, "I": s.I, "R": s.R}, None
    if method == "closed":
        s = closed_form_series(scenario)
        return s.times, s.nodes, {"S": s.S, "I": s.I, "R": s.R}, None
    if method == "mc":
        times = None
        if getattr(ns, "times", None):
            times = np.asarray(_float_list(ns.times), dtype=float)
        est = estimate_marginals(scenario, ns.replications, dt=ns.dt, seed=ns.seed, times=times)
        vals = {"S": est.mean[0], "I": est.mean[1], "R": est.mean[2]}
        errs = {"S": est.stderr[0], "I": est.stderr[1], "R": est.stderr[2]}
        return est.times, est.nodes, vals, errs
    raise ValidationError(f"unknown compare method {method!r}")


def cmd_compare(ns) -> int:
    t0 = time.perf_counter()
    scenario = load_scenario(ns.config)
    out = _out_dir(ns)
    ta, nodes, va, ea = _method_series(ns.method_a, scenario, ns)
    tb, nodes_b, vb, eb = _method_series(ns.method_b, scenario, ns)
    if not np.array_equal(nodes, nodes_b):
        raise ValidationError("methods produced different node sets")

    # align on the coarser grid; linear resampling of the finer one
    resampled = False
    if len(ta) <= len(tb):
        times = ta
        if not np.array_equal(ta, tb):
            resampled = True
            vb = {s: np.array([np.interp(times, tb, row) for row in m]) for s, m in vb.items()}
            if eb is not None:
                eb = {s: np.array([np.interp(times, tb, row) for row in m]) for s, m in eb.items()}
    else:
        times = tb
        resampled = True
        va = {s: np.array([np.interp(times, ta, row) for row in m]) for s, m in va.items()}
        if ea is not None:
            ea = {s: np.array([np.interp(times, ta, row) for row in m]) for s, m in ea.items()}

    mc_mode = ea is not None or eb is not None
    tolerance = ns.tolerance if ns.tolerance is not None else (4.0 if mc_mode else 1e-6)
    M = ns.replications

    rows = []
    max_abs = 0.0
    max_z = 0.0
    for state in ("S", "I", "R"):
        a, b = va[state], vb[state]
        mask = ~(np.isnan(a) | np.isnan(b))
        if not mask.any():
            continue
        diff = np.where(mask, np.abs(a - b), 0.0)
        max_abs = max(max_abs, float(diff.max()))
        se = np.zeros_like(diff)
        if ea is not None:
            se = se + np.where(mask, ea[state], 0.0) ** 2
        if eb is not None:
            se = se + np.where(mask, eb[state], 0.0) ** 2
        se = np.sqrt(se)
        if mc_mode:
            z = diff / np.maximum(se, 1.0 / M)
            max_z = max(max_z, float(z.max()))
        for i, k in enumerate(nodes):
            for j, t in enumerate(times):
                if mask[i, j]:
                    rows.append((t, int(k), state, a[i, j], b[i, j], a[i, j] - b[i, j],
                                 se[i, j]))

    write_csv(out / "compare.csv", ["t", "k", "state", "a", "b", "diff", "stderr"], rows,
              meta={"kind": "compare", "method_a": ns.method_a, "method_b": ns.method_b,
                    "config": ns.config, "resampled": resampled})
    exceeded = (max_z > tolerance) if mc_mode else (max_abs > tolerance)
    report = {
        "method_a": ns.method_a,
        "method_b": ns.method_b,
        "max_abs_diff": max_abs,
        "max_stderr_normalized": max_z if mc_mode else None,
        "tolerance": tolerance,
        "tolerance_units": "stderr" if mc_mode else "absolute",
        "resampled": resampled,
        "pass": not exceeded,
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    write_manifest(out, "compare",
                   {"config": ns.config, "method_a": ns.method_a, "method_b": ns.method_b,
                    "replications": ns.replications, "dt": ns.dt, "tolerance": ns.tolerance},
                   ns.seed, time.perf_counter() - t0)
    if exceeded:
        print(f"tolerance exceeded: max_abs={max_abs:.3e} max_z={max_z:.2f} "
              f"tolerance={tolerance}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_converge(ns) -> int:
    t0 = time.perf_counter()
    cs, study = load_continuum(ns.config)
    dx_list = _float_list(ns.dx_list) if ns.dx_list else study["dx_list"]
    if not dx_list:
        raise ValidationError("no dx list given (flag --dx-list or config dx_list)")
    res = convergence_study(cs, dx_list, study["t_snapshot"])
    out = _out_dir(ns)

    write_csv(out / "errors.csv", ["dx", "sup_error", "t_snapshot"],
              [(dx, err, res.t_snapshot) for dx, err in zip(res.dx, res.sup_error)],
              meta={"kind": "convergence", "rescaling": cs.rescaling, "config": ns.config})
    x, S = res.limit_curve
    write_csv(out / "limit.csv", ["t", "x", "S"],
              [(res.t_snapshot, xi, si) for xi, si in zip(x, S)],
              meta={"kind": "continuum-field", "series": "limit", "rescaling": cs.rescaling})
    for dx, (x, S) in res.lattice_curves.items():
        write_csv(out / f"lattice_dx{dx:g}.csv", ["t", "x", "S"],
                  [(res.t_snapshot, xi, si) for xi, si in zip(x, S)],
                  meta={"kind": "continuum-field", "series": f"lattice dx={dx:g}",
                        "dx": dx, "rescaling": cs.rescaling})
    write_manifest(out, "converge", {"config": ns.config, "dx_list": ns.dx_list},
                   None, time.perf_counter() - t0)
    orders = res.observed_orders()
    print("dx -> sup error:", {f"{d:g}": f"{e:.3e}" for d, e in zip(res.dx, res.sup_error)},
          "observed orders:", [f"{o:.2f}" for o in orders])
    return EXIT_OK


def cmd_front(ns) -> int:
    t0 = time.perf_counter()
    scenario = load_scenario(ns.config)
    out = _out_dir(ns)
    times = _float_list(ns.times)
    fs = front_statistics(scenario, ns.replications, times, seed=ns.seed)
    rows = []
    for rep in range(fs.replications):
        for ti, t in enumerate(fs.times):
            rows.append((t, rep, int(fs.fronts[rep, ti])))
    write_csv(out / "front.csv", ["t", "replication", "front_k"], rows,
              meta={"kind": "front", "replications": fs.replications, "seed": fs.seed,
                    "config": ns.config, "window_hi": fs.window_hi,
                    "saturated": fs.saturated})
    summary = {"times": list(map(float, fs.times)), "saturated": fs.saturated,
               "mean": [fs.mean(ti) for ti in range(len(fs.times))],
               "variance": [fs.variance(ti) for ti in range(len(fs.times))],
               "none_count": [fs.none_count(ti) for ti in range(len(fs.times))]}
    (out / "front_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    write_manifest(out, "front", {"config": ns.config, "replications": ns.replications,
                                  "times": ns.times}, ns.seed, time.perf_counter() - t0)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and dispatch
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sirbass",
                                 description="lattice epidemic solvers and simulators")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--config", required=True, help="scenario config (TOML)")
        p.add_argument("--out", required=True, help="output directory")
        if seed:
            p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("simulate", help="Monte Carlo marginal estimates")
    common(p)
    p.add_argument("--replications", type=int, default=10000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--times", help="comma-separated output times (default: scenario grid)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("solve", help="exact deterministic marginals")
    common(p, seed=False)
    p.add_argument("--h", type=float, default=None, help="integrator step")
    p.add_argument("--method", default="auto",
                   choices=["auto", "bass", "sir", "two-sided", "two-sided-closed"])
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("formula", help="closed-form table")
    p.add_argument("--id", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.add_argument("--k-list", help="comma-separated node indices")
    p.add_argument("--t-list", help="comma-separated times")
    p.set_defaults(func=cmd_formula)

    p = sub.add_parser("compare", help="run two methods on one scenario and gate the gap")
    common(p)
    p.add_argument("--method-a", required=True,
                   choices=["exact", "mc", "closed", "two-sided-closed"])
    p.add_argument("--method-b", required=True,
                   choices=["exact", "mc", "closed", "two-sided-closed"])
    p.add_argument("--replications", type=int, default=10000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--times", help="output times for the MC side (default: scenario grid)")
    p.add_argument("--tolerance", type=float, default=None,
                   help="stderr units when MC is involved, absolute otherwise")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("converge", help="lattice-to-limit convergence study")
    common(p, seed=False)
    p.add_argument("--dx-list", help="comma-separated spacings (overrides config)")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("front", help="epidemic front statistics")
    common(p)
    p.add_argument("--replications", type=int, default=10000)
    p.add_argument("--times", required=True, help="comma-separated query times")
    p.set_defaults(func=cmd_front)

    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except (ValidationError, FieldError, SolverError, StepSizeError, CFLError,
            OracleError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
