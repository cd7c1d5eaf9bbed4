"""Bind a scenario to its closed-form solution, when one exists.

Used by the compare command (and tests) to pit solver or Monte Carlo output
against the independent formula layer.  Components without a closed form are
filled with NaN and skipped by comparisons.
"""

from __future__ import annotations

import numpy as np

from . import formulas as F
from .fields import TimeProfile
from .scenario import MarginalSeries, Scenario

__all__ = ["closed_form_series", "OracleError"]


class OracleError(ValueError):
    """The scenario does not match any closed-form family."""


def _const_rate(field, nodes, dx, horizon):
    """The scalar value of a space-and-time-constant rate, else None."""
    vals = field.space.at_nodes(nodes, dx)
    if vals.size and (vals.max() - vals.min()) > 1e-15:
        return None
    if not field.time.is_constant:
        return None
    return float(vals[0]) * field.time.at(0.0) if vals.size else 0.0


def _uniform_init(scenario):
    S0, I0, R0 = scenario.init.S0, scenario.init.I0, scenario.init.R0
    if np.ptp(S0) < 1e-15 and np.ptp(I0) < 1e-15 and np.ptp(R0) < 1e-15:
        return float(S0[0]), float(I0[0]), float(R0[0])
    return None


def _patient_zero_init(scenario):
    S0, I0 = scenario.init.S0, scenario.init.I0
    if S0[0] == 0.0 and I0[0] == 1.0 and np.all(S0[1:] == 1.0):
        return True
    return False


def _point_source_profile(scenario) -> TimeProfile | None:
    """p as a single-node source at k = 0: table space profile, one nonzero entry."""
    p = scenario.params.p
    vals = p.space.at_nodes(scenario.nodes, scenario.lattice.dx)
    if vals.size < 2 or np.any(vals[1:] != 0.0) or vals[0] <= 0.0:
        return None
    amp = float(vals[0])
    t = p.time
    if t.kind == "const":
        return TimeProfile.const(amp * t.value)
    if t.kind == "expdecay":
        return TimeProfile.expdecay(amp * t.amplitude, t.rate)
    if t.kind == "piecewise":
        return TimeProfile.piecewise(t.times, [amp * v for v in t.values])
    return None


def closed_form_series(scenario: Scenario) -> MarginalSeries:
    """Evaluate the closed form matching the scenario onto its output grid.

    Recognized families: homogeneous Bass / SIR-Bass (one- and two-sided),
    patient-zero Bass / SIR / two-sided Bass, point sources (Bass and SIR).
    """
    lat = scenario.lattice
    nodes = scenario.nodes
    times = scenario.output_times
    dx, T = lat.dx, scenario.horizon
    f = scenario.params
    q_l = _const_rate(f.qL, nodes, dx, T)
    q_r = _const_rate(f.qR, nodes, dx, T)
    r = _const_rate(f.r, nodes, dx, T)
    p = _const_rate(f.p, nodes, dx, T)

    K, nt = len(nodes), len(times)
    S = np.empty((K, nt))
    I = np.full((K, nt), np.nan)
    R = np.full((K, nt), np.nan)

    uni = _uniform_init(scenario)
    if uni is not None and None not in (p, q_l, q_r, r):
        s0, _i0, r0 = uni
        if lat.one_sided and r == 0.0 and r0 == 0.0:
            row = np.array([F.homogeneous_bass(s0, p, q_l, t) for t in times])
            S[:], I[:], R[:] = row, 1.0 - row, 0.0
            return MarginalSeries(times, nodes, S, I, R)
        if lat.one_sided:
            vals = [F.homogeneous_sir_bass(s0, r0, p, q_l, r, t) for t in times]
            S[:] = [v[0] for v in vals]
            R[:] = [v[1] for v in vals]
            I[:] = 1.0 - S - R
            return MarginalSeries(times, nodes, S, I, R)
        if r == 0.0 and r0 == 0.0:
            row = np.array([F.two_sided_homogeneous_bass(s0, p, q_l, q_r, t) for t in times])
            S[:], I[:], R[:] = row, 1.0 - row, 0.0
            return MarginalSeries(times, nodes, S, I, R)
        raise OracleError("no closed form for two-sided homogeneous recovery scenarios")

    if (_patient_zero_init(scenario) and lat.topology == "semi-infinite"
            and None not in (p, q_l, q_r, r)):
        for i, k in enumerate(nodes):
            if k == 0:
                S[i] = 0.0
                continue
            if lat.one_sided and r == 0.0:
                S[i] = [F.patient_zero_bass(p, q_l, int(k), t) for t in times]
            elif lat.one_sided and p == 0.0:
                S[i] = [F.patient_zero_sir(q_l, r, int(k), t) for t in times]
            elif not lat.one_sided and r == 0.0:
                S[i] = [F.two_sided_patient_zero_bass(p, q_l, q_r, int(k), t) for t in times]
            else:
                raise OracleError("no closed form for this patient-zero variant")
        if r == 0.0:
            I[:], R[:] = 1.0 - S, 0.0
        return MarginalSeries(times, nodes, S, I, R)

    p0 = _point_source_profile(scenario)
    if (p0 is not None and lat.one_sided and lat.topology == "semi-infinite"
            and None not in (q_l, r) and _uniform_tail_susceptible(scenario)):
        for i, k in enumerate(nodes):
            if r == 0.0:
                S[i] = [F.point_source_bass(p0, q_l, int(k), t) for t in times]
            else:
                S[i] = [F.point_source_sir(p0, q_l, r, int(k), t) for t in times]
        if r == 0.0:
            I[:], R[:] = 1.0 - S, 0.0
        return MarginalSeries(times, nodes, S, I, R)

    raise OracleError("scenario does not match any closed-form family")


def _uniform_tail_susceptible(scenario) -> bool:
    return bool(np.all(scenario.init.S0 == 1.0))
