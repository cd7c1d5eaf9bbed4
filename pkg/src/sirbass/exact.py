"""Exact deterministic lattice solvers.

The one-sided marginal [S_k](t) obeys a triangular ODE system: node k's
equation involves only node k-1, the survival factor e^{-int_0^t p_k} and,
with recovery, a memory term that reduces to an extra per-node state.  The
two-sided problem factorizes into two one-sided passes combined through the
product identity, so every solve here is a fixed-step RK4 integration of a
coupled vector ODE with global error O(h^4).

Open boundaries are closed exactly: on a semi-infinite line node 0 is a true
boundary (its only transition channel is the source term), while an infinite
line is extended constantly beyond the window and the upstream neighbor of
the window edge becomes a self-consistent translation-invariant ghost node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import RateField
from .scenario import MarginalSeries, PairMarginalSeries, Scenario

__all__ = [
    "SolverConfig",
    "SolverError",
    "AggregateSeries",
    "solve_bass_one_sided",
    "solve_sir_bass_one_sided",
    "solve_two_sided",
    "solve_two_sided_closed",
    "solve_marginals",
    "pair_marginal_ss",
    "solve_aggregate",
]

_EPS = 1e-15  # rates below this count as identically zero


class SolverError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    """Fixed-step integrator settings.

    h = None picks the default 1e-3 * min(1, 1/max_rate); the step is then
    snapped so output times and parameter switch times land on step
    boundaries.
    """

    h: float | None = None

    def step_for(self, scenario: Scenario) -> float:
        if self.h is not None:
            if self.h <= 0:
                raise SolverError(f"integrator step must be positive, got {self.h}")
            return self.h
        max_rate = scenario.max_total_rate()
        return 1e-3 * min(1.0, 1.0 / max(max_rate, _EPS))


DEFAULT_CONFIG = SolverConfig()


def _require_validated(scenario: Scenario):
    if not scenario.validated:
        raise SolverError("scenario must pass validate_scenario before solving")


def has_recovery(scenario: Scenario) -> bool:
    """True when the recovery channel is active (r > 0 somewhere or R0 > 0)."""
    lat = scenario.lattice
    return (
        scenario.params.r.max_on(lat.nodes, scenario.horizon, lat.dx) > _EPS
        or float(scenario.init.R0.max(initial=0.0)) > _EPS
    )


def _ratio_time_independent(tr, tq) -> bool:
    """True when r(t)/q(t) carries no time dependence (per temporal profiles)."""
    if tr.kind == "const" and tq.kind == "const":
        return True
    if tr.kind == "const" and tr.value == 0.0:
        return True
    if tr.kind == "piecewise" and all(v == 0.0 for v in tr.values):
        return True
    if tr.kind == "piecewise" and tq.kind == "piecewise" and tr.times == tq.times:
        if any(v == 0.0 for v in tq.values):
            return False
        ratios = [a / b for a, b in zip(tr.values, tq.values)]
        return all(abs(x - ratios[0]) < 1e-15 for x in ratios)
    if tr.kind == "piecewise" and tq.kind == "const":
        return all(v == tr.values[0] for v in tr.values)
    if tr.kind == "const" and tq.kind == "piecewise":
        return tr.value == 0.0
    return False


# ---------------------------------------------------------------------------
# one-sided pass: node data in upstream -> downstream order
# ---------------------------------------------------------------------------


class _Pass:
    """Per-node coefficient tables for one directed sweep of the lattice.

    direction +1 sweeps left-to-right with contagion q_field = qL; -1 sweeps
    right-to-left with qR (the two-sided decomposition's second leg).  Index 0
    is the most upstream entry: a physical boundary node, or a ghost that
    references itself as its own upstream neighbor (translation-invariant
    constant extension of an infinite line).
    """

    def __init__(self, scenario: Scenario, q_field: RateField, direction: int):
        lat = scenario.lattice
        k_lo, k_hi = lat.window
        if direction == +1:
            nodes = np.arange(k_lo, k_hi + 1)
            self.ghost = lat.topology == "infinite"
        else:
            nodes = np.arange(k_hi, k_lo - 1, -1)
            self.ghost = lat.topology != "finite"
        self.direction = direction

        f = scenario.params
        dx = lat.dx
        sp = np.asarray(f.p.space.at_nodes(nodes, dx), dtype=float)
        sq = np.asarray(q_field.space.at_nodes(nodes, dx), dtype=float)
        sr = np.asarray(f.r.space.at_nodes(nodes, dx), dtype=float)
        S0 = np.array([scenario.init.at(int(k))[0] for k in nodes])
        R0 = np.array([scenario.init.at(int(k))[2] for k in nodes])

        if self.ghost:
            sp = np.concatenate([sp[:1], sp])
            sq = np.concatenate([sq[:1], sq])
            sr = np.concatenate([sr[:1], sr])
            S0 = np.concatenate([S0[:1], S0])
            R0 = np.concatenate([R0[:1], R0])
            nodes = np.concatenate([nodes[:1], nodes])

        self.nodes = nodes
        self.n = len(nodes)
        self.space_p, self.space_q, self.space_r = sp, sq, sr
        self.S0, self.R0 = S0, R0
        self.tp, self.tq, self.tr = f.p.time, q_field.time, f.r.time

        # a physical boundary node transitions through its source term only
        self.has_upstream = np.ones(self.n, dtype=bool)
        if not self.ghost:
            self.has_upstream[0] = False

        self.R0_prev = np.empty(self.n)
        self.R0_prev[1:] = R0[:-1]
        self.R0_prev[0] = R0[0]

        with np.errstate(divide="ignore", invalid="ignore"):
            self.ratio_space = np.where(sq > _EPS, sr / np.where(sq > _EPS, sq, 1.0), 0.0)
        self._bad_ratio = (sr > _EPS) & (sq <= _EPS)

    @property
    def with_memory(self) -> bool:
        return not _ratio_time_independent(self.tr, self.tq)

    def check_sir_preconditions(self, scenario: Scenario):
        if np.any(self._bad_ratio):
            k = int(self.nodes[np.argmax(self._bad_ratio)])
            raise SolverError(f"q = 0 at node {k} (t = 0) where recovery is active; need q > 0")
        if self.space_r.max(initial=0.0) > _EPS and self.tq.min_on(scenario.horizon) <= 0.0:
            raise SolverError(
                "q(t) reaches 0 on the horizon while recovery is active; need q > 0"
            )
        if self.with_memory and (self.tr.kind == "expdecay" or self.tq.kind == "expdecay"):
            raise SolverError(
                "time-varying r/q is supported for piecewise-constant profiles only"
            )

    def ratio_time(self, t: float, left: bool = False) -> float:
        trv = self.tr.at_left(t) if left else self.tr.at(t)
        if trv == 0.0:
            return 0.0
        tqv = self.tq.at_left(t) if left else self.tq.at(t)
        return trv / tqv

    def memory0(self) -> np.ndarray:
        """Initial value of the recovered-neighbor state a_k = [S_k & R_{k-1}] + (r/q)[S_k]."""
        return self.S0 * (self.ratio_space * self.ratio_time(0.0) + self.R0_prev)

    def rhs(self, with_memory: bool):
        """RHS closure; state layout [S (n), R (n)] plus [a (n)] with memory.

        The susceptible balance is dS = -(p+q+r) S + q e^{-int p} S0 S_prev
        + q a, with a = (r/q) S + [S & R_{k-1}].  For a time-independent ratio
        a(t) = e^{-int p} S0 ((r/q) + R0_prev) in closed form; otherwise a is
        carried as a state with da = -p a between ratio switches (the ratio's
        piecewise jumps enter through memory_jump).
        """
        up = self.has_upstream
        n = self.n
        sp, sq, sr = self.space_p, self.space_q, self.space_r
        S0, R0_prev = self.S0, self.R0_prev
        ratio0 = self.ratio_space * self.ratio_time(0.0)
        tp, tq, tr = self.tp, self.tq, self.tr
        has_r = sr.max(initial=0.0) > _EPS or float(self.R0.max(initial=0.0)) > _EPS

        def rhs(t, y):
            S = y[:n]
            R = y[n:2 * n]
            p = sp * tp.at(t)
            r = sr * tr.at(t)
            q = np.where(up, sq * tq.at(t), 0.0)
            r_eff = np.where(up, r, 0.0)
            E = np.exp(-sp * tp.integral(t))
            S_prev = np.empty(n)
            S_prev[1:] = S[:-1]
            S_prev[0] = S[0]  # ghost self-reference; inert at boundaries (q[0] = 0)
            if with_memory:
                a = y[2 * n:]
            elif has_r:
                a = E * S0 * (ratio0 + R0_prev)
            else:
                a = 0.0
            dS = -(p + q + r_eff) * S + q * E * S0 * S_prev + q * a
            out = np.empty_like(y)
            out[:n] = dS
            out[n:2 * n] = r * (1.0 - S - R)
            if with_memory:
                out[2 * n:] = -p * a  # (r/q)' = 0 between switches
            return out

        return rhs

    def memory_jump(self):
        """State adjustment at a ratio switch: a += d(r/q)(t) * S(t)."""
        n = self.n

        def jump(t, y):
            d_ratio = self.ratio_time(t) - self.ratio_time(t, left=True)
            if d_ratio == 0.0:
                return y
            y = y.copy()
            y[2 * n:] += self.ratio_space * d_ratio * y[:n]
            return y

        return jump

    def window_slice(self, scenario: Scenario) -> np.ndarray:
        """Pass indices of the observation window nodes, in window order."""
        k_lo, k_hi = scenario.lattice.window
        ks = np.arange(k_lo, k_hi + 1)
        offset = 1 if self.ghost else 0
        if self.direction == +1:
            return offset + (ks - k_lo)
        return offset + (k_hi - ks)


# ---------------------------------------------------------------------------
# RK4 driver
# ---------------------------------------------------------------------------


def _integrate(rhs, y0: np.ndarray, scenario: Scenario, cfg: SolverConfig, jump=None):
    """Fixed-step RK4 over [0, T], sampling the state on the output grid.

    Output times and parameter switch times are forced onto step boundaries;
    `jump` is applied to the state at switch times (memory-integral jumps for
    piecewise r/q ratios).
    """
    out_times = scenario.output_times
    switches = np.asarray(scenario.params.switch_times(scenario.horizon), dtype=float)
    breaks = np.unique(np.concatenate([out_times, switches]))
    h = cfg.step_for(scenario)

    y = np.asarray(y0, dtype=float).copy()
    samples = np.empty((len(out_times),) + y.shape)
    samples[0] = y
    next_out = 1
    for a, b in zip(breaks[:-1], breaks[1:]):
        n_steps = max(1, int(math.ceil((b - a) / h - 1e-9)))
        step = (b - a) / n_steps
        for i in range(n_steps):
            t = a + i * step
            # the final stage backs off a hair so a step ending exactly on a
            # parameter switch samples the left limit of the coefficients
            t_end = t + step - 1e-12 * max(1.0, abs(t + step))
            k1 = rhs(t, y)
            k2 = rhs(t + 0.5 * step, y + (0.5 * step) * k1)
            k3 = rhs(t + 0.5 * step, y + (0.5 * step) * k2)
            k4 = rhs(t_end, y + step * k3)
            y = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if jump is not None and switches.size and np.any(np.abs(switches - b) < 1e-12):
            y = jump(b, y)
        if next_out < len(out_times) and abs(b - out_times[next_out]) < 1e-12:
            samples[next_out] = y
            next_out += 1
    if next_out != len(out_times):
        raise SolverError("integration grid failed to cover every output time")
    return out_times, samples


def _solve_pass(scenario: Scenario, pss: _Pass, cfg: SolverConfig, with_recovery: bool):
    """Integrate one directed sweep; returns (times, S, R, a) over pass nodes.

    a_k(t) = (r_k/q_k)(t) [S_k](t) + [S_k & R_{k-1}](t), the recovered-neighbor
    auxiliary state (evaluated in closed form when r/q is time-independent).
    """
    with_memory = with_recovery and pss.with_memory
    if with_recovery:
        pss.check_sir_preconditions(scenario)
    n = pss.n
    parts = [pss.S0, pss.R0]
    if with_memory:
        parts.append(pss.memory0())
    y0 = np.concatenate(parts)
    jump = pss.memory_jump() if with_memory else None
    times, samples = _integrate(pss.rhs(with_memory), y0, scenario, cfg, jump=jump)
    S = samples[:, :n].T
    R = samples[:, n:2 * n].T
    if with_memory:
        a = samples[:, 2 * n:].T
    else:
        E = np.exp(-np.outer(pss.space_p, [pss.tp.integral(t) for t in times]))
        ratio0 = pss.ratio_space * pss.ratio_time(0.0)
        a = E * (pss.S0 * (ratio0 + pss.R0_prev))[:, None]
    return times, S, R, a


# ---------------------------------------------------------------------------
# one-sided solves
# ---------------------------------------------------------------------------


def solve_bass_one_sided(scenario: Scenario, cfg: SolverConfig = DEFAULT_CONFIG) -> MarginalSeries:
    """Exact marginals of the one-sided lattice without recovery; [I_k] = 1 - [S_k].

    Raises if recovery is present (use solve_sir_bass_one_sided).
    """
    _require_validated(scenario)
    if not scenario.lattice.one_sided:
        raise SolverError("one-sided solver on a two-sided lattice; use solve_two_sided")
    if has_recovery(scenario):
        raise SolverError("recovery present; use solve_sir_bass_one_sided")

    pss = _Pass(scenario, scenario.params.qL, +1)
    times, S, _, _ = _solve_pass(scenario, pss, cfg, with_recovery=False)
    S_w = S[pss.window_slice(scenario)]
    return MarginalSeries(times=times, nodes=scenario.nodes, S=S_w, I=1.0 - S_w,
                          R=np.zeros_like(S_w))


def solve_sir_bass_one_sided(
    scenario: Scenario, cfg: SolverConfig = DEFAULT_CONFIG
) -> tuple[MarginalSeries, PairMarginalSeries]:
    """Exact marginals of the one-sided lattice with recovery.

    Returns the node marginals plus the adjacent-pair joints
    P(S_k & S_{k-1}) (closure identity) and P(S_k & R_{k-1}) (memory relation)
    for every in-window pair.
    """
    _require_validated(scenario)
    if not scenario.lattice.one_sided:
        raise SolverError("one-sided solver on a two-sided lattice; use solve_two_sided")

    pss = _Pass(scenario, scenario.params.qL, +1)
    times, S, R, a = _solve_pass(scenario, pss, cfg, with_recovery=True)
    idx = pss.window_slice(scenario)
    S_w, R_w = S[idx], R[idx]
    series = MarginalSeries(times=times, nodes=scenario.nodes, S=S_w,
                            I=1.0 - S_w - R_w, R=R_w)

    k_lo, k_hi = scenario.lattice.window
    pair_ks = np.arange(k_lo + 1, k_hi + 1)
    ss = np.empty((len(pair_ks), len(times)))
    sr = np.empty_like(ss)
    p_int = np.array([pss.tp.integral(t) for t in times])
    ratio_t = np.array([pss.ratio_time(t) for t in times])
    for j, _k in enumerate(pair_ks):
        i = int(idx[j + 1])
        ss[j] = np.exp(-pss.space_p[i] * p_int) * pss.S0[i] * S[i - 1]
        # [S_k & R_{k-1}] = a_k - (r_k/q_k)(t) [S_k]
        sr[j] = a[i] - pss.ratio_space[i] * ratio_t * S[i]
    pairs = PairMarginalSeries(times=times, pairs_k=pair_ks, ss=ss, sr=sr)
    return series, pairs


def pair_marginal_ss(k: int, solution: MarginalSeries, scenario: Scenario) -> np.ndarray:
    """Closure identity P(S_k & S_{k-1})(t) = e^{-int_0^t p_k} [S_k^0] [S_{k-1}](t)."""
    _require_validated(scenario)
    S_prev = solution.at(k - 1)[0]
    tp = scenario.params.p.time
    sp = float(scenario.params.p.space.at_nodes(np.asarray([k]), scenario.lattice.dx)[0])
    E = np.exp(-sp * np.array([tp.integral(t) for t in solution.times]))
    return E * scenario.init.at(k)[0] * S_prev


# ---------------------------------------------------------------------------
# two-sided solves
# ---------------------------------------------------------------------------


def solve_two_sided(scenario: Scenario, cfg: SolverConfig = DEFAULT_CONFIG) -> MarginalSeries:
    """Exact two-sided marginals via the one-sided product decomposition.

    Runs the left-contagion (qL, left-to-right) and right-contagion (qR,
    right-to-left) one-sided passes jointly and combines
    [S_k] = [S_k^L][S_k^R] / ([S_k^0] e^{-int p_k}), with [S_k] = 0 whenever
    [S_k^0] = 0; [R_k] is integrated alongside from the combined [S_k].
    """
    _require_validated(scenario)
    if scenario.lattice.one_sided:
        raise SolverError("two-sided solver on a one-sided lattice")

    with_recovery = has_recovery(scenario)
    pL = _Pass(scenario, scenario.params.qL, +1)
    pR = _Pass(scenario, scenario.params.qR, -1)
    memL = memR = False
    if with_recovery:
        pL.check_sir_preconditions(scenario)
        pR.check_sir_preconditions(scenario)
        memL, memR = pL.with_memory, pR.with_memory

    rhsL = pL.rhs(with_memory=memL)
    rhsR = pR.rhs(with_memory=memR)
    nL = (3 if memL else 2) * pL.n
    nR = (3 if memR else 2) * pR.n
    idxL = pL.window_slice(scenario)
    idxR = pR.window_slice(scenario)
    nodes = scenario.nodes
    dx = scenario.lattice.dx
    sp_w = scenario.params.p.space.at_nodes(nodes, dx)
    sr_w = scenario.params.r.space.at_nodes(nodes, dx)
    tp, tr = scenario.params.p.time, scenario.params.r.time
    S0_w = scenario.init.S0

    def combined_S(t, y):
        SL = y[:pL.n][idxL]
        SR = y[nL:nL + pR.n][idxR]
        denom = S0_w * np.exp(-sp_w * tp.integral(t))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(S0_w > 0.0, SL * SR / np.where(denom > 0.0, denom, 1.0), 0.0)

    def rhs(t, y):
        out = np.empty_like(y)
        out[:nL] = rhsL(t, y[:nL])
        out[nL:nL + nR] = rhsR(t, y[nL:nL + nR])
        S = combined_S(t, y)
        R = y[nL + nR:]
        out[nL + nR:] = sr_w * tr.at(t) * (1.0 - S - R)
        return out

    jump = None
    if memL or memR:
        jumpL = pL.memory_jump() if memL else None
        jumpR = pR.memory_jump() if memR else None

        def jump(t, y):
            y = y.copy()
            if jumpL is not None:
                y[:nL] = jumpL(t, y[:nL])
            if jumpR is not None:
                y[nL:nL + nR] = jumpR(t, y[nL:nL + nR])
            return y

    y0 = np.concatenate(
        [pL.S0, pL.R0] + ([pL.memory0()] if memL else [])
        + [pR.S0, pR.R0] + ([pR.memory0()] if memR else [])
        + [scenario.init.R0]
    )
    times, samples = _integrate(rhs, y0, scenario, cfg, jump=jump)
    S = np.stack([combined_S(t, samples[i]) for i, t in enumerate(times)], axis=1)
    R = samples[:, nL + nR:].T
    return MarginalSeries(times=times, nodes=nodes, S=S, I=1.0 - S - R, R=R)


def _closed_buffer(scenario: Scenario) -> int:
    """Truncation buffer for the closed pair system on open-ended lattices.

    Contagion influence decays superexponentially with hop count, so
    q*T + 10*sqrt(q*T) + 10 extra nodes push the truncation error far below
    integrator accuracy.
    """
    lat = scenario.lattice
    zmax = scenario.horizon * max(
        scenario.params.qL.max_on(lat.nodes, scenario.horizon, lat.dx),
        scenario.params.qR.max_on(lat.nodes, scenario.horizon, lat.dx),
    )
    return int(math.ceil(zmax + 10.0 * math.sqrt(zmax + 1.0) + 10.0))


def solve_two_sided_closed(
    scenario: Scenario, cfg: SolverConfig = DEFAULT_CONFIG
) -> tuple[MarginalSeries, PairMarginalSeries]:
    """No-recovery two-sided solve via the closed ([S_k], [S_{k-1} & S_k]) pair system.

    Integrates the pair ODEs directly, independently of solve_two_sided; the
    agreement of the two routes is a cross-oracle exercised by the tests.
    """
    _require_validated(scenario)
    if scenario.lattice.one_sided:
        raise SolverError("two-sided solver on a one-sided lattice")
    if has_recovery(scenario):
        raise SolverError("closed two-sided system requires no recovery (r = 0, R0 = 0)")

    lat = scenario.lattice
    k_lo, k_hi = lat.window
    buf = _closed_buffer(scenario)
    lo = k_lo if lat.topology == "finite" else max(0, k_lo - buf) if lat.topology == "semi-infinite" else k_lo - buf
    hi = k_hi if lat.topology == "finite" else k_hi + buf
    nodes = np.arange(lo, hi + 1)
    n = len(nodes)
    f = scenario.params

    clip = np.clip(nodes, k_lo, k_hi)  # constant extension of fields and init
    sp = f.p.space.at_nodes(clip, lat.dx)
    sqL = f.qL.space.at_nodes(clip, lat.dx)
    sqR = f.qR.space.at_nodes(clip, lat.dx)
    S0 = np.array([scenario.init.at(int(k))[0] for k in clip])
    tp, tqL, tqR = f.p.time, f.qL.time, f.qR.time

    # truncated ends behave like physical boundaries; the buffer absorbs the error
    maskL = np.ones(n)
    maskL[0] = 0.0
    maskR = np.ones(n)
    maskR[-1] = 0.0

    def rhs(t, y):
        S = y[:n]
        P = y[n:]  # P[j] = P(S_j & S_{j+1}), node-indexed from `lo`
        qL = sqL * tqL.at(t) * maskL
        qR = sqR * tqR.at(t) * maskR
        p = sp * tp.at(t)

        P_left = np.concatenate([[0.0], P])    # pair on the left of node j
        P_right = np.concatenate([P, [0.0]])   # pair on the right of node j
        live = S > 1e-300
        quot = np.where(live, P_left * P_right / np.where(live, S, 1.0), 0.0)

        # contagion pressure on a susceptible node comes from the infected
        # complement of its neighbor: q * (S - pair)
        dS = -(p + qL + qR) * S + qL * P_left + qR * P_right
        dP = (
            -(p[:-1] + p[1:] + qL[:-1] + qR[1:]) * P
            + qR[1:] * quot[1:]
            + qL[:-1] * quot[:-1]
        )
        return np.concatenate([dS, dP])

    y0 = np.concatenate([S0, S0[:-1] * S0[1:]])
    times, samples = _integrate(rhs, y0, scenario, cfg)

    sl = slice(k_lo - lo, k_hi - lo + 1)
    S = samples[:, :n].T[sl]
    series = MarginalSeries(times=times, nodes=scenario.nodes, S=S, I=1.0 - S,
                            R=np.zeros_like(S))
    pair_ks = np.arange(k_lo + 1, k_hi + 1)
    ss = samples[:, n:].T[(pair_ks - 1) - lo]
    return series, PairMarginalSeries(times=times, pairs_k=pair_ks, ss=ss)


def solve_marginals(scenario: Scenario, cfg: SolverConfig = DEFAULT_CONFIG) -> MarginalSeries:
    """Dispatch to the exact solver matching the scenario's structure."""
    if scenario.lattice.one_sided:
        if has_recovery(scenario):
            return solve_sir_bass_one_sided(scenario, cfg)[0]
        return solve_bass_one_sided(scenario, cfg)
    return solve_two_sided(scenario, cfg)


# ---------------------------------------------------------------------------
# aggregate (complete graph) model
# ---------------------------------------------------------------------------


@dataclass
class AggregateSeries:
    times: np.ndarray
    S: np.ndarray
    I: np.ndarray
    R: np.ndarray


def solve_aggregate(p: float, q: float, r: float, init, horizon: float,
                    grid_dt: float, h: float | None = None) -> AggregateSeries:
    """Aggregate model S' = -S(p+qI), I' = S(p+qI) - rI, R' = rI (RK4, fixed step)."""
    S0, I0, R0 = (float(v) for v in init)
    if min(p, q, r) < 0:
        raise SolverError("aggregate rates must be nonnegative")
    if abs(S0 + I0 + R0 - 1.0) > 1e-9 or min(S0, I0, R0) < 0:
        raise SolverError("aggregate init must be probabilities summing to 1")

    n_out = int(round(horizon / grid_dt))
    times = np.linspace(0.0, n_out * grid_dt, n_out + 1)
    h = h or 1e-3 * min(1.0, 1.0 / max(p + q + r, _EPS))

    def rhs(y):
        S, I, _R = y
        force = S * (p + q * I)
        return np.array([-force, force - r * I, r * I])

    y = np.array([S0, I0, R0])
    out = np.empty((n_out + 1, 3))
    out[0] = y
    for j in range(n_out):
        a, b = times[j], times[j + 1]
        steps = max(1, int(math.ceil((b - a) / h - 1e-9)))
        step = (b - a) / steps
        for _ in range(steps):
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * step * k1)
            k3 = rhs(y + 0.5 * step * k2)
            k4 = rhs(y + step * k3)
            y = y + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[j + 1] = y
    return AggregateSeries(times=times, S=out[:, 0], I=out[:, 1], R=out[:, 2])
