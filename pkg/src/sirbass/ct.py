"""Continuous-time (event-driven) simulation engine.

For time-constant rates the engine is the exact direct stochastic simulation
algorithm: exponential waiting time for the total rate, categorical choice of
the firing node, local rate updates.  Time-varying rates are handled by
per-node thinning against descriptor upper bounds precomputed on the horizon,
which keeps time-varying point sources statistically exact.

Marginal laws agree with the dt -> 0 limit of the discrete-time engine; the
test suite checks the two engines against each other.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .mc import _node_tables, simulation_window
from .scenario import Scenario, ValidationError

__all__ = ["Trajectory", "simulate_ct", "estimate_marginals_ct"]


@dataclass
class Trajectory:
    """Event-timed sample path: events are (time, node, new_state), time-ordered."""

    nodes: np.ndarray
    initial: np.ndarray
    events: list = field(default_factory=list)

    def states_at(self, t: float) -> np.ndarray:
        states = self.initial.copy()
        lo = int(self.nodes[0])
        for ev_t, k, s in self.events:
            if ev_t > t:
                break
            states[k - lo] = s
        return states

    def infection_times(self) -> dict[int, float]:
        return {k: t for t, k, s in self.events if s == 1}


def _constant_rates(scenario: Scenario) -> bool:
    f = scenario.params
    return all(rf.time.is_constant for rf in (f.p, f.qL, f.qR, f.r))


def simulate_ct(scenario: Scenario, rng: np.random.Generator,
                t_end: float | None = None) -> Trajectory:
    """One statistically exact continuous-time trajectory up to t_end (default horizon)."""
    if not scenario.validated:
        raise ValidationError("scenario must pass validate_scenario before simulating")
    T = scenario.horizon if t_end is None else float(t_end)
    nodes, _ = simulation_window(scenario)
    sp, sql, sqr, sr, S0, I0 = _node_tables(scenario, nodes)

    u0 = rng.random(len(nodes))
    states = np.full(len(nodes), 2, dtype=np.uint8)
    states[u0 < S0 + I0] = 1
    states[u0 < S0] = 0

    traj = Trajectory(nodes=nodes, initial=states.copy())
    if _constant_rates(scenario):
        f = scenario.params
        _run_direct(
            states, traj, rng, T, int(nodes[0]),
            sp * f.p.time.value, sql * f.qL.time.value,
            sqr * f.qR.time.value, sr * f.r.time.value,
        )
    else:
        _run_thinning(states, traj, rng, T, scenario, nodes, sp, sql, sqr, sr)
    return traj


def _run_direct(states, traj, rng, T, k_lo, p, ql, qr, r):
    n = len(states)

    def node_rate(j: int) -> float:
        s = states[j]
        if s == 0:
            lam = p[j]
            if j > 0 and states[j - 1] == 1:
                lam += ql[j]
            if j + 1 < n and states[j + 1] == 1:
                lam += qr[j]
            return lam
        if s == 1:
            return r[j]
        return 0.0

    rates = np.array([node_rate(j) for j in range(n)])
    total = rates.sum()
    t = 0.0
    while total > 1e-300:
        t += rng.exponential(1.0 / total)
        if t >= T:
            break
        j = int(np.searchsorted(np.cumsum(rates), rng.random() * total))
        j = min(j, n - 1)
        if states[j] == 0:
            states[j] = 1
        else:
            states[j] = 2
        traj.events.append((t, k_lo + j, int(states[j])))
        for jj in (j - 1, j, j + 1):
            if 0 <= jj < n:
                rates[jj] = node_rate(jj)
        total = rates.sum()


def _run_thinning(states, traj, rng, T, scenario, nodes, sp, sql, sqr, sr):
    f = scenario.params
    n = len(states)
    k_lo = int(nodes[0])
    inf_bound = (sp * f.p.time.max_on(T) + sql * f.qL.time.max_on(T)
                 + sqr * f.qR.time.max_on(T))
    rec_bound = sr * f.r.time.max_on(T)
    if not np.all(np.isfinite(inf_bound)) or not np.all(np.isfinite(rec_bound)):
        raise ValidationError("unbounded rate descriptor on the horizon; cannot thin")

    def true_rate(j: int, t: float) -> float:
        s = states[j]
        if s == 0:
            lam = sp[j] * f.p.time.at(t)
            if j > 0 and states[j - 1] == 1:
                lam += sql[j] * f.qL.time.at(t)
            if j + 1 < n and states[j + 1] == 1:
                lam += sqr[j] * f.qR.time.at(t)
            return lam
        if s == 1:
            return sr[j] * f.r.time.at(t)
        return 0.0

    def bound(j: int) -> float:
        return inf_bound[j] if states[j] == 0 else (rec_bound[j] if states[j] == 1 else 0.0)

    version = np.zeros(n, dtype=np.int64)
    heap: list[tuple[float, int, int]] = []

    def push(j: int, now: float):
        b = bound(j)
        if b > 0.0:
            heapq.heappush(heap, (now + rng.exponential(1.0 / b), j, int(version[j])))

    for j in range(n):
        push(j, 0.0)

    while heap:
        t_cand, j, ver = heapq.heappop(heap)
        if t_cand >= T:
            break
        if ver != version[j]:
            continue
        b = bound(j)
        if rng.random() * b < true_rate(j, t_cand):
            states[j] = 1 if states[j] == 0 else 2
            version[j] += 1
            traj.events.append((t_cand, k_lo + j, int(states[j])))
            push(j, t_cand)
        else:
            push(j, t_cand)


def estimate_marginals_ct(scenario: Scenario, replications: int, times, seed: int = 0):
    """Monte Carlo state frequencies from the continuous-time engine.

    Returns (mean, stderr) with shape (3, n_window_nodes, len(times)); the
    replication RNG streams are derived from (seed, replication index).
    """
    times = np.asarray(times, dtype=float)
    _, obs = simulation_window(scenario)
    K = scenario.lattice.n_nodes
    counts = np.zeros((3, K, len(times)), dtype=np.int64)
    for rep in range(replications):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(rep,))))
        traj = simulate_ct(scenario, rng, t_end=float(times.max()))
        for ti, t in enumerate(times):
            window = traj.states_at(t)[obs]
            for s in range(3):
                counts[s, :, ti] += window == s
    mean = counts / float(replications)
    stderr = np.sqrt(mean * (1.0 - mean) / replications)
    return mean, stderr
