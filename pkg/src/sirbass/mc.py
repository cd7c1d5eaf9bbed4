"""Discrete-time Monte Carlo engine.

Simulates the conditional-independence update rule (infection probability
dt*(p + qL*1[left infected] + qR*1[right infected]) for susceptible nodes,
recovery probability r*dt for infected ones) over large ensembles and
estimates the per-node state marginals with binomial standard errors.

Reproducibility: replications are processed in fixed chunks of CHUNK_SIZE;
chunk c draws from Philox seeded with SeedSequence(seed, c).  The ensemble is
therefore bit-identical however chunks are scheduled and whichever step-kernel
backend is active.

Open-ended lattices are truncated with a superexponential safety buffer
(contagion must hop across every buffer node to reach the window, so the
truncation error is far below Monte Carlo noise at any feasible M).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import BACKEND, step_kernel
from .scenario import Scenario, ValidationError

__all__ = [
    "CHUNK_SIZE",
    "BACKEND",
    "LatticeState",
    "EnsembleEstimate",
    "StepSizeError",
    "step_discrete",
    "estimate_marginals",
    "sample_states",
]

CHUNK_SIZE = 16384


class StepSizeError(ValueError):
    pass


@dataclass
class LatticeState:
    """One realization: per-node states (0=S,1=I,2=R) plus the current time."""

    nodes: np.ndarray
    states: np.ndarray
    time: float = 0.0

    def copy(self) -> "LatticeState":
        return LatticeState(self.nodes, self.states.copy(), self.time)


@dataclass
class EnsembleEstimate:
    """Monte Carlo marginal estimates: mean[s, k, ti] and binomial stderr."""

    times: np.ndarray
    nodes: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    replications: int
    seed: int
    dt: float

    def state_mean(self, state: int, k: int) -> np.ndarray:
        return self.mean[state, int(k - self.nodes[0])]

    def state_stderr(self, state: int, k: int) -> np.ndarray:
        return self.stderr[state, int(k - self.nodes[0])]


# ---------------------------------------------------------------------------
# simulation window (observation window + truncation buffers)
# ---------------------------------------------------------------------------


def _buffer_width(scenario: Scenario) -> int:
    lat = scenario.lattice
    z = scenario.horizon * max(
        scenario.params.qL.max_on(lat.nodes, scenario.horizon, lat.dx),
        scenario.params.qR.max_on(lat.nodes, scenario.horizon, lat.dx),
    )
    return int(math.ceil(z + 10.0 * math.sqrt(z + 1.0) + 10.0))


def simulation_window(scenario: Scenario) -> tuple[np.ndarray, slice]:
    """Nodes actually simulated and the slice recovering the observation window."""
    lat = scenario.lattice
    k_lo, k_hi = lat.window
    lo, hi = k_lo, k_hi
    if lat.topology != "finite":
        buf = _buffer_width(scenario)
        if lat.topology == "infinite":
            lo = k_lo - buf
        if not lat.one_sided:
            hi = k_hi + buf
    nodes = np.arange(lo, hi + 1)
    return nodes, slice(k_lo - lo, k_hi - lo + 1)


def _node_tables(scenario: Scenario, nodes: np.ndarray):
    """Spatial rate factors and initial probabilities, constant-extended over buffers."""
    lat = scenario.lattice
    clip = np.clip(nodes, lat.k_lo, lat.k_hi)
    f = scenario.params
    sp = f.p.space.at_nodes(clip, lat.dx)
    sql = f.qL.space.at_nodes(clip, lat.dx)
    sqr = f.qR.space.at_nodes(clip, lat.dx)
    sr = f.r.space.at_nodes(clip, lat.dx)
    S0 = np.array([scenario.init.at(int(k))[0] for k in clip])
    I0 = np.array([scenario.init.at(int(k))[1] for k in clip])
    # a physical boundary node has no neighbor on the corresponding side
    ql_mask = np.ones(len(nodes))
    qr_mask = np.ones(len(nodes))
    if lat.topology != "infinite" and nodes[0] == (lat.k_lo if lat.topology == "finite" else 0):
        ql_mask[0] = 0.0
    if lat.topology == "finite":
        qr_mask[-1] = 0.0
    return sp, sql * ql_mask, sqr * qr_mask, sr, S0, I0


def _check_step_size(scenario: Scenario, nodes, sp, sql, sqr, sr, dt: float):
    T = scenario.horizon
    f = scenario.params
    inf_bound = (
        sp * f.p.time.max_on(T)
        + sql * f.qL.time.max_on(T)
        + sqr * f.qR.time.max_on(T)
    )
    k = int(np.argmax(inf_bound))
    if dt * inf_bound[k] > 1.0:
        raise StepSizeError(
            f"dt*(p+qL+qR) = {dt * inf_bound[k]:.4g} > 1 at node {int(nodes[k])}; "
            f"need dt <= {1.0 / inf_bound[k]:.4g}"
        )
    rec_bound = sr * f.r.time.max_on(T)
    k = int(np.argmax(rec_bound))
    if dt * rec_bound[k] > 1.0:
        raise StepSizeError(
            f"dt*r = {dt * rec_bound[k]:.4g} > 1 at node {int(nodes[k])}; "
            f"need dt <= {1.0 / rec_bound[k]:.4g}"
        )


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _sample_initial(rng, m: int, S0: np.ndarray, I0: np.ndarray) -> np.ndarray:
    u0 = rng.random((m, len(S0)))
    state = np.full((m, len(S0)), 2, dtype=np.uint8)
    state[u0 < S0 + I0] = 1
    state[u0 < S0] = 0
    return state


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def step_discrete(state: LatticeState, scenario: Scenario, dt: float,
                  rng: np.random.Generator) -> LatticeState:
    """One synchronous update of a single trajectory; returns the new state.

    Every node updates independently conditional on the previous full state.
    """
    if not scenario.validated:
        raise ValidationError("scenario must pass validate_scenario before simulating")
    nodes = state.nodes
    sp, sql, sqr, sr, _, _ = _node_tables(scenario, nodes)
    _check_step_size(scenario, nodes, sp, sql, sqr, sr, dt)
    t = state.time
    f = scenario.params
    p_dt = sp * f.p.time.at(t) * dt
    ql_dt = sql * f.qL.time.at(t) * dt
    qr_dt = sqr * f.qR.time.at(t) * dt
    r_dt = sr * f.r.time.at(t) * dt
    new = np.ascontiguousarray(state.states.copy()).reshape(1, -1)
    u = rng.random((1, len(nodes)))
    step_kernel(new, u, p_dt, ql_dt, qr_dt, r_dt)
    return LatticeState(nodes=nodes, states=new.reshape(-1), time=t + dt)


def _snapshot_steps(times: np.ndarray, dt: float) -> dict[int, int]:
    """Map integer step index -> output slot; times must sit on the dt grid."""
    out = {}
    for i, t in enumerate(times):
        n = int(round(t / dt))
        if abs(n * dt - t) > 1e-9:
            raise ValidationError(f"output time {t} is not a multiple of dt = {dt}")
        out[n] = i
    return out


def _run_chunks(scenario: Scenario, replications: int, dt: float, seed: int,
                times: np.ndarray, collect):
    """Shared chunked driver: calls collect(chunk_state, slot) at snapshot steps."""
    nodes, _ = simulation_window(scenario)
    sp, sql, sqr, sr, S0, I0 = _node_tables(scenario, nodes)
    _check_step_size(scenario, nodes, sp, sql, sqr, sr, dt)
    slots = _snapshot_steps(times, dt)
    n_steps = max(slots)
    f = scenario.params
    tp, tql, tqr, tr = f.p.time, f.qL.time, f.qR.time, f.r.time

    n_chunks = (replications + CHUNK_SIZE - 1) // CHUNK_SIZE
    for c in range(n_chunks):
        m = min(CHUNK_SIZE, replications - c * CHUNK_SIZE)
        rng = _chunk_rng(seed, c)
        state = _sample_initial(rng, m, S0, I0)
        u = np.empty((m, len(nodes)))
        if 0 in slots:
            collect(state, slots[0])
        for n in range(n_steps):
            t = n * dt
            rng.random(out=u)
            step_kernel(
                state, u,
                sp * (tp.at(t) * dt), sql * (tql.at(t) * dt),
                sqr * (tqr.at(t) * dt), sr * (tr.at(t) * dt),
            )
            if (n + 1) in slots:
                collect(state, slots[n + 1])
    return nodes


def estimate_marginals(scenario: Scenario, replications: int, dt: float = 1e-3,
                       seed: int = 0, times=None) -> EnsembleEstimate:
    """Unbiased frequency estimates of [S_k], [I_k], [R_k] on the output grid.

    Standard errors are binomial, sqrt(m(1-m)/M).  Deterministic given seed.
    """
    if not scenario.validated:
        raise ValidationError("scenario must pass validate_scenario before simulating")
    if replications < 2:
        raise ValidationError("need at least 2 replications")
    times = scenario.output_times if times is None else np.asarray(times, dtype=float)

    _, obs = simulation_window(scenario)
    counts = np.zeros((3, scenario.lattice.n_nodes, len(times)), dtype=np.int64)

    def collect(state, slot):
        view = state[:, obs]
        for s in range(3):
            counts[s, :, slot] += (view == s).sum(axis=0)

    _run_chunks(scenario, replications, dt, seed, times, collect)

    mean = counts / float(replications)
    stderr = np.sqrt(mean * (1.0 - mean) / replications)
    return EnsembleEstimate(times=times, nodes=scenario.nodes, mean=mean, stderr=stderr,
                            replications=replications, seed=seed, dt=dt)


def sample_states(scenario: Scenario, replications: int, t: float, dt: float = 1e-3,
                  seed: int = 0) -> np.ndarray:
    """Full observation-window states of every replication at one time.

    Returns (replications, n_nodes) uint8; used for joint-probability checks
    (closure identity, spatial Markov factorization).
    """
    if not scenario.validated:
        raise ValidationError("scenario must pass validate_scenario before simulating")
    times = np.asarray([t], dtype=float)
    _, obs = simulation_window(scenario)
    out = np.empty((replications, scenario.lattice.n_nodes), dtype=np.uint8)
    row = 0

    def collect(state, _slot):
        nonlocal row
        out[row:row + state.shape[0]] = state[:, obs]
        row += state.shape[0]

    _run_chunks(scenario, replications, dt, seed, times, collect)
    return out
