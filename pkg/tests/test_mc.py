import math

import numpy as np
import pytest

import sirbass.formulas as F
from sirbass import (
    InitialDistribution,
    LatticeSpec,
    ParamField,
    make_scenario,
    solve_sir_bass_one_sided,
)
from sirbass._kernels import step_kernel, step_kernel_py
from sirbass.ct import estimate_marginals_ct, simulate_ct
from sirbass.fields import RateField, SpaceProfile, TimeProfile
from sirbass.mc import (
    LatticeState,
    StepSizeError,
    estimate_marginals,
    sample_states,
    simulation_window,
    step_discrete,
)

M = 20_000


def one_sided(topology, n, **kw):
    return LatticeSpec(topology=topology, sidedness="one-sided", window=(0, n - 1), **kw)


def rng_for(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


# ---------------------------------------------------------------------------
# single-step semantics
# ---------------------------------------------------------------------------


def test_step_infection_probability_frequency():
    # susceptible node with infected left neighbor: P(infect) = dt*(p+q) = 0.006
    m = 1_000_000
    state = np.zeros((m, 2), dtype=np.uint8)
    state[:, 0] = 1
    u = rng_for(42).random((m, 2))
    dt = 1e-3
    step_kernel(state, u,
                np.array([1.0, 1.0]) * dt, np.array([5.0, 5.0]) * dt,
                np.zeros(2), np.zeros(2))
    freq = (state[:, 1] == 1).mean()
    expected = 0.006
    stderr = math.sqrt(expected * (1 - expected) / m)
    assert abs(freq - expected) <= 4 * stderr


def test_all_recovered_is_absorbing():
    sc = make_scenario(one_sided("finite", 4), ParamField.one_sided(p=1.0, q=2.0, r=1.0),
                       InitialDistribution.uniform(4, 0.0, 0.0, 1.0), 1.0, 0.5)
    est = estimate_marginals(sc, 500, dt=0.01, seed=1)
    assert np.all(est.mean[2] == 1.0)
    assert np.all(est.stderr[2] == 0.0)


def test_zero_rates_leave_state_untouched():
    sc = make_scenario(one_sided("finite", 5), ParamField.one_sided(p=0.0, q=0.0, r=0.0),
                       InitialDistribution.uniform(5, 0.5, 0.3, 0.2), 1.0, 0.5)
    state = LatticeState(nodes=sc.nodes, states=np.array([0, 1, 2, 0, 1], dtype=np.uint8))
    new = step_discrete(state, sc, dt=0.01, rng=rng_for(3))
    assert np.array_equal(new.states, state.states)
    assert new.time == pytest.approx(0.01)


def test_state_ordering_s_i_r_only():
    sc = make_scenario(one_sided("finite", 6), ParamField.one_sided(p=0.8, q=2.0, r=1.5),
                       InitialDistribution.uniform(6, 0.7, 0.2, 0.1), 1.0, 0.5)
    rng = rng_for(9)
    state = LatticeState(nodes=sc.nodes,
                         states=np.array([0, 1, 2, 0, 1, 0], dtype=np.uint8))
    for _ in range(200):
        new = step_discrete(state, sc, dt=0.005, rng=rng)
        assert np.all(new.states >= state.states)  # codes are ordered s < i < r
        state = new


def test_step_size_error_names_node():
    q = RateField(space=SpaceProfile.table([1.0, 900.0, 1.0]))
    sc = make_scenario(one_sided("finite", 3),
                       ParamField(p=RateField.const(1.0), qL=q, qR=RateField.zero(),
                                  r=RateField.zero()),
                       InitialDistribution.uniform(3, 1.0, 0.0, 0.0), 1.0, 0.5)
    with pytest.raises(StepSizeError, match="node 1"):
        estimate_marginals(sc, 10, dt=0.01, seed=0)


def test_kernel_backends_bitwise_identical():
    rng = rng_for(7)
    state = rng.integers(0, 3, size=(256, 13)).astype(np.uint8)
    other = state.copy()
    u = rng.random((256, 13))
    args = [rng.random(13) * 0.02 for _ in range(4)]
    step_kernel(state, u, *args)
    step_kernel_py(other, u, *args)
    assert np.array_equal(state, other)


# ---------------------------------------------------------------------------
# ensemble estimates
# ---------------------------------------------------------------------------


def test_estimates_are_seed_deterministic():
    sc = make_scenario(one_sided("finite", 4), ParamField.one_sided(p=0.5, q=1.0, r=0.5),
                       InitialDistribution.uniform(4, 0.9, 0.1, 0.0), 0.5, 0.25)
    a = estimate_marginals(sc, 3000, dt=0.005, seed=11)
    b = estimate_marginals(sc, 3000, dt=0.005, seed=11)
    assert np.array_equal(a.mean, b.mean) and np.array_equal(a.stderr, b.stderr)
    c = estimate_marginals(sc, 3000, dt=0.005, seed=12)
    assert not np.array_equal(a.mean, c.mean)


def test_homogeneous_bass_marginals_match_closed_form():
    sc = make_scenario(one_sided("infinite", 5), ParamField.one_sided(p=0.3, q=2.0),
                       InitialDistribution.uniform(5, 1.0, 0.0, 0.0), 1.0, 0.5)
    est = estimate_marginals(sc, M, dt=1e-3, seed=2)
    for j, t in enumerate(est.times[1:], start=1):
        ref = F.homogeneous_bass(1.0, 0.3, 2.0, t)
        z = np.abs(est.mean[0, :, j] - ref) / est.stderr[0, :, j]
        assert z.max() < 4.0


def test_sir_marginals_match_exact_solver():
    sc = make_scenario(one_sided("semi-infinite", 6), ParamField.one_sided(p=0.4, q=1.5, r=0.8),
                       InitialDistribution.uniform(6, 0.8, 0.1, 0.1), 1.0, 0.5)
    est = estimate_marginals(sc, M, dt=1e-3, seed=4)
    sol, _ = solve_sir_bass_one_sided(sc)
    for s in range(3):
        z = np.abs(est.mean[s] - [sol.S, sol.I, sol.R][s]) / np.maximum(est.stderr[s], 1e-4)
        assert z.max() < 4.5


def test_two_sided_window_buffer_present():
    sc = make_scenario(LatticeSpec(topology="semi-infinite", sidedness="two-sided",
                                   window=(0, 5)),
                       ParamField.two_sided(p=0.5, qL=1.0, qR=1.0),
                       InitialDistribution.uniform(6, 1.0, 0.0, 0.0), 1.0, 0.5)
    nodes, obs = simulation_window(sc)
    assert nodes[0] == 0 and nodes[-1] > 5
    assert np.array_equal(nodes[obs], np.arange(6))


# ---------------------------------------------------------------------------
# joint-probability checks (closure identity, spatial Markov property)
# ---------------------------------------------------------------------------


def test_closure_identity_against_simulation():
    # P(S_k & S_{k-1}) = e^{-p t} [S_k^0] P(S_{k-1}) on one-sided lattices
    p, q, t = 0.3, 2.0, 1.0
    sc = make_scenario(one_sided("infinite", 4), ParamField.one_sided(p=p, q=q),
                       InitialDistribution.uniform(4, 1.0, 0.0, 0.0), t, 0.5)
    states = sample_states(sc, M, t=t, dt=1e-3, seed=8)
    k = 2
    joint = float(((states[:, k] == 0) & (states[:, k - 1] == 0)).mean())
    marg = float((states[:, k - 1] == 0).mean())
    expected = math.exp(-p * t) * 1.0 * marg
    se = math.sqrt(joint * (1 - joint) / M) + math.exp(-p * t) * math.sqrt(marg * (1 - marg) / M)
    assert abs(joint - expected) <= 4 * se


def test_spatial_markov_factorization():
    # conditioned on node k susceptible through t, the flanking states factorize
    sc = make_scenario(LatticeSpec(topology="finite", sidedness="two-sided", window=(0, 6)),
                       ParamField.two_sided(p=0.4, qL=1.2, qR=0.9, r=0.5),
                       InitialDistribution.uniform(7, 0.8, 0.15, 0.05), 1.0, 0.5)
    states = sample_states(sc, 3 * M, t=1.0, dt=1e-3, seed=13)
    k = 3
    cond = states[states[:, k] == 0]
    n = len(cond)
    assert n > 1000
    for a in range(3):
        for b in range(3):
            p_ab = float(((cond[:, k - 1] == a) & (cond[:, k + 1] == b)).mean())
            p_a = float((cond[:, k - 1] == a).mean())
            p_b = float((cond[:, k + 1] == b).mean())
            se_ab = math.sqrt(max(p_ab * (1 - p_ab), 1e-12) / n)
            se_prod = math.sqrt(max(p_b**2 * p_a * (1 - p_a) + p_a**2 * p_b * (1 - p_b), 1e-12) / n)
            assert abs(p_ab - p_a * p_b) <= 4 * (se_ab + se_prod)


def test_recovered_set_nondecreasing_along_path():
    sc = make_scenario(one_sided("finite", 5), ParamField.one_sided(p=1.0, q=2.0, r=1.0),
                       InitialDistribution.uniform(5, 0.9, 0.1, 0.0), 1.0, 0.5)
    rng = rng_for(21)
    state = LatticeState(nodes=sc.nodes, states=np.zeros(5, dtype=np.uint8))
    recovered = state.states == 2
    for _ in range(300):
        state = step_discrete(state, sc, dt=0.003, rng=rng)
        now = state.states == 2
        assert np.all(now >= recovered)
        recovered = now


# ---------------------------------------------------------------------------
# continuous-time engine
# ---------------------------------------------------------------------------


def test_ct_single_node_exponential_clock():
    sc = make_scenario(one_sided("finite", 1), ParamField.one_sided(p=2.0, q=0.0),
                       InitialDistribution.uniform(1, 1.0, 0.0, 0.0), 40.0, 10.0)
    times = []
    for rep in range(M // 2):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(5, spawn_key=(rep,))))
        traj = simulate_ct(sc, rng)
        times.append(traj.infection_times().get(0, np.nan))
    times = np.asarray(times)
    assert np.isnan(times).sum() == 0  # horizon >> 1/p
    assert abs(times.mean() - 0.5) <= 4 * times.std(ddof=1) / math.sqrt(len(times))


def test_ct_si_gaps_are_iid_exponential():
    # consecutive infections on the SI patient-zero chain are Exp(q) gaps; a
    # long horizon keeps the first gaps free of censoring
    q = 1.3
    sc = make_scenario(one_sided("semi-infinite", 12), ParamField.one_sided(p=0.0, q=q),
                       InitialDistribution.patient_zero(12), 30.0, 5.0)
    gaps = []
    for rep in range(400):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(6, spawn_key=(rep,))))
        traj = simulate_ct(sc, rng)
        inf = traj.infection_times()
        assert len(inf) >= 6  # qT = 39: not reaching node 6 is a ~1e-13 event
        first = [inf[k] for k in range(1, 7)]
        gaps.extend(b - a for a, b in zip([0.0] + first, first))
    gaps = np.sort(np.asarray(gaps))
    # one-sample KS against Exp(q)
    cdf = 1.0 - np.exp(-q * gaps)
    n = len(gaps)
    dist = max(np.abs(np.arange(1, n + 1) / n - cdf).max(),
               np.abs(np.arange(0, n) / n - cdf).max())
    assert dist < 1.63 / math.sqrt(n)  # 1% critical value


def test_ct_time_varying_point_source_survival():
    p0 = RateField(space=SpaceProfile.table([1.0]), time=TimeProfile.expdecay(1.0, 1.0))
    sc = make_scenario(one_sided("finite", 1),
                       ParamField(p=p0, qL=RateField.zero(), qR=RateField.zero(),
                                  r=RateField.zero()),
                       InitialDistribution.uniform(1, 1.0, 0.0, 0.0), 3.0, 1.0)
    mean, se = estimate_marginals_ct(sc, M // 2, times=[1.0, 3.0], seed=7)
    for ti, t in enumerate([1.0, 3.0]):
        ref = math.exp(-(1 - math.exp(-t)))
        assert abs(mean[0, 0, ti] - ref) <= 4 * se[0, 0, ti]


def test_two_sided_time_varying_ratio_matches_simulation():
    # the decomposition with per-pass memory states has no closed form; the
    # simulator is the independent oracle
    r = RateField(space=SpaceProfile.const(1.0), time=TimeProfile.piecewise([0.4], [1.0, 0.25]))
    sc = make_scenario(LatticeSpec(topology="finite", sidedness="two-sided", window=(0, 4)),
                       ParamField(p=RateField.const(0.3), qL=RateField.const(1.2),
                                  qR=RateField.const(0.8), r=r),
                       InitialDistribution.uniform(5, 0.8, 0.1, 0.1), 1.0, 0.5)
    from sirbass import solve_two_sided

    sol = solve_two_sided(sc)
    est = estimate_marginals(sc, M, dt=1e-3, seed=17)
    for s, ref in enumerate((sol.S, sol.I, sol.R)):
        z = np.abs(est.mean[s] - ref) / np.maximum(est.stderr[s], 1e-4)
        assert z.max() < 4.5


def test_engines_agree_on_constant_rate_scenario():
    sc = make_scenario(one_sided("finite", 4), ParamField.one_sided(p=0.5, q=1.5, r=0.7),
                       InitialDistribution.uniform(4, 0.9, 0.1, 0.0), 1.0, 0.5)
    est = estimate_marginals(sc, M, dt=1e-3, seed=30)
    mean_ct, se_ct = estimate_marginals_ct(sc, M, times=est.times, seed=31)
    bias_bound = (0.5 + 1.5 + 0.7) ** 2 * 1.0 * 1e-3 / 2  # O(dt) hazard linearization
    comb = np.sqrt(est.stderr**2 + se_ct**2)
    assert np.abs(est.mean - mean_ct).max() <= 4 * comb.max() + bias_bound
