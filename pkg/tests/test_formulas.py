import math

import numpy as np
import pytest
from scipy import integrate

import sirbass.formulas as F
from sirbass.fields import TimeProfile


def naive_truncated_poisson(k, z):
    """Direct factorial summation e^{-z} sum_{l<k} z^l / l! (oracle, k small)."""
    return math.exp(-z) * math.fsum(z**l / math.factorial(l) for l in range(k))


# ---------------------------------------------------------------------------
# aggregate Bass curve
# ---------------------------------------------------------------------------


def test_bass_formula_values():
    assert F.bass_formula(1.0, 1.0, 0.0) == 0.0
    assert F.bass_formula(0.7, 0.0, 2.0) == pytest.approx(1 - math.exp(-1.4), abs=1e-15)
    assert F.bass_formula(1.0, 1.0, 1.0) == pytest.approx(math.tanh(1.0), abs=1e-15)


def test_bass_formula_monotone_and_bounded():
    vals = [F.bass_formula(0.5, 3.0, t) for t in np.linspace(0, 10, 50)]
    assert all(0.0 <= v < 1.0 for v in vals)
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_bass_formula_rejects_p_zero():
    with pytest.raises(ValueError):
        F.bass_formula(0.0, 1.0, 1.0)


# ---------------------------------------------------------------------------
# homogeneous Bass
# ---------------------------------------------------------------------------


def test_homogeneous_bass_constant_form():
    s0, p, q, t = 0.8, 0.4, 2.0, 1.5
    expected = s0 * math.exp(-(p + q) * t + q * s0 * (1 - math.exp(-p * t)) / p)
    assert F.homogeneous_bass(s0, p, q, t) == pytest.approx(expected, abs=1e-15)


def test_homogeneous_bass_p_zero_branch():
    assert F.homogeneous_bass(1.0, 0.0, 2.0, 3.0) == 1.0  # no seed, no source
    s0 = 0.5
    assert F.homogeneous_bass(s0, 0.0, 2.0, 1.0) == pytest.approx(
        s0 * math.exp(-2.0 * 0.5 * 1.0), abs=1e-15)


def test_homogeneous_bass_small_p_continuity():
    # the two branches differ by O(p q s0 t^2 / 2); check the scaling
    base = F.homogeneous_bass(0.5, 0.0, 2.0, 1.0)
    assert abs(F.homogeneous_bass(0.5, 1e-8, 2.0, 1.0) - base) < 1e-8
    assert abs(F.homogeneous_bass(0.5, 1e-6, 2.0, 1.0) - base) < 1e-6


def test_homogeneous_bass_time_profiles():
    # piecewise q, constant p: compare against direct quadrature of the
    # general expression
    p = TimeProfile.const(0.5)
    q = TimeProfile.piecewise([1.0], [2.0, 0.5])
    t = 2.0
    inner, _ = integrate.quad(lambda s: q.at(s) * math.exp(-0.5 * s), 0, t,
                              points=[1.0], epsabs=1e-13, epsrel=0.0)
    s0 = 0.7
    expected = s0 * math.exp(-(p.integral(t) + q.integral(t)) + s0 * inner)
    assert F.homogeneous_bass(s0, p, q, t) == pytest.approx(expected, abs=1e-11)


# ---------------------------------------------------------------------------
# patient-zero Bass
# ---------------------------------------------------------------------------


def test_patient_zero_single_term():
    p, q, t = 1.0, 1.0, 0.7
    assert F.patient_zero_bass(p, q, 1, t) == pytest.approx(math.exp(-(p + q) * t), abs=1e-15)


def test_patient_zero_matches_naive_sum():
    p, q, t = 1.0, 2.0, 1.3
    z = q * (1 - math.exp(-p * t)) / p
    for k in range(1, 21):
        expected = math.exp(-(p + q) * t) * math.fsum(
            z**l / math.factorial(l) for l in range(k))
        assert F.patient_zero_bass(p, q, k, t) == pytest.approx(expected, abs=1e-12)


def test_patient_zero_large_k_finite():
    val = F.patient_zero_bass(1.0, 1.0, 10_000, 1.0)
    assert math.isfinite(val) and 0.0 <= val <= 1.0


def test_patient_zero_homogeneous_limit():
    # k -> infinity recovers the all-susceptible homogeneous solution
    p, q, t = 1.0, 1.0, 1.0
    limit = math.exp(-(p + q) * t + q * (1 - math.exp(-p * t)) / p)
    assert abs(F.patient_zero_bass(p, q, 200, t) - limit) <= 1e-12


def test_patient_zero_si_branch_is_poisson_cdf():
    q, t = 1.0, 2.0
    for k in range(1, 12):
        assert F.patient_zero_bass(0.0, q, k, t) == pytest.approx(
            naive_truncated_poisson(k, q * t), abs=1e-13)


def test_patient_zero_monotone_in_k_and_t():
    p, q = 0.5, 2.0
    vals_k = [F.patient_zero_bass(p, q, k, 1.0) for k in range(1, 15)]
    assert all(b >= a for a, b in zip(vals_k, vals_k[1:]))
    vals_t = [F.patient_zero_bass(p, q, 3, t) for t in np.linspace(0, 4, 30)]
    assert all(b <= a + 1e-15 for a, b in zip(vals_t, vals_t[1:]))


def test_patient_zero_rejects_node_zero():
    with pytest.raises(ValueError):
        F.patient_zero_bass(1.0, 1.0, 0, 1.0)


def test_expected_infected_matches_direct_sum():
    p, q, t = 0.8, 1.5, 1.2
    for K in (1, 2, 7, 20):
        direct = K - math.fsum(F.patient_zero_bass(p, q, k, t) for k in range(1, K + 1))
        assert F.expected_infected_bass(p, q, K, t) == pytest.approx(direct, abs=1e-12)


def test_expected_fraction_limit():
    # E[N_K]/K tends to the homogeneous infected fraction
    p, q, t = 1.0, 1.0, 1.0
    frac = F.expected_infected_bass(p, q, 400, t) / 400
    limit = 1 - math.exp(-(p + q) * t + q * (1 - math.exp(-p * t)) / p)
    assert frac == pytest.approx(limit, abs=1e-2)


# ---------------------------------------------------------------------------
# point sources
# ---------------------------------------------------------------------------


def test_point_source_no_source_is_one():
    prof = TimeProfile.const(0.0)
    for k in (0, 1, 5):
        assert F.point_source_bass(prof, 1.0, k, 2.0) == 1.0


def test_point_source_node_zero_survival():
    prof = TimeProfile.expdecay(1.0, 1.0)
    t = 2.0
    assert F.point_source_bass(prof, 1.0, 0, t) == pytest.approx(
        math.exp(-(1 - math.exp(-t))), abs=1e-15)


def test_point_source_far_nodes_untouched():
    prof = TimeProfile.const(1.0)
    assert F.point_source_bass(prof, 1.0, 60, 2.0) == pytest.approx(1.0, abs=1e-12)


def test_point_source_long_time_limits():
    # integrable source: limit e^{-int p0} = e^{-1}
    prof = TimeProfile.expdecay(1.0, 1.0)
    assert F.point_source_bass_limit(prof) == pytest.approx(math.exp(-1.0), abs=1e-15)
    assert F.point_source_bass(prof, 1.0, 1, 50.0) == pytest.approx(math.exp(-1.0), abs=1e-3)
    # divergent source: limit 0
    assert F.point_source_bass_limit(TimeProfile.const(1.0)) == 0.0
    assert F.point_source_bass(TimeProfile.const(1.0), 1.0, 1, 50.0) == pytest.approx(0.0, abs=1e-3)


def test_point_source_sir_reduces_to_bass():
    prof = TimeProfile.expdecay(2.0, 1.0)
    for k in (0, 1, 3):
        a = F.point_source_sir(prof, 1.5, 0.0, k, 2.0)
        b = F.point_source_bass(prof, 1.5, k, 2.0)
        assert a == pytest.approx(b, abs=1e-12)


def test_point_source_sir_limit_ratio():
    # (1 - lim S_{k+1}) / (1 - lim S_k) = q/(q+r) = 2/3
    prof = TimeProfile.expdecay(1.0, 1.0)
    q, r = 2.0, 1.0
    lims = [F.point_source_sir_limit(prof, q, r, k) for k in (3, 4)]
    ratio = (1 - lims[1]) / (1 - lims[0])
    assert ratio == pytest.approx(q / (q + r), rel=1e-13)
    # and the finite-time values converge to the limit
    assert F.point_source_sir(prof, q, r, 2, 60.0) == pytest.approx(
        F.point_source_sir_limit(prof, q, r, 2), abs=1e-3)


# ---------------------------------------------------------------------------
# homogeneous SIR-Bass and the p = 0 reductions
# ---------------------------------------------------------------------------


def test_homogeneous_sir_bass_r_zero_reduces():
    s0, p, q, t = 0.8, 0.4, 2.0, 1.5
    S, R = F.homogeneous_sir_bass(s0, 0.0, p, q, 0.0, t)
    assert S == pytest.approx(F.homogeneous_bass(s0, p, q, t), abs=1e-12)
    assert R == 0.0


def test_homogeneous_sir_bass_vs_quadrature_oracle():
    # brute-force evaluation of the explicit solution, unsimplified form
    s0, r0, p, q, r, t = 0.7, 0.1, 0.4, 2.0, 1.0, 1.5
    g = lambda u: (1 - math.exp(-p * u)) / p
    inner, _ = integrate.quad(lambda tau: math.exp((q + r) * tau - q * s0 * g(tau)), 0, t,
                              epsabs=1e-13, epsrel=0.0)
    S_expected = s0 * math.exp(-(p + q + r) * t + s0 * q * g(t)) * (1 + (r + q * r0) * inner)
    S, R = F.homogeneous_sir_bass(s0, r0, p, q, r, t)
    assert S == pytest.approx(S_expected, abs=1e-10)

    inner_R, _ = integrate.quad(
        lambda tau: math.exp(r * tau) * F.homogeneous_sir_bass(s0, r0, p, q, r, tau)[0],
        0, t, epsabs=1e-11, epsrel=0.0)
    R_expected = 1 - (1 - r0) * math.exp(-r * t) - r * math.exp(-r * t) * inner_R
    assert R == pytest.approx(R_expected, abs=1e-8)


def test_homogeneous_sir_p_zero_limit():
    # p -> 0 of the SIR-Bass solution matches the classical chain-SIR formulas
    s0, i0, r0, q, r, t = 0.5, 0.3, 0.2, 2.0, 1.0, 1.2
    S_b, R_b = F.homogeneous_sir_bass(s0, r0, 1e-9, q, r, t)
    S, R = F.homogeneous_sir(s0, i0, r0, q, r, t)
    assert S == pytest.approx(S_b, abs=1e-7)
    assert R == pytest.approx(R_b, abs=1e-7)


def test_homogeneous_sir_degenerate_cases():
    # nothing can happen with no infection pressure
    S, R = F.homogeneous_sir(1.0, 0.0, 0.0, 2.0, 0.0, 5.0)
    assert (S, R) == (1.0, 0.0)
    S, R = F.homogeneous_sir(0.5, 0.0, 0.5, 2.0, 1.0, 3.0)
    assert S == pytest.approx(0.5 * (1.0 + 2.0 * 0.5) / (1.0 + 2.0 * 0.5), abs=1e-14)


def test_sir_final_state():
    S_inf, R_inf = F.sir_final_state(1.0, 0.0, 0.0, 2.0, 1.0)
    assert (S_inf, R_inf) == (1.0, 0.0)
    S_inf, R_inf = F.sir_final_state(0.5, 0.5, 0.0, 2.0, 1.0)
    assert S_inf == pytest.approx(0.25, abs=1e-15)
    assert R_inf == pytest.approx(0.75, abs=1e-15)
    # long-time value of the explicit solution approaches it
    S, _ = F.homogeneous_sir(0.5, 0.5, 0.0, 2.0, 1.0, 40.0)
    assert S == pytest.approx(0.25, abs=1e-12)


def test_outbreak_threshold_strict():
    assert not F.outbreak_threshold(1.0, 1.0)
    assert F.outbreak_threshold(1.5, 1.0)
    assert not F.outbreak_threshold(0.5, 1.0)


# ---------------------------------------------------------------------------
# patient-zero SIR
# ---------------------------------------------------------------------------


def test_patient_zero_sir_matches_naive_sum():
    q, r, t = 2.0, 1.0, 0.9
    rho = q / (q + r)
    for k in range(1, 15):
        expected = 1 - rho**k * (1 - naive_truncated_poisson(k, (q + r) * t))
        assert F.patient_zero_sir(q, r, k, t) == pytest.approx(expected, abs=1e-12)


def test_patient_zero_sir_r_zero_complements_si():
    q, t = 1.5, 1.1
    for k in range(1, 10):
        assert F.patient_zero_sir(q, 0.0, k, t) == pytest.approx(
            F.patient_zero_bass(0.0, q, k, t), abs=1e-13)


def test_patient_zero_sir_long_time():
    q, r = 2.0, 1.0
    t = 60.0 / (q + r)
    for k in (1, 3, 8):
        assert F.patient_zero_sir(q, r, k, t) == pytest.approx(
            1 - (q / (q + r)) ** k, abs=1e-9)


def test_patient_zero_sir_far_node():
    assert F.patient_zero_sir(2.0, 1.0, 300, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_expected_susceptible_matches_direct_sum():
    q, r, t = 2.0, 1.0, 0.8
    for K in (1, 2, 5, 25):
        direct = math.fsum(F.patient_zero_sir(q, r, k, t) for k in range(1, K + 1))
        assert F.expected_susceptible_sir(q, r, K, t) == pytest.approx(direct, abs=1e-10)
    # r = 0 branch
    direct0 = math.fsum(F.patient_zero_bass(0.0, q, k, t) for k in range(1, 6))
    assert F.expected_susceptible_sir(q, 0.0, 5, t) == pytest.approx(direct0, abs=1e-12)


# ---------------------------------------------------------------------------
# two-sided formulas
# ---------------------------------------------------------------------------


def test_two_sided_homogeneous_merges_rates():
    assert F.two_sided_homogeneous_bass(0.9, 0.3, 0.7, 1.3, 1.2) == pytest.approx(
        F.homogeneous_bass(0.9, 0.3, 2.0, 1.2), abs=1e-15)


def test_two_sided_patient_zero_product_structure():
    p, qL, qR, t = 1.0, 0.8, 1.4, 1.1
    for k in (1, 2, 6):
        left = F.patient_zero_bass(p, qL, k, t)
        right = F.homogeneous_bass(1.0, p, qR, t)
        expected = left * right / math.exp(-p * t)
        assert F.two_sided_patient_zero_bass(p, qL, qR, k, t) == pytest.approx(
            expected, abs=1e-14)


def test_all_formulas_registered_have_matching_arity():
    for name, (fn, args) in F.FORMULAS.items():
        code = fn.__code__
        assert code.co_varnames[: code.co_argcount] == args, name
