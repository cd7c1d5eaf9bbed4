"""Closed-form solutions of the lattice epidemic models.

This module is the oracle layer: every explicit solution (aggregate Bass
curve, spatially homogeneous solutions with and without recovery, patient-zero
problems, time-varying point sources, final states) is evaluated here in a
numerically stable way, independently of the lattice ODE solvers, so the two
layers can be cross-validated.

Truncated Poisson sums sum_{l<k} z^l/l! are evaluated through the regularized
upper incomplete gamma function Q(k, z) (no factorial overflow, valid to
k = 10^4); convolution integrals use adaptive quadrature with the Erlang
kernel's mass concentration guiding panel placement.
"""

from __future__ import annotations

import math

from scipy import integrate
from scipy.special import gammaincc, gammaln

from .fields import TimeProfile

__all__ = [
    "bass_formula",
    "homogeneous_bass",
    "patient_zero_bass",
    "expected_infected_bass",
    "point_source_bass",
    "point_source_bass_limit",
    "homogeneous_sir_bass",
    "homogeneous_sir",
    "point_source_sir",
    "point_source_sir_limit",
    "patient_zero_sir",
    "expected_susceptible_sir",
    "outbreak_threshold",
    "sir_final_state",
    "two_sided_homogeneous_bass",
    "two_sided_patient_zero_bass",
    "FORMULAS",
]

# parameters below this are treated as exactly zero: removable singularities
# (p -> 0, r -> 0) must not produce 0/0
ZERO_EPS = 1e-12

QUAD_TOL = 1e-10


def _require(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


def poisson_cdf(k: int, z: float) -> float:
    """P(Poisson(z) <= k-1) = e^{-z} sum_{l=0}^{k-1} z^l/l!, gamma-regularized."""
    if k <= 0:
        return 0.0
    if z == 0.0:
        return 1.0
    return float(gammaincc(k, z))


def _ramp(p: float, t: float) -> float:
    """(1 - e^{-pt})/p with its analytic p -> 0 limit t."""
    if p < ZERO_EPS:
        return t
    return -math.expm1(-p * t) / p


def _as_time_profile(p0) -> TimeProfile:
    if isinstance(p0, TimeProfile):
        return p0
    return TimeProfile.const(float(p0))


# ---------------------------------------------------------------------------
# aggregate model
# ---------------------------------------------------------------------------


def bass_formula(p: float, q: float, t: float) -> float:
    """Adopted fraction I(t) of the aggregate Bass model (no recovery, I(0)=0)."""
    _require(p > 0, "bass_formula requires p > 0")
    _require(q >= 0 and t >= 0, "bass_formula requires q >= 0, t >= 0")
    e = math.exp(-(p + q) * t)
    return (1.0 - e) / (1.0 + (q / p) * e)


# ---------------------------------------------------------------------------
# one-sided Bass lattice (no recovery)
# ---------------------------------------------------------------------------


def homogeneous_bass(s0: float, p, q, t: float) -> float:
    """[S](t) for the spatially homogeneous one-sided Bass lattice.

    p and q may be constants or TimeProfile descriptors; the inner integrals
    are exact for constant and piecewise-constant profiles.
    """
    _require(0.0 <= s0 <= 1.0, "s0 must be a probability")
    _require(t >= 0, "t must be nonnegative")
    if isinstance(p, (int, float)) and isinstance(q, (int, float)):
        p, q = float(p), float(q)
        _require(p >= 0 and q >= 0, "rates must be nonnegative")
        if p < ZERO_EPS:
            return s0 * math.exp(-q * (1.0 - s0) * t)
        return s0 * math.exp(-(p + q) * t + q * s0 * _ramp(p, t))

    pp, qp = _as_time_profile(p), _as_time_profile(q)
    total = pp.integral(t) + qp.integral(t)
    # int_0^t q(s) e^{-int_0^s p} ds, split at profile switches;
    # segments where both factors are constant integrate analytically
    cuts = sorted({0.0, t} | {s for s in pp.switch_times() + qp.switch_times() if s < t})
    acc = 0.0
    for a, b in zip(cuts, cuts[1:]):
        qa = qp.at(0.5 * (a + b))
        if pp.kind in ("const", "piecewise") and qp.kind in ("const", "piecewise"):
            pa = pp.at(0.5 * (a + b))
            base = math.exp(-pp.integral(a))
            acc += qa * base * _ramp(pa, b - a)
        else:
            val, _ = integrate.quad(
                lambda s: qp.at(s) * math.exp(-pp.integral(s)), a, b, epsabs=QUAD_TOL, epsrel=0.0
            )
            acc += val
    return s0 * math.exp(-total + s0 * acc)


def patient_zero_bass(p: float, q: float, k: int, t: float) -> float:
    """[S_k](t) on the semi-infinite line with node 0 infected at t = 0.

    Uses the truncated-Poisson representation with argument
    z = q (1-e^{-pt})/p; the p = 0 branch is the analytic SI limit with
    argument q t (the Poisson front law).
    """
    _require(k >= 1, "node 0 is patient zero: [S_0] vanishes identically; need k >= 1")
    _require(p >= 0 and q >= 0 and t >= 0, "parameters must be nonnegative")
    if p < ZERO_EPS:
        return poisson_cdf(k, q * t)
    z = q * _ramp(p, t)
    # e^{-(p+q)t} sum_{l<k} z^l/l! = exp(z - (p+q)t) * Q(k, z); exponent <= -pt
    cdf = poisson_cdf(k, z)
    if cdf > 0.0:
        return math.exp(z - (p + q) * t) * cdf
    # z >> k underflow: log-space term recursion
    terms = [l * math.log(z) - gammaln(l + 1) for l in range(k)]
    m = max(terms)
    log_sum = m + math.log(math.fsum(math.exp(v - m) for v in terms))
    return math.exp(log_sum - (p + q) * t)


def expected_infected_bass(p: float, q: float, K: int, t: float) -> float:
    """E[number of infected among nodes 1..K] for the patient-zero Bass problem."""
    _require(K >= 1, "need K >= 1")
    _require(p >= 0 and q >= 0 and t >= 0, "parameters must be nonnegative")
    z = q * t if p < ZERO_EPS else q * _ramp(p, t)
    scale = 1.0 if p < ZERO_EPS else math.exp(z - (p + q) * t)
    head = K * poisson_cdf(K, z)
    if K >= 2:
        head -= z * poisson_cdf(K - 1, z)
    return K - scale * head


def point_source_bass(p0, q: float, k: int, t: float) -> float:
    """[S_k](t) on the semi-infinite line with a time-varying source p0(t) at node 0.

    p0 is a constant or a TimeProfile; for k >= 1 the Erlang-kernel convolution
    is evaluated by adaptive quadrature (absolute tolerance 1e-10).
    """
    _require(q > 0, "point source propagation requires q > 0")
    _require(k >= 0 and t >= 0, "need k >= 0 and t >= 0")
    prof = _as_time_profile(p0)
    if k == 0:
        return math.exp(-prof.integral(t))
    if t == 0.0:
        return 1.0

    lg = gammaln(k)

    def integrand(tau: float) -> float:
        if tau <= 0.0:
            return 0.0
        log_kernel = (k - 1) * math.log(q * tau) + math.log(q) - q * tau - lg
        return math.exp(log_kernel) * -math.expm1(-prof.integral(t - tau))

    points = [x for x in ((k - 1) / q, k / q) if 0.0 < x < t]
    val, _ = integrate.quad(integrand, 0.0, t, epsabs=QUAD_TOL, epsrel=0.0,
                            points=points or None, limit=200)
    return 1.0 - val


def point_source_bass_limit(p0) -> float:
    """t -> infinity limit of the point-source Bass problem, e^{-int_0^inf p0}."""
    total = _as_time_profile(p0).total_integral()
    return 0.0 if math.isinf(total) else math.exp(-total)


# ---------------------------------------------------------------------------
# one-sided SIR-Bass lattice (with recovery)
# ---------------------------------------------------------------------------


def homogeneous_sir_bass(s0: float, r0: float, p: float, q: float, r: float,
                         t: float) -> tuple[float, float]:
    """([S](t), [R](t)) for the spatially homogeneous one-sided lattice with recovery.

    Inner quadratures are written in decayed form (integrand <= 1) so large
    horizons do not overflow; accuracy is 1e-8 or better.
    """
    _require(0.0 <= s0 <= 1.0 and 0.0 <= r0 <= 1.0 - s0 + 1e-15, "invalid initial probabilities")
    _require(q > 0, "homogeneous SIR-Bass requires q > 0")
    _require(p >= 0 and r >= 0 and t >= 0, "parameters must be nonnegative")

    def S_of(tt: float) -> float:
        if tt == 0.0:
            return s0
        g_t = _ramp(p, tt)

        def decayed(sigma: float) -> float:
            # exp(-(q+r)sigma + s0 q (g(t)-g(t-sigma)) ), bounded by 1;
            # g(t)-g(t-sigma) = e^{-pt} expm1(p sigma)/p, cancellation-free
            if p < ZERO_EPS:
                dg = sigma
            elif p * sigma > 500.0:
                dg = (math.exp(-p * (tt - sigma)) - math.exp(-p * tt)) / p
            else:
                dg = math.exp(-p * tt) * math.expm1(p * sigma) / p
            return math.exp(-(q + r) * sigma + s0 * q * dg)

        head = s0 * math.exp(-(p + q + r) * tt + s0 * q * g_t)
        if r == 0.0 and r0 == 0.0:
            return head
        integral, _ = integrate.quad(decayed, 0.0, tt, epsabs=QUAD_TOL, epsrel=0.0, limit=200)
        return head + s0 * math.exp(-p * tt) * (r + q * r0) * integral

    S = S_of(t)
    if r == 0.0:
        return S, r0
    # outer tolerance sits above the inner quadratures' noise floor
    integral, _ = integrate.quad(lambda sigma: math.exp(-r * sigma) * S_of(t - sigma),
                                 0.0, t, epsabs=3e-9, epsrel=1e-9, limit=200)
    R = 1.0 - (1.0 - r0) * math.exp(-r * t) - r * integral
    return S, R


def homogeneous_sir(s0: float, i0: float, r0: float, q: float, r: float,
                    t: float) -> tuple[float, float]:
    """([S](t), [R](t)) for the p = 0 (classical SIR) homogeneous one-sided lattice."""
    _require(abs(s0 + i0 + r0 - 1.0) < 1e-9, "initial probabilities must sum to 1")
    _require(q >= 0 and r >= 0 and t >= 0, "parameters must be nonnegative")
    a = r + q * (1.0 - s0)
    if a < ZERO_EPS:
        return s0, r0
    S = s0 * (r + q * r0 + q * i0 * math.exp(-a * t)) / a
    R = 1.0 - s0 * (r + q * r0) / a
    if i0 > 0.0:
        R -= (i0 / (1.0 - s0)) * math.exp(-r * t)
        R += (r * s0 * i0 / (a * (1.0 - s0))) * math.exp(-a * t)
    return S, R


def point_source_sir(p0, q: float, r: float, k: int, t: float) -> float:
    """[S_k](t) for a time-varying point source at node 0 with recovery rate r."""
    _require(q > 0, "point source propagation requires q > 0")
    _require(r >= 0 and k >= 0 and t >= 0, "need r >= 0, k >= 0, t >= 0")
    prof = _as_time_profile(p0)
    if k == 0:
        return math.exp(-prof.integral(t))
    if t == 0.0:
        return 1.0

    lg = gammaln(k)

    def integrand(tau: float) -> float:
        if tau <= 0.0:
            return 0.0
        log_kernel = (k - 1) * math.log(q * tau) + math.log(q) - (q + r) * tau - lg
        return math.exp(log_kernel) * -math.expm1(-prof.integral(t - tau))

    points = [x for x in ((k - 1) / q, k / q) if 0.0 < x < t]
    val, _ = integrate.quad(integrand, 0.0, t, epsabs=QUAD_TOL, epsrel=0.0,
                            points=points or None, limit=200)
    return 1.0 - val


def point_source_sir_limit(p0, q: float, r: float, k: int) -> float:
    """t -> infinity limit 1 - (q/(q+r))^k (1 - e^{-int_0^inf p0})."""
    _require(q > 0 and r >= 0 and k >= 0, "need q > 0, r >= 0, k >= 0")
    total = _as_time_profile(p0).total_integral()
    depth = 0.0 if math.isinf(total) else math.exp(-total)
    return 1.0 - (q / (q + r)) ** k * (1.0 - depth)


def patient_zero_sir(q: float, r: float, k: int, t: float) -> float:
    """[S_k](t) for the SIR patient-zero problem (p = 0, node 0 infected)."""
    _require(k >= 1, "node 0 is patient zero: [S_0] vanishes identically; need k >= 1")
    _require(q > 0 and r >= 0 and t >= 0, "need q > 0, r >= 0, t >= 0")
    rho = q / (q + r)
    return 1.0 - rho**k * (1.0 - poisson_cdf(k, (q + r) * t))


def expected_susceptible_sir(q: float, r: float, K: int, t: float) -> float:
    """E[number of susceptibles among nodes 1..K] for the SIR patient-zero problem."""
    _require(K >= 1, "need K >= 1")
    _require(q > 0 and r >= 0 and t >= 0, "need q > 0, r >= 0, t >= 0")
    if r < ZERO_EPS:
        return math.fsum(poisson_cdf(k, q * t) for k in range(1, K + 1))
    rho = q / (q + r)
    tail = rho * math.exp(-r * t) * poisson_cdf(K, q * t) \
        - rho ** (K + 1) * poisson_cdf(K, (q + r) * t)
    return K - (q / r) * (1.0 - rho**K) + ((q + r) / r) * tail


def outbreak_threshold(q: float, r: float) -> bool:
    """True iff a small initial infection grows initially (strict q > r)."""
    _require(q >= 0 and r >= 0, "rates must be nonnegative")
    return q > r


def sir_final_state(s0: float, i0: float, r0: float, q: float, r: float) -> tuple[float, float]:
    """(S_inf, R_inf) of the homogeneous p = 0 lattice; I_inf = 0."""
    _require(abs(s0 + i0 + r0 - 1.0) < 1e-9, "initial probabilities must sum to 1")
    _require(q >= 0 and r >= 0, "rates must be nonnegative")
    denom = r + q * (1.0 - s0)
    if denom < ZERO_EPS:
        return s0, r0
    S_inf = s0 * (r + q * r0) / denom
    return S_inf, 1.0 - S_inf


# ---------------------------------------------------------------------------
# two-sided lattice
# ---------------------------------------------------------------------------


def two_sided_homogeneous_bass(s0: float, p: float, qL: float, qR: float, t: float) -> float:
    """Homogeneous two-sided Bass solution; equals the one-sided one with q = qL + qR."""
    return homogeneous_bass(s0, p, qL + qR, t)


def two_sided_patient_zero_bass(p: float, qL: float, qR: float, k: int, t: float) -> float:
    """[S_k](t) for the two-sided patient-zero Bass problem on the half line k >= 0.

    Product of the one-sided patient-zero solution (left contagion qL) and the
    homogeneous all-susceptible solution (right contagion qR), divided by the
    shared source survival factor.
    """
    _require(k >= 1, "node 0 is patient zero: [S_0] vanishes identically; need k >= 1")
    _require(p >= 0 and qL >= 0 and qR >= 0 and t >= 0, "parameters must be nonnegative")
    g = _ramp(p, t)
    return math.exp(-(p + qL + qR) * t + (qL + qR) * g) * poisson_cdf(k, qL * g)


# ---------------------------------------------------------------------------
# registry for the command line `formula` command
# ---------------------------------------------------------------------------

FORMULAS = {
    "bass": (bass_formula, ("p", "q", "t")),
    "homogeneous-bass": (homogeneous_bass, ("s0", "p", "q", "t")),
    "patient-zero-bass": (patient_zero_bass, ("p", "q", "k", "t")),
    "expected-infected-bass": (expected_infected_bass, ("p", "q", "K", "t")),
    "point-source-bass": (point_source_bass, ("p0", "q", "k", "t")),
    "homogeneous-sir-bass": (homogeneous_sir_bass, ("s0", "r0", "p", "q", "r", "t")),
    "homogeneous-sir": (homogeneous_sir, ("s0", "i0", "r0", "q", "r", "t")),
    "point-source-sir": (point_source_sir, ("p0", "q", "r", "k", "t")),
    "patient-zero-sir": (patient_zero_sir, ("q", "r", "k", "t")),
    "expected-susceptible-sir": (expected_susceptible_sir, ("q", "r", "K", "t")),
    "sir-final-state": (sir_final_state, ("s0", "i0", "r0", "q", "r")),
    "two-sided-homogeneous-bass": (two_sided_homogeneous_bass, ("s0", "p", "qL", "qR", "t")),
    "two-sided-patient-zero-bass": (two_sided_patient_zero_bass, ("p", "qL", "qR", "k", "t")),
}
