import math

import numpy as np

from sirbass import InitialDistribution, LatticeSpec, ParamField, make_scenario
from sirbass.front import NO_FRONT, front_gaussian_cdf, front_statistics


def si_patient_zero(q=1.0, window_hi=60, horizon=20.0):
    lat = LatticeSpec(topology="semi-infinite", sidedness="one-sided", window=(0, window_hi))
    return make_scenario(lat, ParamField.one_sided(p=0.0, q=q),
                         InitialDistribution.patient_zero(window_hi + 1), horizon, horizon)


def test_front_at_time_zero_is_patient_zero():
    sc = si_patient_zero()
    fs = front_statistics(sc, 200, times=[0.0, 5.0], seed=1)
    assert np.all(fs.fronts[:, 0] == 0)


def test_front_nondecreasing_within_replication():
    sc = si_patient_zero(q=1.5, horizon=12.0)
    fs = front_statistics(sc, 300, times=[2.0, 5.0, 8.0, 12.0], seed=2)
    assert np.all(np.diff(fs.fronts, axis=1) >= 0)  # SI: infected never leaves


def test_front_poisson_mean_and_variance():
    q, t = 1.0, 10.0
    sc = si_patient_zero(q=q, window_hi=60, horizon=t)
    fs = front_statistics(sc, 4000, times=[t], seed=3)
    lam = q * t
    assert abs(fs.mean(0) - lam) < 4 * math.sqrt(lam / 4000)
    assert abs(fs.variance(0) - lam) < 4 * math.sqrt((2 * lam**2 + lam) / 4000)
    assert fs.saturated == 0


def test_front_normalized_gaussian_ks():
    q, t = 1.0, 25.0
    sc = si_patient_zero(q=q, window_hi=80, horizon=t)
    fs = front_statistics(sc, 4000, times=[t], seed=4)
    assert fs.ks_distance(0, q) < 0.06


def test_no_infection_recorded_as_none():
    lat = LatticeSpec(topology="finite", sidedness="one-sided", window=(0, 4))
    sc = make_scenario(lat, ParamField.one_sided(p=0.0, q=1.0),
                       InitialDistribution.uniform(5, 1.0, 0.0, 0.0), 2.0, 1.0)
    fs = front_statistics(sc, 50, times=[2.0], seed=5)
    assert np.all(fs.fronts[:, 0] == NO_FRONT)
    assert fs.none_count(0) == 50


def test_saturation_is_flagged():
    sc = si_patient_zero(q=2.0, window_hi=3, horizon=10.0)
    fs = front_statistics(sc, 100, times=[10.0], seed=6)
    assert fs.saturated > 90
    assert np.all(fs.fronts[fs.valid(0), 0] <= 3)


def test_gaussian_cdf_reference():
    assert front_gaussian_cdf(0.0, 2.0) == 0.5
    assert front_gaussian_cdf(1.0, 1.0) == np.float64(0.5 * (1 + math.erf(1 / math.sqrt(2))))
