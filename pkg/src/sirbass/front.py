"""Epidemic front tracking and its Gaussian limit law.

The front is the largest infected index, sup{k >= 0 : x_k(t) = i}.  For the
SI patient-zero setup the front advances like a standard Poisson process with
intensity q, so (front - q t)/sqrt(t) tends to a centered Gaussian with
variance q; front_statistics records per-replication fronts and the summaries
needed to test that law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ct import simulate_ct
from .scenario import Scenario, ValidationError

__all__ = ["FrontStat", "front_statistics", "front_gaussian_cdf"]

NO_FRONT = -1  # recorded when no node is infected at the query time


@dataclass
class FrontStat:
    """Per-replication front locations at the requested times.

    fronts[rep, ti] is the largest infected node index, NO_FRONT when nothing
    is infected; saturated counts replications whose front reached the window
    edge by the latest query time.
    """

    times: np.ndarray
    fronts: np.ndarray
    window_hi: int
    saturated: int
    replications: int
    seed: int

    def valid(self, ti: int) -> np.ndarray:
        return self.fronts[:, ti] != NO_FRONT

    def mean(self, ti: int) -> float:
        v = self.fronts[self.valid(ti), ti]
        return float(v.mean())

    def variance(self, ti: int) -> float:
        v = self.fronts[self.valid(ti), ti]
        return float(v.var(ddof=1))

    def none_count(self, ti: int) -> int:
        return int((~self.valid(ti)).sum())

    def normalized(self, ti: int, q: float) -> np.ndarray:
        """(front - q t)/sqrt(t) over replications with a live front."""
        t = self.times[ti]
        v = self.fronts[self.valid(ti), ti].astype(float)
        return (v - q * t) / math.sqrt(t)

    def ks_distance(self, ti: int, q: float) -> float:
        """Kolmogorov-Smirnov distance of the normalized front to N(0, q)."""
        sample = np.sort(self.normalized(ti, q))
        n = len(sample)
        cdf = front_gaussian_cdf(sample, q)
        upper = np.abs(np.arange(1, n + 1) / n - cdf).max()
        lower = np.abs(np.arange(0, n) / n - cdf).max()
        return float(max(upper, lower))


def front_gaussian_cdf(x, q: float):
    """Limit CDF of the normalized front: centered Gaussian with variance q."""
    x = np.asarray(x, dtype=float)
    return 0.5 * (1.0 + np.vectorize(math.erf)(x / math.sqrt(2.0 * q)))


def front_statistics(scenario: Scenario, replications: int, times,
                     seed: int = 0) -> FrontStat:
    """Track sup{k : x_k(t) = i} per replication at the requested times.

    General scenarios are allowed for raw tracking; the Gaussian-law summaries
    are meaningful for the SI patient-zero setup.  Fronts at the window edge
    are capped there and counted as saturated.
    """
    if not scenario.validated:
        raise ValidationError("scenario must pass validate_scenario before simulating")
    times = np.sort(np.asarray(times, dtype=float))
    k_hi = scenario.lattice.k_hi
    t_end = float(times.max())

    fronts = np.empty((replications, len(times)), dtype=np.int64)
    saturated = 0
    for rep in range(replications):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(rep,))))
        traj = simulate_ct(scenario, rng, t_end=t_end)
        lo = int(traj.nodes[0])
        states = traj.initial.copy()
        ev = 0
        events = traj.events
        hit_edge = False
        for ti, t in enumerate(times):
            while ev < len(events) and events[ev][0] <= t:
                _, k, s = events[ev]
                states[k - lo] = s
                ev += 1
            infected = np.nonzero(states == 1)[0]
            if infected.size:
                front_k = int(traj.nodes[infected.max()])
                fronts[rep, ti] = min(front_k, k_hi)
                hit_edge = hit_edge or front_k >= k_hi
            else:
                fronts[rep, ti] = NO_FRONT
        saturated += hit_edge
    return FrontStat(times=times, fronts=fronts, window_hi=k_hi, saturated=saturated,
                     replications=replications, seed=seed)
