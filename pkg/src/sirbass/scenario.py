"""Scenario domain types and validation.

A Scenario bundles the lattice geometry, the heterogeneous rates, the
(uncorrelated) initial distribution and the time horizon; it is the single
input object of every solver and simulator.  All types are immutable after
validation and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .fields import ParamField, RateField

__all__ = [
    "SUSCEPTIBLE",
    "INFECTED",
    "RECOVERED",
    "STATE_NAMES",
    "LatticeSpec",
    "InitialDistribution",
    "Scenario",
    "MarginalSeries",
    "PairMarginalSeries",
    "ValidationError",
    "validate_scenario",
]

# node state codes used by every engine (uint8 in simulator state arrays)
SUSCEPTIBLE, INFECTED, RECOVERED = 0, 1, 2
STATE_NAMES = ("S", "I", "R")

TOPOLOGIES = ("finite", "semi-infinite", "infinite")
SIDEDNESS = ("one-sided", "two-sided")

# |sum(S0+I0+R0) - 1| below SUM_TOL is accepted as exact; up to RENORM_TOL it
# is silently renormalized (config rounding); beyond that it is an error.
SUM_TOL = 1e-12
RENORM_TOL = 1e-9


class ValidationError(ValueError):
    """Scenario violates a type invariant; carries one message per violation."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class LatticeSpec:
    """1D lattice geometry plus the observed contiguous node range.

    ``window`` is inclusive.  For finite lines the window is the whole
    lattice.  For semi-infinite lines node 0 is the true boundary (it has no
    left neighbor); for infinite lines the fields are extended constantly
    beyond the window, which the solvers exploit to stay exact.
    """

    topology: str = "finite"
    sidedness: str = "one-sided"
    window: tuple[int, int] = (0, 0)
    dx: float = 1.0

    @property
    def k_lo(self) -> int:
        return self.window[0]

    @property
    def k_hi(self) -> int:
        return self.window[1]

    @property
    def n_nodes(self) -> int:
        return self.k_hi - self.k_lo + 1

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.k_lo, self.k_hi + 1)

    @property
    def one_sided(self) -> bool:
        return self.sidedness == "one-sided"

    def has_left_boundary_at(self, k: int) -> bool:
        """True when node k is a physical boundary with no left neighbor."""
        if self.topology == "finite":
            return k == self.k_lo
        if self.topology == "semi-infinite":
            return k == 0
        return False

    def has_right_boundary_at(self, k: int) -> bool:
        return self.topology == "finite" and k == self.k_hi


class InitialDistribution:
    """Per-node (S, I, R) probabilities at t = 0; nodes are independent."""

    def __init__(self, S0, I0, R0, k_lo: int = 0):
        self.S0 = np.asarray(S0, dtype=float).copy()
        self.I0 = np.asarray(I0, dtype=float).copy()
        self.R0 = np.asarray(R0, dtype=float).copy()
        self.k_lo = int(k_lo)
        for a in (self.S0, self.I0, self.R0):
            a.flags.writeable = False

    @staticmethod
    def uniform(n: int, S: float, I: float, R: float, k_lo: int = 0) -> "InitialDistribution":
        return InitialDistribution(np.full(n, S), np.full(n, I), np.full(n, R), k_lo)

    @staticmethod
    def patient_zero(n: int, at: int = 0, k_lo: int = 0) -> "InitialDistribution":
        S = np.ones(n)
        I = np.zeros(n)
        idx = at - k_lo
        if not 0 <= idx < n:
            raise ValidationError(f"patient zero at node {at} lies outside window")
        S[idx], I[idx] = 0.0, 1.0
        return InitialDistribution(S, I, np.zeros(n), k_lo)

    @property
    def n_nodes(self) -> int:
        return len(self.S0)

    def at(self, k: int) -> tuple[float, float, float]:
        i = k - self.k_lo
        return float(self.S0[i]), float(self.I0[i]), float(self.R0[i])

    def __eq__(self, other) -> bool:
        if not isinstance(other, InitialDistribution):
            return NotImplemented
        return (
            self.k_lo == other.k_lo
            and np.array_equal(self.S0, other.S0)
            and np.array_equal(self.I0, other.I0)
            and np.array_equal(self.R0, other.R0)
        )


@dataclass(frozen=True)
class Scenario:
    """Validated simulation/solve input.  Immutable; construct via validate_scenario."""

    lattice: LatticeSpec
    params: ParamField
    init: InitialDistribution
    horizon: float
    grid_dt: float
    validated: bool = field(default=False, compare=False)

    @property
    def nodes(self) -> np.ndarray:
        return self.lattice.nodes

    @property
    def output_times(self) -> np.ndarray:
        n = int(round(self.horizon / self.grid_dt))
        return np.linspace(0.0, n * self.grid_dt, n + 1)

    def eval_params(self, k: int, t: float) -> tuple[float, float, float, float]:
        """(p, qL, qR, r) at node k, time t; errors outside the domain."""
        lo, hi = self.lattice.window
        if not lo <= k <= hi:
            raise ValidationError(f"node {k} outside observation window [{lo}, {hi}]")
        if not 0.0 <= t <= self.horizon:
            raise ValidationError(f"time {t} outside horizon [0, {self.horizon}]")
        return self.params.eval(k, t, self.lattice.dx)

    def max_total_rate(self) -> float:
        """Upper bound on p + qL + qR + r over the window and horizon."""
        nodes, T, dx = self.nodes, self.horizon, self.lattice.dx
        f = self.params
        return (
            f.p.max_on(nodes, T, dx)
            + f.qL.max_on(nodes, T, dx)
            + f.qR.max_on(nodes, T, dx)
            + f.r.max_on(nodes, T, dx)
        )


def _check_rate(name: str, rate: RateField, lattice: LatticeSpec, horizon: float, errs: list):
    try:
        vals_lo = rate.at_nodes(lattice.nodes, 0.0, lattice.dx)
        m = rate.min_on(lattice.nodes, horizon, lattice.dx)
    except Exception as e:  # table coverage errors etc.
        errs.append(f"{name}: {e}")
        return
    if vals_lo.size and not np.all(np.isfinite(vals_lo)):
        errs.append(f"{name}: non-finite values on the window")
    if m < 0.0:
        k_bad = int(lattice.nodes[np.argmin(rate.space.at_nodes(lattice.nodes, lattice.dx))])
        errs.append(f"{name}: negative rate (minimum {m:.6g}, e.g. node {k_bad})")


def validate_scenario(raw: Scenario) -> Scenario:
    """Check every type invariant; return a frozen, possibly renormalized scenario.

    Raises ValidationError listing all violations with node locations.
    """
    errs: list[str] = []
    lat = raw.lattice

    if lat.topology not in TOPOLOGIES:
        errs.append(f"unknown topology {lat.topology!r}")
    if lat.sidedness not in SIDEDNESS:
        errs.append(f"unknown sidedness {lat.sidedness!r}")
    if lat.k_hi < lat.k_lo:
        errs.append(f"empty window {lat.window}")
    if lat.topology == "semi-infinite" and lat.k_lo != 0:
        errs.append("semi-infinite lattice windows must start at the boundary node k = 0")
    if lat.topology == "finite" and lat.n_nodes < 1:
        errs.append("finite line needs at least one node")
    if lat.dx <= 0:
        errs.append(f"dx must be positive, got {lat.dx}")

    if raw.horizon <= 0:
        errs.append(f"horizon must be positive, got {raw.horizon}")
    if raw.grid_dt <= 0:
        errs.append(f"grid_dt must be positive, got {raw.grid_dt}")

    if errs:
        raise ValidationError(errs)

    _check_rate("p", raw.params.p, lat, raw.horizon, errs)
    _check_rate("qL", raw.params.qL, lat, raw.horizon, errs)
    _check_rate("qR", raw.params.qR, lat, raw.horizon, errs)
    _check_rate("r", raw.params.r, lat, raw.horizon, errs)
    if lat.one_sided and raw.params.qR.max_on(lat.nodes, raw.horizon, lat.dx) > 0:
        errs.append("one-sided lattice must have qR identically zero")

    init = raw.init
    if init.n_nodes != lat.n_nodes or init.k_lo != lat.k_lo:
        errs.append(
            f"initial distribution covers nodes [{init.k_lo}, {init.k_lo + init.n_nodes - 1}], "
            f"window is [{lat.k_lo}, {lat.k_hi}]"
        )
        raise ValidationError(errs)

    S0, I0, R0 = init.S0.copy(), init.I0.copy(), init.R0.copy()
    bounds_ok = True
    for name, a in (("S0", S0), ("I0", I0), ("R0", R0)):
        bad = np.where((a < 0) | (a > 1) | ~np.isfinite(a))[0]
        if bad.size:
            errs.append(f"{name}: probability outside [0, 1] at node {int(bad[0]) + lat.k_lo}")
            bounds_ok = False
    total = S0 + I0 + R0
    off = np.abs(total - 1.0)
    worst = int(np.argmax(off))
    if off[worst] > RENORM_TOL:
        errs.append(f"probabilities sum to {total[worst]:.6g} at node {worst + lat.k_lo}")
    elif bounds_ok and off.max() > SUM_TOL:
        S0, I0, R0 = S0 / total, I0 / total, R0 / total

    if errs:
        raise ValidationError(errs)

    init = InitialDistribution(S0, I0, R0, lat.k_lo)
    return replace(raw, init=init, validated=True)


def make_scenario(lattice, params, init, horizon, grid_dt) -> Scenario:
    """Build and validate a scenario in one call."""
    return validate_scenario(Scenario(lattice, params, init, float(horizon), float(grid_dt)))


# ---------------------------------------------------------------------------
# solver / estimator output containers
# ---------------------------------------------------------------------------


@dataclass
class MarginalSeries:
    """Per-node probability trajectories on the output grid.

    S, I, R have shape (n_nodes, n_times); nodes carries absolute indices.
    """

    times: np.ndarray
    nodes: np.ndarray
    S: np.ndarray
    I: np.ndarray
    R: np.ndarray

    def node_index(self, k: int) -> int:
        i = int(k - self.nodes[0])
        if not 0 <= i < len(self.nodes) or self.nodes[i] != k:
            raise KeyError(f"node {k} not in series")
        return i

    def at(self, k: int):
        """(S, I, R) trajectories of one node."""
        i = self.node_index(k)
        return self.S[i], self.I[i], self.R[i]

    def conservation_defect(self) -> float:
        return float(np.abs(self.S + self.I + self.R - 1.0).max())


@dataclass
class PairMarginalSeries:
    """Adjacent-pair joint probabilities P(S_k & S_{k-1}), optionally P(S_k & R_{k-1}).

    Row i corresponds to the pair (pairs_k[i]-1, pairs_k[i]).
    """

    times: np.ndarray
    pairs_k: np.ndarray
    ss: np.ndarray
    sr: np.ndarray | None = None

    def pair_index(self, k: int) -> int:
        i = int(np.searchsorted(self.pairs_k, k))
        if i >= len(self.pairs_k) or self.pairs_k[i] != k:
            raise KeyError(f"pair ({k - 1}, {k}) not in series")
        return i
