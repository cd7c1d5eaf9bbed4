"""Space-time rate descriptors for heterogeneous lattice parameters.

Every rate (source p, contagion q / qL / qR, recovery r) is a product of a
spatial profile evaluated at x = k*dx and a temporal profile.  The supported
forms are closed under everything appearing in the figure scenarios: constants,
affine-in-x fields, per-node tables, piecewise-constant-in-time schedules and
exponentially decaying sources.  Evaluation is pure and integrals are exact,
which keeps the exponential factors inside the lattice ODEs at integrator
accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpaceProfile",
    "TimeProfile",
    "RateField",
    "ParamField",
    "FieldError",
    "as_rate_field",
]


class FieldError(ValueError):
    """Raised when a descriptor is malformed or evaluated off its domain."""


# ---------------------------------------------------------------------------
# spatial part
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpaceProfile:
    """Spatial factor of a rate: ``const``, ``affine`` (a + b*x) or ``table``.

    Table profiles carry one value per node starting at node index ``start``.
    """

    kind: str = "const"
    value: float = 1.0
    intercept: float = 0.0
    slope: float = 0.0
    values: tuple[float, ...] = ()
    start: int = 0

    @staticmethod
    def const(value: float) -> "SpaceProfile":
        return SpaceProfile(kind="const", value=float(value))

    @staticmethod
    def affine(intercept: float, slope: float) -> "SpaceProfile":
        return SpaceProfile(kind="affine", intercept=float(intercept), slope=float(slope))

    @staticmethod
    def table(values, start: int = 0) -> "SpaceProfile":
        return SpaceProfile(kind="table", values=tuple(float(v) for v in values), start=int(start))

    def at_x(self, x):
        """Value at continuum coordinate x (scalar or array)."""
        if self.kind == "const":
            return self.value * np.ones_like(np.asarray(x, dtype=float))
        if self.kind == "affine":
            return self.intercept + self.slope * np.asarray(x, dtype=float)
        raise FieldError("table profiles are indexed by node, not by coordinate")

    def integral_x(self, a: float, b: float) -> float:
        """Exact integral over the coordinate interval [a, b] (analytic kinds only)."""
        if self.kind == "const":
            return self.value * (b - a)
        if self.kind == "affine":
            return self.intercept * (b - a) + 0.5 * self.slope * (b * b - a * a)
        raise FieldError("table profiles have no coordinate integral")

    def scaled(self, c: float) -> "SpaceProfile":
        """The profile multiplied by a constant (rescaling regimes)."""
        if self.kind == "const":
            return SpaceProfile.const(self.value * c)
        if self.kind == "affine":
            return SpaceProfile.affine(self.intercept * c, self.slope * c)
        if self.kind == "table":
            return SpaceProfile.table([v * c for v in self.values], self.start)
        raise FieldError(f"unknown space profile kind {self.kind!r}")

    def at_nodes(self, nodes: np.ndarray, dx: float) -> np.ndarray:
        """Values at the given node indices (x = k*dx for analytic profiles)."""
        nodes = np.asarray(nodes, dtype=int)
        if self.kind == "const":
            return np.full(nodes.shape, self.value)
        if self.kind == "affine":
            return self.intercept + self.slope * (nodes * dx)
        if self.kind == "table":
            idx = nodes - self.start
            if idx.size and (idx.min() < 0 or idx.max() >= len(self.values)):
                raise FieldError(
                    f"table profile covers nodes [{self.start}, {self.start + len(self.values) - 1}], "
                    f"requested [{nodes.min()}, {nodes.max()}]"
                )
            return np.asarray(self.values, dtype=float)[idx]
        raise FieldError(f"unknown space profile kind {self.kind!r}")


# ---------------------------------------------------------------------------
# temporal part
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeProfile:
    """Temporal factor of a rate.

    ``const``     : value
    ``piecewise`` : right-continuous steps; values[i] holds on [times[i-1], times[i])
    ``expdecay``  : amplitude * exp(-rate * t)
    """

    kind: str = "const"
    value: float = 1.0
    times: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    amplitude: float = 1.0
    rate: float = 0.0

    @staticmethod
    def const(value: float) -> "TimeProfile":
        return TimeProfile(kind="const", value=float(value))

    @staticmethod
    def piecewise(times, values) -> "TimeProfile":
        times = tuple(float(t) for t in times)
        values = tuple(float(v) for v in values)
        if len(values) != len(times) + 1:
            raise FieldError("piecewise profile needs len(values) == len(times) + 1")
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise FieldError("piecewise switch times must be strictly increasing")
        return TimeProfile(kind="piecewise", times=times, values=values)

    @staticmethod
    def expdecay(amplitude: float, rate: float) -> "TimeProfile":
        return TimeProfile(kind="expdecay", amplitude=float(amplitude), rate=float(rate))

    @property
    def is_constant(self) -> bool:
        return self.kind == "const" or (self.kind == "expdecay" and self.rate == 0.0)

    def switch_times(self) -> tuple[float, ...]:
        return self.times if self.kind == "piecewise" else ()

    def at(self, t: float) -> float:
        if self.kind == "const":
            return self.value
        if self.kind == "piecewise":
            i = int(np.searchsorted(self.times, t, side="right"))
            return self.values[i]
        if self.kind == "expdecay":
            return self.amplitude * math.exp(-self.rate * t)
        raise FieldError(f"unknown time profile kind {self.kind!r}")

    def at_left(self, t: float) -> float:
        """Left limit at t (differs from at() only at piecewise switch times)."""
        if self.kind == "piecewise":
            i = int(np.searchsorted(self.times, t, side="left"))
            return self.values[i]
        return self.at(t)

    def integral(self, t: float) -> float:
        """Exact integral over [0, t]."""
        if t < 0:
            raise FieldError("time integrals are only defined for t >= 0")
        if self.kind == "const":
            return self.value * t
        if self.kind == "piecewise":
            total = 0.0
            lo = 0.0
            for t_sw, v in zip(self.times, self.values):
                if t <= t_sw:
                    return total + v * (t - lo)
                total += v * (t_sw - lo)
                lo = t_sw
            return total + self.values[-1] * (t - lo)
        if self.kind == "expdecay":
            if self.rate == 0.0:
                return self.amplitude * t
            return self.amplitude * (1.0 - math.exp(-self.rate * t)) / self.rate
        raise FieldError(f"unknown time profile kind {self.kind!r}")

    def total_integral(self) -> float:
        """Integral over [0, inf); inf when divergent (used for limit formulas)."""
        if self.kind == "const":
            return 0.0 if self.value == 0.0 else math.inf
        if self.kind == "piecewise":
            if self.values[-1] != 0.0:
                return math.inf
            return self.integral(self.times[-1]) if self.times else 0.0
        if self.kind == "expdecay":
            if self.rate <= 0.0:
                return 0.0 if self.amplitude == 0.0 else math.inf
            return self.amplitude / self.rate
        raise FieldError(f"unknown time profile kind {self.kind!r}")

    def max_on(self, horizon: float) -> float:
        if self.kind == "const":
            return self.value
        if self.kind == "piecewise":
            i = int(np.searchsorted(self.times, horizon, side="right"))
            return max(self.values[: i + 1])
        if self.kind == "expdecay":
            return self.amplitude * max(1.0, math.exp(-self.rate * horizon))
        raise FieldError(f"unknown time profile kind {self.kind!r}")

    def min_on(self, horizon: float) -> float:
        if self.kind == "const":
            return self.value
        if self.kind == "piecewise":
            i = int(np.searchsorted(self.times, horizon, side="right"))
            return min(self.values[: i + 1])
        if self.kind == "expdecay":
            return self.amplitude * min(1.0, math.exp(-self.rate * horizon))
        raise FieldError(f"unknown time profile kind {self.kind!r}")


# ---------------------------------------------------------------------------
# full rate field: space * time
# ---------------------------------------------------------------------------


ZERO_SPACE = SpaceProfile.const(0.0)
ZERO_TIME = TimeProfile.const(0.0)


@dataclass(frozen=True)
class RateField:
    """One nonnegative rate over (node, time): ``space(k*dx) * time(t)``."""

    space: SpaceProfile = SpaceProfile.const(1.0)
    time: TimeProfile = TimeProfile.const(1.0)

    @staticmethod
    def const(value: float) -> "RateField":
        return RateField(space=SpaceProfile.const(float(value)), time=TimeProfile.const(1.0))

    @staticmethod
    def zero() -> "RateField":
        return RateField(space=ZERO_SPACE, time=ZERO_TIME)

    @property
    def is_time_constant(self) -> bool:
        return self.time.is_constant

    def at(self, k: int, t: float, dx: float = 1.0) -> float:
        return float(self.space.at_nodes(np.asarray([k]), dx)[0]) * self.time.at(t)

    def at_nodes(self, nodes: np.ndarray, t: float, dx: float = 1.0) -> np.ndarray:
        return self.space.at_nodes(nodes, dx) * self.time.at(t)

    def integral_at_nodes(self, nodes: np.ndarray, t: float, dx: float = 1.0) -> np.ndarray:
        """Exact cumulative integral int_0^t of the rate, per node."""
        return self.space.at_nodes(nodes, dx) * self.time.integral(t)

    def max_on(self, nodes: np.ndarray, horizon: float, dx: float = 1.0) -> float:
        space_vals = self.space.at_nodes(nodes, dx)
        if space_vals.size == 0:
            return 0.0
        return float(space_vals.max()) * self.time.max_on(horizon)

    def min_on(self, nodes: np.ndarray, horizon: float, dx: float = 1.0) -> float:
        space_vals = self.space.at_nodes(nodes, dx)
        if space_vals.size == 0:
            return 0.0
        return float(space_vals.min()) * self.time.min_on(horizon)


def as_rate_field(spec) -> RateField:
    """Coerce a number, profile, or RateField into a RateField."""
    if isinstance(spec, RateField):
        return spec
    if isinstance(spec, (int, float)):
        return RateField.const(float(spec))
    if isinstance(spec, SpaceProfile):
        return RateField(space=spec, time=TimeProfile.const(1.0))
    if isinstance(spec, TimeProfile):
        return RateField(space=SpaceProfile.const(1.0), time=spec)
    raise FieldError(f"cannot interpret {spec!r} as a rate field")


# ---------------------------------------------------------------------------
# the full parameter set of a scenario
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParamField:
    """Rates of one scenario: source p, contagion qL/qR, recovery r.

    One-sided lattices use qL as the single contagion rate (from node k-1 to
    node k) and keep qR identically zero.
    """

    p: RateField
    qL: RateField
    qR: RateField
    r: RateField

    @staticmethod
    def one_sided(p, q, r=0.0) -> "ParamField":
        return ParamField(
            p=as_rate_field(p), qL=as_rate_field(q), qR=RateField.zero(), r=as_rate_field(r)
        )

    @staticmethod
    def two_sided(p, qL, qR, r=0.0) -> "ParamField":
        return ParamField(
            p=as_rate_field(p), qL=as_rate_field(qL), qR=as_rate_field(qR), r=as_rate_field(r)
        )

    def eval(self, k: int, t: float, dx: float = 1.0) -> tuple[float, float, float, float]:
        """(p, qL, qR, r) at node k and time t.  Pure and deterministic."""
        return (
            self.p.at(k, t, dx),
            self.qL.at(k, t, dx),
            self.qR.at(k, t, dx),
            self.r.at(k, t, dx),
        )

    def switch_times(self, horizon: float) -> tuple[float, ...]:
        """All temporal discontinuities in [0, horizon), sorted and unique."""
        ts = set()
        for f in (self.p, self.qL, self.qR, self.r):
            ts.update(t for t in f.time.switch_times() if 0.0 < t < horizon)
        return tuple(sorted(ts))
