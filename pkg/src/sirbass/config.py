"""Scenario and continuum-family configuration files.

TOML, mirroring the Scenario fields one-to-one (see README for the schema).
Rate descriptors are numbers (constants) or tables:

    {kind = "const", value = 2.0}
    {kind = "affine", intercept = 5.0, slope = 1.0}          # intercept + slope*x
    {kind = "table", values = [..], start = 0}               # one value per node
    {kind = "piecewise", times = [1.0], values = [0.5, 0.1]} # steps in time
    {kind = "expdecay", amplitude = 1.0, rate = 1.0}         # a*exp(-rate*t)
    {kind = "product", space = {..}, time = {..}}

Serialization round-trips: scenario -> text -> scenario is the identity.
"""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from .continuum import ContinuumScenario
from .fields import FieldError, ParamField, RateField, SpaceProfile, TimeProfile
from .scenario import InitialDistribution, LatticeSpec, Scenario, ValidationError, make_scenario

__all__ = [
    "load_scenario",
    "parse_scenario",
    "scenario_to_text",
    "load_continuum",
    "parse_continuum",
]

SPACE_KINDS = ("const", "affine", "table")
TIME_KINDS = ("const", "piecewise", "expdecay")


def _space_from(spec) -> SpaceProfile:
    kind = spec.get("kind")
    if kind == "const":
        return SpaceProfile.const(spec["value"])
    if kind == "affine":
        return SpaceProfile.affine(spec["intercept"], spec.get("slope", 0.0))
    if kind == "table":
        return SpaceProfile.table(spec["values"], spec.get("start", 0))
    raise ValidationError(f"unknown space descriptor kind {kind!r}")


def _time_from(spec) -> TimeProfile:
    kind = spec.get("kind")
    if kind == "const":
        return TimeProfile.const(spec["value"])
    if kind == "piecewise":
        return TimeProfile.piecewise(spec["times"], spec["values"])
    if kind == "expdecay":
        return TimeProfile.expdecay(spec["amplitude"], spec["rate"])
    raise ValidationError(f"unknown time descriptor kind {kind!r}")


def rate_field_from(spec) -> RateField:
    """Parse a config value (number or descriptor table) into a RateField."""
    if isinstance(spec, (int, float)):
        return RateField.const(float(spec))
    if not isinstance(spec, dict):
        raise ValidationError(f"cannot parse rate descriptor {spec!r}")
    kind = spec.get("kind")
    if kind == "product":
        return RateField(space=_space_from(spec["space"]), time=_time_from(spec["time"]))
    if kind in SPACE_KINDS:
        return RateField(space=_space_from(spec), time=TimeProfile.const(1.0))
    if kind in TIME_KINDS:
        return RateField(space=SpaceProfile.const(1.0), time=_time_from(spec))
    raise ValidationError(f"unknown rate descriptor kind {kind!r}")


def _space_to(profile: SpaceProfile) -> dict:
    if profile.kind == "const":
        return {"kind": "const", "value": profile.value}
    if profile.kind == "affine":
        return {"kind": "affine", "intercept": profile.intercept, "slope": profile.slope}
    return {"kind": "table", "values": list(profile.values), "start": profile.start}


def _time_to(profile: TimeProfile) -> dict:
    if profile.kind == "const":
        return {"kind": "const", "value": profile.value}
    if profile.kind == "piecewise":
        return {"kind": "piecewise", "times": list(profile.times), "values": list(profile.values)}
    return {"kind": "expdecay", "amplitude": profile.amplitude, "rate": profile.rate}


def rate_field_to(field: RateField):
    """Inverse of rate_field_from, folding constants to a plain number."""
    s_const = field.space.kind == "const"
    t_const = field.time.kind == "const"
    if s_const and t_const:
        return field.space.value * field.time.value
    if t_const and field.time.value == 1.0:
        return _space_to(field.space)
    if s_const and field.space.value == 1.0:
        return _time_to(field.time)
    return {"kind": "product", "space": _space_to(field.space), "time": _time_to(field.time)}


# ---------------------------------------------------------------------------
# scenario <-> config
# ---------------------------------------------------------------------------


def parse_scenario(data: dict) -> Scenario:
    try:
        sc = data["scenario"]
        lat_d = data["lattice"]
        par_d = data["params"]
        init_d = data["init"]
    except KeyError as e:
        raise ValidationError(f"config missing section {e}") from None

    window = tuple(int(v) for v in lat_d["window"])
    lattice = LatticeSpec(
        topology=lat_d.get("topology", "finite"),
        sidedness=lat_d.get("sidedness", "one-sided"),
        window=window,
        dx=float(lat_d.get("dx", 1.0)),
    )

    if lattice.sidedness == "two-sided":
        if "q" in par_d:
            raise ValidationError("two-sided lattices take qL and qR, not q")
        qL = rate_field_from(par_d.get("qL", 0.0))
        qR = rate_field_from(par_d.get("qR", 0.0))
    else:
        if "qL" in par_d or "qR" in par_d:
            raise ValidationError("one-sided lattices take a single q")
        qL = rate_field_from(par_d.get("q", 0.0))
        qR = RateField.zero()
    params = ParamField(
        p=rate_field_from(par_d.get("p", 0.0)),
        qL=qL,
        qR=qR,
        r=rate_field_from(par_d.get("r", 0.0)),
    )

    n = lattice.n_nodes
    kind = init_d.get("kind", "uniform")
    if kind == "uniform":
        init = InitialDistribution.uniform(
            n, init_d.get("S", 1.0), init_d.get("I", 0.0), init_d.get("R", 0.0), lattice.k_lo
        )
    elif kind == "patient-zero":
        init = InitialDistribution.patient_zero(n, at=int(init_d.get("at", 0)), k_lo=lattice.k_lo)
    elif kind == "table":
        init = InitialDistribution(init_d["S"], init_d["I"], init_d["R"], lattice.k_lo)
    elif kind == "profile":
        nodes = lattice.nodes
        S0 = _space_from(init_d["S"]).at_nodes(nodes, lattice.dx)
        R0 = (_space_from(init_d["R"]).at_nodes(nodes, lattice.dx)
              if "R" in init_d else np.zeros(n))
        init = InitialDistribution(S0, 1.0 - S0 - R0, R0, lattice.k_lo)
    else:
        raise ValidationError(f"unknown init kind {kind!r}")

    return make_scenario(lattice, params, init, sc["horizon"], sc["grid_dt"])


def scenario_to_dict(s: Scenario) -> dict:
    par: dict = {"p": rate_field_to(s.params.p), "r": rate_field_to(s.params.r)}
    if s.lattice.one_sided:
        par["q"] = rate_field_to(s.params.qL)
    else:
        par["qL"] = rate_field_to(s.params.qL)
        par["qR"] = rate_field_to(s.params.qR)
    return {
        "scenario": {"horizon": s.horizon, "grid_dt": s.grid_dt},
        "lattice": {
            "topology": s.lattice.topology,
            "sidedness": s.lattice.sidedness,
            "window": list(s.lattice.window),
            "dx": s.lattice.dx,
        },
        "params": par,
        "init": {
            "kind": "table",
            "S": [float(v) for v in s.init.S0],
            "I": [float(v) for v in s.init.I0],
            "R": [float(v) for v in s.init.R0],
        },
    }


def load_scenario(path) -> Scenario:
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ValidationError(f"config parse error: {e}") from None
    return parse_scenario(data)


# ---------------------------------------------------------------------------
# minimal TOML emission (covers this schema only)
# ---------------------------------------------------------------------------


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k} = {_toml_value(x)}" for k, x in v.items()) + "}"
    raise FieldError(f"cannot serialize {v!r} to TOML")


def dict_to_toml(data: dict) -> str:
    lines = []
    for section, body in data.items():
        lines.append(f"[{section}]")
        for key, val in body.items():
            lines.append(f"{key} = {_toml_value(val)}")
        lines.append("")
    return "\n".join(lines)


def scenario_to_text(s: Scenario) -> str:
    return dict_to_toml(scenario_to_dict(s))


# ---------------------------------------------------------------------------
# continuum family configs
# ---------------------------------------------------------------------------


def parse_continuum(data: dict) -> tuple[ContinuumScenario, dict]:
    """Returns the continuum scenario and study settings (t_snapshot, dx_list)."""
    try:
        cont = data["continuum"]
        fields = cont["fields"]
        init = cont["init"]
    except KeyError as e:
        raise ValidationError(f"continuum config missing {e}") from None
    rescaling = int(cont["rescaling"])
    cs = ContinuumScenario(
        rescaling=rescaling,
        domain=tuple(float(v) for v in cont["domain"]),
        horizon=float(cont["horizon"]),
        p=rate_field_from(fields.get("p", 0.0)),
        q=rate_field_from(fields.get("q", 0.0)),
        r=rate_field_from(fields.get("r", 0.0)),
        S0=_space_from(init["S"]) if "S" in init else None,
        R0=_space_from(init["R"]) if "R" in init else SpaceProfile.const(0.0),
        I0=_space_from(init["I"]) if "I" in init else None,
    )
    study = {
        "t_snapshot": float(cont.get("t_snapshot", cs.horizon)),
        "dx_list": [float(v) for v in cont.get("dx_list", [])],
    }
    return cs, study


def load_continuum(path) -> tuple[ContinuumScenario, dict]:
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ValidationError(f"config parse error: {e}") from None
    return parse_continuum(data)
