"""Stochastic SIR-Bass epidemics on 1D lattices.

Exact deterministic marginal solvers, closed-form solutions, Monte Carlo
engines (discrete-time and continuous-time) and space-continuous limits, all
cross-validated against one another.
"""

from . import formulas
from .exact import (
    AggregateSeries,
    SolverConfig,
    SolverError,
    pair_marginal_ss,
    solve_aggregate,
    solve_bass_one_sided,
    solve_marginals,
    solve_sir_bass_one_sided,
    solve_two_sided,
    solve_two_sided_closed,
)
from .fields import ParamField, RateField, SpaceProfile, TimeProfile
from .scenario import (
    InitialDistribution,
    LatticeSpec,
    MarginalSeries,
    PairMarginalSeries,
    Scenario,
    ValidationError,
    make_scenario,
    validate_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateSeries",
    "InitialDistribution",
    "LatticeSpec",
    "MarginalSeries",
    "PairMarginalSeries",
    "ParamField",
    "RateField",
    "Scenario",
    "SolverConfig",
    "SolverError",
    "SpaceProfile",
    "TimeProfile",
    "ValidationError",
    "formulas",
    "make_scenario",
    "pair_marginal_ss",
    "solve_aggregate",
    "solve_bass_one_sided",
    "solve_marginals",
    "solve_sir_bass_one_sided",
    "solve_two_sided",
    "solve_two_sided_closed",
    "validate_scenario",
    "__version__",
]
