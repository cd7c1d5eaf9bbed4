import math

import numpy as np
import pytest

import sirbass.formulas as F
from sirbass.continuum import (
    CFLError,
    ContinuumScenario,
    convergence_study,
    lattice_scenario,
    limit_ode_closed,
    pde_characteristics_si,
    pde_stable_dt,
    solve_limit_ode,
    solve_limit_pde,
)
from sirbass.fields import RateField, SpaceProfile, TimeProfile

aff = SpaceProfile.affine


def rf(space):
    return RateField(space=space, time=TimeProfile.const(1.0))


def fig1_family():
    return ContinuumScenario(
        rescaling=1, domain=(0.0, 5.0), horizon=2.0,
        p=rf(aff(1.0, -0.2)), q=rf(aff(5.0, 1.0)), r=rf(aff(2.0, -0.4)),
        S0=aff(0.2, -0.04), R0=aff(0.2, 0.06),
    )


def fig2_family():
    return ContinuumScenario(
        rescaling=2, domain=(0.0, 10.0), horizon=2.0,
        p=rf(aff(0.1, 0.02)), q=rf(aff(1.0, 0.1)), r=rf(aff(0.3, 0.05)),
        I0=aff(0.2, 0.05), R0=aff(0.5, -0.03),
    )


# ---------------------------------------------------------------------------
# decoupled limit ODE
# ---------------------------------------------------------------------------


def test_limit_ode_matches_closed_quadrature_form():
    cs = fig1_family()
    xs = [0.0, 1.0, 2.5, 4.0, 5.0]
    fld = solve_limit_ode(cs, xs, grid_dt=2.0)
    for i, x in enumerate(xs):
        assert fld.S[i, -1] == pytest.approx(limit_ode_closed(cs, x, 2.0), abs=1e-8)


def test_limit_ode_constant_fields_equal_homogeneous_solution():
    cs = ContinuumScenario(rescaling=1, domain=(0.0, 3.0), horizon=1.5,
                           p=RateField.const(0.4), q=RateField.const(2.0),
                           r=RateField.const(1.0),
                           S0=SpaceProfile.const(0.7), R0=SpaceProfile.const(0.1))
    fld = solve_limit_ode(cs, [0.0, 1.0, 3.0], grid_dt=0.5)
    for j, t in enumerate(fld.times):
        ref = F.homogeneous_sir_bass(0.7, 0.1, 0.4, 2.0, 1.0, t)[0]
        assert np.abs(fld.S[:, j] - ref).max() < 1e-8


def test_limit_ode_grid_refinement_invariance():
    cs = fig1_family()
    coarse = solve_limit_ode(cs, [0.0, 2.5, 5.0], grid_dt=2.0)
    fine = solve_limit_ode(cs, np.linspace(0, 5, 11), grid_dt=2.0)
    assert coarse.S[1, -1] == pytest.approx(fine.S[5, -1], abs=1e-12)


def test_limit_ode_time_varying_source():
    # piecewise p(t): the survival factor integrates it exactly
    cs = ContinuumScenario(
        rescaling=1, domain=(0.0, 1.0), horizon=2.0,
        p=RateField(space=SpaceProfile.const(1.0), time=TimeProfile.piecewise([1.0], [1.0, 0.0])),
        q=RateField.const(2.0), r=RateField.const(0.0),
        S0=SpaceProfile.const(1.0), R0=SpaceProfile.const(0.0),
    )
    fld = solve_limit_ode(cs, [0.5], grid_dt=0.5)
    for j, t in enumerate(fld.times):
        ref = F.homogeneous_bass(1.0, TimeProfile.piecewise([1.0], [1.0, 0.0]),
                                 TimeProfile.const(2.0), t)
        assert fld.S[0, j] == pytest.approx(ref, abs=1e-8)


# ---------------------------------------------------------------------------
# transport PDE
# ---------------------------------------------------------------------------


def test_pde_trivial_fields_keep_s_one():
    cs = ContinuumScenario(rescaling=2, domain=(0.0, 5.0), horizon=1.0,
                           p=RateField.zero(), q=RateField.const(1.0), r=RateField.zero(),
                           I0=SpaceProfile.const(0.0), R0=SpaceProfile.const(0.0))
    fld = solve_limit_pde(cs, dx=0.05, grid_dt=0.5)
    assert np.abs(fld.S - 1.0).max() == 0.0


def test_pde_stays_monotone_in_unit_interval():
    cs = fig2_family()
    fld = solve_limit_pde(cs, dx=0.02, grid_dt=1.0)
    assert fld.S.min() >= 0.0 and fld.S.max() <= 1.0
    assert np.all(np.diff(fld.S, axis=1) <= 1e-12)  # S decays pointwise here


def test_pde_cfl_violation_reports_bound():
    cs = fig2_family()
    bound = pde_stable_dt(cs, dx=0.1)
    with pytest.raises(CFLError, match="need dt"):
        solve_limit_pde(cs, dx=0.1, grid_dt=1.0, dt=2 * bound)


def test_characteristics_formula_values():
    i0 = aff(0.2, 0.05)
    assert pde_characteristics_si(1.0, i0, 0.0, 3.0) == 1.0
    assert pde_characteristics_si(2.0, SpaceProfile.const(0.3), 1.5, 8.0) == pytest.approx(
        math.exp(-0.3 * 3.0), abs=1e-15)
    assert pde_characteristics_si(1.0, i0, 2.0, 5.0) == pytest.approx(
        math.exp(-0.8), abs=1e-15)
    # interval truncated at the inflow boundary
    assert pde_characteristics_si(1.0, i0, 10.0, 2.0) == pytest.approx(
        math.exp(-i0.integral_x(0.0, 2.0)), abs=1e-15)


def test_upwind_converges_to_characteristics():
    cs = ContinuumScenario(rescaling=2, domain=(0.0, 10.0), horizon=2.0,
                           p=RateField.zero(), q=RateField.const(1.0), r=RateField.zero(),
                           I0=aff(0.2, 0.05), R0=SpaceProfile.const(0.0))
    errs, dxs = [], [0.08, 0.04, 0.02, 0.01]
    for dx in dxs:
        fld = solve_limit_pde(cs, dx=dx, grid_dt=2.0)
        ref = pde_characteristics_si(1.0, aff(0.2, 0.05), 2.0, fld.x)
        errs.append(np.abs(fld.snapshot(2.0) - ref).max())
    slope = math.log(errs[0] / errs[-1]) / math.log(dxs[0] / dxs[-1])
    assert slope >= 0.8


# ---------------------------------------------------------------------------
# lattice families and convergence
# ---------------------------------------------------------------------------


def test_lattice_scenario_rescaling2_scalings():
    sc = lattice_scenario(fig2_family(), dx=0.1, horizon=2.0, grid_dt=2.0)
    assert sc.lattice.topology == "semi-infinite"
    p, qL, qR, r = sc.eval_params(10, 0.0)  # x = 1
    assert p == pytest.approx((0.1 + 0.02) * 0.1)
    assert qL == pytest.approx((1.0 + 0.1) / 0.1)
    assert r == pytest.approx(0.3 + 0.05)
    assert sc.init.I0[10] == pytest.approx(0.25 * 0.1)


def test_convergence_fig1_style_errors_shrink():
    res = convergence_study(fig1_family(), [0.5, 0.25], t_snapshot=1.0)
    assert res.sup_error[1] < res.sup_error[0]


def test_convergence_fig2_style_errors_shrink():
    res = convergence_study(fig2_family(), [0.2, 0.05], t_snapshot=1.0)
    assert res.sup_error[1] < res.sup_error[0]


def test_observed_order_near_one():
    res = convergence_study(fig1_family(), [0.4, 0.2, 0.1], t_snapshot=1.0)
    orders = res.observed_orders()
    assert all(0.7 < o < 1.3 for o in orders)


def test_scenario_requirements():
    with pytest.raises(ValueError, match="rescaling"):
        ContinuumScenario(rescaling=3, domain=(0.0, 1.0), horizon=1.0,
                          p=RateField.zero(), q=RateField.const(1.0), r=RateField.zero())
    with pytest.raises(ValueError, match="S0"):
        ContinuumScenario(rescaling=1, domain=(0.0, 1.0), horizon=1.0,
                          p=RateField.zero(), q=RateField.const(1.0), r=RateField.zero())
