import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stt_wall import walker as wk
from stt_wall.drive import DriveProgram
from stt_wall.units import cobalt, derived_scales

W0 = math.sqrt(2 * 2e-6 / (1446 * 500)) * 1e-2
GAMMA, MS = 1.9e7, 1446.0


@pytest.fixture
def co8():
    return cobalt(alpha=0.008)


def test_rhs_fixed_point(co):
    assert wk.walker_rhs(0.0, 0.0, 0.0, co) == 0.0


def test_rhs_initial_torque(co8):
    a = 0.008
    expected = -a * 750e2 * (1 / (W0 * 1e2)) / (1 + a * a)  # cgs: b in cm/s, c in 1/cm
    assert wk.walker_rhs(0.0, -750.0, 0.0, co8) == pytest.approx(expected, rel=1e-12)


def test_rhs_zero_at_stationary_angle(co8):
    a = wk.asymptotics(co8, -750.0)
    rate = wk.walker_rhs(a.phi_inf, -750.0, 0.0, co8)
    scale = 4 * math.pi * 0.008 * GAMMA * MS
    assert abs(rate) < 1e-10 * scale


@pytest.mark.parametrize("b", [-750.0, 300.0, 0.0])
@pytest.mark.parametrize("alpha", [0.008, 0.02])
def test_initial_velocity_current(b, alpha):
    m = cobalt(alpha)
    assert wk.wall_velocity(0.0, b, 0.0, m) == pytest.approx(-b / (1 + alpha**2), rel=1e-12, abs=1e-12)


def test_initial_velocity_field(co):
    a = co.alpha
    expected = GAMMA * a * 10.0 * W0 / (1 + a * a)
    assert wk.wall_velocity(0.0, 0.0, 10.0, co) == pytest.approx(expected, rel=1e-12)


def test_stationary_field_velocity(co):
    a = wk.asymptotics(co, 0.0, 10.0)
    c = wk.inverse_width(a.phi_inf, co)
    assert wk.wall_velocity(a.phi_inf, 0.0, 10.0, co) == pytest.approx(GAMMA * 10.0 / (c * co.alpha), rel=1e-9)
    assert a.v_s == pytest.approx(GAMMA * 10.0 / (c * co.alpha), rel=1e-12)


def test_initial_state(co):
    s = wk.initial_state(co)
    assert (s.phi, s.x, s.t) == (0.0, 0.0, 0.0)
    assert s.c == pytest.approx(1 / W0, rel=1e-12)


def test_null_drive(co):
    sol = wk.integrate_walker(wk.initial_state(co), DriveProgram.constant(1e-9), co)
    assert np.all(sol.phi == 0) and np.all(sol.x == 0)
    assert sol.converged


def test_fig5_walker(co8):
    sol = wk.integrate_walker(wk.initial_state(co8), DriveProgram.constant(5e-9, -750.0), co8)
    assert sol.v[0] == pytest.approx(750 / (1 + 0.008**2), rel=1e-12)
    assert sol.converged
    a = wk.asymptotics(co8, -750.0)
    assert sol.terminal.x == pytest.approx(a.x_max, rel=1e-3)
    # closed-form small-torque estimates: phi ~ b/(4 pi gamma Ms W0), x ~ -b/(4 pi gamma alpha Ms)
    assert a.x_max_small == pytest.approx(274e-9, rel=0.02)
    assert math.sin(a.phi_inf_small) == pytest.approx(-0.093, rel=0.02)
    assert a.x_max == pytest.approx(309.48e-9, rel=1e-3)
    assert math.sin(a.phi_inf) == pytest.approx(-0.1122, rel=1e-3)


def test_constraint_preserved(co):
    sol = wk.integrate_walker(wk.initial_state(co), DriveProgram.constant(1e-9, -600.0, 5.0), co)
    lhs = sol.c**2
    rhs = (co.Ms_cgs / (2 * co.A_cgs) * (co.H_K + co.four_pi_Ms * np.sin(sol.phi) ** 2)) * 1e4
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12)


def test_x_is_integral_of_v(co):
    sol = wk.integrate_walker(wk.initial_state(co), DriveProgram.constant(1e-9, -600.0, 5.0), co)
    x_trap = np.concatenate([[0], np.cumsum(0.5 * (sol.v[1:] + sol.v[:-1]) * np.diff(sol.t))])
    assert np.max(np.abs(x_trap - sol.x)) < 1e-3 * np.max(np.abs(sol.x))
    assert np.all(np.diff(sol.t) > 0)


def test_reject_inconsistent_initial(co):
    bad = wk.WalkerState(0.1, 1 / W0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        wk.integrate_walker(bad, DriveProgram.constant(1e-10), co)


def test_monotone_charging(co):
    sol = wk.integrate_walker(wk.initial_state(co), DriveProgram.constant(2e-9, -600.0), co)
    assert np.all(np.diff(np.abs(sol.phi)) >= -1e-15)
    assert np.all(np.diff(np.abs(sol.v)) <= 1e-9)
    assert abs(sol.v[0]) == pytest.approx(600 / (1 + 0.02**2))
    assert abs(sol.v[-1]) < 1.0


@settings(max_examples=15, deadline=None)
@given(st.floats(-1000, 1000), st.floats(-20, 20))
def test_sign_antisymmetry(b, H):
    m = cobalt(0.02)
    d = DriveProgram.constant(0.3e-9, b, H)
    s1 = wk.integrate_walker(wk.initial_state(m), d, m)
    s2 = wk.integrate_walker(wk.initial_state(m), d.scaled(-1, -1), m)
    np.testing.assert_allclose(s2.phi, -s1.phi, atol=1e-14)
    np.testing.assert_allclose(s2.x, -s1.x, atol=1e-20)


def test_fourth_order(co):
    drive = DriveProgram.constant(0.2e-9, -800.0, 10.0)
    ref = wk.integrate_walker(wk.initial_state(co), drive, co, dt=0.0125e-12)
    errs = []
    for h in (0.8e-12, 0.4e-12):
        s = wk.integrate_walker(wk.initial_state(co), drive, co, dt=h)
        errs.append(abs(s.phi[-1] - ref.phi[-1]))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.2)


def test_convergence_flag_ignores_pending_switch(co):
    sol = wk.integrate_walker(wk.initial_state(co), DriveProgram.pulse(3e-9, 2.5e-9, b_J=-300.0), co)
    assert sol.converged_at is None or sol.converged_at > 2.5e-9


def test_critical_torque_closed_form(co):
    crit = wk.critical_torque(co)
    assert crit.b_c == pytest.approx(922, rel=0.01)
    sin2 = 500 / (1000 + co.four_pi_Ms)
    assert math.sin(crit.phi_c) ** 2 == pytest.approx(sin2, rel=1e-12)
    # true maximum of the balanced torque, found by brute force
    phis = np.linspace(0, math.pi / 2, 200001)
    tq = wk.stationary_torque(phis, co)
    assert crit.b_max == pytest.approx(tq.max(), rel=1e-8)
    assert crit.phi_max == pytest.approx(phis[tq.argmax()], abs=1e-4)
    assert crit.b_max == pytest.approx(1142.02, rel=1e-5)


def test_critical_double_root_at_phi_c(co):
    # the stationary relation should touch b_c tangentially at phi_c
    crit = wk.critical_torque(co)
    h = 1e-6
    slope = (wk.stationary_torque(crit.phi_c + h, co) - wk.stationary_torque(crit.phi_c - h, co)) / (2 * h)
    assert abs(slope) < 1e-3 * crit.b_c


def test_zero_anisotropy_limit(co):
    soft = co.with_(H_K=1e-6)
    crit = wk.critical_torque(soft)
    assert crit.phi_c < 1e-3
    assert crit.b_c == pytest.approx(crit.b_c_approx, rel=1e-3)


def test_above_bc_does_not_converge(co):
    crit = wk.critical_torque(co)
    b = -1.02 * crit.b_c
    sol = wk.integrate_walker(wk.initial_state(co), DriveProgram.constant(5e-9, b), co)
    assert not sol.converged
    assert np.max(np.abs(sol.phi)) > crit.phi_c


def test_above_bmax_precesses(co):
    crit = wk.critical_torque(co)
    sol = wk.integrate_walker(wk.initial_state(co), DriveProgram.constant(5e-9, -1.05 * crit.b_max), co)
    assert not sol.converged
    assert np.max(np.abs(sol.phi)) > math.pi


def test_asymptotics_trivial(co):
    a = wk.asymptotics(co, 0.0)
    assert (a.phi_inf, a.x_max) == (0.0, 0.0)
    assert a.width_ratio == pytest.approx(1.0, rel=1e-14)


def test_asymptotics_small_torque_limit(co):
    ratios = [wk.asymptotics(co, b).phi_inf / wk.asymptotics(co, b).phi_inf_small for b in (200, 50, 5)]
    assert abs(ratios[2] - 1) < abs(ratios[1] - 1) < abs(ratios[0] - 1)
    assert ratios[2] == pytest.approx(1, abs=1e-4)
    a = wk.asymptotics(co, 20.0)
    assert 1 - a.width_ratio == pytest.approx(1 - a.width_ratio_small, rel=1e-3)


def test_asymptotics_beyond_bmax(co):
    with pytest.raises(wk.NoStationarySolution):
        wk.asymptotics(co, 1.01 * wk.critical_torque(co).b_max)


def test_terminal_velocity_independent_of_torque(co):
    vs = []
    for b in (-800.0, -400.0, 0.0, 300.0):
        sol = wk.integrate_walker(wk.initial_state(co), DriveProgram.constant(4e-9, b, 10.0), co)
        assert sol.converged
        vs.append(sol.terminal.v)
        assert sol.terminal.v == pytest.approx(wk.asymptotics(co, b, 10.0).v_s, rel=1e-4)
    spread = (max(vs) - min(vs)) / np.mean(vs)
    assert spread < 0.005


def test_wall_energy_static(co):
    # 2 sqrt(2 A H_K Ms) erg/cm^2 -> J/m^2
    expected = 2 * math.sqrt(2 * 2e-6 * 500 * 1446) * 1e-3
    assert wk.wall_energy(0.0, co) == pytest.approx(expected, rel=1e-12)


def test_inductance_small_torque(co):
    b = 30.0
    a = wk.asymptotics(co, b)
    exact = wk.wall_energy(a.phi_inf, co) - wk.wall_energy(0.0, co)
    L, dE = wk.wall_energy_delta(co, b)
    assert dE == pytest.approx(exact, rel=1e-3)
    assert wk.wall_energy_delta(co, 0.0)[1] == 0.0
    assert wk.wall_energy_delta(co, 2 * b)[1] == pytest.approx(4 * dE)


def test_inductance_warns_at_large_torque(co):
    with pytest.warns(UserWarning):
        wk.wall_energy_delta(co, 600.0)


def test_energy_bookkeeping(co):
    b = -0.1 * derived_scales(co).b_c
    drive = DriveProgram.constant(3e-9, b)
    sol = wk.integrate_walker(wk.initial_state(co), drive, co)
    assert sol.converged
    rate = wk.solution_energy_rate(sol, drive)
    pumped = np.trapezoid(rate, sol.t)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        _, dE = wk.wall_energy_delta(co, b)
    assert pumped == pytest.approx(dE, rel=0.01)


def test_recoil_returns_home(co):
    sol = wk.integrate_walker(wk.initial_state(co), DriveProgram.constant(3e-9, -600.0), co)
    back = wk.recoil(sol.terminal, co, duration=3e-9)
    assert back.v[0] == pytest.approx(-600.0 / (1 + co.alpha**2), rel=1e-3)
    assert abs(back.terminal.x) < 0.02 * sol.terminal.x
    still = wk.recoil(wk.initial_state(co), co, duration=1e-9)
    assert np.all(still.x == 0)


def test_columns(co):
    sol = wk.integrate_walker(wk.initial_state(co), DriveProgram.constant(1e-10, -100.0), co)
    assert list(sol.columns()) == ["t_s", "phi_rad", "W_m", "v_m_per_s", "x_m"]
    assert len(sol.samples) == len(sol.t)
