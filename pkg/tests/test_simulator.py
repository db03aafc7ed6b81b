import csv
import io
import math

import numpy as np
import pytest
from hypothesis import assume, given

from conftest import scaled_params, trapped
from oracles import relaxing_field
from selftrap import closed_forms as cf
from selftrap.equilibrium import solve_equilibrium
from selftrap.errors import DivergenceError, FitRejectedError, StiffnessError
from selftrap.linear_response import cooling_rate
from selftrap.params import ScaledParams
from selftrap.simulator import (
    CSV_HEADER, SimState, StepControl, Trajectory, derivative, extract_rate, integrate,
    run_length, simulate_rate, state_derivative,
)
from selftrap.sweeps import equilibrium_from_effective


@given(scaled_params())
def test_equilibrium_is_fixed_point_of_equations(p):
    eq = trapped(p)
    assume(eq is not None)
    y = SimState.at_equilibrium(eq).to_array()
    f = derivative(y, p)
    assert np.max(np.abs(f)) <= 1e-10 * max(1.0, np.max(np.abs(y)), p.eps2 * (eq.n1 + eq.n2))


def test_no_force_without_drive():
    p = ScaledParams(eps2=0.0, delta1=-1.0, delta2=-2.0)
    s = SimState(0.3, 0.0, 0.5 + 0.1j, 0.2j)
    assert state_derivative(s, p).p == 0.0


def test_undriven_field_stays_empty():
    p = ScaledParams(eps2=1.0, delta1=-1.0, delta2=-2.0, drive_ratio=0.0)
    ds = state_derivative(SimState(0.1, 0.2, 0.3 + 0.4j, 0j), p)
    assert ds.a2 == 0


def test_state_array_round_trip():
    s = SimState(0.1, -0.2, 0.3 - 0.4j, 0.5 + 0.6j)
    assert SimState.from_array(s.to_array()) == s


def test_equilibrium_start_stays_put():
    p = cf.sr_detunings(math.sqrt(10), 1.0, 0.5).params()
    eq = solve_equilibrium(p)
    traj = integrate(SimState.at_equilibrium(eq), p, 50.0, eq=eq)
    assert np.max(np.abs(traj.x - eq.x0)) < 1e-8


@pytest.mark.parametrize("ctrl", [StepControl(rtol=1e-11, atol=1e-13), StepControl(h=1e-3)])
def test_free_field_relaxation(ctrl):
    # no force: x stays put and each field relaxes like a driven damped oscillator
    p = ScaledParams(eps2=0.0, delta1=-2.0, delta2=0.5, kappaA=0.7, drive_ratio=0.5)
    x0 = 0.2
    traj = integrate(SimState(x0, 0.0, 0j, 0j), p, 10.0, ctrl)
    d1x = p.delta1 + math.cos(x0) ** 2
    d2x = p.delta2 + math.cos(x0 - p.phase) ** 2
    ref1 = relaxing_field(traj.times, d1x, p.kappaA)
    ref2 = relaxing_field(traj.times, d2x, p.kappaA, drive=0.5)
    mask = traj.times > 0.1
    assert np.all(traj.x == x0)
    np.testing.assert_allclose(traj.a1[mask], ref1[mask], rtol=1e-6)
    np.testing.assert_allclose(traj.a2[mask], ref2[mask], rtol=1e-6)


def test_rk4_global_error_is_fourth_order():
    p = ScaledParams(eps2=0.0, delta1=-2.0, delta2=0.5, kappaA=1.0)
    t_end = 4.0
    ref = relaxing_field(t_end, p.delta1 + 1.0, p.kappaA)
    errs = []
    for h in (0.1, 0.05, 0.025):
        traj = integrate(SimState(0.0, 0.0, 0j, 0j), p, t_end, StepControl(h=h))
        errs.append(abs(traj.a1[-1] - ref))
    for a, b in zip(errs, errs[1:]):
        assert a / b == pytest.approx(16, rel=0.2)


def test_sampled_output_tracks_dense_solution():
    p = cf.sr_detunings(math.sqrt(10), 1.0, 0.5).params()
    eq = solve_equilibrium(p)
    init = SimState.at_equilibrium(eq, 0.05)
    coarse = integrate(init, p, 5.0, StepControl(sample_dt=0.01, rtol=1e-10, atol=1e-13))
    dense = integrate(init, p, 5.0, StepControl(h=1e-3, stride=10))
    n = min(len(coarse.times), len(dense.times))
    np.testing.assert_allclose(coarse.times[:n], dense.times[:n], atol=1e-9)
    # the first field transient sits in the first ~1/kappa; it must be resolved
    np.testing.assert_allclose(coarse.states[:n], dense.states[:n], atol=1e-8)


def test_runs_are_deterministic():
    p = cf.sr_detunings(math.sqrt(10), 1.0, 0.5).params()
    eq = solve_equilibrium(p)
    a = integrate(SimState.at_equilibrium(eq, 0.01), p, 20.0, eq=eq)
    b = integrate(SimState.at_equilibrium(eq, 0.01), p, 20.0, eq=eq)
    assert np.array_equal(a.states, b.states)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_is_reported():
    # a step far outside the RK4 stability region blows the fields up
    p = ScaledParams(eps2=10.0, delta1=-5.0, delta2=-2.0)
    with pytest.raises(DivergenceError) as info:
        integrate(SimState(0.1, 0.0, 0j, 0j), p, 1e4, StepControl(h=5.0))
    assert info.value.last_good_time >= 0


def test_step_underflow_is_stiffness():
    p = ScaledParams(eps2=100.0, delta1=-1.0, delta2=-2.0)
    with pytest.raises(StiffnessError):
        integrate(SimState(0.3, 0.0, 0j, 0j), p, 10.0, StepControl(h_min=1.0, h_init=2.0, rtol=1e-12))


def test_step_budget_is_stiffness():
    p = ScaledParams(eps2=10.0, delta1=-1.0, delta2=-2.0)
    with pytest.raises(StiffnessError):
        integrate(SimState(0.3, 0.0, 0j, 0j), p, 100.0, StepControl(max_steps=10))


def test_nonpositive_duration_rejected():
    p = ScaledParams(eps2=1.0, delta1=0.0, delta2=0.0)
    with pytest.raises(ValueError):
        integrate(SimState(0.0, 0.0, 0j, 0j), p, 0.0)


# -- rate fitting --

def manufactured(gamma_amp=-0.05, w=3.0, n=4000, t_end=60.0, x0=0.2):
    t = np.linspace(0, t_end, n)
    env = 0.01 * np.exp(gamma_amp * t)
    x = x0 + env * np.cos(w * t)
    v = env * (gamma_amp * np.cos(w * t) - w * np.sin(w * t))
    states = np.zeros((n, 6))
    states[:, 0], states[:, 1] = x, v
    return Trajectory(times=t, states=states, x0=x0, omegaM2=w * w)


def test_fit_recovers_manufactured_rate():
    fit = extract_rate(manufactured())
    assert fit.gamma_num == pytest.approx(-0.10, abs=1e-3)
    assert fit.r_squared > 0.99


def test_fit_rejects_noise():
    traj = manufactured(gamma_amp=0.0)
    rng = np.random.default_rng(0)
    traj.states[:, 0] = traj.x0 + rng.normal(scale=0.01, size=len(traj.times))
    with pytest.raises(FitRejectedError):
        extract_rate(traj)


def test_fit_rejects_short_window():
    with pytest.raises(FitRejectedError):
        extract_rate(manufactured(n=50), t_skip=59.0)


def test_fit_needs_trap_centre():
    traj = manufactured()
    traj.x0 = None
    with pytest.raises(ValueError):
        extract_rate(traj)


def test_run_length_rules():
    assert run_length(2 * math.pi, -1.0) == (40.0, False)
    assert run_length(1.0, -0.01) == (500.0, False)
    assert run_length(1.0, -1e-6) == (1e4, True)


def test_sr_point_decay_matches_linear_rate():
    p = cf.sr_detunings(math.sqrt(10), 1.0, 0.5).params()
    traj, fit, rep = simulate_rate(p, dx=0.01)
    assert traj.energy[-1] < traj.energy[0]
    assert fit.gamma_num == pytest.approx(rep.gamma, rel=0.1)


def test_weak_drive_r2_point_agrees_with_linear_rate():
    p = cf.sr_detunings(math.sqrt(0.5), 1.0, 0.5).params()
    _, fit, rep = simulate_rate(p)
    assert fit.gamma_num == pytest.approx(rep.gamma, rel=0.1)


def test_blue_detuned_mirror_heats():
    base = cf.sr_detunings(math.sqrt(0.5), 1.0, 0.5).params()
    eq = solve_equilibrium(base)
    eq_hot, p_hot = equilibrium_from_effective(-eq.d1x, -eq.d2x, base)
    assert cooling_rate(eq_hot, p_hot).gamma > 0
    _, fit, _ = simulate_rate(p_hot, dx=0.001, eq=eq_hot)
    assert fit.gamma_num > 0


def test_trajectory_csv():
    traj = manufactured(n=20)
    buf = io.StringIO()
    traj.to_csv(buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 21
    assert float(rows[5][1]) == traj.x[4]
    assert float(rows[5][7]) == traj.energy[4]


def test_trajectory_shape_checked():
    with pytest.raises(ValueError):
        Trajectory(times=np.zeros(3), states=np.zeros((2, 6)))
