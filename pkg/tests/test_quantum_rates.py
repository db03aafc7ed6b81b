import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import scaled_params, trapped
from oracles import birth_death_mean
from selftrap import closed_forms as cf
from selftrap.equilibrium import solve_equilibrium
from selftrap.errors import NoEquilibriumError
from selftrap.linear_response import cooling_rate
from selftrap.params import ScaledParams
from selftrap.quantum_rates import min_phonon, nmin_from_weights, phonon_rates, transition_rates


@pytest.fixture
def cooling_point():
    p = cf.sr_detunings(math.sqrt(10), 1.0, 0.5).params()
    return solve_equilibrium(p), p


def test_ground_state_rates(cooling_point):
    eq, p = cooling_point
    up, down = transition_rates(0, eq, p)
    assert down == 0.0
    assert up == phonon_rates(eq, p).up_coeff


def test_rates_linear_in_occupancy(cooling_point):
    eq, p = cooling_point
    r = phonon_rates(eq, p)
    up, down = transition_rates(7, eq, p)
    assert up == pytest.approx(8 * r.up_coeff, rel=1e-15)
    assert down == pytest.approx(7 * r.down_coeff, rel=1e-15)


def test_negative_occupancy_rejected(cooling_point):
    with pytest.raises(ValueError):
        transition_rates(-1, *cooling_point)


@given(scaled_params())
def test_large_occupancy_offset_is_exact(p):
    eq = trapped(p)
    assume(eq is not None)
    g = cooling_rate(eq, p).gamma
    r = phonon_rates(eq, p)
    n = 1e6
    up, down = transition_rates(n, eq, p)
    assert (up - down) / n - g == pytest.approx(r.up_coeff / n, rel=1e-6, abs=1e-15 * abs(r.down_coeff))


@given(scaled_params())
def test_classical_limit_recovers_rate(p):
    # the residual up_coeff / n is below 1e-5 |gamma| once nmin is of order one
    eq = trapped(p)
    assume(eq is not None)
    r = phonon_rates(eq, p)
    assume(r.nmin is not None and r.nmin <= 5)
    g = cooling_rate(eq, p).gamma
    up, down = transition_rates(1e6, eq, p)
    assert (up - down) / 1e6 == pytest.approx(g, rel=1e-5)


@given(scaled_params())
def test_detailed_balance_identity(p):
    eq = trapped(p)
    assume(eq is not None)
    r = phonon_rates(eq, p)
    g = cooling_rate(eq, p).gamma
    assert r.net_cooling == pytest.approx(-g, rel=1e-12, abs=1e-300)


def test_floor_limits():
    assert nmin_from_weights(0.0, 1.0) == 0.0
    assert nmin_from_weights(1e-9, 1.0) < 1e-8
    assert nmin_from_weights(1.0 - 1e-9, 1.0) > 1e8
    with pytest.raises(NoEquilibriumError):
        nmin_from_weights(1.0, 1.0)
    with pytest.raises(NoEquilibriumError):
        nmin_from_weights(2.0, 1.0)


def test_heating_point_has_no_floor():
    p = cf.sr_detunings(math.sqrt(10), 1.0, 0.5).params()
    hot = p.with_(delta2=-p.delta2 - 1.0)
    eq = solve_equilibrium(hot)
    assert cooling_rate(eq, hot).gamma > 0
    assert phonon_rates(eq, hot).nmin is None
    with pytest.raises(NoEquilibriumError):
        min_phonon(eq, hot)


@pytest.mark.parametrize("eps2,d1,d2", [(10, -1.0, -4.97), (1.0, -1.0, -2.0), (100, -4.7, -4.3)])
def test_floor_matches_birth_death_chain(eps2, d1, d2):
    p = ScaledParams(eps2=eps2, delta1=d1, delta2=d2)
    eq = solve_equilibrium(p)
    r = phonon_rates(eq, p)
    assert r.nmin == pytest.approx(birth_death_mean(r.up_coeff, r.down_coeff), rel=1e-6)
    assert min_phonon(eq, p) == r.nmin


@given(st.floats(0.5, 100))
def test_floor_consistent_with_report(eps2):
    p = ScaledParams(eps2=eps2, delta1=-1.0, delta2=-3.0)
    eq = solve_equilibrium(p)
    assert cooling_rate(eq, p).nmin == pytest.approx(min_phonon(eq, p), rel=1e-14)
