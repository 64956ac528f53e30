import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import exact_state, random_model, random_state

from qslkit import DomainError, IntegrationError, PureState, SystemModel
from qslkit import dynamics
from qslkit.bounds import qsl_report
from qslkit.operators import ladder, overlap, pauli


def test_evolve_matches_matrix_exponential(rng):
    for d in (2, 3, 4):
        model = random_model(rng, d)
        psi0 = random_state(rng, d)
        traj = dynamics.evolve(model, psi0, 2.0)
        exact = exact_state(model, psi0.rho, 2.0)
        assert traj.times[-1] == 2.0
        last = max(traj.states)
        if last == len(traj.times) - 1:
            assert np.allclose(traj.states[last], exact, atol=1e-9)
        assert traj.overlaps[-1] == pytest.approx(overlap(psi0.rho, exact), abs=1e-9)


def test_grid_lands_on_end_time():
    times = dynamics._grid(1.0, 0.3)
    assert times[-1] == 1.0
    assert np.allclose(times[:-1], [0.0, 0.3, 0.6, 0.9])


def test_step_keeps_density_matrix_properties(rng):
    model = random_model(rng, 3)
    rho = random_state(rng, 3).rho
    for _ in range(200):
        rho = dynamics.rk4_step(model, rho, 0.05)
    assert np.allclose(rho, rho.conj().T)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-14)
    assert np.min(np.linalg.eigvalsh(rho)) > -1e-10


def test_decay_to_ground_state():
    model = SystemModel(2, [], [ladder("minus")])
    traj = dynamics.evolve(model, PureState.basis(0, 2), 20.0)
    # excited population decays as exp(-t)
    assert traj.overlaps[-1] == pytest.approx(math.exp(-20.0), abs=1e-9)


def test_escape_time_dephasing_closed_form():
    model = SystemModel(2, [], [math.sqrt(2.0) * pauli("x")])
    for lam in (0.05, 0.3, 0.6):
        res = dynamics.escape_time(model, PureState.basis(0, 2), lam)
        assert res.escaped
        assert res.time == pytest.approx(-math.log(1 - 2 * lam * lam) / 4, abs=1e-10)


def test_escape_time_closed_system():
    # H = sigma_z rotates |+> at angular speed 2: cos Theta_t = cos^2(t)
    model = SystemModel(2, [pauli("z")], [])
    lam = 0.4
    res = dynamics.escape_time(model, PureState.normalized([1, 1]), lam, t_max=3.0)
    assert res.time == pytest.approx(math.acos(math.sqrt(1 - lam * lam)), abs=1e-10)


def test_not_escaped_for_stationary_state():
    model = SystemModel(2, [pauli("z")], [pauli("z")])
    res = dynamics.escape_time(model, PureState.basis(0, 2), 0.2, t_max=5.0)
    assert not res.escaped and math.isnan(res.time) and res.t_max == 5.0


def test_default_t_max_and_step():
    model = SystemModel(2, [3 * pauli("z")], [math.sqrt(0.5) * pauli("x"), 0 * pauli("x")])
    assert dynamics.default_t_max(model) == pytest.approx(20.0)
    assert dynamics.default_step(model) == pytest.approx(0.01 / 4.5)
    assert dynamics.default_t_max(SystemModel(2, [2 * pauli("z")], [])) == pytest.approx(5.0)
    assert dynamics.default_t_max(SystemModel(2)) == 10.0


def test_argument_validation():
    model = SystemModel(2, [], [pauli("x")])
    psi = PureState.basis(0, 2)
    with pytest.raises(DomainError):
        dynamics.escape_time(model, psi, 0.0)
    with pytest.raises(DomainError):
        dynamics.evolve(model, psi, -1.0)
    with pytest.raises(DomainError):
        dynamics.rk4_step(model, psi.rho, 0.0)


def test_blow_up_is_reported():
    model = SystemModel(2, [1e200 * pauli("z")], [1e100 * pauli("x")])
    with pytest.raises(IntegrationError):
        dynamics.evolve(model, PureState.normalized([1, 1]), 1.0, h=1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1), st.sampled_from([0.05, 0.1, 0.3]))
def test_escape_never_beats_the_bound(d, seed, lam):
    rng = np.random.default_rng(seed)
    model = random_model(rng, d)
    psi0 = random_state(rng, d)
    rep = qsl_report(model, psi0, lam)
    res = dynamics.escape_time(model, psi0, lam, t_max=max(10 * rep.t_dc, 1.0))
    if res.escaped:
        assert res.time >= rep.t_star - 1e-9
        assert res.time >= rep.t_dc - 1e-9
