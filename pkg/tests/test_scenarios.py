import math

import numpy as np
import pytest
import sympy

from qslkit import DomainError
from qslkit import scenarios
from qslkit.bounds import amplitude, excess, qsl_report


@pytest.mark.parametrize(
    "omega, gamma, theta, phi",
    [(1.0, 1.0, 0.0, 0.0), (0.7, 0.3, 0.4, 1.1), (2.0, 0.5, 1.2, 4.0), (0.0, 1.5, 0.9, 2.5), (1.3, 0.0, 0.3, 0.2)],
)
def test_dephasing_reference_matches_definitions(omega, gamma, theta, phi):
    sc = scenarios.two_level_dephasing(omega, gamma, theta, phi)
    assert amplitude(sc.model, sc.psi0) == pytest.approx(sc.reference["amplitude"], abs=1e-12)
    assert excess(sc.model, sc.psi0) == pytest.approx(sc.reference["excess"], abs=1e-12)


def test_dephasing_closed_forms():
    sc = scenarios.two_level_dephasing(0.0, 2.0, 0.0)
    for lam in (0.1, 0.4):
        assert sc.reference_t_star(lam) == pytest.approx(sc.reference["t_star_closed_form"](lam), abs=1e-14)
    closed = scenarios.two_level_dephasing(1.0, 0.0, math.pi / 8)
    assert "escape_time" not in closed.reference
    assert qsl_report(closed.model, closed.psi0, 0.2).t_star == pytest.approx(
        closed.reference["t_star_closed_form"](0.2), abs=1e-12
    )


def test_dephasing_argument_checks():
    with pytest.raises(DomainError):
        scenarios.two_level_dephasing(theta=2.0)
    with pytest.raises(DomainError):
        scenarios.two_level_dephasing(gamma=-1.0)


@pytest.mark.parametrize("omega, gamma", [(1.0, 1.0), (0.3, 2.0), (0.0, 0.7)])
def test_decay_reference_matches_definitions(omega, gamma):
    sc = scenarios.two_level_decay(omega, gamma)
    assert amplitude(sc.model, sc.psi0) == pytest.approx(sc.reference["amplitude"], abs=1e-12)
    assert excess(sc.model, sc.psi0) == pytest.approx(sc.reference["excess"], abs=1e-12)


def test_qutrit_reference_against_sympy():
    g = sympy.symbols("gamma", positive=True)
    psi = sympy.Matrix([sympy.Rational(1, 2), 1 / sympy.sqrt(2), sympy.Rational(1, 2)])
    rho = psi * psi.T
    m = sympy.sqrt(g) * sympy.Matrix([[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    adj = m.T * rho * m - (m.T * m * rho + rho * m.T * m) / 2
    a = sympy.sqrt(2) * sympy.sqrt(sum(x**2 for x in adj))
    e = (psi.T * m.T * m * psi)[0] - ((psi.T * m * psi)[0]) ** 2
    sc = scenarios.qutrit_ladder(0.8)
    assert sc.reference["amplitude"] == pytest.approx(float(a.subs(g, 0.8)), abs=1e-14)
    assert sc.reference["excess"] == pytest.approx(float(e.subs(g, 0.8)), abs=1e-14)
    assert amplitude(sc.model, sc.psi0) == pytest.approx(sc.reference["amplitude"], abs=1e-12)


@pytest.mark.parametrize("collective", [True, False])
def test_bell_reference_matches_definitions(collective):
    for sc in scenarios.bell_scenarios(1.7, collective):
        assert amplitude(sc.model, sc.psi0) == pytest.approx(sc.reference["amplitude"], abs=1e-12)
        assert excess(sc.model, sc.psi0) == pytest.approx(sc.reference["excess"], abs=1e-12)


def test_bell_closed_forms():
    phi_plus, _, psi_plus, _ = scenarios.bell_scenarios(2.0, True)
    for lam in (0.05, 0.5, 1.0):
        assert phi_plus.reference_t_star(lam) == pytest.approx(phi_plus.reference["t_star_closed_form"](lam))
        assert psi_plus.reference_t_star(lam) == pytest.approx(psi_plus.reference["t_star_closed_form"](lam))


def test_ensemble_states():
    prod, ghz = scenarios.ensemble_scenarios(3, 0.5)
    assert np.allclose(np.abs(prod.psi0.amplitudes) ** 2, 1 / 8)
    assert abs(ghz.psi0.amplitudes[0]) == pytest.approx(1 / math.sqrt(2))
    assert prod.model is ghz.model
    with pytest.raises(DomainError):
        scenarios.ensemble_scenarios(13)
    with pytest.raises(DomainError):
        scenarios.ensemble_scenarios(2.5)


def test_registry_builds_everything():
    for name in scenarios.REGISTRY:
        built = scenarios.build(name)
        assert built and all(isinstance(s, scenarios.Scenario) for s in built)
    assert len(scenarios.build("bell-collective")) == 4
    assert len(scenarios.build("ensemble", n=4)) == 2
    with pytest.raises(DomainError):
        scenarios.build("nope")
    with pytest.raises(DomainError):
        scenarios.build("ensemble", omega=1.0)
