import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parabolic import morse
from parabolic import potential as pot
from parabolic.errors import BadBracketError, EnergyDriftError

FAST = morse.SolverSettings(grid_size=200, restarts=4)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 1.95), st.floats(0.5, 5.0))
def test_m_zero_closed_form(alpha, a0):
    u = pot.FourierPotential(2, xi_minus=(1, 0), xi_plus=(-1, 0), mu=1, delta=0.5, a0=a0)
    p = pot.HomogeneousPotential(u, alpha)
    assert morse.m_zero(p) == pytest.approx(4 * math.sqrt(2 * a0) / (2 - alpha), rel=1e-6)


def test_gamma_schedule_checks():
    p = pot.HomogeneousPotential(pot.devaney(), 0.5)
    with pytest.raises(ValueError):
        morse.gamma_zero_plus(p, (0.4, 0.2))
    with pytest.raises(ValueError):
        morse.gamma_zero_plus(p, (0.1, 0.2, 0.05))
    with pytest.raises(ValueError):
        morse.gamma(p, 1.5)


def test_isotropic_gamma_negative():
    p = pot.HomogeneousPotential(pot.isotropic(), 1.0)
    g = morse.gamma(p, 0.1, FAST)
    # legs contribute -4 sqrt 2, the arc near the obstacle between 2 sqrt 2 and pi sqrt 2
    assert -4 * math.sqrt(2) <= g <= (math.pi - 4) * math.sqrt(2)


def test_classify_in_and_out():
    c_in = morse.classify(pot.HomogeneousPotential(pot.devaney(), 0.5), settings=FAST)
    c_out = morse.classify(pot.HomogeneousPotential(pot.devaney(), 1.0), settings=FAST)
    assert c_in.verdict == morse.IN and not c_in.inconsistent
    assert c_out.verdict == morse.OUT and not c_out.inconsistent
    assert c_out.dichotomy_case == 2
    assert c_in.to_dict()["gamma_curve"][0][0] == 0.4


def test_find_alpha_bar_rejects_bad_bracket():
    with pytest.raises(BadBracketError):
        morse.find_alpha_bar(pot.devaney(), (1.0, 0.5))
    with pytest.raises(BadBracketError):
        morse.find_alpha_bar(pot.devaney(), (0.3, 0.5), eps_schedule=(0.4, 0.2, 0.1), radii=(5, 10, 20), settings=FAST)


def test_radial_asymptotics():
    p = pot.HomogeneousPotential(pot.devaney(), 1.0)
    tr = morse.integrate_zero_energy(p, p.angular.xi_minus, t_end=1e3)
    d = morse.asymptotic_diagnostics(p, tr)
    assert 0.99 <= d.k_ratio <= 1.01
    assert d.exponent_fit == pytest.approx(2 / 3, abs=1e-2)
    assert d.energy_drift < 1e-8


def test_energy_drift_guard():
    p = pot.HomogeneousPotential(pot.devaney(), 1.0)
    with pytest.raises(EnergyDriftError):
        morse.integrate_zero_energy(p, [1.0, 0.3], t_end=50, dtau=0.5)
