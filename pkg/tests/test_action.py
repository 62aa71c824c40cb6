import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parabolic import action as act
from parabolic import potential as pot
from parabolic.errors import BadDomainError, BadWindowError, CollisionNodeError


@pytest.fixture(scope="module")
def kepler():
    return pot.HomogeneousPotential(pot.isotropic(), 1.0)


def straight(n=400, a=(1.0, 0.0), b=(2.0, 0.0), span=(-1.0, 1.0)):
    t = np.linspace(*span, n + 1)
    w = (t - t[0]) / (t[-1] - t[0])
    return act.DiscretePath(t, np.outer(1 - w, a) + np.outer(w, b))


def test_path_validation():
    with pytest.raises(ValueError):
        act.DiscretePath([0, 1], [[1, 0], [2, 0]])
    with pytest.raises(ValueError):
        act.DiscretePath([0, 1, 1], [[1, 0], [2, 0], [3, 0]])
    p = straight(4)
    with pytest.raises(ValueError):
        p.nodes[0, 0] = 5.0


def test_csv_round_trip():
    p = straight(10)
    q = act.DiscretePath.from_csv(p.to_csv())
    np.testing.assert_allclose(q.nodes, p.nodes, rtol=1e-8)
    assert p.to_csv().splitlines()[0] == "t,x1,x2"


def test_collision_node(kepler):
    p = act.DiscretePath([0, 1, 2], [[1, 0], [0, 0], [-1, 0]])
    with pytest.raises(CollisionNodeError):
        act.lagrangian_action(kepler, p)


def test_maupertuis_domain(kepler):
    with pytest.raises(BadDomainError):
        act.maupertuis_J(kepler, straight(span=(0.0, 1.0)))


def test_zero_energy_straight_segment(kepler):
    # radial segment r: 1 -> 2 with U = 1, alpha = 1; the re-timed speed is sqrt(2/r)
    p = act.zero_energy_reparam(kepler, straight())
    exact = act.homothetic_action(1.0, 2.0, 1.0, 1.0)
    assert act.lagrangian_action(kepler, p).total == pytest.approx(exact, rel=1e-4)
    r = p.radii
    v = p.segment_velocities[:, 0]
    mid = 0.5 * (r[1:] + r[:-1])
    np.testing.assert_allclose(v, np.sqrt(2 / mid), rtol=1e-3)
    assert np.max(np.abs(act.energy_residual(kepler, p))) < 1e-3


def test_reparam_idempotent(kepler):
    p = act.zero_energy_reparam(kepler, straight(50))
    q = act.zero_energy_reparam(kepler, p)
    np.testing.assert_allclose(q.times, p.times, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 1.8), st.floats(0.05, 0.9), st.floats(1.1, 20.0))
def test_homothetic_profile_action(alpha, r_minus, r_plus):
    """Equal-action nodes reproduce the closed-form radial action."""
    gamma = 1.3
    p = pot.HomogeneousPotential(pot.FourierPotential(2, xi_minus=(1, 0), xi_plus=(-1, 0), mu=1, delta=0.5, a0=gamma), alpha)
    path = act.homothetic_profile(r_minus, r_plus, gamma, alpha, n=400)
    exact = act.homothetic_action(r_minus, r_plus, gamma, alpha)
    assert act.lagrangian_action(p, path).total == pytest.approx(exact, rel=2e-4)
    assert path.times[-1] == pytest.approx(act.homothetic_half_time(r_minus, r_plus, gamma, alpha))
    np.testing.assert_allclose(act.homothetic_radius(path.times, r_minus, r_plus, gamma, alpha), path.radii, rtol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 1.8), st.floats(0.1, 4.0))
def test_scaling_of_hom(alpha, lam):
    a_star = (2 - alpha) / 2
    h1 = act.homothetic_action(0.3, 2.0, 1.0, alpha)
    h2 = act.homothetic_action(0.3 * lam, 2.0 * lam, 1.0, alpha)
    assert h2 == pytest.approx(lam**a_star * h1, rel=1e-12)


def test_recover_time(kepler):
    path = straight()
    tbar, q = act.recover_time(kepler, path)
    K, P = act._kinetic_potential(kepler, path)
    assert tbar == pytest.approx(math.sqrt(K / P))
    # free-time action equals 2 sqrt(J) at the optimal clock
    assert act.lagrangian_action(kepler, q).total == pytest.approx(2 * math.sqrt(act.maupertuis_J(kepler, path)), rel=1e-10)


def test_maupertuis_circle_value(kepler):
    th = np.linspace(0, 2 * math.pi / 3, 401)
    t = np.linspace(-1, 1, 401)
    path = act.DiscretePath(t, np.column_stack([np.cos(th), np.sin(th)]))
    assert act.maupertuis_J(kepler, path) == pytest.approx((2 * math.pi / 3) ** 2 / 2 * 1.0, rel=1e-4)


def test_bound_above_arc(kepler):
    assert act.bound_above(kepler, [1, 0], [-1, 0], 1.0) == pytest.approx(math.pi * math.sqrt(2))


def test_bound_below_window(kepler):
    path = act.zero_energy_reparam(kepler, straight())
    with pytest.raises(BadWindowError):
        act.bound_below(kepler, path, 1.0, (-0.5, 0.5), (0.0, 1.0))


def test_lagrange_jacobi_on_profile(kepler):
    path = act.homothetic_profile(0.5, 3.0, 1.0, 1.0, n=400)
    res = act.lagrange_jacobi_residual(kepler, path)
    assert np.max(np.abs(res[5:-5])) < 1e-3
    assert np.max(np.abs(act.el_residual(kepler, path)[5:-5])) < 1e-3
