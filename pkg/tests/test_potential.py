import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parabolic import potential as pot
from parabolic.errors import BadExponentError, BadTopologyError, NotUnitError, ZeroRadiusError

angles = st.floats(0, 2 * math.pi, allow_nan=False)
alphas = st.floats(0.05, 1.95)
radii = st.floats(0.05, 50.0)


def test_named_values(devaney, barrier50):
    assert devaney.eval(np.array([1.0, 0.0])) == pytest.approx(1.0)
    assert devaney.eval(np.array([0.0, 1.0])) == pytest.approx(3.0)
    assert barrier50.eval(np.array([0.0, 1.0])) == pytest.approx(51.0)
    assert barrier50.v_min == pytest.approx(1.0, abs=1e-6)


def test_exponent_range(devaney):
    for a in (0.0, 2.0, -1.0, 2.5):
        with pytest.raises(BadExponentError):
            pot.HomogeneousPotential(devaney, a)


def test_zero_radius(devaney):
    p = pot.HomogeneousPotential(devaney, 1.0)
    with pytest.raises(ZeroRadiusError):
        p.value(np.zeros(2))


def test_tangential_grad(devaney):
    p = pot.HomogeneousPotential(devaney, 0.8)
    with pytest.raises(NotUnitError):
        pot.tangential_grad(p, np.array([2.0, 0.0]))
    np.testing.assert_allclose(pot.tangential_grad(p, p.angular.xi_minus), 0.0, atol=1e-12)
    s = np.array([math.cos(math.pi / 4), math.sin(math.pi / 4)])
    g = pot.tangential_grad(p, s)
    assert np.linalg.norm(g) == pytest.approx(2.0)
    assert abs(g @ s) < 1e-10
    # ambient gradient minus its radial part
    np.testing.assert_allclose(g, pot.grad_V(p, s) + 0.8 * pot.eval_V(p, s) * s, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(angles, alphas, radii)
def test_euler_identity(theta, alpha, r):
    p = pot.HomogeneousPotential(pot.devaney(), alpha)
    x = r * np.array([math.cos(theta), math.sin(theta)])
    assert p.gradient(x) @ x == pytest.approx(-alpha * p.value(x), rel=1e-10, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(angles, alphas, radii, st.floats(0.1, 10.0))
def test_homogeneity(theta, alpha, r, lam):
    p = pot.HomogeneousPotential(pot.barrier50(), alpha)
    x = r * np.array([math.cos(theta), math.sin(theta)])
    assert p.value(lam * x) == pytest.approx(lam**-alpha * p.value(x), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(angles)
def test_tangential_gradient_matches_finite_differences(theta):
    u = pot.barrier50()
    s = np.array([math.cos(theta), math.sin(theta)])
    np.testing.assert_allclose(u.grad(s), u.fd_grad(s), atol=1e-5 * 50)
    assert abs(u.grad(s) @ s) < 1e-12


def test_quadratic_gradient_fd():
    u = pot.barrier3d()
    pts = pot.sphere_points(3, 50)
    for s in pts:
        np.testing.assert_allclose(u.grad(s), u.fd_grad(s), atol=1e-6)


@pytest.mark.parametrize("dim,n", [(2, 16), (3, 200), (4, 64)])
def test_sphere_points_are_unit(dim, n):
    pts = pot.sphere_points(dim, n)
    assert pts.shape == (n, dim)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)


def test_validate_named(devaney, barrier50, iso):
    assert pot.validate_class_S(devaney).passed
    assert pot.validate_class_S(barrier50).passed
    rep = pot.validate_class_S(iso)
    assert not rep.passed
    assert any("growth" in f for f in rep.failures)


def test_validate_rejects_unequal_marked_points():
    u = pot.FourierPotential(2, xi_minus=(1, 0), xi_plus=(0, 1), mu=1.0, delta=0.5, a0=2, a=(0, -1))
    assert not pot.validate_class_S(u).passed


def test_sigma_criterion(barrier50, devaney, iso):
    rep = pot.sigma_criterion(barrier50, 25.0)
    assert rep.holds
    assert rep.lhs > rep.rhs == pytest.approx(2 * math.sqrt(2))
    assert not pot.sigma_criterion(devaney, 2.0).holds
    with pytest.raises(BadTopologyError):
        pot.sigma_criterion(iso, 5.0)


def test_sigma_criterion_3d():
    assert pot.sigma_criterion(pot.barrier3d(), 10.0).holds


def test_load_potential_forms(tmp_path):
    doc = {"kind": "fourier", "coeffs": [2, 0, 0, -1, 0], "xi_minus": [1, 0], "xi_plus": [-1, 0],
           "mu": 1.0, "delta": 0.5, "alpha": 0.7}
    f = tmp_path / "u.json"
    f.write_text(json.dumps(doc))
    p = pot.load_potential(f)
    q = pot.load_potential("devaney", 0.7)
    assert p.alpha == 0.7
    for th in np.linspace(0, 6, 7):
        s = np.array([math.cos(th), math.sin(th)])
        assert p.angular.eval(s) == pytest.approx(q.angular.eval(s))
    assert pot.load_potential(f, alpha=1.2).alpha == 1.2
    with pytest.raises(ValueError):
        pot.load_potential({"kind": "named", "name": "nope"}, 1.0)
