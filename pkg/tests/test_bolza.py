import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parabolic import action as act
from parabolic import bolza as bz
from parabolic import potential as pot
from parabolic.errors import InfeasibleEndpointsError, NoContactError


def solve(p, x1, x2, eps, n=400, **kw):
    return bz.minimize_bolza(bz.BolzaProblem(p, x1, x2, eps, grid_size=n, **kw))


@pytest.fixture(scope="module")
def kepler():
    return pot.HomogeneousPotential(pot.isotropic(), 1.0)


def test_problem_validation(kepler):
    with pytest.raises(InfeasibleEndpointsError):
        bz.BolzaProblem(kepler, [0.5, 0], [-1, 0], 1.0)
    with pytest.raises(ValueError):
        bz.BolzaProblem(kepler, [1, 0], [1, 0], 1.0)
    prob = bz.BolzaProblem(kepler, [1, 0], [-1, 0], 0.1, grid_size=400)
    assert prob.jump_tol == pytest.approx(0.025)
    assert prob.contact_tol == pytest.approx(1e-6 + 2.5e-5)


def test_arc_on_unit_obstacle(kepler):
    sol = solve(kepler, [1, 0], [-1, 0], 1.0, n=200)
    assert sol.action == pytest.approx(math.pi * math.sqrt(2), rel=1e-3)
    assert sol.constraint_active
    assert sol.kind == bz.POSITION_JUMPING


def test_radial_reflection_matches_hom():
    p = pot.HomogeneousPotential(pot.devaney(), 1.0)
    xi = p.angular.xi_minus
    sol = solve(p, xi, 0.1 * xi, 0.1)
    assert sol.action == pytest.approx(act.homothetic_action(0.1, 1.0, 1.0, 1.0), rel=5e-3)
    assert np.max(np.abs(sol.path.directions - xi)) < 1e-6


def test_velocity_jumping_instance():
    p = pot.HomogeneousPotential(pot.isotropic(), 1.0)
    sol = solve(p, [1, 0], [-1, 0], 0.1)
    assert sol.kind == bz.VELOCITY_JUMPING
    assert min(sol.delta_pos, sol.delta_vel) < sol.jump_tol
    assert sol.delta_vel > 1.0
    rep = bz.kelvin_regularity_check(sol)
    assert rep.case == "reflection" and rep.consistent
    assert rep.tangential_defect < 1e-2
    assert rep.radial_antisymmetry_defect < 1e-2
    assert sol.residuals["energy_max"] < 1e-6


def test_rescale_matches_resolve():
    p = pot.HomogeneousPotential(pot.devaney(), 1.0)
    base = solve(p, [1, 0], [-1, 0], 0.2, n=200)
    big = solve(p, [4, 0], [-4, 0], 0.8, n=200)
    scaled = bz.rescale_solution(base, 4.0)
    assert scaled.action == pytest.approx(big.action, rel=1e-3)
    assert scaled.delta_vel == pytest.approx(big.delta_vel, abs=1e-3)
    assert scaled.delta_pos == pytest.approx(big.delta_pos, abs=1e-3)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-2))
def test_kelvin_involution(x):
    x = np.array(x)
    np.testing.assert_allclose(bz.kelvin_transform(bz.kelvin_transform(x)), x, rtol=1e-12)
    J = bz.kelvin_jacobian(x)
    r2 = x @ x
    np.testing.assert_allclose(r2 * r2 * J @ J.T, np.eye(3), atol=1e-10)


def test_contact_interval_synthetic():
    t = np.linspace(-1, 1, 41)
    r = np.maximum(np.abs(t) * 2, 0.5)
    x = np.column_stack([r * np.cos(t), r * np.sin(t)])
    path = act.DiscretePath(t, x)
    a, b = bz.detect_contact(path, 0.5)
    assert a == pytest.approx(-0.25) and b == pytest.approx(0.25)
    with pytest.raises(NoContactError):
        bz.detect_contact(path, 0.3)


def test_determinism(kepler):
    a = solve(kepler, [1, 0], [0, 1], 0.3, n=100, seed=3)
    b = solve(kepler, [1, 0], [0, 1], 0.3, n=100, seed=3)
    assert a.path.to_csv() == b.path.to_csv()
