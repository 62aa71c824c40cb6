import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parabolic import planar as pl
from parabolic import potential as pot
from parabolic.errors import BadBracketError, DegenerateCriticalError, NonPositiveRZError

P = pl.PhasePoint(0.0, math.pi)
Q = pl.PhasePoint(math.pi, math.pi)


@pytest.fixture(scope="module")
def dev():
    return pl.PlanarPotential.from_fourier(2.0, (0.0, -1.0), name="devaney")


@pytest.fixture(scope="module")
def flat():
    return pl.PlanarPotential.from_fourier(1.0)


def test_potential_summary(dev):
    assert dev.u_min == pytest.approx(1.0) and dev.u_max == pytest.approx(3.0)
    assert dev.minima == pytest.approx((0.0, math.pi), abs=1e-12)
    for m in dev.minima:
        assert abs(dev.dU(m)) < 1e-10 and dev.d2U(m) > 0


def test_from_angular_matches(dev):
    q = pl.PlanarPotential.from_angular(pot.devaney())
    for th in np.linspace(0, 6, 13):
        assert q.U(th) == pytest.approx(dev.U(th))
    g = pl.PlanarPotential.from_angular(pot.QuadraticFormPotential(2, (1, 0), (-1, 0), 1.0, 0.5, offset=1.0,
                                                                    matrix=np.diag([0.0, 2.0])))
    assert g.minima == pytest.approx((0.0, math.pi), abs=1e-8)


def test_field_examples(dev, flat):
    assert devfield(dev, 1.0, 0.0, math.pi) == pytest.approx((0.0, 0.0), abs=1e-15)
    assert devfield(dev, 1.0, 0.0, math.pi / 2) == pytest.approx((2.0, 1.0))
    d = 0.7
    th, ph = devfield(flat, 0.6, 0.2, 0.2 + d)
    assert ph == pytest.approx(0.3 * th)


def devfield(U, a, th, ph):
    return pl.devaney_field(U, a, pl.PhasePoint(th, ph))


def test_extended_field(dev):
    with pytest.raises(NonPositiveRZError):
        pl.extended_field(dev, 1.0, (0.0, 1.0, 0.0, 0.0))
    d = pl.extended_field(dev, 1.0, (2.0, math.sqrt(2), 0.3, 0.3 + math.pi / 2))
    assert d[0] == pytest.approx(0.0, abs=1e-15)
    # z'/z = U' theta' / (2U) on the energy level
    r, z, th, ph = 1.5, math.sqrt(2 * dev.U(0.4)), 0.4, 1.9
    dr, dz, dth, dph, dt = pl.extended_field(dev, 0.8, (r, z, th, ph))
    assert dz / z == pytest.approx(dev.dU(th) * dth / (2 * dev.U(th)), rel=1e-12)
    assert dt == pytest.approx(z * r**1.4)


def test_equilibria(dev, flat):
    eqs = pl.equilibria(dev, 0.75)
    kinds = {(round(e.point.theta, 6), round(e.point.phi, 6)): e.kind for e in eqs}
    assert kinds[(0.0, round(math.pi, 6))] == "saddle"
    assert kinds[(round(math.pi, 6), round(math.pi, 6))] == "saddle"
    assert kinds[(round(math.pi / 2, 6), round(math.pi / 2, 6))] in ("sink", "source")
    with pytest.raises(DegenerateCriticalError):
        pl.equilibria(flat, 1.0)


def test_saddle_stays_put(dev):
    orb = pl.integrate(dev, 0.7, P, 10.0)
    assert orb.termination == pl.MAX_TIME
    assert np.max(np.abs(orb.thetas - P.theta)) < 1e-9
    assert np.max(np.abs(orb.phis - P.phi)) < 1e-9


def test_isotropic_bundle(flat):
    orb = pl.integrate(flat, 1.0, pl.PhasePoint(0.0, math.pi + 0.01), 30.0)
    assert np.ptp(orb.phis - orb.thetas / 2) < 1e-6
    assert orb.termination == pl.REACHED_SINK


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 1.9), st.floats(0, 2 * math.pi), st.floats(0.05, math.pi - 0.05))
def test_v_monotone_property(alpha, theta, delta):
    U = pl.PlanarPotential.from_fourier(2.0, (0.3, -1.0), (0.2,))
    orb = pl.integrate(U, alpha, pl.PhasePoint(theta, theta + delta), 4.0, step=2e-3)
    assert orb.monotonicity_defect() >= -1e-9
    back = pl.integrate(U, alpha, pl.PhasePoint(theta, theta + delta), 4.0, step=2e-3, direction=-1)
    assert back.monotonicity_defect() >= -1e-9


def test_window_event(dev):
    orb = pl.integrate(dev, 1.0, pl.PhasePoint(0.0, 1.5), 50.0, pl.Events(window=(-0.5, 0.5)))
    assert orb.termination == pl.LEFT_WINDOW
    assert orb.thetas[-1] == pytest.approx(0.5)


def test_shooting_signs(dev):
    lo = pl.separation(dev, 0.5, P, Q)
    hi = pl.separation(dev, 1.0, P, Q)
    assert lo.value < 0 < hi.value


def test_shoot_requires_saddle(dev, flat):
    with pytest.raises(DegenerateCriticalError):
        pl.shoot_unstable(flat, 1.0, P)
    with pytest.raises(ValueError):
        pl.shoot_unstable(dev, 1.0, pl.PhasePoint(math.pi / 2, math.pi / 2))


def test_bad_bracket(dev):
    with pytest.raises(BadBracketError):
        pl.saddle_connection_bisect(dev, (0.1, 0.2), P, Q)


def test_apsidal_bounds(dev, flat):
    lo, hi = pl.apsidal_bounds(dev, 0.75)
    assert lo == pytest.approx(3.2 * math.asin(math.sqrt(1 / 3)))
    assert hi == pytest.approx(2 * math.pi / 1.25)
    assert pl.apsidal_bounds(flat, 1.0) == pytest.approx((2 * math.pi, 2 * math.pi))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 1.9))
def test_sweep_sandwich(alpha):
    U = pl.PlanarPotential.from_fourier(2.0, (0.0, -1.0))
    res = pl.dv_dtheta_sweep(U, alpha, steps=4000)
    assert res.within_bounds


@pytest.mark.parametrize("alpha", [0.3, 1.0, 1.7])
def test_isotropic_sweep(flat, alpha):
    assert pl.dv_dtheta_sweep(flat, alpha).sweep == pytest.approx(2 * math.pi / (2 - alpha), abs=1e-4)


def test_orbit_csv(dev):
    orb = pl.integrate(dev, 0.5, pl.PhasePoint(0.3, 1.5), 0.01)
    lines = orb.to_csv().splitlines()
    assert lines[0] == "tau,theta,phi,v"
    assert len(lines) == orb.taus.size + 1


def test_conic_fit_recovers_known_conics():
    t = np.linspace(-2, 2, 200)
    parab = np.column_stack([t * t, 2 * t])
    assert pl.fit_conic(parab).eccentricity == pytest.approx(1.0, abs=1e-9)
    th = np.linspace(0, 2 * math.pi, 100)
    ell = np.column_stack([3 * np.cos(th) + 1, 2 * np.sin(th)])
    assert pl.fit_conic(ell).eccentricity == pytest.approx(math.sqrt(1 - 4 / 9), abs=1e-9)


def test_portrait_svg_deterministic(dev):
    a = pl.portrait_svg(pl.portrait(dev, 0.5, n_orbits=4, horizon=3.0))
    b = pl.portrait_svg(pl.portrait(dev, 0.5, n_orbits=4, horizon=3.0))
    assert a == b and a.startswith("<svg") and a.count("<polyline") == 4
