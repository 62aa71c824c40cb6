"""Discrete paths, action functionals and closed-form radial levels.

Quadrature conventions used everywhere:

* velocities are constant per segment (forward differences);
* kinetic terms use the segment midpoint rule, i.e. |dx|^2 / (2 dt);
* potential terms use the trapezoid rule on nodes.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadDomainError,
    BadExponentError,
    BadWindowError,
    CollisionNodeError,
    DegeneratePathError,
    NotMonotoneError,
    StalledSegmentError,
)
from .potential import HomogeneousPotential

COLLISION_RADIUS = 1e-12


@dataclass(frozen=True, eq=False)
class DiscretePath:
    """Time grid plus node positions; immutable once built."""

    times: np.ndarray
    nodes: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        x = np.asarray(self.nodes, dtype=float)
        if x.ndim != 2 or t.ndim != 1 or x.shape[0] != t.size:
            raise ValueError("times must be (N+1,) and nodes (N+1, d)")
        if t.size < 3:
            raise ValueError("a path needs at least two segments")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(x))):
            raise ValueError("path contains non-finite values")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        t.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "nodes", x)

    @property
    def d(self) -> int:
        return self.nodes.shape[1]

    @property
    def n_segments(self) -> int:
        return self.times.size - 1

    @property
    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.nodes, axis=1)

    @property
    def directions(self) -> np.ndarray:
        return self.nodes / self.radii[:, None]

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def segment_velocities(self) -> np.ndarray:
        return np.diff(self.nodes, axis=0) / self.dt[:, None]

    def node_velocities(self) -> np.ndarray:
        """Averages of the adjacent segment velocities; one-sided at the ends."""
        v = self.segment_velocities
        out = np.empty_like(self.nodes)
        out[0], out[-1] = v[0], v[-1]
        out[1:-1] = 0.5 * (v[:-1] + v[1:])
        return out

    def shifted(self, t0: float) -> "DiscretePath":
        return DiscretePath(self.times - self.times[0] + t0, self.nodes)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"x{k + 1}" for k in range(self.d)])
        for t, x in zip(self.times, self.nodes):
            w.writerow([format(t, ".9g")] + [format(v, ".9g") for v in x])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DiscretePath":
        rows = list(csv.reader(io.StringIO(text)))
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
        return cls(data[:, 0], data[:, 1:])


@dataclass
class ActionBreakdown:
    kinetic: float
    potential: float
    total: float
    per_segment: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "kinetic": self.kinetic,
            "potential": self.potential,
            "total": self.total,
            "per_segment": self.per_segment.tolist(),
        }


def _node_values(p: HomogeneousPotential, path: DiscretePath) -> np.ndarray:
    if np.any(path.radii < COLLISION_RADIUS):
        raise CollisionNodeError("path has a node at the origin")
    return p.value(path.nodes)


def lagrangian_action(p: HomogeneousPotential, path: DiscretePath) -> ActionBreakdown:
    """Discrete integral of |dx/dt|^2/2 + V(x)."""
    v = _node_values(p, path)
    dt = path.dt
    kin = 0.5 * np.sum(np.diff(path.nodes, axis=0) ** 2, axis=1) / dt
    pot = 0.5 * dt * (v[:-1] + v[1:])
    seg = kin + pot
    k, u = float(np.sum(kin)), float(np.sum(pot))
    return ActionBreakdown(k, u, k + u, seg)


def _kinetic_potential(p, path):
    v = _node_values(p, path)
    dt = path.dt
    kin = 0.5 * np.sum(np.diff(path.nodes, axis=0) ** 2, axis=1) / dt
    return float(np.sum(kin)), float(np.sum(0.5 * dt * (v[:-1] + v[1:])))


def _check_unit_interval(path: DiscretePath):
    if abs(path.times[0] + 1) > 1e-12 or abs(path.times[-1] - 1) > 1e-12:
        raise BadDomainError(f"path must be parameterized on [-1, 1], got [{path.times[0]}, {path.times[-1]}]")


def maupertuis_J(p: HomogeneousPotential, path: DiscretePath) -> float:
    """(integral of |y'|^2/2) * (integral of V(y)) on [-1, 1]."""
    _check_unit_interval(path)
    k, u = _kinetic_potential(p, path)
    return k * u


def recover_time(p: HomogeneousPotential, path: DiscretePath) -> tuple[float, DiscretePath]:
    """Half-length T such that x(t) = y(t/T) on [-T, T] has zero mean energy.

    Returns ``(T, rescaled_path)``.
    """
    _check_unit_interval(path)
    k, u = _kinetic_potential(p, path)
    if 2 * k < 1e-14:
        raise DegeneratePathError("path has no kinetic energy")
    if u <= 0:
        raise DegeneratePathError("potential integral is not positive")
    tbar = math.sqrt(k / u)
    return tbar, DiscretePath(path.times * tbar, path.nodes)


def zero_energy_reparam(p: HomogeneousPotential, path: DiscretePath) -> DiscretePath:
    """Re-time each segment so its speed is sqrt(2 * mean of V at its ends).

    The geometric path and the start time are kept. Applied twice it gives
    the same times as applied once.
    """
    v = _node_values(p, path)
    step = np.linalg.norm(np.diff(path.nodes, axis=0), axis=1)
    density = 0.5 * (step / path.dt) ** 2
    bad = np.nonzero(density < 1e-12)[0]
    if bad.size:
        raise StalledSegmentError(f"segment {int(bad[0])} is stationary")
    vbar = 0.5 * (v[:-1] + v[1:])
    dt = step / np.sqrt(2 * vbar)
    times = path.times[0] + np.concatenate([[0.0], np.cumsum(dt)])
    return DiscretePath(times, path.nodes)


def energy_residual(p: HomogeneousPotential, path: DiscretePath) -> np.ndarray:
    """Segmentwise |speed^2/2 - mean V| / mean V."""
    v = _node_values(p, path)
    vbar = 0.5 * (v[:-1] + v[1:])
    kin = 0.5 * np.sum(path.segment_velocities**2, axis=1)
    return np.abs(kin - vbar) / vbar


# -- homothetic motions ------------------------------------------------------

def _check_alpha(alpha):
    if not (0.0 < alpha < 2.0):
        raise BadExponentError(f"alpha must lie in (0, 2), got {alpha}")


def homothetic_action(r_minus: float, r_plus: float, gamma: float, alpha: float) -> float:
    """Minimal zero-energy action of a radial motion between r_minus and r_plus."""
    _check_alpha(alpha)
    if not (0 <= r_minus <= r_plus) or gamma <= 0:
        raise ValueError("need 0 <= r_minus <= r_plus and gamma > 0")
    a_star = (2 - alpha) / 2
    return math.sqrt(2 * gamma) / a_star * (r_plus**a_star - r_minus**a_star)


def homothetic_half_time(r_minus: float, r_plus: float, gamma: float, alpha: float) -> float:
    """T such that the radial zero-energy motion runs on [-T, T]."""
    _check_alpha(alpha)
    q = (2 + alpha) / 2
    return (r_plus**q - r_minus**q) / ((alpha + 2) * math.sqrt(2 * gamma))


def homothetic_radius(t, r_minus: float, r_plus: float, gamma: float, alpha: float):
    """r(t) of the outgoing radial zero-energy motion on [-T, T]."""
    q = (2 + alpha) / 2
    c = q * math.sqrt(2 * gamma)
    base = c * np.asarray(t, dtype=float) + 0.5 * (r_plus**q + r_minus**q)
    return np.maximum(base, 0.0) ** (1 / q)


def homothetic_speed(r, gamma: float, alpha: float):
    """dr/dt = sqrt(2 gamma) r^(-alpha/2) on the outgoing branch."""
    return math.sqrt(2 * gamma) * np.asarray(r, dtype=float) ** (-alpha / 2)


def homothetic_profile(
    r_minus: float,
    r_plus: float,
    gamma: float,
    alpha: float,
    direction=(1.0, 0.0),
    n: int = 400,
) -> DiscretePath:
    """Sample the radial zero-energy motion from r_minus to r_plus along ``direction``.

    Nodes are spaced so that every segment carries the same action. When
    ``r_minus`` is 0 the collision instant itself is left out and the path
    starts at the first node, which holds 1/n of the total action.
    """
    _check_alpha(alpha)
    if not (0 <= r_minus < r_plus) or gamma <= 0:
        raise ValueError("need 0 <= r_minus < r_plus and gamma > 0")
    a_star = (2 - alpha) / 2
    q = (2 + alpha) / 2
    frac = np.linspace(0.0, 1.0, n + 1)
    if r_minus == 0:
        frac = frac[1:]
    r = (r_minus**a_star + frac * (r_plus**a_star - r_minus**a_star)) ** (1 / a_star)
    r[-1] = r_plus
    if r_minus > 0:
        r[0] = r_minus
    c = q * math.sqrt(2 * gamma)
    t = (r**q - 0.5 * (r_plus**q + r_minus**q)) / c
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    return DiscretePath(t, r[:, None] * e[None, :])


# -- level estimates -----------------------------------------------------------

def bound_above(p: HomogeneousPotential, x1, x2, eps: float) -> float:
    """Two homothetic legs down to the obstacle plus an arc along it."""
    x1, x2 = np.asarray(x1, float), np.asarray(x2, float)
    r1, r2 = np.linalg.norm(x1), np.linalg.norm(x2)
    s1, s2 = x1 / r1, x2 / r2
    a = p.alpha
    return (
        homothetic_action(eps, r1, p.angular.eval(s1), a)
        + homothetic_action(eps, r2, p.angular.eval(s2), a)
        + 0.5 * math.pi * eps**p.alpha_star * float(np.linalg.norm(s2 - s1)) * math.sqrt(2 * p.angular.v_max)
    )


def _interp_node(path: DiscretePath, t: float) -> np.ndarray:
    return np.array([np.interp(t, path.times, path.nodes[:, k]) for k in range(path.d)])


def bound_below(p: HomogeneousPotential, path: DiscretePath, eps: float, contact, window) -> float:
    """Lower bound on the action of any path touching the obstacle on ``contact``.

    ``contact`` = (a, b) is the contact interval, ``window`` = (t1, t2) a
    time window disjoint from (a, b) on which the excess V(s) - V_min is
    used for the extra angular term.
    """
    a, b = contact
    t1, t2 = window
    if t1 > t2 or a > b:
        raise ValueError("intervals must be ordered")
    if a < b and t1 < b and t2 > a:
        raise BadWindowError("window overlaps the contact interval")
    vmin = p.v_min
    al = p.alpha
    r1, r2 = path.radii[0], path.radii[-1]
    s = path.directions
    sa, sb = _interp_node(path, a), _interp_node(path, b)
    sa, sb = sa / np.linalg.norm(sa), sb / np.linalg.norm(sb)
    out = (
        homothetic_action(eps, max(r1, eps), vmin, al)
        + homothetic_action(eps, max(r2, eps), vmin, al)
        + math.sqrt(2 * vmin) * eps**p.alpha_star * float(np.linalg.norm(sb - sa))
    )
    mask = (path.times >= t1) & (path.times <= t2)
    if np.count_nonzero(mask) >= 1:
        idx = np.nonzero(mask)[0]
        gamma = max(float(np.min(p.angular.eval(s[idx]))) - vmin, 0.0)
        rmin = float(np.min(path.radii[idx]))
        st1, st2 = _interp_node(path, t1), _interp_node(path, t2)
        st1, st2 = st1 / np.linalg.norm(st1), st2 / np.linalg.norm(st2)
        out += math.sqrt(2 * gamma) * rmin**p.alpha_star * float(np.linalg.norm(st2 - st1))
    return out


def _index_range(path: DiscretePath, a: float, b: float) -> tuple[int, int]:
    ia = int(np.argmin(np.abs(path.times - a)))
    ib = int(np.argmin(np.abs(path.times - b)))
    return ia, ib


def virial_level(p: HomogeneousPotential, path: DiscretePath, a: float, b: float) -> float:
    """Action on [a, b] from the virial identity, (1/alpha*) [r dr/dt] between a and b.

    Requires a strictly monotone radius on [a, b]. Radial velocities are
    one-sided, taken from the segment inside [a, b].
    """
    ia, ib = _index_range(path, a, b)
    if ib - ia < 1:
        raise NotMonotoneError("interval contains fewer than two nodes")
    r = path.radii[ia:ib + 1]
    dr = np.diff(r)
    if not (np.all(dr > 0) or np.all(dr < 0)):
        raise NotMonotoneError("radius is not strictly monotone on the interval")
    t = path.times
    rdot_a = (path.radii[ia + 1] - path.radii[ia]) / (t[ia + 1] - t[ia])
    rdot_b = (path.radii[ib] - path.radii[ib - 1]) / (t[ib] - t[ib - 1])
    return (path.radii[ib] * rdot_b - path.radii[ia] * rdot_a) / p.alpha_star


def virial_bounds(p: HomogeneousPotential, path: DiscretePath, a: float, b: float) -> tuple[float, float]:
    """Two-sided estimate of the action on a monotone interval; a diagnostic only.

    Written for increasing radius; a decreasing interval is handled by time reversal.
    """
    ia, ib = _index_range(path, a, b)
    r = path.radii
    if r[ib] < r[ia]:
        rev = DiscretePath(-path.times[::-1], path.nodes[::-1])
        return virial_bounds(p, rev, -b, -a)
    t = path.times
    ast = p.alpha_star
    rdot_a = (r[ia + 1] - r[ia]) / (t[ia + 1] - t[ia])
    sb = path.directions[ib]
    lower = (math.sqrt(2 * p.v_min) / ast) * (r[ib] ** ast - r[ia] ** (2 * ast) / r[ib] ** ast) - r[ia] * rdot_a / ast
    upper = math.sqrt(2 * p.angular.eval(sb)) / ast * r[ib] ** ast - r[ia] * rdot_a / ast
    return lower, upper


def second_derivative(times: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Three-point second differences on a nonuniform grid (interior nodes)."""
    h0 = np.diff(times)[:-1]
    h1 = np.diff(times)[1:]
    return 2 * ((f[2:] - f[1:-1]) / h1 - (f[1:-1] - f[:-2]) / h0) / (h0 + h1)


def lagrange_jacobi_residual(p: HomogeneousPotential, path: DiscretePath) -> np.ndarray:
    """Relative defect of d^2|x|^2/dt^2 = 2(2 - alpha) V(x) at interior nodes."""
    lhs = second_derivative(path.times, path.radii**2)
    rhs = 2 * (2 - p.alpha) * p.value(path.nodes[1:-1])
    return np.abs(lhs - rhs) / np.abs(rhs)


def el_residual(p: HomogeneousPotential, path: DiscretePath) -> np.ndarray:
    """Relative defect of x'' = grad V(x) at interior nodes."""
    acc = np.column_stack([second_derivative(path.times, path.nodes[:, k]) for k in range(path.d)])
    g = p.gradient(path.nodes[1:-1])
    return np.linalg.norm(acc - g, axis=1) / np.linalg.norm(g, axis=1)
