"""Anisotropic homogeneous potentials V(x) = U(x/|x|) / |x|**alpha.

The angular part U lives on the unit sphere. In the plane it is usually
given as a 2*pi-periodic function of the polar angle (``FourierPotential``);
in higher dimension as a function of the unit vector
(``QuadraticFormPotential`` or ``SphericalPotential``). All of them expose the
same interface, so the solvers never care which one they hold.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import optimize
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from scipy.stats import qmc

from .errors import (
    BadExponentError,
    BadTopologyError,
    NotUnitError,
    ZeroRadiusError,
)

ZERO_RADIUS = 1e-14
UNIT_TOL = 1e-10
FD_STEP = 1e-6


def _as_unit(s, tol: float = UNIT_TOL) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    norms = np.linalg.norm(s, axis=-1)
    if np.any(np.abs(norms - 1.0) > tol):
        raise NotUnitError(f"expected unit vector(s), got norm(s) {norms}")
    return s


def _tangent_project(s: np.ndarray, g: np.ndarray) -> np.ndarray:
    return g - np.sum(g * s, axis=-1, keepdims=True) * s


@dataclass(frozen=True, eq=False)
class AngularPotential:
    """Angular part of a homogeneous potential, with marked minima.

    Subclasses implement ``_value`` and optionally ``_gradient`` on arrays of
    unit vectors with shape ``(..., dim)``. Without an analytic gradient the
    central finite-difference fallback along great circles is used.
    """

    dim: int
    xi_minus: np.ndarray
    xi_plus: np.ndarray
    mu: float
    delta: float
    name: str = "custom"

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dimension must be at least 2")
        object.__setattr__(self, "xi_minus", np.asarray(self.xi_minus, dtype=float))
        object.__setattr__(self, "xi_plus", np.asarray(self.xi_plus, dtype=float))
        for xi in (self.xi_minus, self.xi_plus):
            if xi.shape != (self.dim,):
                raise ValueError(f"marked minimum {xi} does not have dimension {self.dim}")

    # -- to override ------------------------------------------------------
    def _value(self, s: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _gradient(self, s: np.ndarray) -> np.ndarray | None:
        return None

    # -- public -----------------------------------------------------------
    def eval(self, s) -> np.ndarray | float:
        """U(s) for unit vector(s) ``s`` of shape (dim,) or (n, dim)."""
        s = np.asarray(s, dtype=float)
        out = self._value(s)
        return float(out) if s.ndim == 1 else out

    def grad(self, s) -> np.ndarray:
        """Tangential gradient of U at unit vector(s) ``s``."""
        s = np.asarray(s, dtype=float)
        g = self._gradient(s)
        if g is None:
            g = self.fd_grad(s)
        return _tangent_project(s, g)

    def fd_grad(self, s, step: float = FD_STEP) -> np.ndarray:
        """Central differences of U along great circles through ``s``."""
        single = np.asarray(s).ndim == 1
        s = np.atleast_2d(np.asarray(s, dtype=float))
        d = s.shape[1]
        c, sn = math.cos(step), math.sin(step)
        frames = _tangent_frames(s)
        g = np.zeros_like(s)
        for j in range(d - 1):
            e = frames[:, j, :]
            deriv = (self._value(c * s + sn * e) - self._value(c * s - sn * e)) / (2 * step)
            g += deriv[:, None] * e
        return g[0] if single else g

    @cached_property
    def v_min(self) -> float:
        return float(self._value(self.xi_minus))

    @cached_property
    def v_max(self) -> float:
        """Sampled maximum over 10**4 quasi-uniform sphere points."""
        return float(np.max(self._value(sphere_points(self.dim, 10_000))))

    def theta_function(self) -> tuple[Callable, Callable, Callable] | None:
        """(U, U', U'') as functions of the polar angle, if the potential is planar."""
        return None


def _tangent_frames(s: np.ndarray) -> np.ndarray:
    """Orthonormal bases of the tangent spaces at rows of ``s``: shape (n, d-1, d).

    Uses the Householder reflection sending e1 to -sign(s1) s; its other
    columns span the tangent space.
    """
    s = np.atleast_2d(s)
    n, d = s.shape
    sign = np.where(s[:, 0] >= 0, 1.0, -1.0)
    v = s.copy()
    v[:, 0] += sign
    vv = np.sum(v * v, axis=1)
    h = np.eye(d)[None] - 2 * v[:, :, None] * v[:, None, :] / vv[:, None, None]
    return np.transpose(h[:, :, 1:], (0, 2, 1))


@dataclass(frozen=True, eq=False)
class FourierPotential(AngularPotential):
    """Planar U(theta) = a0 + sum_k a_k cos(k theta) + b_k sin(k theta)."""

    a0: float = 1.0
    a: tuple[float, ...] = ()
    b: tuple[float, ...] = ()

    def __post_init__(self):
        super().__post_init__()
        if self.dim != 2:
            raise ValueError("Fourier potentials are planar (dim=2)")
        k = max(len(self.a), len(self.b))
        object.__setattr__(self, "a", tuple(float(v) for v in self.a) + (0.0,) * (k - len(self.a)))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b) + (0.0,) * (k - len(self.b)))

    @property
    def _k(self) -> np.ndarray:
        return np.arange(1, len(self.a) + 1, dtype=float)

    def U(self, theta):
        theta = np.asarray(theta, dtype=float)
        kt = np.multiply.outer(theta, self._k)
        return self.a0 + np.cos(kt) @ np.array(self.a) + np.sin(kt) @ np.array(self.b) if len(self.a) else self.a0 + 0.0 * theta

    def dU(self, theta):
        theta = np.asarray(theta, dtype=float)
        if not len(self.a):
            return 0.0 * theta
        k = self._k
        kt = np.multiply.outer(theta, k)
        return np.sin(kt) @ (-k * np.array(self.a)) + np.cos(kt) @ (k * np.array(self.b))

    def d2U(self, theta):
        theta = np.asarray(theta, dtype=float)
        if not len(self.a):
            return 0.0 * theta
        k = self._k
        kt = np.multiply.outer(theta, k)
        return np.cos(kt) @ (-k * k * np.array(self.a)) + np.sin(kt) @ (-k * k * np.array(self.b))

    def _value(self, s):
        return self.U(np.arctan2(s[..., 1], s[..., 0]))

    def _gradient(self, s):
        du = self.dU(np.arctan2(s[..., 1], s[..., 0]))
        tangent = np.stack([-s[..., 1], s[..., 0]], axis=-1)
        return np.asarray(du)[..., None] * tangent

    def theta_function(self):
        return self.U, self.dU, self.d2U


@dataclass(frozen=True, eq=False)
class QuadraticFormPotential(AngularPotential):
    """U(s) = offset + s^T A s for a symmetric matrix A, any dimension."""

    offset: float = 1.0
    matrix: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))

    def __post_init__(self):
        super().__post_init__()
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (self.dim, self.dim):
            raise ValueError("matrix shape does not match dimension")
        object.__setattr__(self, "matrix", 0.5 * (m + m.T))

    def _value(self, s):
        return self.offset + np.einsum("...i,ij,...j->...", s, self.matrix, s)

    def _gradient(self, s):
        return 2.0 * s @ self.matrix


@dataclass(frozen=True, eq=False)
class SphericalPotential(AngularPotential):
    """U given by user callables on unit vectors; gradient optional."""

    value_fn: Callable | None = None
    grad_fn: Callable | None = None

    def _value(self, s):
        return np.asarray(self.value_fn(s), dtype=float)

    def _gradient(self, s):
        return None if self.grad_fn is None else np.asarray(self.grad_fn(s), dtype=float)


@dataclass(frozen=True, eq=False)
class HomogeneousPotential:
    """V(x) = U(x/|x|) / |x|**alpha with 0 < alpha < 2."""

    angular: AngularPotential
    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 < a < 2.0) or not math.isfinite(a):
            raise BadExponentError(f"alpha must lie in (0, 2), got {self.alpha}")
        object.__setattr__(self, "alpha", a)

    @property
    def alpha_star(self) -> float:
        return (2.0 - self.alpha) / 2.0

    @property
    def dim(self) -> int:
        return self.angular.dim

    @property
    def v_min(self) -> float:
        return self.angular.v_min

    def with_alpha(self, alpha: float) -> "HomogeneousPotential":
        return HomogeneousPotential(self.angular, alpha)

    def value(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        if np.any(r < ZERO_RADIUS):
            raise ZeroRadiusError("potential evaluated at the origin")
        s = x / (r[..., None] if x.ndim > 1 else r)
        out = self.angular._value(s) / r**self.alpha
        return float(out) if x.ndim == 1 else out

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        if np.any(r < ZERO_RADIUS):
            raise ZeroRadiusError("potential gradient evaluated at the origin")
        rr = r[..., None] if x.ndim > 1 else r
        s = x / rr
        u = np.asarray(self.angular._value(s))
        gt = self.angular.grad(s)
        uu = u[..., None] if x.ndim > 1 else u
        return (gt - self.alpha * uu * s) / rr ** (self.alpha + 1)

    def tangential_gradient(self, s) -> np.ndarray:
        s = _as_unit(s)
        return self.angular.grad(s)


# -- functional API ----------------------------------------------

def eval_V(p: HomogeneousPotential, x) -> float | np.ndarray:
    """Potential value at nonzero point(s) x."""
    return p.value(x)


def grad_V(p: HomogeneousPotential, x) -> np.ndarray:
    """Ambient gradient of V; satisfies grad_V(x) . x = -alpha V(x)."""
    return p.gradient(x)


def tangential_grad(p: HomogeneousPotential, s) -> np.ndarray:
    """grad V(s) + alpha V(s) s at a unit vector, i.e. the spherical gradient of U."""
    return p.tangential_gradient(s)


# -- sampling ----------------------------------------------------------------

def sphere_points(dim: int, n: int) -> np.ndarray:
    """Deterministic quasi-uniform points on S^{dim-1}.

    Equally spaced angles on the circle, a Fibonacci lattice on S^2 and
    an unscrambled Halton sequence pushed through the Gaussian quantile
    in higher dimension.
    """
    if dim == 2:
        th = 2 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(th), np.sin(th)])
    if dim == 3:
        i = np.arange(n) + 0.5
        z = 1 - 2 * i / n
        phi = np.pi * (1 + 5**0.5) * i
        rho = np.sqrt(1 - z * z)
        return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    from scipy.stats import norm

    u = qmc.Halton(d=dim, scramble=False).random(n + 1)[1:]
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _cap_points(xi: np.ndarray, radius: float, n: int) -> np.ndarray:
    """Deterministic points in the chordal cap |s - xi| < radius."""
    d = xi.size
    ang_max = 2 * math.asin(min(radius / 2, 1.0))
    if d == 2:
        th0 = math.atan2(xi[1], xi[0])
        th = th0 + np.linspace(-ang_max, ang_max, n)
        return np.column_stack([np.cos(th), np.sin(th)])
    frame = _tangent_frames(xi[None, :])[0]
    dirs = sphere_points(d - 1, n)
    radii = ang_max * np.sqrt((np.arange(n) + 0.5) / n)
    e = dirs @ frame
    return np.cos(radii)[:, None] * xi + np.sin(radii)[:, None] * e


@dataclass
class ValidationReport:
    passed: bool
    failures: list[str]
    sample_count: int
    resolution: float
    min_margin: float
    min_margin_point: list[float]
    growth_margin: float
    growth_margin_point: list[float]
    gradient_defect: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def validate_class_S(p: AngularPotential, sample_count: int = 10_000) -> ValidationReport:
    """Sample the sphere and check the global-minimum and quadratic-growth conditions."""
    if sample_count < 100:
        raise ValueError("sample_count must be at least 100")
    failures = []
    for label, xi in (("xi_minus", p.xi_minus), ("xi_plus", p.xi_plus)):
        if abs(np.linalg.norm(xi) - 1) > 1e-12:
            failures.append(f"{label} is not a unit vector")
    if np.linalg.norm(p.xi_minus - p.xi_plus) < 1e-12:
        failures.append("xi_minus and xi_plus coincide")
    if p.mu <= 0 or p.delta <= 0:
        failures.append("mu and delta must be positive")

    pts = sphere_points(p.dim, sample_count)
    resolution = float(np.max(cKDTree(pts).query(pts, k=2)[0][:, 1]))
    vmin = min(p.eval(p.xi_minus), p.eval(p.xi_plus))
    if abs(p.eval(p.xi_minus) - p.eval(p.xi_plus)) > 1e-10:
        failures.append(
            f"marked points have different values U(xi-)={p.eval(p.xi_minus):.6g}, U(xi+)={p.eval(p.xi_plus):.6g}"
        )
    vals = p._value(pts)
    i = int(np.argmin(vals))
    min_margin = float(vals[i] - vmin)
    if min_margin < -1e-10:
        failures.append(f"global minimum property violated: U={vals[i]:.6g} below V_min={vmin:.6g}")

    growth = math.inf
    growth_pt = p.xi_minus
    n_cap = max(sample_count // 10, 50)
    for xi in (p.xi_minus, p.xi_plus):
        cap = np.vstack([_cap_points(xi, p.delta, n_cap), pts[np.linalg.norm(pts - xi, axis=1) < p.delta]])
        dist2 = np.sum((cap - xi) ** 2, axis=1)
        keep = (dist2 > 0) & (dist2 < p.delta**2)
        if not np.any(keep):
            continue
        m = p._value(cap[keep]) - vmin - p.mu * dist2[keep]
        j = int(np.argmin(m))
        if m[j] < growth:
            growth, growth_pt = float(m[j]), cap[keep][j]
    if growth < -1e-10:
        failures.append(f"quadratic growth violated: margin {growth:.3g} at {np.round(growth_pt, 6).tolist()}")

    # gradient consistency on a subset, along deterministic great circles
    sub = pts[:: max(1, sample_count // 200)]
    frames = _tangent_frames(sub)
    e = frames[:, 0, :]
    h = 1e-5
    fd = (p._value(math.cos(h) * sub + math.sin(h) * e) - p._value(math.cos(h) * sub - math.sin(h) * e)) / (2 * h)
    an = np.sum(p.grad(sub) * e, axis=1)
    scale = np.maximum(np.abs(an), 1e-3 * max(abs(vmin), 1.0))
    gdef = float(np.max(np.abs(fd - an) / scale))
    if gdef > 1e-5:
        failures.append(f"tangential gradient disagrees with finite differences (relative {gdef:.2e})")

    return ValidationReport(
        passed=not failures,
        failures=failures,
        sample_count=sample_count,
        resolution=resolution,
        min_margin=min_margin,
        min_margin_point=pts[i].tolist(),
        growth_margin=growth,
        growth_margin_point=np.asarray(growth_pt).tolist(),
        gradient_defect=gdef,
    )


@dataclass
class CriterionReport:
    lhs: float
    rhs: float
    holds: bool
    min_excess: float
    distance: float
    distance_lower: float
    resolution: float
    components: list

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _barrier_predicate(p: AngularPotential, barrier) -> Callable[[np.ndarray], np.ndarray]:
    if callable(barrier):
        return lambda s: np.asarray(barrier(s), dtype=bool)
    thr = float(barrier)
    return lambda s: p._value(s) > thr


def sigma_criterion(p: AngularPotential, barrier, net_spacing: float = 0.05) -> CriterionReport:
    """Evaluate the sufficient barrier inequality for a region O of the sphere.

    ``barrier`` is either a threshold c (O = {U > c}) or a predicate on unit
    vectors returning True inside O. In the plane the arcs are located
    exactly (bisection on the predicate); in higher dimension connectivity
    and distances come from a geodesic net of the given spacing.
    """
    inside = _barrier_predicate(p, barrier)
    vmin = p.v_min
    rhs = 2 * math.sqrt(2 * vmin)
    if p.dim == 2:
        return _sigma_planar(p, inside, vmin, rhs)
    return _sigma_net(p, inside, vmin, rhs, net_spacing)


def _pt(th):
    return np.array([math.cos(th), math.sin(th)])


def _sigma_planar(p, inside, vmin, rhs) -> CriterionReport:
    n = 1 << 15
    th = 2 * np.pi * np.arange(n) / n
    pts = np.column_stack([np.cos(th), np.sin(th)])
    flag = inside(pts)
    if flag.all():
        raise BadTopologyError("barrier set covers the whole circle")
    if not flag.any():
        raise BadTopologyError("barrier set is empty: complement is connected")
    # boundary angles, refined by bisection
    edges = []
    for i in np.nonzero(flag != np.roll(flag, -1))[0]:
        a, b = th[i], th[i] + 2 * np.pi / n
        fa = flag[i]
        for _ in range(60):
            m = 0.5 * (a + b)
            if bool(inside(_pt(m)[None])[0]) == fa:
                a = m
            else:
                b = m
        edges.append((0.5 * (a + b), bool(fa)))
    # complement arcs: start where inside -> outside, end where outside -> inside
    starts = [e for e, fa in edges if fa]
    ends = [e for e, fa in edges if not fa]
    arcs = []
    for s0 in starts:
        nxt = min(ends, key=lambda e: (e - s0) % (2 * np.pi))
        arcs.append((s0, s0 + (nxt - s0) % (2 * np.pi)))
    if len(arcs) != 2:
        raise BadTopologyError(f"complement has {len(arcs)} components, expected 2")

    def arc_of(xi):
        t = math.atan2(xi[1], xi[0])
        for k, (a, b) in enumerate(arcs):
            if (t - a) % (2 * np.pi) <= (b - a) + 1e-12:
                return k
        return None

    km, kp = arc_of(p.xi_minus), arc_of(p.xi_plus)
    if km is None or kp is None or km == kp:
        raise BadTopologyError("xi_minus and xi_plus are not in distinct components of the complement")
    ends_m = [_pt(arcs[km][0]), _pt(arcs[km][1])]
    ends_p = [_pt(arcs[kp][0]), _pt(arcs[kp][1])]
    dist = min(float(np.linalg.norm(a - b)) for a in ends_m for b in ends_p)

    # closure of O: sampled interior plus exact boundary points, then a local polish
    vals = p._value(pts)
    in_vals = np.where(flag, vals, np.inf)
    bvals = [float(p._value(_pt(e))) for e, _ in edges]
    best = min(float(np.min(in_vals)), min(bvals))
    if np.isfinite(np.min(in_vals)):
        j = int(np.argmin(in_vals))
        step = 2 * np.pi / n
        res = optimize.minimize_scalar(
            lambda t: float(p._value(_pt(t))), bounds=(th[j] - step, th[j] + step), method="bounded",
            options={"xatol": 1e-12},
        )
        if bool(inside(_pt(res.x)[None])[0]):
            best = min(best, float(res.fun))
    excess = max(best - vmin, 0.0)
    lhs = math.sqrt(2 * excess) * dist
    return CriterionReport(
        lhs=lhs, rhs=rhs, holds=lhs > rhs, min_excess=best - vmin, distance=dist, distance_lower=dist,
        resolution=0.0, components=[[float(v) for v in arcs[km]], [float(v) for v in arcs[kp]]],
    )


def _sigma_net(p, inside, vmin, rhs, spacing) -> CriterionReport:
    d = p.dim
    area = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    n = int(min(max(area / spacing ** (d - 1), 1000), 400_000))
    pts = np.vstack([sphere_points(d, n), p.xi_minus, p.xi_plus])
    tree = cKDTree(pts)
    resolution = float(np.max(tree.query(pts, k=2)[0][:, 1]))
    flag = inside(pts)
    comp_idx = np.nonzero(~flag)[0]
    if comp_idx.size == 0:
        raise BadTopologyError("barrier set covers the sampled sphere")
    sub = pts[comp_idx]
    pairs = cKDTree(sub).query_pairs(r=1.5 * resolution, output_type="ndarray")
    g = csr_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(len(sub), len(sub)))
    ncomp, labels = connected_components(g, directed=False)
    if ncomp != 2:
        raise BadTopologyError(f"complement net has {ncomp} components, expected 2 (resolution {resolution:.3g})")
    lm, lp = labels[-2], labels[-1]
    if lm == lp:
        raise BadTopologyError("xi_minus and xi_plus lie in the same component")
    a, b = sub[labels == lm], sub[labels == lp]
    dist = float(np.min(cKDTree(b).query(a)[0]))
    in_vals = p._value(pts[flag]) if flag.any() else np.array([np.inf])
    best = float(np.min(in_vals))
    excess = max(best - vmin, 0.0)
    lower = max(dist - 2 * resolution, 0.0)
    lhs = math.sqrt(2 * excess) * lower
    return CriterionReport(
        lhs=lhs, rhs=rhs, holds=lhs > rhs, min_excess=best - vmin, distance=dist, distance_lower=lower,
        resolution=resolution, components=[int(np.sum(labels == lm)), int(np.sum(labels == lp))],
    )


# -- named potentials and JSON loading ---------------------------------------

_E1 = (1.0, 0.0)
_E1N = (-1.0, 0.0)


def isotropic(mu: float = 0.1, delta: float = 0.5) -> FourierPotential:
    return FourierPotential(2, _E1, _E1N, mu, delta, "isotropic", a0=1.0)


def devaney(mu: float = 1.0, delta: float = 0.5) -> FourierPotential:
    """U = 2 - cos(2 theta): minima on the horizontal axis, maxima on the vertical one."""
    return FourierPotential(2, _E1, _E1N, mu, delta, "devaney", a0=2.0, a=(0.0, -1.0))


def barrier50(mu: float = 10.0, delta: float = 0.5) -> FourierPotential:
    """U = 1 + 50 sin^2(theta) = 26 - 25 cos(2 theta)."""
    return FourierPotential(2, _E1, _E1N, mu, delta, "barrier50", a0=26.0, a=(0.0, -25.0))


def barrier3d(mu: float = 10.0, delta: float = 0.5) -> QuadraticFormPotential:
    """U = 1 + 50 s2^2 + 20 s3^2 on S^2, minima at +-e1."""
    return QuadraticFormPotential(
        3, (1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), mu, delta, "barrier3d",
        offset=1.0, matrix=np.diag([0.0, 50.0, 20.0]),
    )


NAMED = {"isotropic": isotropic, "devaney": devaney, "barrier50": barrier50, "barrier3d": barrier3d}


def _fourier_coeffs(coeffs) -> tuple[float, list[float], list[float]]:
    if isinstance(coeffs, dict):
        return float(coeffs.get("a0", 0.0)), list(coeffs.get("a", [])), list(coeffs.get("b", []))
    c = [float(v) for v in coeffs]
    if not c:
        raise ValueError("empty Fourier coefficient list")
    if len(c) % 2 == 0:
        raise ValueError("flat Fourier coefficients must be [a0, a1, b1, a2, b2, ...] (odd length)")
    return c[0], c[1::2], c[2::2]


def angular_from_dict(doc: dict) -> AngularPotential:
    kind = doc.get("kind", "named")
    if kind == "named":
        name = doc["name"]
        if name not in NAMED:
            raise ValueError(f"unknown named potential {name!r}; choose from {sorted(NAMED)}")
        kw = {k: float(doc[k]) for k in ("mu", "delta") if k in doc}
        return NAMED[name](**kw)
    try:
        common = dict(
            xi_minus=doc["xi_minus"], xi_plus=doc["xi_plus"], mu=float(doc["mu"]),
            delta=float(doc["delta"]), name=doc.get("name", kind),
        )
    except KeyError as exc:
        raise ValueError(f"potential document lacks field {exc}") from None
    if kind == "fourier":
        if int(doc.get("dim", 2)) != 2:
            raise ValueError("Fourier potentials must have dim 2")
        a0, a, b = _fourier_coeffs(doc["coeffs"])
        return FourierPotential(2, a0=a0, a=tuple(a), b=tuple(b), **common)
    if kind == "quadratic":
        return QuadraticFormPotential(int(doc["dim"]), offset=float(doc.get("offset", 0.0)), matrix=doc["matrix"], **common)
    raise ValueError(f"unknown potential kind {kind!r}")


def load_potential(source, alpha: float | None = None) -> HomogeneousPotential:
    """Build a HomogeneousPotential from a name, a JSON file path or a parsed dict.

    An explicit ``alpha`` overrides the one in the document.
    """
    if isinstance(source, AngularPotential):
        doc, ang = {}, source
    else:
        if isinstance(source, (str, Path)) and str(source) in NAMED:
            doc = {"kind": "named", "name": str(source)}
        elif isinstance(source, (str, Path)):
            doc = json.loads(Path(source).read_text())
        else:
            doc = dict(source)
        ang = angular_from_dict(doc)
    a = alpha if alpha is not None else doc.get("alpha")
    if a is None:
        raise ValueError("no homogeneity exponent given")
    return HomogeneousPotential(ang, float(a))
