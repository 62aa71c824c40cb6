"""Reduced planar dynamics of zero-energy orbits for V = U(theta)/r^alpha.

The state is (theta, phi): theta is the polar angle of the position and phi
the polar angle of the velocity.  In the regularised clock tau

    theta' = 2 U sin(phi - theta)
    phi'   = U' cos(phi - theta) + alpha U sin(phi - theta)

and v = sqrt(U) cos(phi - theta) is nondecreasing along every orbit.  Critical
points of U give equilibria: minima become saddles, maxima sinks or sources.
Saddle-to-saddle connections are minimum-to-minimum parabolic trajectories.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import BadBracketError, DegenerateCriticalError, NonPositiveRZError, ParabolicError
from .potential import AngularPotential, FourierPotential

__all__ = [
    "PlanarPotential",
    "PhasePoint",
    "PlanarOrbit",
    "Events",
    "Equilibrium",
    "SeparationResult",
    "ConnectionResult",
    "SweepResult",
    "PhysicalOrbit",
    "ConicFit",
    "Portrait",
    "REACHED_SINK",
    "REACHED_TARGET",
    "LEFT_WINDOW",
    "MAX_TIME",
    "CROSSED_SECTION",
    "devaney_field",
    "extended_field",
    "integrate",
    "equilibria",
    "linearize",
    "shoot_unstable",
    "shoot_stable",
    "separation",
    "saddle_connection_bisect",
    "apsidal_bounds",
    "dv_dtheta_sweep",
    "dv_dtau_defect",
    "reconstruct_physical",
    "fit_conic",
    "physical_state",
    "portrait",
    "portrait_svg",
]

TWO_PI = 2 * math.pi
REACHED_SINK = "ReachedSink"
REACHED_TARGET = "ReachedTarget"
LEFT_WINDOW = "LeftWindow"
MAX_TIME = "MaxTime"
CROSSED_SECTION = "CrossedSection"

DEGENERATE_TOL = 1e-8
JACOBIAN_STEP = 1e-6


# ---------------------------------------------------------------- potentials


def _fd_derivative(f: Callable[[float], float], step: float = 1e-5) -> Callable[[float], float]:
    return lambda th: (f(th + step) - f(th - step)) / (2 * step)


@dataclass(frozen=True, eq=False)
class PlanarPotential:
    """A positive 2pi-periodic U(theta) with scalar derivatives.

    Critical points are located once at construction by bracketing sign
    changes of U' on a shifted uniform grid and polishing with brentq.
    """

    U: Callable[[float], float]
    dU: Callable[[float], float]
    d2U: Callable[[float], float]
    name: str = "custom"
    samples: int = 4096
    u_min: float = field(init=False)
    u_max: float = field(init=False)
    minima: tuple[float, ...] = field(init=False)
    maxima: tuple[float, ...] = field(init=False)
    degenerate: tuple[float, ...] = field(init=False)
    flat: bool = field(init=False)

    def __post_init__(self):
        n = self.samples
        grid = (np.arange(n + 1) + 0.1234) * (TWO_PI / n)
        u = np.array([self.U(t) for t in grid])
        du = np.array([self.dU(t) for t in grid])
        if not np.all(np.isfinite(u)) or u.min() <= 0:
            raise ValueError("U must be finite and positive")
        shifted = np.array([self.U(t + TWO_PI) for t in grid[:64]])
        if np.max(np.abs(shifted - u[:64])) > 1e-12 * max(1.0, float(np.abs(u).max())):
            raise ValueError("U is not 2pi-periodic")
        flat = bool(np.max(np.abs(du)) < 1e-12)
        roots: list[float] = []
        if not flat:
            for k in range(n):
                a, b = du[k], du[k + 1]
                if a == 0.0:
                    roots.append(float(grid[k]))
                elif a * b < 0:
                    roots.append(brentq(self.dU, grid[k], grid[k + 1], xtol=1e-15, rtol=1e-15))
        roots = sorted({_wrap(r) for r in roots})
        mins, maxs, deg = [], [], []
        for r in roots:
            c = self.d2U(r)
            if abs(c) < DEGENERATE_TOL:
                deg.append(r)
            elif c > 0:
                mins.append(r)
            else:
                maxs.append(r)
        crit_vals = [self.U(r) for r in roots]
        object.__setattr__(self, "u_min", float(min([u.min(), *crit_vals])))
        object.__setattr__(self, "u_max", float(max([u.max(), *crit_vals])))
        object.__setattr__(self, "minima", tuple(mins))
        object.__setattr__(self, "maxima", tuple(maxs))
        object.__setattr__(self, "degenerate", tuple(deg))
        object.__setattr__(self, "flat", flat)

    @classmethod
    def from_fourier(cls, a0: float, a: Sequence[float] = (), b: Sequence[float] = (), name: str = "fourier"):
        """U = a0 + sum a_k cos(k theta) + b_k sin(k theta), evaluated with plain math for speed."""
        terms = [(k + 1, float(ak), float(bk)) for k, (ak, bk) in enumerate(_zip_pad(a, b)) if ak or bk]
        a0 = float(a0)

        def U(th):
            return a0 + sum(ak * math.cos(k * th) + bk * math.sin(k * th) for k, ak, bk in terms)

        def dU(th):
            return sum(k * (bk * math.cos(k * th) - ak * math.sin(k * th)) for k, ak, bk in terms)

        def d2U(th):
            return -sum(k * k * (ak * math.cos(k * th) + bk * math.sin(k * th)) for k, ak, bk in terms)

        return cls(U, dU, d2U, name=name)

    @classmethod
    def from_functions(cls, U, dU=None, d2U=None, name: str = "custom"):
        dU = dU or _fd_derivative(U)
        d2U = d2U or _fd_derivative(dU)
        return cls(U, dU, d2U, name=name)

    @classmethod
    def from_angular(cls, p: AngularPotential):
        """Restrict a planar angular potential to the unit circle."""
        if p.dim != 2:
            raise ValueError("planar reduction needs a two-dimensional potential")
        if isinstance(p, FourierPotential):
            return cls.from_fourier(p.a0, p.a, p.b, name=p.name)
        return cls.from_functions(lambda th: float(p.eval(np.array([math.cos(th), math.sin(th)]))), name=p.name)

    def critical_points(self) -> list[float]:
        return sorted(self.minima + self.maxima + self.degenerate)

    def nearest_minimum(self, theta: float) -> float:
        """Global minimum of U closest to theta, unwrapped to theta's branch."""
        best = [m for m in self.minima if abs(self.U(m) - self.u_min) < 1e-9 * max(1.0, self.u_min)]
        if not best:
            raise DegenerateCriticalError("U has no nondegenerate global minimum")
        cands = [m + TWO_PI * round((theta - m) / TWO_PI) for m in best]
        return min(cands, key=lambda m: abs(m - theta))


def _zip_pad(a, b):
    a, b = list(a), list(b)
    k = max(len(a), len(b))
    return zip(a + [0.0] * (k - len(a)), b + [0.0] * (k - len(b)))


def _wrap(theta: float) -> float:
    t = math.fmod(theta, TWO_PI)
    if t < 0:
        t += TWO_PI
    if TWO_PI - t < 1e-10:
        t = 0.0
    return t


@dataclass(frozen=True)
class PhasePoint:
    theta: float
    phi: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValueError("phase point must be finite")

    @property
    def delta(self) -> float:
        return self.phi - self.theta


def _sincos(d: float) -> tuple[float, float]:
    """sin and cos after reducing d by the nearest multiple of pi, so that
    equilibria with phi - theta = k pi are exact fixed points."""
    k = round(d / math.pi)
    r = d - k * math.pi
    s, c = math.sin(r), math.cos(r)
    return (-s, -c) if k % 2 else (s, c)


def devaney_field(U: PlanarPotential, alpha: float, p: PhasePoint) -> tuple[float, float]:
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    return _field(U.U, U.dU, alpha, p.theta, p.phi)


def _field(Uf, dUf, alpha, th, ph):
    u = Uf(th)
    d = ph - th
    s, c = _sincos(d)
    return 2 * u * s, dUf(th) * c + alpha * u * s


def extended_field(U: PlanarPotential, alpha: float, state) -> tuple[float, ...]:
    """Derivatives of (r, z, theta, phi, t) in the regularised clock.

    The physical momentum is r^(-alpha/2) z (cos phi, sin phi) and
    dt/dtau = z r^(1 + alpha/2).
    """
    r, z, th, ph = state[:4]
    if r <= 0 or z <= 0:
        raise NonPositiveRZError(f"r={r:.3g}, z={z:.3g}; both must be positive")
    u = U.U(th)
    d = ph - th
    s, c = _sincos(d)
    du = U.dU(th)
    return (
        2 * r * u * c,
        z * du * s,
        2 * u * s,
        du * c + alpha * u * s,
        z * r ** (1 + alpha / 2),
    )


# ---------------------------------------------------------------- integration


@dataclass(frozen=True)
class Events:
    """Stopping rules for :func:`integrate`.

    margin: the sink event fires when v comes within ``margin`` of
        +sqrt(U) (forward) or -sqrt(U) (backward).
    window: theta interval; leaving it stops the run.
    targets: equilibria whose neighbourhood (sup-distance < ``proximity``) stops the run.
    section_v: stop where v crosses this value.
    """

    margin: float = 1e-6
    window: tuple[float, float] | None = None
    targets: tuple[PhasePoint, ...] = ()
    proximity: float = 1e-6
    section_v: float | None = None
    target_radius: float = 1e-2


@dataclass(frozen=True, eq=False)
class PlanarOrbit:
    """Fixed-step RK4 record.  Samples are stored in integration order:
    for ``direction=-1`` the pseudo-times decrease and v is nonincreasing.
    The last sample may be an interpolated event point."""

    taus: np.ndarray
    thetas: np.ndarray
    phis: np.ndarray
    v_samples: np.ndarray
    termination: str
    alpha: float
    direction: int = 1
    step: float = 1e-3

    @property
    def states(self) -> list[PhasePoint]:
        return [PhasePoint(float(a), float(b)) for a, b in zip(self.thetas, self.phis)]

    @property
    def terminal(self) -> PhasePoint:
        return PhasePoint(float(self.thetas[-1]), float(self.phis[-1]))

    def chronological(self) -> "PlanarOrbit":
        if self.direction > 0:
            return self
        return PlanarOrbit(self.taus[::-1], self.thetas[::-1], self.phis[::-1], self.v_samples[::-1],
                           self.termination, self.alpha, 1, self.step)

    def monotonicity_defect(self) -> float:
        """Most negative step-wise increase of v in forward time (0 if monotone)."""
        dv = np.diff(self.chronological().v_samples)
        return float(min(0.0, dv.min())) if dv.size else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("tau,theta,phi,v\n")
        for row in zip(self.taus, self.thetas, self.phis, self.v_samples):
            buf.write(",".join(f"{x:.9g}" for x in row) + "\n")
        return buf.getvalue()


def integrate(U: PlanarPotential, alpha: float, p0: PhasePoint, horizon: float,
              events: Events | None = None, step: float = 1e-3, direction: int = 1) -> PlanarOrbit:
    """Fixed-step RK4 of the reduced system with linearly interpolated events."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    ev = events or Events()
    Uf, dUf = U.U, U.dU
    h = step * (1 if direction > 0 else -1)
    sgn = 1.0 if direction > 0 else -1.0

    def f(th, ph):
        u = Uf(th)
        d = ph - th
        s, c = _sincos(d)
        return 2 * u * s, dUf(th) * c + alpha * u * s

    def vfun(th, ph):
        return math.sqrt(Uf(th)) * _sincos(ph - th)[1]

    def sink_gap(th, v):
        # positive once v has reached the attracting level in the integration direction
        return sgn * v - (math.sqrt(Uf(th)) - ev.margin)

    th, ph = float(p0.theta), float(p0.phi)
    v = vfun(th, ph)
    taus, ths, phs, vs = [0.0], [th], [ph], [v]
    nsteps = int(math.ceil(horizon / step))
    termination = MAX_TIME
    tau = 0.0
    lo, hi = ev.window if ev.window else (-math.inf, math.inf)
    for _ in range(nsteps):
        k1 = f(th, ph)
        k2 = f(th + 0.5 * h * k1[0], ph + 0.5 * h * k1[1])
        k3 = f(th + 0.5 * h * k2[0], ph + 0.5 * h * k2[1])
        k4 = f(th + h * k3[0], ph + h * k3[1])
        thn = th + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        phn = ph + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        vn = vfun(thn, phn)
        taun = tau + h
        hit, frac = None, 1.0
        if ev.section_v is not None and (v - ev.section_v) * (vn - ev.section_v) <= 0 and vn != v:
            hit, frac = CROSSED_SECTION, (ev.section_v - v) / (vn - v)
        elif not lo <= thn <= hi:
            edge = lo if thn < lo else hi
            hit, frac = LEFT_WINDOW, (edge - th) / (thn - th)
        else:
            g0, g1 = sink_gap(th, v), sink_gap(thn, vn)
            if g1 >= 0:
                hit = REACHED_SINK
                frac = 1.0 if g0 >= 0 else g0 / (g0 - g1)
                for t in ev.targets:
                    if abs(thn - t.theta) < ev.target_radius:
                        hit = REACHED_TARGET
            else:
                for t in ev.targets:
                    if max(abs(thn - t.theta), abs(phn - t.phi)) < ev.proximity:
                        hit = REACHED_TARGET
        if hit is not None:
            frac = min(max(frac, 0.0), 1.0)
            taus.append(tau + frac * h)
            ths.append(th + frac * (thn - th))
            phs.append(ph + frac * (phn - ph))
            vs.append(v + frac * (vn - v))
            termination = hit
            break
        th, ph, v, tau = thn, phn, vn, taun
        taus.append(tau)
        ths.append(th)
        phs.append(ph)
        vs.append(v)
    return PlanarOrbit(np.array(taus), np.array(ths), np.array(phs), np.array(vs),
                       termination, alpha, 1 if direction > 0 else -1, step)


# ---------------------------------------------------------------- equilibria


@dataclass(frozen=True)
class Equilibrium:
    point: PhasePoint
    kind: str  # saddle, sink or source
    eigenvalues: tuple[float, float]
    eigenvectors: np.ndarray  # columns, real parts

    @property
    def unstable_vector(self) -> np.ndarray:
        return self.eigenvectors[:, int(np.argmax(self.eigenvalues))]

    @property
    def stable_vector(self) -> np.ndarray:
        return self.eigenvectors[:, int(np.argmin(self.eigenvalues))]


def linearize(U: PlanarPotential, alpha: float, p: PhasePoint) -> Equilibrium:
    """Classify an equilibrium from a central-difference Jacobian."""
    h = JACOBIAN_STEP
    J = np.empty((2, 2))
    for j, (dt, dp) in enumerate(((h, 0.0), (0.0, h))):
        fp = _field(U.U, U.dU, alpha, p.theta + dt, p.phi + dp)
        fm = _field(U.U, U.dU, alpha, p.theta - dt, p.phi - dp)
        J[:, j] = [(fp[0] - fm[0]) / (2 * h), (fp[1] - fm[1]) / (2 * h)]
    w, vec = np.linalg.eig(J)
    re = w.real
    order = np.argsort(re)
    re, vec = re[order], vec[:, order].real
    scale = max(1.0, float(np.abs(re).max()))
    if abs(re[0]) < 1e-9 * scale or abs(re[1]) < 1e-9 * scale:
        raise DegenerateCriticalError(f"non-hyperbolic point ({p.theta:.6g}, {p.phi:.6g})")
    kind = "saddle" if re[0] < 0 < re[1] else ("sink" if re[1] < 0 else "source")
    return Equilibrium(p, kind, (float(re[0]), float(re[1])), vec)


def equilibria(U: PlanarPotential, alpha: float, window: tuple[float, float] = (0.0, TWO_PI)) -> list[Equilibrium]:
    """All equilibria with theta in ``window``, both momentum branches, sorted by (theta, phi)."""
    if U.flat:
        raise DegenerateCriticalError("U is constant: every direction is critical")
    if U.degenerate:
        raise DegenerateCriticalError(f"degenerate critical points at {U.degenerate}")
    lo, hi = window
    out = []
    for base in U.critical_points():
        k0 = math.ceil((lo - base) / TWO_PI - 1e-12)
        th = base + k0 * TWO_PI
        while th <= hi + 1e-12:
            for shift in (0.0, math.pi):
                out.append(linearize(U, alpha, PhasePoint(th, th + shift)))
            th += TWO_PI
    return sorted(out, key=lambda e: (e.point.theta, e.point.phi))


# ---------------------------------------------------------------- shooting


def _saddle(U, alpha, saddle) -> Equilibrium:
    if U.flat or abs(U.d2U(saddle.theta)) < DEGENERATE_TOL:
        raise DegenerateCriticalError("no hyperbolic saddle at this point")
    eq = linearize(U, alpha, saddle)
    if eq.kind != "saddle":
        raise ValueError(f"point ({saddle.theta:.6g}, {saddle.phi:.6g}) is a {eq.kind}, not a saddle")
    return eq


def _offset_start(saddle, vec, offset, direction):
    """Offset point along ``vec``; by default the side with sin(phi - theta) > 0."""
    if direction is None:
        for sd in (1.0, -1.0):
            th, ph = saddle.theta + sd * offset * vec[0], saddle.phi + sd * offset * vec[1]
            if math.sin(ph - th) > 0:
                return PhasePoint(th, ph)
        raise ValueError("eigenvector is tangent to sin(phi - theta) = 0")
    sd = 1.0 if direction > 0 else -1.0
    return PhasePoint(saddle.theta + sd * offset * vec[0], saddle.phi + sd * offset * vec[1])


def shoot_unstable(U: PlanarPotential, alpha: float, saddle: PhasePoint, offset: float = 1e-8,
                   direction: int | None = None, horizon: float = 60.0, step: float = 1e-3,
                   events: Events | None = None) -> PlanarOrbit:
    """Follow the unstable manifold of ``saddle`` forward until an event fires."""
    eq = _saddle(U, alpha, saddle)
    p0 = _offset_start(saddle, eq.unstable_vector, offset, direction)
    return integrate(U, alpha, p0, horizon, events, step, 1)


def shoot_stable(U: PlanarPotential, alpha: float, saddle: PhasePoint, offset: float = 1e-8,
                 direction: int | None = None, horizon: float = 60.0, step: float = 1e-3,
                 events: Events | None = None) -> PlanarOrbit:
    """Follow the stable manifold of ``saddle`` backward in pseudo-time."""
    eq = _saddle(U, alpha, saddle)
    p0 = _offset_start(saddle, eq.stable_vector, offset, direction)
    return integrate(U, alpha, p0, horizon, events, step, -1)


@dataclass(frozen=True, eq=False)
class SeparationResult:
    alpha: float
    value: float
    theta_unstable: float
    theta_stable: float
    unstable: PlanarOrbit
    stable: PlanarOrbit


def separation(U: PlanarPotential, alpha: float, source: PhasePoint, target: PhasePoint,
               step: float = 1e-3, offset: float = 1e-8, horizon: float = 60.0) -> SeparationResult:
    """Signed theta gap on the section v = 0 between the unstable manifold of
    ``source`` and the stable manifold of ``target``.  Positive means the
    unstable branch arrives past the target's branch (overshoot)."""
    ev = Events(section_v=0.0)
    un = shoot_unstable(U, alpha, source, offset, None, horizon, step, ev)
    st = shoot_stable(U, alpha, target, offset, None, horizon, step, ev)
    for orb, label in ((un, "unstable"), (st, "stable")):
        if orb.termination != CROSSED_SECTION:
            raise ParabolicError(f"{label} manifold ended with {orb.termination} before reaching v = 0")
    tu, ts = float(un.thetas[-1]), float(st.thetas[-1])
    return SeparationResult(alpha, tu - ts, tu, ts, un, st)


@dataclass(frozen=True, eq=False)
class ConnectionResult:
    alpha_bar: float
    bracket: tuple[float, float]
    separation_lo: float
    separation_hi: float
    history: list[tuple[float, float]]
    witness_unstable: PlanarOrbit
    witness_stable: PlanarOrbit
    richardson_defect: float
    margin: float
    alpha_root: float

    def to_dict(self) -> dict:
        return {
            "alpha_bar": self.alpha_bar,
            "alpha_root": self.alpha_root,
            "bracket": list(self.bracket),
            "separation_lo": self.separation_lo,
            "separation_hi": self.separation_hi,
            "history": [list(h) for h in self.history],
            "richardson_defect": self.richardson_defect,
            "margin": self.margin,
            "witness_unstable_termination": self.witness_unstable.termination,
            "witness_stable_termination": self.witness_stable.termination,
        }


def saddle_connection_bisect(U: PlanarPotential, alpha_bracket: tuple[float, float],
                             source: PhasePoint, target: PhasePoint, tol: float = 1e-4,
                             step: float = 1e-3, offset: float = 1e-8, margin: float = 1e-6) -> ConnectionResult:
    """Bisect on alpha for a zero of the separation functional.

    ``alpha_bar`` is the midpoint of the final bracket; ``alpha_root`` is the
    linear interpolation of the separation inside it, which is far more
    accurate because the separation is smooth in alpha.  Witness orbits are
    computed at ``alpha_root``.
    """
    lo, hi = map(float, alpha_bracket)
    if not 0 < lo < hi < 2:
        raise BadBracketError("bracket must satisfy 0 < lo < hi < 2")
    s_lo = separation(U, lo, source, target, step, offset).value
    s_hi = separation(U, hi, source, target, step, offset).value
    history = [(lo, s_lo), (hi, s_hi)]
    if s_lo * s_hi > 0:
        raise BadBracketError(f"separation has the same sign at {lo} ({s_lo:.4g}) and {hi} ({s_hi:.4g})")
    end_lo, end_hi = s_lo, s_hi
    while hi - lo > tol and s_lo != 0.0 and s_hi != 0.0:
        mid = 0.5 * (lo + hi)
        s = separation(U, mid, source, target, step, offset).value
        history.append((mid, s))
        if (s < 0) == (s_lo < 0) and s != 0.0:
            lo, s_lo = mid, s
        else:
            hi, s_hi = mid, s
    mid = 0.5 * (lo + hi)
    root = lo if s_lo == 0.0 else (hi if s_hi == 0.0 else lo - s_lo * (hi - lo) / (s_hi - s_lo))
    coarse = separation(U, root, source, target, step, offset).value
    fine = separation(U, root, source, target, step / 2, offset).value
    ev = Events(margin=margin, targets=(target,))
    wu = shoot_unstable(U, root, source, offset, None, 60.0, step, ev)
    ws = shoot_stable(U, root, target, offset, None, 60.0, step, Events(margin=margin, targets=(source,)))
    return ConnectionResult(mid, (lo, hi), end_lo, end_hi, history, wu, ws, abs(coarse - fine), margin, root)


# ---------------------------------------------------------------- angular sweeps


def apsidal_bounds(U: PlanarPotential, alpha: float) -> tuple[float, float]:
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    ratio = min(1.0, U.u_min / U.u_max)
    return 4 / (2 - alpha) * math.asin(math.sqrt(ratio)), TWO_PI / (2 - alpha)


@dataclass(frozen=True)
class SweepResult:
    sweep: float
    theta_start: float
    theta_end: float
    delta0: float
    lower: float
    upper: float

    @property
    def within_bounds(self) -> bool:
        return self.lower - 1e-6 <= self.sweep <= self.upper + 1e-6


def dv_dtheta_sweep(U: PlanarPotential, alpha: float, v0: float | None = None, theta0: float | None = None,
                    delta0: float = 1e-6, steps: int = 20000) -> SweepResult:
    """Angle swept while v runs from v0 (default -sqrt(U_min)) to sqrt(U_min) - delta0.

    Along an orbit dv/dtheta = alpha* sqrt(U - v^2).  Writing
    v = sqrt(U_min) sin(psi) removes the square-root singularity at both ends;
    the remaining delta0 margins are closed with the local linear slopes, so
    the result approximates the full sweep up to O(delta0).
    """
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    ast = (2 - alpha) / 2
    um = U.u_min
    sq = math.sqrt(um)
    if theta0 is None:
        theta0 = U.minima[0] if (U.minima and not U.flat) else 0.0
        if U.minima and not U.flat:
            theta0 = U.nearest_minimum(theta0)
    if v0 is None or abs(v0 + sq) < 1e-15:
        # unstable branch leaving the saddle: theta - theta0 ~ c (psi + pi/2)
        upp = U.d2U(theta0)
        if U.U(theta0) - um > 1e-9 * max(1.0, um):
            raise ValueError("v0 = -sqrt(U_min) requires theta0 at a global minimum of U")
        if abs(upp) < 1e-14:
            w = 1 / ast**2
        else:
            A = 0.5 * upp * ast**2
            B = um * ast**2
            w = (-B + math.sqrt(B * B + 4 * A * um)) / (2 * A)
        slope = math.sqrt(w)
        psi0 = math.asin(max(-1.0, (-sq + delta0) / sq))
        th = theta0 + slope * (psi0 + math.pi / 2)
    else:
        if not -sq < v0 < sq:
            raise ValueError("v0 must lie in (-sqrt(U_min), sqrt(U_min))")
        psi0 = math.asin(v0 / sq)
        th = theta0
    psi1 = math.asin((sq - delta0) / sq)
    Uf = U.U

    def F(psi, theta):
        return sq * math.cos(psi) / (ast * math.sqrt(max(Uf(theta) - um * math.sin(psi) ** 2, 1e-300)))

    h = (psi1 - psi0) / steps
    psi = psi0
    for _ in range(steps):
        k1 = F(psi, th)
        k2 = F(psi + h / 2, th + h / 2 * k1)
        k3 = F(psi + h / 2, th + h / 2 * k2)
        k4 = F(psi + h, th + h * k3)
        th += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        psi += h
    th_end = th + (math.pi / 2 - psi1) * F(psi1, th)
    lower, upper = apsidal_bounds(U, alpha)
    return SweepResult(th_end - theta0, theta0, th_end, delta0, lower, upper)


def dv_dtau_defect(U: PlanarPotential, orbit: PlanarOrbit, rel_floor: float = 1e-3) -> float:
    """Largest relative gap between a fourth-order difference quotient of v and
    (2 - alpha) sqrt(U) (U - v^2), over uniformly spaced samples whose rate is
    above ``rel_floor`` times the orbit's peak rate."""
    o = orbit.chronological()
    taus, v, th = o.taus, o.v_samples, o.thetas
    # drop interpolated event samples at either end
    lo, hi = 0, taus.size
    if hi - lo > 1 and abs((taus[-1] - taus[-2]) - o.step) > 1e-12:
        hi -= 1
    if hi - lo > 1 and abs((taus[1] - taus[0]) - o.step) > 1e-12:
        lo += 1
    v, th = v[lo:hi], th[lo:hi]
    n = v.size
    if n < 5:
        return 0.0
    h = o.step
    quot = (-v[4:] + 8 * v[3:-1] - 8 * v[1:-3] + v[:-4]) / (12 * h)
    mid = slice(2, n - 2)
    u = np.array([U.U(t) for t in th[mid]])
    rate = (2 - o.alpha) * np.sqrt(u) * (u - v[mid] ** 2)
    peak = float(np.abs(rate).max())
    if peak == 0.0:
        return 0.0
    keep = np.abs(rate) > rel_floor * peak
    if not keep.any():
        return 0.0
    return float(np.max(np.abs(quot[keep] - rate[keep]) / np.abs(rate[keep])))


# ---------------------------------------------------------------- physical reconstruction


@dataclass(frozen=True, eq=False)
class PhysicalOrbit:
    taus: np.ndarray
    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    r: np.ndarray
    z: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    z_defect: float

    @property
    def sweep(self) -> float:
        return float(self.theta[-1] - self.theta[0])


def reconstruct_physical(U: PlanarPotential, alpha: float, p0: PhasePoint, r0: float = 1.0,
                         tau_span: tuple[float, float] = (-6.0, 6.0), step: float = 1e-3) -> PhysicalOrbit:
    """Integrate (r, z, theta, phi, t) on the zero-energy level z = sqrt(2U)."""
    if r0 <= 0:
        raise NonPositiveRZError("r0 must be positive")
    y0 = np.array([r0, math.sqrt(2 * U.U(p0.theta)), p0.theta, p0.phi, 0.0])

    def run(span, h):
        n = int(round(abs(span) / step))
        y = y0.copy()
        out = [y]
        for _ in range(n):
            k1 = np.array(extended_field(U, alpha, y))
            k2 = np.array(extended_field(U, alpha, y + h / 2 * k1))
            k3 = np.array(extended_field(U, alpha, y + h / 2 * k2))
            k4 = np.array(extended_field(U, alpha, y + h * k3))
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            out.append(y)
        return np.array(out)

    back = run(tau_span[0], -step) if tau_span[0] < 0 else y0[None]
    fwd = run(tau_span[1], step) if tau_span[1] > 0 else y0[None]
    ys = np.vstack([back[::-1], fwd[1:]])
    nb = back.shape[0] - 1
    taus = (np.arange(ys.shape[0]) - nb) * step
    r, z, th, ph, t = ys.T
    x = r[:, None] * np.stack([np.cos(th), np.sin(th)], axis=1)
    mom = (r ** (-alpha / 2) * z)[:, None] * np.stack([np.cos(ph), np.sin(ph)], axis=1)
    zd = float(np.max(np.abs(z - np.sqrt(2 * np.array([U.U(a) for a in th])))))
    return PhysicalOrbit(taus, t, x, mom, r, z, th, ph, zd)


def physical_state(U: PlanarPotential, alpha: float, point: PhasePoint, r: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Position and zero-energy velocity for a phase point at radius r."""
    x = r * np.array([math.cos(point.theta), math.sin(point.theta)])
    speed = r ** (-alpha / 2) * math.sqrt(2 * U.U(point.theta))
    return x, speed * np.array([math.cos(point.phi), math.sin(point.phi)])


@dataclass(frozen=True)
class ConicFit:
    coefficients: np.ndarray  # a x^2 + b xy + c y^2 + d x + e y + f, unit norm, normalised frame
    eccentricity: float
    residual: float
    lrl_eccentricity: float | None = None


def _conic_eccentricity(coef: np.ndarray) -> float:
    a, b, c, d, e, f = coef
    M = np.array([[a, b / 2, d / 2], [b / 2, c, e / 2], [d / 2, e / 2, f]])
    eta = 1.0 if np.linalg.det(M) < 0 else -1.0
    root = math.sqrt((a - c) ** 2 + b * b)
    den = eta * (a + c) + root
    if den <= 0:
        return math.inf
    return math.sqrt(2 * root / den)


def fit_conic(points, momenta=None) -> ConicFit:
    """Least-squares conic through planar points (smallest singular vector).

    With ``momenta`` of an inverse-square orbit (alpha=1, U=1) the
    Laplace-Runge-Lenz eccentricity is reported alongside.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 6:
        raise ValueError("need at least six planar points")
    centre = pts.mean(axis=0)
    scale = float(np.sqrt(np.mean(np.sum((pts - centre) ** 2, axis=1))))
    q = (pts - centre) / scale
    X, Y = q[:, 0], q[:, 1]
    D = np.column_stack([X * X, X * Y, Y * Y, X, Y, np.ones_like(X)])
    _, sv, vt = np.linalg.svd(D, full_matrices=False)
    coef = vt[-1]
    ecc = _conic_eccentricity(coef)
    lrl = None
    if momenta is not None:
        mom = np.asarray(momenta, dtype=float)
        L = pts[:, 0] * mom[:, 1] - pts[:, 1] * mom[:, 0]
        r = np.linalg.norm(pts, axis=1)
        A = np.stack([mom[:, 1] * L - pts[:, 0] / r, -mom[:, 0] * L - pts[:, 1] / r], axis=1)
        lrl = float(np.median(np.linalg.norm(A, axis=1)))
    return ConicFit(coef, ecc, float(sv[-1] / math.sqrt(pts.shape[0])), lrl)


# ---------------------------------------------------------------- portraits


@dataclass(frozen=True, eq=False)
class Portrait:
    alpha: float
    orbits: list[PlanarOrbit]
    starts: list[PhasePoint]
    equilibria: list[Equilibrium]
    window: tuple[float, float]


def _portrait_starts(n: int) -> list[PhasePoint]:
    cols = max(1, int(round(math.sqrt(n * 5 / 4))))
    rows = math.ceil(n / cols)
    pts = []
    for i in range(rows):
        delta = math.pi * (i + 1) / (rows + 1)
        for j in range(cols):
            th = math.pi * (j + 0.5) / cols
            pts.append(PhasePoint(th, th + delta))
    return pts[:n]


def portrait(U: PlanarPotential, alpha: float, n_orbits: int = 20, horizon: float = 12.0,
             step: float = 1e-3, window: tuple[float, float] = (-math.pi, 2 * math.pi)) -> Portrait:
    """Orbits through a deterministic grid of starts with 0 < phi - theta < pi,
    each run backward and forward and stored in forward time."""
    ev = Events(window=window)
    orbits = []
    starts = _portrait_starts(n_orbits)
    for p0 in starts:
        b = integrate(U, alpha, p0, horizon, ev, step, -1).chronological()
        f = integrate(U, alpha, p0, horizon, ev, step, 1)
        orbits.append(PlanarOrbit(
            np.concatenate([b.taus, f.taus[1:]]),
            np.concatenate([b.thetas, f.thetas[1:]]),
            np.concatenate([b.phis, f.phis[1:]]),
            np.concatenate([b.v_samples, f.v_samples[1:]]),
            f.termination, alpha, 1, step,
        ))
    try:
        eqs = equilibria(U, alpha, window)
    except DegenerateCriticalError:
        eqs = []
    return Portrait(alpha, orbits, starts, eqs, window)


def portrait_svg(pt: Portrait, width: int = 600, height: int = 600, stride: int = 50) -> str:
    """Deterministic SVG of a portrait in the (theta, phi) plane."""
    lo, hi = pt.window
    plo, phi_hi = lo, hi + math.pi

    def X(t):
        return (t - lo) / (hi - lo) * width

    def Y(p):
        return height - (p - plo) / (phi_hi - plo) * height

    g = "{:.9g}".format
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white" stroke="black"/>',
        f'<text x="6" y="16" font-size="12">alpha = {g(pt.alpha)}</text>',
    ]
    for orb in pt.orbits:
        idx = list(range(0, orb.taus.size, stride))
        if idx[-1] != orb.taus.size - 1:
            idx.append(orb.taus.size - 1)
        coords = " ".join(f"{g(X(orb.thetas[i]))},{g(Y(orb.phis[i]))}" for i in idx)
        out.append(f'<polyline fill="none" stroke="steelblue" stroke-width="1" points="{coords}"/>')
    colours = {"saddle": "black", "sink": "firebrick", "source": "seagreen"}
    for e in pt.equilibria:
        cx, cy = X(e.point.theta), Y(e.point.phi)
        if not (0 <= cx <= width and 0 <= cy <= height):
            continue
        if e.kind == "saddle":
            out.append(f'<rect x="{g(cx - 4)}" y="{g(cy - 4)}" width="8" height="8" fill="black"/>')
        else:
            out.append(f'<circle cx="{g(cx)}" cy="{g(cy)}" r="4" fill="{colours[e.kind]}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
