"""Potential-level quantities built from many Bolza solves.

The excess level gamma(eps) = (m(eps) - m(0)) / eps^alpha*, the jumps of
minimizers with receding endpoints, the In/Out classification and the
bisection for the critical exponent, plus asymptotic checks of long free
zero-energy integrations.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .action import homothetic_action
from .bolza import BolzaProblem, BolzaSolution, minimize_bolza
from .errors import BadBracketError, EnergyDriftError, NotStabilizedError, ParabolicError
from .potential import AngularPotential, HomogeneousPotential

log = logging.getLogger(__name__)

IN, OUT, PI_CANDIDATE = "In", "Out", "Pi_candidate"
DEFAULT_EPS_SCHEDULE = tuple(0.4 * 2.0**-k for k in range(5))
DEFAULT_RADII = (5.0, 10.0, 20.0, 40.0)
SOLVER_TOL = 1e-3


@dataclass(frozen=True)
class SolverSettings:
    """Bolza solver settings shared by every solve of a sweep."""

    grid_size: int = 400
    restarts: int = 6
    seed: int = 0
    refine_contact: bool = True
    max_iter: int = 20000

    @property
    def jump_tol(self) -> float:
        return max(1e-3, 5 * 2.0 / self.grid_size)

    def solve(self, p: HomogeneousPotential, x1, x2, eps: float) -> BolzaSolution:
        return minimize_bolza(
            BolzaProblem(
                p, x1, x2, eps, grid_size=self.grid_size, restarts=self.restarts, seed=self.seed,
                max_iter=self.max_iter, refine_contact=self.refine_contact,
            )
        )


DEFAULT_SETTINGS = SolverSettings()


def _check_eps(eps):
    if not (0 < eps <= 1):
        raise ValueError(f"eps must lie in (0, 1], got {eps}")


def solve_at_eps(p: HomogeneousPotential, eps: float, settings: SolverSettings = DEFAULT_SETTINGS) -> BolzaSolution:
    """Bolza solution between the marked minima with obstacle radius eps."""
    _check_eps(eps)
    return settings.solve(p, p.angular.xi_minus, p.angular.xi_plus, eps)


def m_of_eps(p: HomogeneousPotential, eps: float, settings: SolverSettings = DEFAULT_SETTINGS) -> float:
    return solve_at_eps(p, eps, settings).action


def m_zero(p: HomogeneousPotential) -> float:
    """Level of the double homothetic (collision) path: 2 sqrt(2 V_min) / alpha*."""
    return 2.0 * homothetic_action(0.0, 1.0, p.v_min, p.alpha)


def gamma(p: HomogeneousPotential, eps: float, settings: SolverSettings = DEFAULT_SETTINGS) -> float:
    return (m_of_eps(p, eps, settings) - m_zero(p)) / eps**p.alpha_star


def _fmt(seq) -> str:
    return "[" + ", ".join(f"{float(x):.4g}" for x in seq) + "]"


@dataclass
class GammaEstimate:
    value: float
    uncertainty: float
    curve: list[tuple[float, float]]
    solutions: list[BolzaSolution] = field(default_factory=list, repr=False)


def gamma_zero_plus(
    p: HomogeneousPotential,
    eps_schedule=DEFAULT_EPS_SCHEDULE,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> GammaEstimate:
    """Upper estimate of the limit of gamma as eps -> 0, with a one-sided uncertainty.

    gamma is increasing in eps, so the last value overestimates the limit;
    the uncertainty is the last decrement of the curve.
    """
    sched = [float(e) for e in eps_schedule]
    if len(sched) < 3:
        raise ValueError("the eps schedule needs at least three values")
    if any(b >= a for a, b in zip(sched, sched[1:])):
        raise ValueError("the eps schedule must be decreasing")
    m0 = m_zero(p)
    sols = [solve_at_eps(p, e, settings) for e in sched]
    curve = [(e, (s.action - m0) / e**p.alpha_star) for e, s in zip(sched, sols)]
    value = curve[-1][1]
    unc = max(curve[-2][1] - curve[-1][1], 0.0)
    return GammaEstimate(value, unc, curve, sols)


@dataclass
class MorseApproximation:
    radii: list[float]
    solutions: list[BolzaSolution] = field(repr=False)
    delta_pos_seq: list[float]
    delta_vel_seq: list[float]
    converged: bool
    stabilization: tuple[float, float]
    eps: float
    jump_tol: float

    def to_rows(self) -> list[dict]:
        return [
            {"R": R, "delta_pos": dp, "delta_vel": dv, "action": s.action, "kind": s.kind}
            for R, dp, dv, s in zip(self.radii, self.delta_pos_seq, self.delta_vel_seq, self.solutions)
        ]


def morse_approximation(
    p: HomogeneousPotential,
    eps: float = 1.0,
    radii=DEFAULT_RADII,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> MorseApproximation:
    """Bolza solutions from R xi- to R xi+ around the obstacle, for increasing R."""
    radii = [float(r) for r in radii]
    if len(radii) < 3 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be increasing with at least three values")
    if radii[0] <= eps:
        raise ValueError("radii must exceed the obstacle radius")
    xm, xp = p.angular.xi_minus, p.angular.xi_plus
    sols = [settings.solve(p, R * xm, R * xp, eps) for R in radii]
    dpos = [s.delta_pos for s in sols]
    dvel = [s.delta_vel for s in sols]
    stab = (abs(dpos[-1] - dpos[-2]), abs(dvel[-1] - dvel[-2]))
    tol = settings.jump_tol
    return MorseApproximation(radii, sols, dpos, dvel, max(stab) < tol, stab, eps, tol)


def jumps_of_potential(
    p: HomogeneousPotential,
    eps: float = 1.0,
    radii=DEFAULT_RADII,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> tuple[float, float, MorseApproximation]:
    """Position and velocity jumps of the potential, from the largest radius.

    Raises NotStabilizedError (carrying the approximation) if the last two
    radii disagree by more than 5 jump_tol.
    """
    approx = morse_approximation(p, eps, radii, settings)
    if max(approx.stabilization) > 5 * approx.jump_tol:
        raise NotStabilizedError(
            f"jumps still moving between R={approx.radii[-2]:g} and R={approx.radii[-1]:g}: "
            f"pos {_fmt(approx.delta_pos_seq)}, vel {_fmt(approx.delta_vel_seq)}",
            approx,
        )
    return approx.delta_pos_seq[-1], approx.delta_vel_seq[-1], approx


@dataclass
class PotentialClassification:
    alpha: float
    delta_pos_V: float
    delta_vel_V: float
    gamma_curve: list[tuple[float, float]]
    gamma_zero_plus: float
    gamma_uncertainty: float
    verdict: str
    gamma_verdict: str
    jump_verdict: str
    inconsistent: bool
    c_V: float
    m_zero: float
    dichotomy_case: int
    c_V_min_radius: float
    jumps_stabilized: bool
    jump_sequence: list[dict]
    flags: list[str]
    jump_tol: float
    gamma_tol: float
    solutions: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d.pop("solutions")
        d["gamma_curve"] = [list(c) for c in self.gamma_curve]
        return d


def _gamma_verdict(value, unc, tol):
    if value < -tol:
        return OUT
    if value - unc >= tol:
        return IN
    return PI_CANDIDATE


def _jump_verdict(dpos, dvel, tol):
    if dvel > tol:
        return OUT
    if dpos > tol:
        return IN
    return PI_CANDIDATE


def classify(
    p: HomogeneousPotential,
    eps_schedule=DEFAULT_EPS_SCHEDULE,
    radii=DEFAULT_RADII,
    jump_eps: float = 1.0,
    settings: SolverSettings = DEFAULT_SETTINGS,
    gamma_tol: float = SOLVER_TOL,
) -> PotentialClassification:
    """Classify a potential as In, Out or Pi_candidate by two independent routes.

    The excess-level route looks at the sign of gamma near eps = 0, the jump
    route at whether receding-endpoint minimizers reflect radially. Problems
    are reported through ``flags``; nothing is raised for them.
    """
    flags: list[str] = []
    g = gamma_zero_plus(p, eps_schedule, settings)
    tol_j = settings.jump_tol
    try:
        dpos, dvel, approx = jumps_of_potential(p, jump_eps, radii, settings)
        stabilized = True
    except NotStabilizedError as exc:
        approx = exc.approximation
        dpos, dvel = approx.delta_pos_seq[-1], approx.delta_vel_seq[-1]
        stabilized = False
        flags.append(f"NotStabilized: {exc}")
    for (e1, g1), (e2, g2) in zip(g.curve, g.curve[1:]):
        if g2 > g1 + 2 * gamma_tol:
            flags.append(f"gamma not monotone between eps={e1:g} and eps={e2:g}")
    for s in list(g.solutions) + list(approx.solutions):
        if s.residuals.get("dichotomy_violation"):
            flags.append(f"jump dichotomy violated at eps={s.eps:g}")

    gv = _gamma_verdict(g.value, g.uncertainty, gamma_tol)
    jv = _jump_verdict(dpos, dvel, tol_j)
    inconsistent = gv != jv
    if inconsistent:
        flags.append(f"Inconsistent: gamma route says {gv}, jump route says {jv}")
    verdict = jv

    m0 = m_zero(p)
    levels = [(min(s.action, s.free_action if math.isfinite(s.free_action) else s.action), s) for s in g.solutions]
    best_level, best_sol = min(levels, key=lambda ls: ls[0])
    c_v = min(best_level, m0)
    if m0 - c_v < gamma_tol:
        case, rmin = 1, 0.0
    else:
        case, rmin = 2, best_sol.free_min_radius
        if not rmin > 0:
            flags.append("case 2 level without a minimizer bounded away from the origin")

    return PotentialClassification(
        alpha=p.alpha,
        delta_pos_V=dpos,
        delta_vel_V=dvel,
        gamma_curve=g.curve,
        gamma_zero_plus=g.value,
        gamma_uncertainty=g.uncertainty,
        verdict=verdict,
        gamma_verdict=gv,
        jump_verdict=jv,
        inconsistent=inconsistent,
        c_V=c_v,
        m_zero=m0,
        dichotomy_case=case,
        c_V_min_radius=rmin,
        jumps_stabilized=stabilized,
        jump_sequence=approx.to_rows(),
        flags=flags,
        jump_tol=tol_j,
        gamma_tol=gamma_tol,
        solutions=tuple(g.solutions) + tuple(approx.solutions),
    )


@dataclass
class AlphaBarResult:
    alpha_bar: float
    bracket: tuple[float, float]
    history: list[dict]
    end_classifications: tuple[PotentialClassification, PotentialClassification] = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "alpha_bar": self.alpha_bar,
            "bracket": list(self.bracket),
            "history": self.history,
            "end_verdicts": [c.verdict for c in self.end_classifications],
        }


def _probe(U: AngularPotential, alpha: float, radii, jump_eps, eps_check, settings) -> dict:
    p = HomogeneousPotential(U, alpha)
    approx = morse_approximation(p, jump_eps, radii, settings)
    dvel, dpos = approx.delta_vel_seq[-1], approx.delta_pos_seq[-1]
    g = gamma(p, eps_check, settings)
    side = OUT if dvel > settings.jump_tol else IN
    # gamma(eps) overestimates its limit, so only a negative value is conclusive
    g_side = OUT if g < -SOLVER_TOL else "undetermined"
    return {
        "alpha": alpha,
        "delta_vel": dvel,
        "delta_pos": dpos,
        "gamma_check": g,
        "eps_check": eps_check,
        "side": side,
        "gamma_side": g_side,
        "disagree": side == IN and g_side == OUT,
        "stabilized": approx.converged,
    }


def find_alpha_bar(
    U: AngularPotential,
    alpha_bracket=(0.2, 1.8),
    width: float = 1e-2,
    radii=DEFAULT_RADII,
    jump_eps: float = 1.0,
    eps_check: float = 0.05,
    eps_schedule=DEFAULT_EPS_SCHEDULE,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> AlphaBarResult:
    """Bisect on alpha for the In/Out transition, keyed on the velocity jump.

    Both bracket ends are fully classified first; they must be In and Out.
    Every probe also records gamma at ``eps_check`` as a cross-check.
    """
    lo, hi = map(float, alpha_bracket)
    if not (0 < lo < hi < 2):
        raise BadBracketError("bracket must satisfy 0 < lo < hi < 2")
    c_lo = classify(HomogeneousPotential(U, lo), eps_schedule, radii, jump_eps, settings)
    c_hi = classify(HomogeneousPotential(U, hi), eps_schedule, radii, jump_eps, settings)
    if c_lo.verdict != IN or c_hi.verdict != OUT:
        raise BadBracketError(
            f"bracket ends classify as ({c_lo.verdict}, {c_hi.verdict}); need (In, Out)"
        )
    history = []
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        probe = _probe(U, mid, radii, jump_eps, eps_check, settings)
        history.append(probe)
        log.info("alpha=%.6f side=%s dvel=%.4g gamma=%.4g", mid, probe["side"], probe["delta_vel"], probe["gamma_check"])
        if probe["side"] == OUT:
            hi = mid
        else:
            lo = mid
    return AlphaBarResult(0.5 * (lo + hi), (lo, hi), history, (c_lo, c_hi))


# -- long free integrations -------------------------------------------------------

@dataclass
class FreeTrajectory:
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    energy_drift: float


def integrate_zero_energy(
    p: HomogeneousPotential,
    x0,
    v0=None,
    t_end: float = 1e4,
    dtau: float = 1e-3,
    max_steps: int = 2_000_000,
    drift_tol: float = 1e-6,
) -> FreeTrajectory:
    """Fixed-step RK4 for x'' = grad V(x) in the Sundman clock dt = r^(1 + alpha/2) d tau.

    Without ``v0`` the launch is radial and outward at zero energy.
    Raises EnergyDriftError if the relative energy drift exceeds ``drift_tol``.
    """
    x0 = np.asarray(x0, dtype=float)
    if v0 is None:
        r0 = np.linalg.norm(x0)
        v0 = math.sqrt(2 * p.value(x0)) * x0 / r0
    beta = 1 + p.alpha / 2

    def f(y):
        x, v = y[:-1].reshape(2, -1)
        r = math.sqrt(x @ x)
        w = r**beta
        return np.concatenate([w * v, w * p.gradient(x), [w]])

    d = x0.size
    y = np.concatenate([x0, np.asarray(v0, dtype=float), [0.0]])
    out = [y]
    for _ in range(max_steps):
        k1 = f(y)
        k2 = f(y + 0.5 * dtau * k1)
        k3 = f(y + 0.5 * dtau * k2)
        k4 = f(y + dtau * k3)
        y = y + dtau / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(y)
        if y[-1] >= t_end:
            break
    arr = np.array(out)
    x, v, t = arr[:, :d], arr[:, d:2 * d], arr[:, -1]
    vv = p.value(x)
    drift = float(np.max(np.abs(0.5 * np.sum(v * v, axis=1) - vv) / vv))
    if drift > drift_tol:
        raise EnergyDriftError(f"relative energy drift {drift:.3g} exceeds {drift_tol:.1g}")
    return FreeTrajectory(t, x, v, drift)


@dataclass
class DiagnosticsReport:
    t_end: float
    exponent_fit: float
    exponent_target: float
    speed_limit: float
    speed_target: float
    k_ratio: float
    k_value: float
    decay_values: list[float]
    decay_monotone: bool
    decay_target: str
    ratio_variation: float
    energy_drift: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def asymptotic_diagnostics(p: HomogeneousPotential, traj: FreeTrajectory, samples: int = 20) -> DiagnosticsReport:
    """Compare the last time decade of a free trajectory with the parabolic asymptotics."""
    t, x, v = traj.t, traj.x, traj.v
    t_end = float(t[-1])
    if t_end < 10 or t[1] <= 0:
        raise ValueError("trajectory too short for a final-decade fit")
    mask = t >= t_end / 10
    r = np.linalg.norm(x, axis=1)
    s = x / r[:, None]
    slope = float(np.polyfit(np.log(t[mask]), np.log(r[mask]), 1)[0])
    a = p.alpha
    rdot = np.sum(x * v, axis=1) / r
    g_end = float(p.angular.eval(s[-1]))
    k = (a + 2) / 2 * math.sqrt(2 * g_end)
    k_ratio = float(r[-1] / (k * t_end) ** (2 / (2 + a)))
    xm, xp = p.angular.xi_minus, p.angular.xi_plus
    target, label = (xp, "xi_plus") if np.linalg.norm(s[-1] - xp) <= np.linalg.norm(s[-1] - xm) else (xm, "xi_minus")
    decay = r ** p.alpha_star * np.linalg.norm(s - target, axis=1)
    grid = np.geomspace(t_end / 10, t_end, samples)
    idx = np.searchsorted(t, grid).clip(0, t.size - 1)
    dvals = decay[idx]
    ratio = r[mask] ** ((2 + a) / 2) / t[mask]
    return DiagnosticsReport(
        t_end=t_end,
        exponent_fit=slope,
        exponent_target=2 / (2 + a),
        speed_limit=float(r[-1] ** (a / 2) * rdot[-1]),
        speed_target=math.sqrt(2 * g_end),
        k_ratio=k_ratio,
        k_value=k,
        decay_values=dvals.tolist(),
        decay_monotone=bool(np.all(np.diff(dvals) <= 1e-12 * max(dvals.max(), 1e-300))),
        decay_target=label,
        ratio_variation=float((ratio.max() - ratio.min()) / ratio[-1]),
        energy_drift=traj.energy_drift,
    )
