"""Acceptance suite: one PASS/FAIL line per criterion 1-15.

Run either way:

    pytest -v tests/test_acceptance.py -s
    python tests/test_acceptance.py

Expensive results (panel classifications, the planar connection) are
computed once and shared between criteria.
"""
from __future__ import annotations

import contextlib
import functools
import io
import math
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

from parabolic import action as act
from parabolic import bolza as bz
from parabolic import cli, morse, planar as pl
from parabolic import potential as pot

P_SADDLE = pl.PhasePoint(0.0, math.pi)
Q_SADDLE = pl.PhasePoint(math.pi, math.pi)
PANEL = [("isotropic", 1.0), ("devaney", 0.5), ("devaney", 1.0), ("barrier50", 0.2), ("barrier50", 1.0)]
GAMMA_EPS = (0.4, 0.2, 0.1, 0.05)


def hp(name, alpha):
    return pot.HomogeneousPotential(pot.NAMED[name](), alpha)


@functools.lru_cache(maxsize=None)
def panel_classification(name, alpha):
    return morse.classify(hp(name, alpha))


def panel_solutions():
    """Every Bolza solve behind the panel classifications (gamma curve and jump sequence)."""
    return [(f"{name} a={alpha} eps={s.eps:g}", s)
            for name, alpha in PANEL for s in panel_classification(name, alpha).solutions]


@functools.lru_cache(maxsize=None)
def devaney_planar():
    return pl.PlanarPotential.from_fourier(2.0, (0.0, -1.0), name="devaney")


@functools.lru_cache(maxsize=None)
def connection():
    return pl.saddle_connection_bisect(devaney_planar(), (0.5, 1.0), P_SADDLE, Q_SADDLE)


SWEEPS: list[tuple[str, float, float, float]] = []


def sweep(U, alpha, label):
    res = pl.dv_dtheta_sweep(U, alpha)
    SWEEPS.append((label, res.sweep, res.lower, res.upper))
    return res.sweep


# ---------------------------------------------------------------- criteria


def c01_homothetic_oracle():
    errs = []
    for alpha in (0.5, 1.0, 1.5):
        p = hp("devaney", alpha)
        xi = p.angular.xi_minus
        sol = bz.minimize_bolza(bz.BolzaProblem(p, xi, 0.1 * xi, 0.1, grid_size=400))
        exact = act.homothetic_action(0.1, 1.0, p.v_min, alpha)
        errs.append(abs(sol.action - exact) / exact)
    return max(errs) < 5e-3, "relative errors " + ", ".join(f"{e:.2e}" for e in errs) + " (tol 5e-3)"


def c02_m_zero():
    worst = 0.0
    for name in ("isotropic", "devaney", "barrier50", "barrier3d"):
        for alpha in (0.2, 0.5, 1.0, 1.5, 1.9):
            p = hp(name, alpha)
            exact = 4 * math.sqrt(2 * p.v_min) / (2 - alpha)
            worst = max(worst, abs(morse.m_zero(p) - exact) / exact)
    return worst < 1e-12, f"max relative deviation {worst:.1e}"


def c03_kepler_parabola():
    U = pl.PlanarPotential.from_fourier(1.0, name="kepler")
    orb = pl.reconstruct_physical(U, 1.0, pl.PhasePoint(0.3, 0.3 + 2.0))
    keep = orb.r < 50
    fit = pl.fit_conic(orb.x[keep], orb.p[keep])
    s1 = sweep(U, 1.0, "kepler a=1")
    s05 = sweep(U, 0.5, "kepler a=0.5")
    ok = abs(fit.eccentricity - 1) <= 1e-4 and abs(s1 - 2 * math.pi) <= 1e-3 and abs(s05 - 4 * math.pi / 3) <= 1e-3
    return ok, (f"eccentricity {fit.eccentricity:.10f} (LRL {fit.lrl_eccentricity:.10f}); "
                f"sweep a=1 {s1:.7f} vs 2pi, a=0.5 {s05:.7f} vs 4pi/3")


def c04_v_monotone():
    U = devaney_planar()
    worst_dv, worst_rate = 0.0, 0.0
    for alpha in (0.5, 1.0):
        pt = pl.portrait(U, alpha, n_orbits=20)
        worst_dv = min(worst_dv, min(o.monotonicity_defect() for o in pt.orbits))
        worst_rate = max(worst_rate, max(pl.dv_dtau_defect(U, o) for o in pt.orbits))
    ok = worst_dv >= -1e-9 and worst_rate <= 1e-6
    return ok, f"min step dv {worst_dv:.1e} (>= -1e-9); max relative dv/dtau defect {worst_rate:.1e} (<= 1e-6)"


def c05_figure3():
    c = connection()
    lo, hi = c.bracket
    ok = 0.5 < lo < hi < 1.0 and hi - lo <= 1e-4 and c.separation_lo * c.separation_hi < 0
    return ok, (f"alpha_bar_planar {c.alpha_bar:.6f} in [{lo:.6f}, {hi:.6f}] (root {c.alpha_root:.7f}); "
                f"separation {c.separation_lo:+.4f} at 0.5, {c.separation_hi:+.4f} at 1.0; "
                f"step-halving defect {c.richardson_defect:.1e}")


def c06_apsidal_sandwich():
    U = devaney_planar()
    root = connection().alpha_root
    at_root = sweep(U, root, "devaney at alpha_bar")
    for a in (0.2, 0.5, 0.75, 1.0, 1.5, 1.9):
        sweep(U, a, f"devaney a={a}")
    flat = pl.PlanarPotential.from_fourier(1.0)
    for a in (0.3, 1.7):
        sweep(flat, a, f"isotropic a={a}")
    bad = [s for s in SWEEPS if not (s[2] - 1e-6 <= s[1] <= s[3] + 1e-6)]
    ok = not bad and abs(at_root - math.pi) <= 1e-3
    return ok, f"{len(SWEEPS)} sweeps, {len(bad)} outside bounds; sweep at alpha_bar {at_root:.7f} vs pi"


def c07_lagrange_jacobi():
    vals = [(lbl, s.residuals["lagrange_jacobi_max"]) for lbl, s in panel_solutions() if s.converged]
    worst = max(vals, key=lambda v: v[1])
    return worst[1] < 0.02, f"{len(vals)} solutions, worst relative LJ defect {worst[1]:.2e} ({worst[0]})"


def c08_jump_dichotomy():
    sols = [(lbl, s) for lbl, s in panel_solutions() if s.converged]
    bad = [lbl for lbl, s in sols if not min(s.delta_pos, s.delta_vel) < max(1e-3, 5 * 2 / 400)]
    worst = max(min(s.delta_pos, s.delta_vel) for _, s in sols)
    return not bad, f"{len(sols)} solutions, largest min(dpos, dvel) {worst:.2e} (tol 0.025); violations {bad}"


def c09_gamma_monotone():
    lines, ok = [], True
    for name, alpha in PANEL:
        curve = dict(panel_classification(name, alpha).gamma_curve)
        g = [curve[e] for e in GAMMA_EPS]
        rise = max(b - a for a, b in zip(g, g[1:]))
        ok &= rise <= 2e-3
        lines.append(f"{name} a={alpha}: max rise {rise:+.1e}")
    return ok, "; ".join(lines)


def c10_alpha_slope():
    lines, ok = [], True
    vmin = pot.barrier50().v_min
    gam = {a: morse.gamma(hp("barrier50", a), 0.05) for a in (0.3, 0.5, 0.8)}
    for a1, a2 in ((0.3, 0.5), (0.5, 0.8)):
        diff = gam[a2] - gam[a1]
        bound = -4 * math.sqrt(2 * vmin) / (2 - a1) ** 2 * (a2 - a1) + 3e-3
        ok &= diff <= bound
        lines.append(f"({a1},{a2}): {diff:.4f} <= {bound:.4f}")
    return ok, "; ".join(lines)


def c11_cross_consistency():
    lines, ok = [], True
    for name, alpha in PANEL:
        c = panel_classification(name, alpha)
        ok &= not c.inconsistent
        lines.append(f"{name} a={alpha}: {c.gamma_verdict}/{c.jump_verdict}")
    iso = panel_classification("isotropic", 1.0).verdict
    bar = panel_classification("barrier50", 0.2).verdict
    sig = pot.sigma_criterion(pot.barrier50(), lambda s: np.abs(s[..., 1]) > 0.5)
    ok &= iso == morse.OUT and bar == morse.IN and sig.holds
    lines.append(f"sigma lhs {sig.lhs:.4f} > rhs {sig.rhs:.4f}")
    return ok, "; ".join(lines)


def c12_alpha_bar():
    res = morse.find_alpha_bar(pot.barrier50())
    a = res.alpha_bar
    below = morse.classify(hp("barrier50", a - 0.1)).verdict
    above = morse.classify(hp("barrier50", a + 0.1)).verdict
    dev = morse.find_alpha_bar(pot.devaney()).alpha_bar
    planar_bar = connection().alpha_bar
    ok = below == morse.IN and above == morse.OUT and abs(dev - planar_bar) <= 0.05
    return ok, (f"barrier50 alpha_bar {a:.4f}: classify(-0.1)={below}, classify(+0.1)={above}; "
                f"devaney {dev:.4f} vs planar {planar_bar:.4f} (|diff| {abs(dev - planar_bar):.4f} <= 0.05)")


def c13_asymptotics():
    lines, ok = [], True
    for alpha in (0.5, 1.0):
        p = hp("devaney", alpha)
        tr = morse.integrate_zero_energy(p, p.angular.xi_minus, t_end=1e4)
        d = morse.asymptotic_diagnostics(p, tr)
        ok &= 0.99 <= d.k_ratio <= 1.01
        lines.append(f"radial a={alpha}: r/(Kt)^(2/(2+a)) = {d.k_ratio:.6f}")
    root = connection().alpha_root
    U = devaney_planar()
    st = pl.shoot_stable(U, root, Q_SADDLE, events=pl.Events(section_v=0.0))
    x0, v0 = pl.physical_state(U, root, st.terminal)
    p = hp("devaney", root)
    tr = morse.integrate_zero_energy(p, x0, v0, t_end=1e4)
    d = morse.asymptotic_diagnostics(p, tr)
    ok &= d.decay_monotone and d.decay_target == "xi_plus"
    lines.append(f"tail at alpha_bar: r^a*|s-xi+| {d.decay_values[0]:.2e} -> {d.decay_values[-1]:.2e}, "
                 f"monotone={d.decay_monotone}")
    return ok, "; ".join(lines)


def c14_scaling():
    lines, ok = [], True
    for alpha in (0.5, 1.0):
        p = hp("devaney", alpha)
        base = bz.minimize_bolza(bz.BolzaProblem(p, [1, 0], [-1, 0], 0.2))
        big = bz.minimize_bolza(bz.BolzaProblem(p, [4, 0], [-4, 0], 0.8))
        sc = bz.rescale_solution(base, 4.0)
        rel = abs(sc.action - big.action) / big.action
        dj = max(abs(sc.delta_pos - big.delta_pos), abs(sc.delta_vel - big.delta_vel))
        ok &= rel <= 1e-3 and dj <= 1e-3
        lines.append(f"a={alpha} ({big.kind}): action rel {rel:.1e}, jumps {dj:.1e}")
    return ok, "; ".join(lines)


def c15_determinism():
    tmp = Path(tempfile.mkdtemp())
    try:
        out = tmp / "run"
        args = ["classify", "--potential", "devaney", "--alpha", "0.5", "--seed", "7", "--out", str(out)]
        with contextlib.redirect_stdout(io.StringIO()):
            codes = [cli.main(args)]
            first = {f.name: f.read_bytes() for f in sorted(out.iterdir())}
            codes.append(cli.main(args))
        second = {f.name: f.read_bytes() for f in sorted(out.iterdir())}
    finally:
        shutil.rmtree(tmp)
    same = first == second and len(first) >= 3
    return same and codes == [0, 0], f"{len(first)} files ({', '.join(first)}), byte-identical={same}"


CRITERIA = [
    (1, "homothetic oracle", c01_homothetic_oracle),
    (2, "m(V,0) closed form", c02_m_zero),
    (3, "Kepler parabola", c03_kepler_parabola),
    (4, "v-monotonicity", c04_v_monotone),
    (5, "saddle connection bisection", c05_figure3),
    (6, "apsidal sandwich", c06_apsidal_sandwich),
    (7, "Lagrange-Jacobi", c07_lagrange_jacobi),
    (8, "jump dichotomy", c08_jump_dichotomy),
    (9, "gamma monotone in eps", c09_gamma_monotone),
    (10, "alpha-slope bound", c10_alpha_slope),
    (11, "classification cross-consistency", c11_cross_consistency),
    (12, "alpha_bar bracketing", c12_alpha_bar),
    (13, "asymptotics", c13_asymptotics),
    (14, "scaling invariance", c14_scaling),
    (15, "determinism", c15_determinism),
]


def _line(num, name, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d} {name}: {detail}"


@pytest.mark.slow
@pytest.mark.parametrize("num,name,fn", CRITERIA, ids=[f"c{n:02d}" for n, _, _ in CRITERIA])
def test_criterion(num, name, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(num, name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for num, name, fn in CRITERIA:
        try:
            ok, detail = fn()
        except Exception as exc:  # report and keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        failed += not ok
        print(_line(num, name, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
