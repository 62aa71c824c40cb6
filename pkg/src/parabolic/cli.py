"""Command-line front end.

    parabolic validate  --potential devaney
    parabolic bolza     --potential isotropic --alpha 1 --eps 0.1 --x1 1,0 --x2 -1,0
    parabolic classify  --potential barrier50 --alpha 0.2 --out runs/b50
    parabolic alpha-bar --potential barrier50 --bracket 0.2,1.8
    parabolic portrait  --potential devaney --alpha 0.5
    parabolic connect   --potential devaney --bracket 0.5,1.0

A JSON file given with --config supplies defaults; flags override it.  Every
command writes its resolved configuration to <out>/config.json.  Exit codes:
0 success, 1 solver failure, 2 configuration or I/O error, 3 infeasible
problem or failed validation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import morse, planar
from .bolza import BolzaProblem, minimize_bolza
from .errors import BadBracketError, InfeasibleEndpointsError, NoConvergenceError, ParabolicError
from .potential import HomogeneousPotential, angular_from_dict, load_potential, sigma_criterion, validate_class_S, NAMED

log = logging.getLogger("parabolic")

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 1, 2, 3


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------- output helpers


def fmt(x: float) -> str:
    return f"{x:.9g}"


def _clean(obj):
    """Round floats to 9 significant digits and turn numpy values into JSON types."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return float(fmt(x))
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------- configuration


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


DEFAULTS = {
    "potential": None,
    "alpha": None,
    "eps": 0.1,
    "eps_grid": list(morse.DEFAULT_EPS_SCHEDULE),
    "radii": list(morse.DEFAULT_RADII),
    "bracket": None,
    "grid_size": 400,
    "restarts": 6,
    "seed": 0,
    "out": None,
    "x1": None,
    "x2": None,
    "barrier": None,
    "jump_eps": 1.0,
    "width": 1e-2,
    "n_orbits": 20,
    "source": None,
    "target": None,
}


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        unknown = set(doc) - set(DEFAULTS) - {"command"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update({k: v for k, v in doc.items() if k != "command"})
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if cfg["potential"] is None:
        raise ConfigError("no potential given (--potential or config key 'potential')")
    pot = cfg["potential"]
    if isinstance(pot, str) and pot not in NAMED and not Path(pot).is_file():
        raise ConfigError(f"potential {pot!r} is neither a named potential nor an existing file")
    if cfg["out"] is None:
        cfg["out"] = str(Path("runs") / args.command)
    return cfg


def _potential_doc(cfg) -> dict:
    pot = cfg["potential"]
    if isinstance(pot, dict):
        return pot
    if pot in NAMED:
        return {"kind": "named", "name": pot}
    try:
        return json.loads(Path(pot).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read potential file {pot}: {exc}") from None


def _homogeneous(cfg) -> HomogeneousPotential:
    doc = _potential_doc(cfg)
    alpha = cfg["alpha"] if cfg["alpha"] is not None else doc.get("alpha")
    if alpha is None:
        raise ConfigError("no homogeneity exponent (--alpha or 'alpha' in the potential document)")
    try:
        return load_potential(doc, float(alpha))
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None


def _settings(cfg) -> morse.SolverSettings:
    return morse.SolverSettings(grid_size=int(cfg["grid_size"]), restarts=int(cfg["restarts"]), seed=int(cfg["seed"]))


def _out(cfg) -> Path:
    out = Path(cfg["out"])
    write_atomic(out / "config.json", dumps(cfg))
    return out


# ---------------------------------------------------------------- commands


def cmd_validate(cfg) -> int:
    try:
        ang = angular_from_dict(_potential_doc(cfg))
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    out = _out(cfg)
    rep = validate_class_S(ang)
    doc = {"potential": ang.name, "class_S": rep.to_dict()}
    if cfg["barrier"] is not None:
        doc["sigma"] = sigma_criterion(ang, float(cfg["barrier"])).to_dict()
    write_atomic(out / "validate.json", dumps(doc))
    verdict = "PASS" if rep.passed else "FAIL"
    print(f"{ang.name}: {verdict}")
    for f in rep.failures:
        print(f"  {f}")
    if "sigma" in doc:
        s = doc["sigma"]
        print(f"  sigma criterion: lhs={fmt(s['lhs'])} rhs={fmt(s['rhs'])} holds={s['holds']}")
    return EXIT_OK if rep.passed else EXIT_INFEASIBLE


def _endpoint(cfg, key, default):
    val = cfg[key]
    return np.asarray(default if val is None else val, dtype=float)


def cmd_bolza(cfg) -> int:
    p = _homogeneous(cfg)
    ang = p.angular
    x1 = _endpoint(cfg, "x1", ang.xi_minus)
    x2 = _endpoint(cfg, "x2", ang.xi_plus)
    try:
        prob = BolzaProblem(p, x1, x2, float(cfg["eps"]), grid_size=int(cfg["grid_size"]),
                            restarts=int(cfg["restarts"]), seed=int(cfg["seed"]))
    except InfeasibleEndpointsError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = _out(cfg)
    sol = minimize_bolza(prob)
    write_atomic(out / "path.csv", sol.path.to_csv())
    write_atomic(out / "solution.json", dumps(sol.to_dict()))
    print(f"action {fmt(sol.action)}")
    print(f"delta_pos {fmt(sol.delta_pos)} delta_vel {fmt(sol.delta_vel)} kind {sol.kind}")
    return EXIT_OK


def cmd_classify(cfg) -> int:
    p = _homogeneous(cfg)
    out = _out(cfg)
    c = morse.classify(p, eps_schedule=tuple(cfg["eps_grid"]), radii=tuple(cfg["radii"]),
                       jump_eps=float(cfg["jump_eps"]), settings=_settings(cfg))
    write_atomic(out / "classification.json", dumps(c.to_dict()))
    write_atomic(out / "gamma_curve.csv", csv_text(["eps", "gamma"], c.gamma_curve))
    rows = [(r["R"], r["delta_pos"], r["delta_vel"]) for r in c.jump_sequence]
    write_atomic(out / "jumps.csv", csv_text(["R", "delta_pos", "delta_vel"], rows))
    print(f"verdict {c.verdict} (gamma route {c.gamma_verdict}, jump route {c.jump_verdict})")
    print(f"gamma(0+) {fmt(c.gamma_zero_plus)} +- {fmt(c.gamma_uncertainty)}; "
          f"delta_vel {fmt(c.delta_vel_V)} delta_pos {fmt(c.delta_pos_V)}")
    if c.inconsistent:
        print("warning: the two routes disagree", file=sys.stderr)
    return EXIT_OK


def _bracket(cfg, default):
    b = cfg["bracket"] if cfg["bracket"] is not None else default
    if len(b) != 2:
        raise ConfigError("bracket needs two values")
    return float(b[0]), float(b[1])


def cmd_alpha_bar(cfg) -> int:
    ang = _homogeneous({**cfg, "alpha": cfg["alpha"] or 1.0}).angular
    out = _out(cfg)
    res = morse.find_alpha_bar(ang, _bracket(cfg, (0.2, 1.8)), width=float(cfg["width"]),
                               radii=tuple(cfg["radii"]), jump_eps=float(cfg["jump_eps"]),
                               eps_schedule=tuple(cfg["eps_grid"]), settings=_settings(cfg))
    write_atomic(out / "alpha_bar.json", dumps(res.to_dict()))
    print(f"alpha_bar {fmt(res.alpha_bar)} in [{fmt(res.bracket[0])}, {fmt(res.bracket[1])}]")
    return EXIT_OK


def _planar(cfg) -> planar.PlanarPotential:
    ang = _homogeneous({**cfg, "alpha": cfg["alpha"] or 1.0}).angular
    try:
        return planar.PlanarPotential.from_angular(ang)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _orbit_rows(orb: planar.PlanarOrbit):
    return zip(orb.taus, orb.thetas, orb.phis, orb.v_samples)


def cmd_portrait(cfg) -> int:
    U = _planar(cfg)
    if cfg["alpha"] is None:
        raise ConfigError("portrait needs --alpha")
    out = _out(cfg)
    pt = planar.portrait(U, float(cfg["alpha"]), n_orbits=int(cfg["n_orbits"]))
    write_atomic(out / "portrait.svg", planar.portrait_svg(pt))
    for i, orb in enumerate(pt.orbits):
        write_atomic(out / f"orbit_{i:02d}.csv", csv_text(["tau", "theta", "phi", "v"], _orbit_rows(orb)))
    summary = {
        "alpha": pt.alpha,
        "equilibria": [{"theta": e.point.theta, "phi": e.point.phi, "kind": e.kind,
                        "eigenvalues": list(e.eigenvalues)} for e in pt.equilibria],
        "orbits": [{"start": [s.theta, s.phi], "termination": o.termination,
                    "monotonicity_defect": o.monotonicity_defect()} for s, o in zip(pt.starts, pt.orbits)],
    }
    write_atomic(out / "portrait.json", dumps(summary))
    print(f"{len(pt.orbits)} orbits, {len(pt.equilibria)} equilibria -> {out / 'portrait.svg'}")
    return EXIT_OK


def _default_saddles(U: planar.PlanarPotential):
    mins = [m for m in U.minima if abs(U.U(m) - U.u_min) < 1e-9 * max(1.0, U.u_min)]
    if len(mins) < 2:
        raise ConfigError("need two global minima for a default connection; give 'source' and 'target'")
    a, b = mins[0], mins[1]
    return planar.PhasePoint(a, a + math.pi), planar.PhasePoint(b, b)


def cmd_connect(cfg) -> int:
    U = _planar(cfg)
    src, tgt = _default_saddles(U) if cfg["source"] is None or cfg["target"] is None else (None, None)
    if cfg["source"] is not None:
        src = planar.PhasePoint(*map(float, cfg["source"]))
    if cfg["target"] is not None:
        tgt = planar.PhasePoint(*map(float, cfg["target"]))
    out = _out(cfg)
    res = planar.saddle_connection_bisect(U, _bracket(cfg, (0.5, 1.0)), src, tgt)
    doc = res.to_dict()
    doc["source"] = [src.theta, src.phi]
    doc["target"] = [tgt.theta, tgt.phi]
    write_atomic(out / "connect.json", dumps(doc))
    hdr = ["tau", "theta", "phi", "v"]
    write_atomic(out / "witness_unstable.csv", csv_text(hdr, _orbit_rows(res.witness_unstable)))
    write_atomic(out / "witness_stable.csv", csv_text(hdr, _orbit_rows(res.witness_stable)))
    print(f"alpha_bar_planar {fmt(res.alpha_bar)} in [{fmt(res.bracket[0])}, {fmt(res.bracket[1])}], "
          f"interpolated root {fmt(res.alpha_root)}")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "bolza": cmd_bolza,
    "classify": cmd_classify,
    "alpha-bar": cmd_alpha_bar,
    "portrait": cmd_portrait,
    "connect": cmd_connect,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="parabolic", description="Parabolic trajectories of homogeneous potentials.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON file with default settings")
        sp.add_argument("--potential", help="named potential or JSON file")
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--eps", type=float, help="obstacle radius")
        sp.add_argument("--eps-grid", dest="eps_grid", type=_floats, help="decreasing obstacle radii, comma separated")
        sp.add_argument("--radii", type=_floats, help="endpoint radii for jump sequences")
        sp.add_argument("--bracket", type=_floats, help="alpha bracket lo,hi")
        sp.add_argument("--grid-size", dest="grid_size", type=int, metavar="N")
        sp.add_argument("--restarts", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", metavar="DIR")
        sp.add_argument("--x1", type=_floats, help="first endpoint, comma separated")
        sp.add_argument("--x2", type=_floats, help="second endpoint, comma separated")
        sp.add_argument("--barrier", type=float, help="threshold c of the region {U > c} for the barrier criterion")
    return ap


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Let ``--x2 -1,0`` mean ``--x2=-1,0``; argparse would read -1,0 as a flag."""
    out: list[str] = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and len(tok) > 1 \
                and tok[0] == "-" and (tok[1].isdigit() or tok[1] == "."):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(_glue_negative_values(list(sys.argv[1:] if argv is None else argv)))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BadBracketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleEndpointsError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NoConvergenceError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ParabolicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
