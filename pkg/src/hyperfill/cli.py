"""Command line driver.

Exit codes: 0 all checks pass, 1 a tolerance check failed, 2 bad input,
3 input outside the domain of the construction.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, fields, replace
from importlib.resources import files

import numpy as np

from hyperfill import curves, surfaces, surgery, tube
from hyperfill.errors import DomainError, HyperfillError, InputError
from hyperfill.hyperbolic import point_distance

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    dt: float = 1e-3
    length: float = 4.0
    unit_speed_tol: float = 1e-3
    identity_tol: float = 1e-4
    # lower-bound and displacement slack, in units of dt
    quasi_slack: float = 10.0
    h: float = 1e-2
    gauss_tol: float = 1e-3
    tube_samples: int = 100_000
    boundary_tol: float = 1e-11
    seed: int = 0

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if f.name != "seed" and not val > 0:
                raise InputError(f"config value {f.name} must be positive")
        if self.tube_samples < 1000:
            raise InputError("tube_samples must be >= 1000")

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config: {exc}") from None
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)


# --- output ---------------------------------------------------------------

def _clean(obj):
    """Round floats to 12 significant digits; numpy scalars become Python ones."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.12g}")
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, ensure_ascii=False) + "\n"


def dumps_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if v is None else (f"{v:.12g}" if isinstance(v, float) else v)
                    for v in _clean(list(row))])
    return buf.getvalue()


def load_schemas() -> dict:
    return json.loads((files("hyperfill") / "data" / "report_schemas.json")
                      .read_text("utf-8"))


def validate_report(command: str, report: dict) -> None:
    import jsonschema
    jsonschema.validate(_clean(report), load_schemas()[command])


class _Result:
    def __init__(self, report, code=EXIT_OK, columns=None, rows=()):
        self.report, self.code, self.columns, self.rows = report, code, columns, rows


# --- subcommands ------------------------------------------------------------

CURVE_FIXTURES = ("geodesic", "equidistant", "circle", "horocycle", "perturbed-geodesic")


def _make_curve(args, cfg: RunConfig):
    dt = args.dt or cfg.dt
    length = args.length or cfg.length
    dim = args.dim
    name = args.fixture
    if name == "geodesic":
        return curves.make_geodesic(length, dt, dim=dim)
    if name == "equidistant":
        return curves.make_equidistant_curve(args.d, length, dt, dim=dim)
    if name == "circle":
        return curves.make_circle(args.rho, length, dt, dim=dim)
    if name == "horocycle":
        return curves.make_horocycle(length, dt, dim=dim)
    if name == "perturbed-geodesic":
        rng = np.random.default_rng(cfg.seed)
        return curves.random_perturbed_geodesic(rng, length, dt, dim=dim)
    raise InputError(f"unknown curve fixture {name!r}; choose from {', '.join(CURVE_FIXTURES)}")


def cmd_curve_check(args, cfg: RunConfig) -> _Result:
    path = _make_curve(args, cfg)
    prof = curves.geodesic_curvature(path)
    resid = curves.accel_identity_residual(path)
    report = {
        "command": "curve-check",
        "fixture": args.fixture,
        "dt": path.dt,
        "length": path.length,
        "samples": len(path),
        "max_kappa": prof.max_kappa,
        "accel_identity_residual": resid,
        "quasi_constant": None,
        "lower_violation": None,
        "chord_hausdorff": curves.chord_hausdorff(path),
        "displacement_excess": None,
        "passed": False,
    }
    slack = cfg.quasi_slack * path.dt
    ok = resid < cfg.identity_tol
    inner = path.points[prof.offset:len(path) - prof.offset]
    dist = point_distance(inner, inner[0])
    disp = None
    if args.quasi:
        k = args.k if args.k else curves.quasi_constant(prof.max_kappa)
        qr = curves.verify_quasi_geodesic(path, k)
        disp = curves.displacement_integral(prof, path.dt)
        excess = float(np.max(disp - dist))
        report.update(quasi_constant=k, lower_violation=qr.lower_violation,
                      displacement_excess=excess)
        ok = ok and qr.lower_violation < slack and excess <= slack
    report["passed"] = bool(ok)
    t = path.t[prof.offset:len(path) - prof.offset]
    rows = [(float(ti), float(ki), None if disp is None else float(di), float(ri))
            for ti, ki, di, ri in zip(t, prof.values,
                                      disp if disp is not None else [None] * len(t),
                                      dist)]
    return _Result(report, EXIT_OK if ok else EXIT_FAIL,
                   ["t", "kappa", "displacement", "distance_from_start"], rows)


def cmd_surface_check(args, cfg: RunConfig) -> _Result:
    h = args.h or cfg.h
    if args.csv:
        s = surfaces.read_surface_csv(args.csv)
        source = "csv"
    else:
        s = surfaces.make_surface(args.fixture, h=h, d=args.d)
        source = args.fixture
    f = surfaces.fundamental_forms(s)
    pc = surfaces.principal_curvatures(f)
    K = surfaces.intrinsic_curvature(f)
    resid = float(np.max(np.abs(K + 1.0 - (pc.lam1 * pc.lam2)[1:-1, 1:-1])))
    cert = surfaces.small_curvature_certificate(s, n_geodesics=args.geodesics,
                                                seed=cfg.seed)
    report = {
        "command": "surface-check",
        "source": source,
        "grid": list(s.shape),
        "lambda1_range": [float(pc.lam1.min()), float(pc.lam1.max())],
        "lambda2_range": [float(pc.lam2.min()), float(pc.lam2.max())],
        "intrinsic_curvature_range": [float(K.min()), float(K.max())],
        "gauss_residual": resid,
        "II_asymmetry": f.II_asym,
        "certificate": {
            "max_abs_principal": cert.max_abs_principal,
            "quasi_constant": cert.quasi_constant if cert.holds else "none",
            "geodesic_max_kappa": [float(k) for k in cert.geodesic_max_kappa],
        },
        "passed": resid < cfg.gauss_tol,
    }
    nu, nv = pc.lam1.shape
    rows = [(i + 1, j + 1, float(pc.lam1[i, j]), float(pc.lam2[i, j]),
             float(K[i - 1, j - 1]) if 0 < i < nu - 1 and 0 < j < nv - 1 else None)
            for i in range(nu) for j in range(nv)]
    return _Result(report, EXIT_OK if report["passed"] else EXIT_FAIL,
                   ["u_index", "v_index", "lambda1", "lambda2", "K_intrinsic"], rows)


def cmd_tube(args, cfg: RunConfig) -> _Result:
    l = math.e ** 3 * math.pi if args.l == "min" else float(args.l)
    m = tube.build_tube_metric(l, args.bump)
    samples = args.samples or cfg.tube_samples
    rep = tube.pinching_verify(m, samples)
    bf = tube.boundary_form_check(m)
    ok = rep.holds and bf.max_deviation < cfg.boundary_tol \
        and rep.max_dev_outside_band < cfg.boundary_tol
    report = {
        "command": "tube",
        "l": m.l,
        "r0": m.r0,
        "bump": m.bump.name,
        "samples": samples,
        "L_emp": rep.L_emp,
        "L_formula": rep.L_formula,
        "max_dev_outside_band": rep.max_dev_outside_band,
        "boundary_forms": {k: v for k, v in asdict(bf).items()},
        "passed": bool(ok),
    }
    r = tube.sample_radii(m, samples)[::args.stride]
    kff, kgg, kfg = m.curvatures(r)
    rows = zip(r.tolist(), kff.tolist(), kgg.tolist(), kfg.tolist())
    res = _Result(report, EXIT_OK if ok else EXIT_FAIL, ["r", "k_ff", "k_gg", "k_fg"], list(rows))
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(dumps_csv(res.columns, res.rows))
    return res


def _parse_params(items):
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise InputError(f"--param expects name=value, got {item!r}")
        try:
            out[key.strip()] = int(val)
        except ValueError:
            raise InputError(f"parameter {key} must be an integer") from None
    return out


def cmd_surgery(args, cfg: RunConfig) -> _Result:
    if args.script in (None, "bundled"):
        script = surgery.load_bundled_script()
    else:
        script = surgery.load_move_script(args.script)
    params = _parse_params(args.param)
    if params:
        script = script.with_params(**params)
    spec = script.run()
    norm = spec.normalized()
    report = {
        "command": "surgery",
        "cusps": script.cusps,
        "params": dict(script.params),
        "slopes": [None if e is surgery.Unfilled else list(e.pair) for e in spec.entries],
        "normalized": [None if e is surgery.Unfilled else list(e.pair) for e in norm.entries],
        "filling": surgery.format_filling(spec),
        "filling_normalized": surgery.format_filling(norm),
        "passed": True,
    }
    rows = [(k, None, None, None) if e is surgery.Unfilled else (k, e.d, e.p, e.q)
            for k, e in enumerate(spec.entries)]
    return _Result(report, EXIT_OK, ["cusp", "d", "p", "q"], rows)


_BASES = {"sphere": 0, "torus": 1}


def cmd_genus(args, cfg: RunConfig) -> _Result:
    base = _BASES.get(args.base, None)
    if base is None:
        try:
            base = int(args.base)
        except ValueError:
            raise InputError(f"base must be sphere, torus or a genus, got {args.base!r}") from None
    g = surgery.riemann_hurwitz_genus(args.p, base, args.branch_points)
    report = {"command": "genus", "p": args.p, "base_genus": base,
              "branch_points": args.branch_points, "genus": g,
              "components": None, "passed": True}
    if args.lk is not None:
        report["components"] = surgery.branched_cover_components(args.p, args.lk)
    return _Result(report, EXIT_OK, ["p", "base_genus", "branch_points", "genus"],
                   [(args.p, base, args.branch_points, g)])


def _order(text):
    if text.lower() in ("inf", "infinity", "∞"):
        return math.inf
    try:
        return int(text)
    except ValueError:
        raise InputError(f"cone order must be an integer or inf, got {text!r}") from None


def cmd_triangle(args, cfg: RunConfig) -> _Result:
    orders = [_order(x) for x in args.orders]
    geom = surgery.triangle_orbifold_geometry(*orders)
    shown = ["inf" if o == math.inf else o for o in orders]
    report = {"command": "triangle", "orders": shown, "geometry": geom, "passed": True}
    return _Result(report, EXIT_OK, ["p1", "p2", "p3", "geometry"], [(*shown, geom)])


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS so a subparser does not overwrite a flag given before the command
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file of RunConfig overrides")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--seed", type=int)

    p = argparse.ArgumentParser(prog="hyperfill", parents=[common],
                                description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("curve-check", parents=[common],
                       help="curvature, quasi-geodesic and identity checks on a fixture curve")
    c.add_argument("--fixture", required=True)
    c.add_argument("--dt", type=float)
    c.add_argument("--length", type=float)
    c.add_argument("--d", type=float, default=0.5, help="equidistant offset")
    c.add_argument("--rho", type=float, default=1.0, help="circle radius")
    c.add_argument("--dim", type=int, default=2)
    c.add_argument("--k", type=float, help="quasi-geodesic constant to test")
    c.add_argument("--no-quasi", dest="quasi", action="store_false",
                   help="skip the quasi-geodesic and displacement checks")
    c.set_defaults(func=cmd_curve_check)

    s = sub.add_parser("surface-check", parents=[common],
                       help="fundamental forms, Gauss equation and curvature certificate")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--fixture", choices=sorted(surfaces.SURFACE_FIXTURES))
    src.add_argument("--csv", help="surface grid CSV file")
    s.add_argument("--h", type=float)
    s.add_argument("--d", type=float, default=0.3, help="equidistant offset")
    s.add_argument("--geodesics", type=int, default=0,
                   help="number of intrinsic geodesics to probe")
    s.set_defaults(func=cmd_surface_check)

    t = sub.add_parser("tube", parents=[common], help="pinching of the solid torus metric")
    t.add_argument("--l", default="100", help="meridian length, or 'min' for e^3 pi")
    t.add_argument("--bump", default="smoothstep", choices=sorted(tube.BUMPS))
    t.add_argument("--samples", type=int)
    t.add_argument("--csv", help="also write r,k_ff,k_gg,k_fg here")
    t.add_argument("--stride", type=int, default=1, help="CSV row stride")
    t.set_defaults(func=cmd_tube)

    g = sub.add_parser("surgery", parents=[common], help="run a twist move script")
    g.add_argument("script", nargs="?", default="bundled",
                   help="move script JSON path (default: bundled slopeseqn.json)")
    g.add_argument("--param", action="append", metavar="NAME=INT")
    g.set_defaults(func=cmd_surgery)

    n = sub.add_parser("genus", parents=[common], help="genus of a cyclic branched cover")
    n.add_argument("--p", type=int, required=True)
    n.add_argument("--base", default="sphere", help="sphere, torus or an integer genus")
    n.add_argument("--branch-points", type=int, required=True)
    n.add_argument("--lk", type=int, help="also count preimage components of a curve")
    n.set_defaults(func=cmd_genus)

    r = sub.add_parser("triangle", parents=[common], help="geometry of a triangle orbifold")
    r.add_argument("orders", nargs=3)
    r.set_defaults(func=cmd_triangle)
    return p


GLOBAL_DEFAULTS = {"config": None, "format": "json", "out": None, "seed": None}


def _config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for key, default in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, default)
    try:
        cfg = _config(args)
        res = args.func(args, cfg)
    except DomainError as exc:
        print(f"hyperfill: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_DOMAIN
    except (HyperfillError, ValueError, OSError) as exc:
        print(f"hyperfill: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_INPUT
    text = (dumps_csv(res.columns, res.rows) if args.format == "csv"
            else dumps_report(res.report))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return res.code


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
