"""Command line front end.

    zalcman render     --kind julia --c=-1 --resolution 512 --out out/
    zalcman similarity --c0 i --k-min 1 --k-max 6 --out out/
    zalcman census     --mode thm1-1 --t0 i --fixed 2 --max-index 10
    zalcman conical    --tests mm0,lm1,semi --c i --z0=-1+i
    zalcman poincare   --c=-2 --period 1 --seed 1.8 --radius 1

Parameters come from built-in defaults, then ``--config FILE`` (a JSON
object keyed by option name, dashes or underscores), then explicit flags.
Exit codes: 0 success, 2 configuration error, 3 computation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from importlib import metadata

import numpy as np

from . import _kernels
from .compact import Frame, GridSet, write_pgm, write_pgm_array, write_points_csv, write_ppm_array
from .dyn import UnicriticalMap, escape_radius
from .errors import ContinuationStalled, DynamicsError, PreconditionError

EXIT_CONFIG = 2
EXIT_COMPUTE = 3


class ConfigError(Exception):
    pass


_COMPLEX_RE = re.compile(r"^[+-]?[0-9.eEij+\-]*$")


def parse_complex(text):
    """'i', '-1+i', '0.2+1.1i', '1j', '-2' -> complex."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return complex(float(text[0]), float(text[1]))
    s = str(text).strip().replace(" ", "").lower()
    if not s or not _COMPLEX_RE.match(s):
        raise ConfigError(f"cannot parse complex number {text!r}")
    s = re.sub(r"(^|[+-])([ij])", r"\g<1>1\2", s).replace("i", "j")
    try:
        z = complex(s)
    except ValueError:
        raise ConfigError(f"cannot parse complex number {text!r}") from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ConfigError(f"complex number {text!r} is not finite")
    return z


def _float_list(text):
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def _str_list(text):
    if isinstance(text, (list, tuple)):
        return [str(x) for x in text]
    return [x.strip() for x in str(text).split(",") if x.strip()]


# option name -> (converter, default, help), per command
COMMON = {
    "degree": (int, 2, "polynomial degree d >= 2"),
    "out": (str, ".", "output directory"),
    "threads": (int, 0, "worker threads (0: numba default); never changes outputs"),
}

OPTIONS = {
    "render": {
        "kind": (str, "mandelbrot", "julia or mandelbrot"),
        "c": (parse_complex, 0j, "Julia parameter"),
        "center": (parse_complex, None, "frame centre (default 0 for julia, -0.5 for mandelbrot)"),
        "half_width": (float, None, "frame half width (default 1.6 for mandelbrot, 2 for julia)"),
        "resolution": (int, 512, "grid size N"),
        "cap": (int, 1000, "iteration cap"),
        "tau": (float, 1.0, "distance-estimate threshold in cells"),
        "mode": (str, None, "filled or boundary (default: boundary for julia, filled for mandelbrot)"),
    },
    "similarity": {
        "c0": (parse_complex, 1j, "Misiurewicz parameter"),
        "r": (float, 1.0, "truncation radius"),
        "resolution": (int, 512, "grid size N"),
        "k_min": (int, 1, "first rescaling index"),
        "k_max": (int, 6, "last rescaling index"),
        "cap": (int, 4096, "membership iteration cap"),
        "tau": (float, 1.0, "distance-estimate threshold in cells"),
        "q": (parse_complex, None, "override the similarity constant"),
        "panels": (int, 1, "write PPM panels (0/1)"),
    },
    "census": {
        "mode": (str, "thm1-1", "centers, thm1-1, thm1-2 or thm1-3"),
        "t0": (parse_complex, 1j, "target parameter"),
        "fixed": (int, 2, "fixed period l (thm1-1) or preperiod k (thm1-2)"),
        "max_index": (int, 10, "sequence length"),
        "l": (int, 3, "period for --mode centers"),
    },
    "conical": {
        "tests": (_str_list, ["mm0", "lm1", "semi"], "comma list of mm0, lm1, semi"),
        "c": (parse_complex, 1j, "parameter"),
        "z0": (parse_complex, None, "base point (default: the critical value c)"),
        "r": (float, 0.3, "pullback radius for mm0"),
        "d_bound": (int, 1, "degree bound for mm0"),
        "n_max": (int, 60, "pullback depth for mm0"),
        "radii": (_float_list, [1.0, 2.0, 4.0, 8.0], "radius schedule for lm1"),
        "horizon": (int, 10_000, "orbit horizon for semi"),
        "separation": (float, 1e-4, "orbit-closure separation for semi"),
    },
    "poincare": {
        "c": (parse_complex, -2 + 0j, "parameter"),
        "period": (int, 1, "cycle period"),
        "seed": (parse_complex, 1.8 + 0j, "Newton seed for a cycle point"),
        "radius": (float, 1.0, "chart radius"),
        "samples": (int, 33, "samples per side of the square grid (points with |w| <= radius kept)"),
    },
}


def build_parser():
    parser = argparse.ArgumentParser(prog="zalcman", description="Rescaling limits and similarity of Julia and Mandelbrot sets.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {package_version()}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, opts in OPTIONS.items():
        p = sub.add_parser(name, help=f"{name} job")
        p.add_argument("--config", default=None, help="JSON file with option values")
        for key, (_, default, helptext) in {**COMMON, **opts}.items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, default=argparse.SUPPRESS,
                           help=f"{helptext} (default: {default!r})")
    return parser


def package_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def resolve_config(command, ns):
    """defaults < config file < flags, each value passed through its converter."""
    table = {**COMMON, **OPTIONS[command]}
    values = {k: v[1] for k, v in table.items()}
    raw = {}
    if ns.get("config"):
        try:
            with open(ns["config"]) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns['config']}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        for key, val in cfg.items():
            k = key.replace("-", "_")
            if k not in table:
                raise ConfigError(f"unknown config key {key!r} for {command}")
            raw[k] = val
    for k in table:
        if k in ns:
            raw[k] = ns[k]
    for k, val in raw.items():
        conv = table[k][0]
        try:
            values[k] = None if val is None else conv(val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {k}: {val!r} ({exc})") from None
    return values


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def validate(command, cfg):
    _require(cfg["degree"] >= 2, "degree must be >= 2")
    _require(cfg["threads"] >= 0, "threads must be >= 0")
    if command == "render":
        _require(cfg["kind"] in ("julia", "mandelbrot"), "kind must be julia or mandelbrot")
        if cfg["center"] is None:
            cfg["center"] = 0j if cfg["kind"] == "julia" else -0.5 + 0j
        if cfg["half_width"] is None:
            cfg["half_width"] = 2.0 if cfg["kind"] == "julia" else 1.6
        if cfg["mode"] is None:
            cfg["mode"] = "boundary" if cfg["kind"] == "julia" else "filled"
        _require(cfg["mode"] in ("filled", "boundary"), "mode must be filled or boundary")
        _require(cfg["resolution"] >= 2, "resolution must be >= 2")
        _require(cfg["half_width"] > 0, "half_width must be positive")
        _require(cfg["cap"] >= 1, "cap must be >= 1")
        _require(cfg["tau"] >= 0, "tau must be >= 0")
    elif command == "similarity":
        _require(cfg["resolution"] >= 16, "resolution must be >= 16")
        _require(cfg["r"] > 0, "r must be positive")
        _require(0 <= cfg["k_min"] <= cfg["k_max"], "need 0 <= k_min <= k_max")
        _require(cfg["cap"] >= 1, "cap must be >= 1")
        _require(cfg["tau"] >= 0, "tau must be >= 0")
        _require(cfg["q"] is None or cfg["q"] != 0, "q must be nonzero")
    elif command == "census":
        _require(cfg["mode"] in ("centers", "thm1-1", "thm1-2", "thm1-3"), "unknown census mode")
        _require(cfg["max_index"] >= 1, "max_index must be >= 1")
        _require(cfg["l"] >= 1, "l must be >= 1")
        _require(cfg["fixed"] >= 1 if cfg["mode"] == "thm1-1" else cfg["fixed"] >= 0, "bad fixed index")
    elif command == "conical":
        bad = set(cfg["tests"]) - {"mm0", "lm1", "semi"}
        _require(not bad and cfg["tests"], f"unknown conical tests {sorted(bad)}")
        _require(cfg["r"] > 0, "r must be positive")
        _require(cfg["n_max"] >= 2, "n_max must be >= 2")
        _require(cfg["d_bound"] >= 1, "d_bound must be >= 1")
        _require(cfg["radii"] and all(x > 0 for x in cfg["radii"]) and cfg["radii"] == sorted(cfg["radii"]),
                 "radii must be positive and increasing")
        _require(cfg["horizon"] >= 2, "horizon must be >= 2")
        _require(cfg["separation"] > 0, "separation must be positive")
    elif command == "poincare":
        _require(cfg["period"] >= 1, "period must be >= 1")
        _require(cfg["radius"] > 0, "radius must be positive")
        _require(cfg["samples"] >= 2, "samples must be >= 2")
    return cfg


# -- output helpers -------------------------------------------------------------------


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True, allow_nan=False)
        fh.write("\n")


def write_sidecar(out):
    with open(os.path.join(out, "VERSION"), "w") as fh:
        fh.write(f"artifact {package_version()}\n")


def _finite_or_none(x):
    return None if x is None or not math.isfinite(x) else float(x)


# -- commands -------------------------------------------------------------------------


def render_mask(kind, degree, c, frame, cap, tau, mode):
    """Grid set of J(f_c) or M: bounded cells plus cells within tau*h by the distance estimate."""
    pts = frame.points()
    ws = np.ascontiguousarray((pts - frame.center).ravel())
    ref = np.array([frame.center], dtype=np.complex128)
    param = kind == "mandelbrot"
    reach = abs(frame.center) + math.sqrt(2) * frame.half_width
    radius = escape_radius(degree, reach if param else abs(c))
    c_base = frame.center if param else complex(c)
    esc, dist = _kernels.classify(ref, c_base, 1 + 0j, ws, degree, param, _kernels.binomials(degree),
                                  float(radius), int(cap))
    bounded = (esc < 0).reshape(frame.shape)
    near = (dist < tau * frame.spacing).reshape(frame.shape)
    if mode == "filled":
        mask = bounded | near
    else:
        pad = np.pad(bounded, 1, mode="edge")
        edge = bounded & ~(pad[:-2, 1:-1] & pad[2:, 1:-1] & pad[1:-1, :-2] & pad[1:-1, 2:])
        mask = (near & ~bounded) | edge
    return GridSet(frame, mask)


def cmd_render(cfg):
    frame = Frame(cfg["center"], cfg["half_width"], cfg["resolution"])
    gset = render_mask(cfg["kind"], cfg["degree"], cfg["c"], frame, cfg["cap"], cfg["tau"], cfg["mode"])
    out = cfg["out"]
    write_pgm(gset, os.path.join(out, "render.pgm"))
    write_points_csv(gset, os.path.join(out, "render.csv"))
    write_json(os.path.join(out, "render.json"), {
        "kind": cfg["kind"], "degree": cfg["degree"], "re_c": cfg["c"].real, "im_c": cfg["c"].imag,
        "re_center": frame.center.real, "im_center": frame.center.imag, "half_width": frame.half_width,
        "resolution": frame.resolution, "cap": cfg["cap"], "tau": cfg["tau"], "mode": cfg["mode"],
        "marked": gset.count, "spacing": frame.spacing,
    })
    return 0


def cmd_similarity(cfg):
    from .similarity import panel_image, similarity_report

    rep = similarity_report(cfg["degree"], cfg["c0"], cfg["r"], cfg["resolution"], cfg["k_min"], cfg["k_max"],
                            cfg["cap"], cfg["tau"], Q=cfg["q"], keep_sets=bool(cfg["panels"]))
    out = cfg["out"]
    rows = []
    for row in rep.rows:
        rows.append([row.k, row.n, row.rho.real, row.rho.imag, row.d_julia, row.d_mandel, row.d_between,
                     rep.Q.real, rep.Q.imag, rep.lam.real, rep.lam.imag, rep.grid_tolerance, row.error or ""])
    from .schemas import CSV_COLUMNS

    write_csv(os.path.join(out, "similarity.csv"), CSV_COLUMNS["similarity.csv"], rows)
    write_pgm(rep.model, os.path.join(out, "model.pgm"))
    if cfg["panels"]:
        for row in rep.rows:
            if row.error is None:
                write_ppm_array(panel_image(row, rep.model), os.path.join(out, f"panel_k{row.k}.ppm"))
    data = rep.data
    write_json(os.path.join(out, "similarity.json"), {
        "degree": data.degree, "re_c0": data.c0.real, "im_c0": data.c0.imag, "l": data.l, "p": data.p,
        "re_a0": data.a0.real, "im_a0": data.a0.imag, "re_A0": data.A0.real, "im_A0": data.A0.imag,
        "re_lambda0": data.lambda0.real, "im_lambda0": data.lambda0.imag,
        "re_lambda": rep.lam.real, "im_lambda": rep.lam.imag, "re_Q": rep.Q.real, "im_Q": rep.Q.imag,
        "r": rep.r, "resolution": rep.frame.resolution, "cap": cfg["cap"], "tau": cfg["tau"],
        "model_depth": int(rep.model.info["depth"]), "model_depth_gap": float(rep.model.info["depth_gap"]),
        "spacing": rep.frame.spacing, "grid_tolerance": rep.grid_tolerance,
        "rate_slope": _finite_or_none(rep.slope), "rate_rows": rep.slope_rows,
    })
    return 0


def _census_rows(entries):
    rows = []
    for j, (rec, dist) in enumerate(entries, start=1):
        m = rec.landing_multiplier
        rows.append([j, rec.k, rec.l, rec.c.real, rec.c.imag, rec.residual, dist, rec.misiurewicz, m.real, m.imag])
    return rows


def cmd_census(cfg):
    from .census import find_superattracting_centers, thm1_sequence
    from .schemas import CSV_COLUMNS

    path = os.path.join(cfg["out"], "census.csv")
    header = CSV_COLUMNS["census.csv"]
    t0 = cfg["t0"]
    if cfg["mode"] == "centers":
        found = find_superattracting_centers(cfg["degree"], cfg["l"])
        write_csv(path, header, _census_rows([(rec, abs(rec.c - t0)) for rec in found]))
        return 0
    try:
        rep = thm1_sequence(cfg["degree"], t0, cfg["mode"], cfg["fixed"], cfg["max_index"])
    except ContinuationStalled as exc:
        write_csv(path, header, _census_rows(exc.report.entries))
        raise
    write_csv(path, header, _census_rows(rep.entries))
    return 0


def cmd_conical(cfg):
    from .conical import lm1_test, mm0_test, omega_limit_estimate

    fmap = UnicriticalMap(cfg["degree"], cfg["c"])
    z0 = fmap.c if cfg["z0"] is None else cfg["z0"]
    base = {"re_c": fmap.c.real, "im_c": fmap.c.imag}
    records = []
    for test in cfg["tests"]:
        if test == "mm0":
            v = mm0_test(fmap, z0, cfg["r"], cfg["d_bound"], cfg["n_max"])
            records.append({**base, "test": "mm0", "re_z0": z0.real, "im_z0": z0.imag, "r": v.r,
                            "d_bound": v.d_bound, "n_max": v.n_max, "verdict": v.verdict, "certified": v.certified,
                            "qualifying": len(v.qualifying_steps),
                            "radius_upper_half": v.disk(v.n_max // 2).radius_upper,
                            "radius_upper_full": v.disk(v.n_max).radius_upper})
        elif test == "lm1":
            v = lm1_test(fmap, z0, cfg["radii"])
            records.append({**base, "test": "lm1", "re_z0": z0.real, "im_z0": z0.imag, "verdict": v.verdict,
                            "heuristic": v.heuristic, "failed_radius": v.failed_radius, "radii": list(v.radii),
                            "stabilized_depth": [int(v.stabilized_depth[R]) for R in v.radii if R in v.stabilized_depth]})
        else:
            rep = omega_limit_estimate(fmap, burn_in=cfg["horizon"] // 10, horizon=cfg["horizon"],
                                       separation=cfg["separation"])
            records.append({**base, "test": "semi", "horizon": cfg["horizon"], "separation": cfg["separation"],
                            "semi_hyperbolic": rep.semi_hyperbolic, "landing_index": rep.landing_index,
                            "kappa": rep.kappa, "eta": rep.eta, "omega_points": len(rep.X0),
                            "min_return_distance": rep.separation})
    write_json(os.path.join(cfg["out"], "conical.json"), records)
    return 0


def cmd_poincare(cfg):
    from .orbits import find_periodic, poincare_chart, poincare_eval
    from .schemas import CSV_COLUMNS

    fmap = UnicriticalMap(cfg["degree"], cfg["c"])
    orb = find_periodic(fmap, cfg["period"], cfg["seed"])
    chart = poincare_chart(orb, cfg["radius"])
    R, n = cfg["radius"], cfg["samples"]
    xs = np.linspace(-R, R, n)
    ws = (xs[None, :] + 1j * xs[::-1, None]).ravel()
    ws = ws[np.abs(ws) <= R]
    vals = poincare_eval(chart, ws)
    rows = [[w.real, w.imag, v.real, v.imag] for w, v in zip(ws, vals)]
    write_csv(os.path.join(cfg["out"], "poincare.csv"), CSV_COLUMNS["poincare.csv"], rows)
    write_json(os.path.join(cfg["out"], "poincare.json"), {
        "degree": fmap.degree, "re_c": fmap.c.real, "im_c": fmap.c.imag, "period": orb.period,
        "re_point": orb.point.real, "im_point": orb.point.imag,
        "re_multiplier": orb.multiplier.real, "im_multiplier": orb.multiplier.imag,
        "depth": chart.depth, "domain_radius": chart.domain_radius, "gap": chart.gap, "samples": len(ws),
    })
    return 0


COMMANDS = {
    "render": cmd_render,
    "similarity": cmd_similarity,
    "census": cmd_census,
    "conical": cmd_conical,
    "poincare": cmd_poincare,
}


def main(argv=None):
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    command = ns.pop("command")
    try:
        cfg = validate(command, resolve_config(command, ns))
        os.makedirs(cfg["out"], exist_ok=True)
    except (ConfigError, OSError) as exc:
        print(f"zalcman {command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg["threads"]:
        _kernels.set_threads(cfg["threads"])
    try:
        code = COMMANDS[command](cfg)
    except PreconditionError as exc:
        print(f"zalcman {command}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (DynamicsError, ValueError, ArithmeticError) as exc:
        print(f"zalcman {command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    write_sidecar(cfg["out"])
    return code


if __name__ == "__main__":
    sys.exit(main())
