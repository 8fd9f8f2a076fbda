"""Command-line experiment runner.

Every subcommand reads an optional flat config file (``key = value`` lines,
``#`` comments) and lets long-form flags override single keys. Artifacts go to
``--out`` (default ``.``): CSV tables with 17 significant digits and a JSON
summary with sorted keys and a ``schema`` field.

Exit status: 0 on success, 1 for invalid input (the message names the field),
2 for a numerical failure (diagnostics printed as JSON on stderr and written to
``error.json``).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import blowdown as bd
from . import functionals as fn
from .errors import DegenerateError, DomainError, NonConvergenceError, PreconditionError
from .geometry import FunctionSampler, Grid2, GridSampler, Paraboloid
from .potential import ParaboloidDeviation, ParaboloidSolution, PotentialConfig, potential_paraboloid
from .solver import SolverConfig, solve_obstacle
from .thin import ThinProfile, ThinSampler, VhatSampler

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


# ---------------------------------------------------------------------------
# parameter tables

def _floats(text):
    return [float(t) for t in str(text).split(",") if t.strip()]


def _ints(text):
    return [int(t) for t in str(text).split(",") if t.strip()]


@dataclass(frozen=True)
class Param:
    kind: object
    default: object
    help: str = ""
    check: object = None       # callable(value) -> error message or None


def _pos(v):
    return None if v > 0 else "must be positive"


def _radii(v):
    if not v:
        return "needs at least one radius"
    if any(r <= 0 for r in v) or any(b <= a for a, b in zip(v, v[1:])):
        return "must be positive and strictly increasing"
    return None


BOX = {
    "xmin": Param(float, -6.0), "xmax": Param(float, 6.0),
    "ymin": Param(float, -2.0), "ymax": Param(float, 10.0),
    "h": Param(float, 0.05, "grid spacing", _pos),
}
SOLVE = {
    "omega": Param(float, 1.8, check=lambda v: None if 0 < v < 2 else "must lie in (0, 2)"),
    "tol": Param(float, 1e-9, check=_pos),
    "max_iter": Param(int, 200_000, check=_pos),
    "u_zero_tol": Param(float, 0.5, check=_pos),
}
QUAD = {
    "n_angular": Param(int, 1024, check=lambda v: None if v >= 64 else "must be >= 64"),
    "n_radial": Param(int, 64, check=lambda v: None if v >= 2 else "must be >= 2"),
}
SAMPLER = {
    "sampler": Param(str, "vhat", "vhat | paraboloid | harmonic | thin",
                     check=lambda v: None if v in ("vhat", "paraboloid", "harmonic", "thin")
                     else "unknown sampler"),
    "gamma": Param(float, 1.0, check=_pos),
    "abs_tol": Param(float, 1e-8, check=lambda v: None if 0 < v <= 1 else "must lie in (0, 1]"),
    "thin_kind": Param(str, "re_halfinteger_2m_minus_half"),
    "thin_m": Param(int, 1, check=_pos),
    "scale": Param(float, 1.0),
}
COMMON = {"seed": Param(int, 0)}

TABLES = {
    "potential": {**COMMON, **BOX, "gamma": SAMPLER["gamma"], "sigma": Param(float, 0.0),
                  "abs_tol": SAMPLER["abs_tol"],
                  "mode": Param(str, "ray", "ray | grid",
                                check=lambda v: None if v in ("ray", "grid") else "must be ray or grid"),
                  "direction": Param(_floats, [0.0, -1.0]),
                  "r_lo": Param(float, 10.0, check=_pos), "r_hi": Param(float, 1000.0, check=_pos),
                  "n": Param(int, 16, check=lambda v: None if v >= 2 else "must be >= 2")},
    "solve": {**COMMON, **BOX, **SOLVE, "gamma": SAMPLER["gamma"], "sigma": Param(float, 0.0)},
    "frequency": {**COMMON, **SAMPLER, **QUAD, "radii": Param(_floats, [0.25, 0.5, 1.0, 2.0], check=_radii)},
    "doubling": {**COMMON, **SAMPLER, **QUAD, "radii": Param(_floats, [1.0, 2.0, 4.0], check=_radii)},
    "matching": {**COMMON, **SAMPLER, **QUAD, "radii": Param(_floats, [2.0, 5.0, 10.0, 20.0, 40.0], check=_radii)},
    "blowdown": {**COMMON, **SAMPLER, **QUAD, "radii": Param(_floats, [10.0, 20.0, 40.0, 80.0], check=_radii)},
    "acf": {**COMMON, **QUAD,
            "starts": Param(_floats, [0.0, 2 * math.pi / 3, 4 * math.pi / 3]),
            "widths": Param(_floats, [2 * math.pi / 3] * 3),
            "modes": Param(_ints, [1, 1, 1]),
            "beta": Param(float, 9.0),
            "radii": Param(_floats, [0.1, 0.25, 0.5, 0.75, 1.0], check=_radii)},
    "match": {**COMMON, "gamma": SAMPLER["gamma"], "abs_tol": SAMPLER["abs_tol"],
              "n_angular": QUAD["n_angular"],
              "radii": Param(_floats, [50.0, 100.0, 200.0], check=_radii),
              "alpha_1": Param(float, bd.ALPHA_1, check=_pos)},
    "regions": {**COMMON, **BOX, **SOLVE, "gamma": SAMPLER["gamma"],
                "gamma_sigma": Param(float, 1.0, check=_pos),
                "sigma": Param(float, 0.25), "min_size": Param(int, 8, check=_pos)},
}


def read_config(path):
    """Parse ``key = value`` lines; returns a dict of raw strings."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}", "expected 'key = value'")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k] = v
    return out


def resolve(command, raw: dict):
    """Typed parameters for ``command`` from raw strings, defaults filled in."""
    table = TABLES[command]
    params = {}
    for key in raw:
        if key not in table:
            raise ConfigError(key, "unknown parameter")
    for key, p in table.items():
        if key in raw and raw[key] is not None:
            try:
                val = p.kind(raw[key])
            except (TypeError, ValueError):
                raise ConfigError(key, f"cannot parse {raw[key]!r}") from None
        else:
            val = p.default
        if isinstance(val, float) and not math.isfinite(val):
            raise ConfigError(key, "must be finite")
        if p.check is not None:
            msg = p.check(val)
            if msg:
                raise ConfigError(key, msg)
        params[key] = val
    return params


# ---------------------------------------------------------------------------
# output helpers

def _fmt(v):
    return f"{float(v):.17g}"


def write_csv(path, header, rows):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, command, payload):
    data = {"schema": f"obstaclelab.{command}/{SCHEMA_VERSION}", **payload}
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        json.dump(_jsonable(data), fh, sort_keys=True, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands

def _grid(p):
    return Grid2.from_spacing(p["xmin"], p["xmax"], p["ymin"], p["ymax"], p["h"])


def _sampler(p):
    kind = p["sampler"]
    if kind == "vhat":
        return VhatSampler(p["scale"])
    if kind == "paraboloid":
        return ParaboloidDeviation(p["gamma"], PotentialConfig(abs_tol=p["abs_tol"]))
    if kind == "harmonic":
        s = p["scale"]
        return FunctionSampler(lambda a, b: s * a * b, grad=lambda a, b: (s * b, s * a), name="x1*x2")
    try:
        return ThinSampler(ThinProfile(p["thin_kind"], p["thin_m"], p["scale"]))
    except ValueError:
        raise ConfigError("thin_kind", f"unknown kind {p['thin_kind']!r}") from None


def _quad(p):
    return fn.FunctionalConfig(n_angular=p["n_angular"], n_radial=p["n_radial"])


def _profile_out(out, command, prof, extra=None):
    write_csv(os.path.join(out, f"{command}.csv"), ["r", "value"], zip(prof.radii, prof.values))
    write_json(os.path.join(out, f"{command}.json"), command,
               {"radii": list(prof.radii), "values": list(prof.values), **(extra or {})})


def cmd_potential(p, out):
    P = Paraboloid(p["gamma"], p["sigma"])
    cfg = PotentialConfig(abs_tol=p["abs_tol"])
    if p["mode"] == "grid":
        g = _grid(p)
        X, Y = g.mesh()
        pts = np.column_stack([X.ravel(), Y.ravel()])
    else:
        e = np.asarray(p["direction"], float)
        if e.shape != (2,) or not np.linalg.norm(e) > 0:
            raise ConfigError("direction", "must be two numbers, not both zero")
        if not p["r_hi"] > p["r_lo"]:
            raise ConfigError("r_hi", "must exceed r_lo")
        r = np.geomspace(p["r_lo"], p["r_hi"], p["n"])
        pts = r[:, None] * (e / np.linalg.norm(e))
    V = np.asarray(potential_paraboloid(P, pts, cfg)).reshape(-1)
    write_csv(os.path.join(out, "potential.csv"), ["x1", "x2", "V"],
              zip(pts[:, 0], pts[:, 1], V))
    summary = {"points": int(V.size), "gamma": p["gamma"], "sigma": p["sigma"], "abs_tol": p["abs_tol"]}
    if p["mode"] == "ray":
        if np.any(np.abs(V) < 1e-14):
            raise DegenerateError("ray hits |V| < 1e-14")
        summary["slope"] = float(np.polyfit(np.log(r), np.log(np.abs(V)), 1)[0])
    write_json(os.path.join(out, "potential.json"), "potential", summary)


def _solver_cfg(p):
    return SolverConfig(omega=p["omega"], tol=p["tol"], max_iter=p["max_iter"],
                        u_zero_tol=p["u_zero_tol"])


def _paraboloid_boundary(gamma, sigma, tol):
    return ParaboloidSolution(Paraboloid(gamma, sigma), PotentialConfig(abs_tol=min(tol / 10, 1.0)))


def cmd_solve(p, out):
    g = _grid(p)
    cfg = _solver_cfg(p)
    u, rep = solve_obstacle(g, _paraboloid_boundary(p["gamma"], p["sigma"], p["tol"]), cfg)
    u.to_csv(os.path.join(out, "u.csv"))
    rep.mask.to_field().to_csv(os.path.join(out, "mask.csv"))
    write_json(os.path.join(out, "report.json"), "solve",
               {**rep.to_dict(), "grid": list(g.header()), "gamma": p["gamma"], "sigma": p["sigma"]})


def cmd_frequency(p, out):
    prof = fn.almgren_profile(_sampler(p), p["radii"], _quad(p))
    _profile_out(out, "frequency", prof)


def cmd_doubling(p, out):
    w, q = _sampler(p), _quad(p)
    prof = fn.RadialProfile(p["radii"], [fn.doubling_ratio(w, r, q) for r in p["radii"]])
    _profile_out(out, "doubling", prof)


def cmd_matching(p, out):
    prof = fn.matching_profile(_sampler(p), p["radii"], _quad(p))
    _profile_out(out, "matching", prof, {"non_decreasing": bool(np.all(prof.steps() >= -1e-3))})


def cmd_acf(p, out):
    n = {len(p["starts"]), len(p["widths"]), len(p["modes"])}
    if n != {3}:
        raise ConfigError("starts", "starts, widths and modes need three entries each")
    if sum(p["widths"]) > 2 * math.pi + 1e-12:
        raise ConfigError("widths", "sector widths exceed a full turn")
    fs, sup = fn.sector_triple(p["starts"], p["widths"], p["modes"])
    prof = fn.acf_profile(*fs, sup, p["radii"], p["beta"], _quad(p))
    _profile_out(out, "acf", prof, {"beta": p["beta"],
                                    "kappas": [f.kappa for f in fs]})


def cmd_blowdown(p, out):
    rep = bd.blowdown_report(_sampler(p), p["radii"], _quad(p))
    write_csv(os.path.join(out, "blowdown.csv"), ["r", "alpha", "residual", "normalized_residual"],
              [(e.r, e.alpha, e.residual, e.normalized_residual) for e in rep])
    write_json(os.path.join(out, "blowdown.json"), "blowdown",
               {"alphas": list(rep.alphas), "diverging": rep.diverging})


def cmd_match(p, out):
    w = ParaboloidDeviation(p["gamma"], PotentialConfig(abs_tol=p["abs_tol"]))
    q = fn.FunctionalConfig(n_angular=p["n_angular"], n_radial=2)
    ests = [bd.alpha_estimate(w, r, q) for r in p["radii"]]
    write_csv(os.path.join(out, "match.csv"), ["r", "alpha", "residual"],
              [(e.r, e.alpha, e.residual) for e in ests])
    alphas = [e.alpha for e in ests]
    alpha_u = bd.richardson_limit(p["radii"], alphas) if len(alphas) >= 3 else alphas[-1]
    gamma = bd.gamma_match(alpha_u, p["alpha_1"])
    write_json(os.path.join(out, "match.json"), "match",
               {"alpha_u": alpha_u, "alpha_1": p["alpha_1"], "gamma": gamma,
                "gamma_true": p["gamma"], "relative_error": abs(gamma - p["gamma"]) / p["gamma"],
                "alphas": alphas, "radii": p["radii"]})


def cmd_regions(p, out):
    g = _grid(p)
    cfg = _solver_cfg(p)
    u, _ = solve_obstacle(g, _paraboloid_boundary(p["gamma"], 0.0, p["tol"]), cfg)
    us, _ = solve_obstacle(g, _paraboloid_boundary(p["gamma_sigma"], p["sigma"], p["tol"]), cfg)
    R = bd.region_decomposition(u, us, p["min_size"], p["u_zero_tol"])
    R.to_field().to_csv(os.path.join(out, "regions.csv"))
    payload = {"k": R.k, "sizes": R.sizes(), "signs": list(R.signs)}
    if R.k == 3:
        q = fn.FunctionalConfig(n_angular=512, n_radial=64)
        rmax = min(-g.ymin, g.ymax, -g.xmin, g.xmax) - g.h
        radii = [r for r in np.linspace(0.25, rmax, 8)]
        A, B = GridSampler(u), GridSampler(us)
        payload["sliding_radii"] = radii
        payload["sliding_phi"] = [fn.sliding_phi(A, B, R, r, q) for r in radii]
    write_json(os.path.join(out, "regions.json"), "regions", payload)


COMMANDS = {
    "potential": cmd_potential, "solve": cmd_solve, "frequency": cmd_frequency,
    "acf": cmd_acf, "doubling": cmd_doubling, "matching": cmd_matching,
    "blowdown": cmd_blowdown, "match": cmd_match, "regions": cmd_regions,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="obstaclelab", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, table in TABLES.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value file")
        sp.add_argument("--out", default=".", help="output directory")
        for key, prm in table.items():
            sp.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None,
                            help=prm.help or f"default {prm.default}")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    cmd = args.command
    try:
        raw = read_config(args.config) if args.config else {}
        for key in TABLES[cmd]:
            v = getattr(args, key)
            if v is not None:
                raw[key] = v
        params = resolve(cmd, raw)
        os.makedirs(args.out, exist_ok=True)
        COMMANDS[cmd](params, args.out)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 1
    except (PreconditionError, DomainError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 1
    except (NonConvergenceError, DegenerateError, FloatingPointError) as exc:
        diag = {"schema": f"obstaclelab.error/{SCHEMA_VERSION}", "command": cmd,
                "error": type(exc).__name__, "message": str(exc),
                "residual": getattr(exc, "residual", None),
                "iterations": getattr(exc, "iterations", None)}
        text = json.dumps(_jsonable(diag), sort_keys=True)
        print(text, file=sys.stderr)
        try:
            with open(os.path.join(args.out, "error.json"), "w", newline="\n") as fh:
                fh.write(text + "\n")
        except OSError:
            pass
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
