"""Command-line front end ``lll``.

Subcommands: ``solve``, ``verify``, ``kernel``, ``fracpow``, ``project`` and
``spectrum``. Settings come from an optional JSON config (``--config``);
command-line flags override individual keys. Exit codes: 0 ok, 1 numerical
failure, 2 validation error. Errors are reported as one JSON object on
stdout.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from ._core import BACKEND
from .errors import ConstraintError, DecompositionError, LevyLeblondError, ZeroModeError
from .fracalc import TimeGrid
from .fracops import FracParams, delta_kernel_table, frac_laplacian_bochner, frac_laplacian_pow
from .io import LLFDFormatError, atomic_write, field_csv, read_llfd, write_llfd
from .lattice import LatticeField, LatticeSpec
from .leblond import leray_projection, levy_leblond_solution, teodorescu
from .reports import _plain
from .semigroup import evolve_path, heat_kernel
from .spectral import SpectralField, d_squared_table, inverse_dft, z_symbol_table
from .verify import SUITES, VerifyConfig, run_suite

EXIT_OK, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 1, 2

DEFAULT_CONFIG = {
    "lattice": {"n": 1, "N": 16, "h": 1.0},
    "frac": {"alpha": 1.0, "theta": 0.0},
    "time": {"t0": 0.0, "dt": 0.01, "steps": 101},
    "initial": {"kind": "delta", "params": {}},
    "tolerances": {"fd": 1e-5, "quad": 1e-6, "algebra": 1e-12},
    "output": {"dir": "lll-out", "formats": ["llfd", "csv", "json"]},
    "seed": 0,
}

_NUM = {"type": "number"}
CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "lattice": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"n": {"type": "integer", "minimum": 1, "maximum": 3}, "N": {"type": "integer", "minimum": 4}, "h": {"type": "number", "exclusiveMinimum": 0}},
        },
        "frac": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"alpha": _NUM, "theta": _NUM, "beta": {"type": ["number", "null"]}},
        },
        "time": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"t0": {"type": "number", "minimum": 0}, "dt": {"type": "number", "exclusiveMinimum": 0}, "steps": {"type": "integer", "minimum": 5}},
        },
        "initial": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"kind": {"enum": ["delta", "gaussian", "constant", "file"]}, "params": {"type": "object"}},
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"fd": _NUM, "quad": _NUM, "algebra": _NUM},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": ["llfd", "csv", "json"]}, "uniqueItems": True},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
    },
}


class ValidationFailure(Exception):
    def __init__(self, message: str, constraint: str | None = None):
        super().__init__(message)
        self.constraint = constraint


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


# flag name -> config path
OVERRIDES = {
    "n": ("lattice", "n"),
    "N": ("lattice", "N"),
    "h": ("lattice", "h"),
    "alpha": ("frac", "alpha"),
    "theta": ("frac", "theta"),
    "beta": ("frac", "beta"),
    "t0": ("time", "t0"),
    "dt": ("time", "dt"),
    "steps": ("time", "steps"),
    "initial": ("initial", "kind"),
    "out": ("output", "dir"),
    "seed": ("seed",),
}


def load_config(args: argparse.Namespace) -> dict:
    """Default config, overlaid by ``--config`` and then by explicit flags; validated."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if getattr(args, "config", None):
        try:
            user = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationFailure(f"cannot read config: {exc}", "config_file") from None
        try:
            jsonschema.validate(user, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ValidationFailure(f"config: {exc.message}", "schema") from None
        cfg = _merge(cfg, user)
    for flag, path in OVERRIDES.items():
        val = getattr(args, flag, None)
        if val is None:
            continue
        node = cfg
        for key in path[:-1]:
            node = node.setdefault(key, {})
        node[path[-1]] = val
    if getattr(args, "formats", None):
        cfg["output"]["formats"] = args.formats
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValidationFailure(f"config: {exc.message}", "schema") from None
    return cfg


def build_spec(cfg: dict) -> LatticeSpec:
    lat = cfg["lattice"]
    try:
        return LatticeSpec(int(lat["n"]), int(lat["N"]), float(lat["h"]))
    except ValueError as exc:
        raise ValidationFailure(str(exc), "lattice") from None


def build_params(cfg: dict) -> FracParams:
    fr = cfg["frac"]
    return FracParams(fr["alpha"], fr.get("theta", 0.0), fr.get("beta"))


def build_grid(cfg: dict) -> TimeGrid:
    t = cfg["time"]
    return TimeGrid(float(t["t0"]), float(t["dt"]), int(t["steps"]))


def build_initial(cfg: dict, spec: LatticeSpec) -> LatticeField:
    """Initial scalar field from the ``initial`` block.

    ``delta`` has default amplitude ``1/h^n`` so its lattice mass is 1.
    """
    init = cfg["initial"]
    kind, p = init["kind"], init.get("params", {})
    if kind == "delta":
        amp = p.get("value", 1.0 / spec.volume_element)
        return LatticeField.delta(spec, p.get("site"), amp)
    if kind == "gaussian":
        return LatticeField.gaussian(spec, float(p.get("width", 2.0 * spec.h)), p.get("center"), p.get("value", 1.0))
    if kind == "constant":
        return LatticeField.constant(spec, p.get("value", 1.0))
    path = p.get("path")
    if not path:
        raise ValidationFailure("initial kind 'file' needs params.path", "initial")
    f = read_llfd(path)
    if not isinstance(f, LatticeField) or f.batch_shape:
        raise ValidationFailure("initial file must hold one position-domain field", "initial")
    if f.spec != spec:
        raise ValidationFailure("initial file lattice differs from the configured lattice", "lattice")
    return f


def _manifest(cfg: dict, command: str, started: float, extra: dict) -> dict:
    return _plain(
        {
            "command": command,
            "config": cfg,
            "version": __version__,
            "backend": BACKEND,
            "threads": os.environ.get("LLL_THREADS", "1"),
            "seed": cfg.get("seed", 0),
            "wall_time_s": time.perf_counter() - started,
            **extra,
        }
    )


# subcommands

def cmd_solve(args, cfg: dict) -> int:
    started = time.perf_counter()
    spec, params, grid = build_spec(cfg), build_params(cfg), build_grid(cfg)
    f0 = build_initial(cfg, spec)
    out = Path(cfg["output"]["dir"])
    formats = set(cfg["output"]["formats"])
    times = np.concatenate([[0.0], grid.times]) if grid.t0 > 0 else grid.times
    phi = evolve_path(params, times, f0)
    written = []
    if "llfd" in formats:
        for i in range(len(times)):
            written.append(str(write_llfd(out / f"phi_{i:05d}.llfd", phi.index_batch(i))))
        if not args.no_psi:
            # Levy-Leblond null solution from the same datum in the fd f sector
            psi = levy_leblond_solution(params, f0, LatticeField.zeros(spec), times)
            for i in range(len(times)):
                written.append(str(write_llfd(out / f"psi_{i:05d}.llfd", psi.index_batch(i))))
    mass = phi.total()
    if "csv" in formats:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"{part}_{b}" for b in phi.blades for part in ("re", "im")])
        for t, row in zip(times, mass):
            w.writerow([repr(float(t))] + [repr(float(x)) for v in row for x in (v.real, v.imag)])
        written.append(str(atomic_write(out / "mass.csv", buf.getvalue())))
        written.append(str(atomic_write(out / "profiles.csv", field_csv(phi))))
    if "json" in formats:
        man = _manifest(cfg, "solve", started, {"times": times, "outputs": written})
        atomic_write(out / "manifest.json", json.dumps(man, indent=2))
    print(json.dumps({"status": "ok", "frames": len(times), "dir": str(out)}))
    return EXIT_OK


def cmd_verify(args, cfg: dict) -> int:
    started = time.perf_counter()
    vc = VerifyConfig(build_spec(cfg), build_params(cfg), build_grid(cfg), int(cfg["seed"]), dict(cfg["tolerances"]))
    reports = run_suite(args.suite, vc)
    ok = all(r.passed for r in reports)
    if not args.quiet:
        for r in reports:
            print(r.table())
        print(f"{'PASS' if ok else 'FAIL'}: {sum(r.passed for r in reports)}/{len(reports)} reports")
    if "json" in cfg["output"]["formats"] and args.write:
        out = Path(cfg["output"]["dir"])
        body = {"suite": args.suite, "passed": ok, "reports": [r.to_dict() for r in reports]}
        atomic_write(out / f"verify_{args.suite}.json", json.dumps(_plain(body), indent=2))
        man = _manifest(cfg, "verify", started, {"suite": args.suite, "passed": ok})
        atomic_write(out / "manifest.json", json.dumps(man, indent=2))
    return EXIT_OK if ok else EXIT_NUMERICAL


def kernel_csv(spec: LatticeSpec, times, theta: float) -> tuple[str, dict]:
    """Heat-kernel rows ``t, offset..., re, im`` for every time plus per-time mass."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"x_{j + 1}" for j in range(spec.n)] + ["re", "im"])
    masses = {}
    for t in times:
        K = heat_kernel(t, theta, spec)
        for row in K.table():
            w.writerow([repr(float(t))] + list(row[:-2]) + [repr(row[-2]), repr(row[-1])])
        masses[float(t)] = K.mass()
    return buf.getvalue(), masses


def cmd_kernel(args, cfg: dict) -> int:
    spec = build_spec(cfg)
    if args.kind == "heat":
        params = build_params(cfg)
        if params.alpha != 1:
            raise ValidationFailure("the Bessel heat kernel exists only for alpha = 1", "alpha_range")
        times = sorted({0.0, *(args.t or [1.0])})
        text, masses = kernel_csv(spec, times, params.theta)
        info = {"masses": masses, "max_mass_error": max(abs(m - 1) for m in masses.values())}
    else:
        if not 0 < args.sigma < 0.5:
            raise ConstraintError("sigma must lie in (0, 1/2)", "sigma_range")
        table = delta_kernel_table(args.sigma, spec)
        offs = spec.signed_offsets().reshape(-1, spec.n)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x_{j + 1}" for j in range(spec.n)] + ["re", "im"])
        for off, v in sorted(zip(map(tuple, offs.tolist()), table.reshape(-1)), key=lambda r: r[0]):
            w.writerow(list(off) + [repr(float(v.real)), repr(float(v.imag))])
        text, info = buf.getvalue(), {"sigma": args.sigma}
    if args.output:
        atomic_write(args.output, text)
        print(json.dumps(_plain({"status": "ok", "file": args.output, **info})))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _read_field(path: str) -> LatticeField:
    f = read_llfd(path)
    if isinstance(f, SpectralField):
        f = inverse_dft(f)
    return f


def cmd_fracpow(args, cfg: dict) -> int:
    f = _read_field(args.input)
    if args.method == "bochner":
        g = frac_laplacian_bochner(args.sigma, f)
    else:
        g = frac_laplacian_pow(args.sigma, f)
    write_llfd(args.output, g)
    print(json.dumps({"status": "ok", "file": args.output}))
    return EXIT_OK


def cmd_project(args, cfg: dict) -> int:
    f = _read_field(args.input)
    g = leray_projection(f) if args.op == "leray" else teodorescu(f)
    write_llfd(args.output, g)
    print(json.dumps({"status": "ok", "file": args.output}))
    return EXIT_OK


def spectrum_csv(spec: LatticeSpec) -> str:
    """Rows ``k..., xi..., d2``, then Re/Im of each ``z`` component, in FFT order."""
    z = z_symbol_table(spec)
    d2 = d_squared_table(spec)
    k1 = spec.momentum_indices()
    ks = np.stack(np.meshgrid(*[k1] * spec.n, indexing="ij"), axis=-1).reshape(-1, spec.n)
    xis = spec.momenta().reshape(-1, spec.n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        [f"k_{j + 1}" for j in range(spec.n)]
        + [f"xi_{j + 1}" for j in range(spec.n)]
        + ["d2"]
        + [f"z_{part}_{b}" for b in z.blades for part in ("re", "im")]
    )
    zd = z.data.reshape(-1, len(z.blades))
    for k, xi, d, zz in zip(ks, xis, d2.reshape(-1), zd):
        w.writerow(
            [int(v) for v in k]
            + [repr(float(v)) for v in xi]
            + [repr(float(d))]
            + [repr(float(x)) for v in zz for x in (v.real, v.imag)]
        )
    return buf.getvalue()


def cmd_spectrum(args, cfg: dict) -> int:
    text = spectrum_csv(build_spec(cfg))
    if args.output:
        atomic_write(args.output, text)
        print(json.dumps({"status": "ok", "file": args.output}))
    else:
        sys.stdout.write(text)
    return EXIT_OK


# parser

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="JSON run configuration")
    g = p.add_argument_group("overrides")
    g.add_argument("--n", type=int)
    g.add_argument("--N", type=int)
    g.add_argument("--h", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--theta", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--t0", type=float)
    g.add_argument("--dt", type=float)
    g.add_argument("--steps", type=int)
    g.add_argument("--initial", choices=["delta", "gaussian", "constant", "file"])
    g.add_argument("--out", help="output directory")
    g.add_argument("--formats", nargs="+", choices=["llfd", "csv", "json"])
    g.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lll", description="Fractional Levy-Leblond operators on periodic lattices.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="evolve an initial field and write snapshots")
    _common(p)
    p.add_argument("--no-psi", action="store_true", help="skip the Levy-Leblond snapshots")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="run a verification suite")
    _common(p)
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--write", action="store_true", help="also write the JSON report to the output directory")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("kernel", help="dump heat-kernel or discrete-delta tables as CSV")
    _common(p)
    p.add_argument("--kind", choices=["heat", "delta"], default="heat")
    p.add_argument("--t", type=float, nargs="+", help="times (t = 0 is always included)")
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("fracpow", help="apply (-Delta_h)^sigma to an LLFD field")
    _common(p)
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--method", choices=["spectral", "bochner"], default="spectral")
    p.set_defaults(func=cmd_fracpow)

    p = sub.add_parser("project", help="apply the Helmholtz-Leray projection or the Teodorescu operator")
    _common(p)
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--op", choices=["leray", "teodorescu"], default="leray")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("spectrum", help="dump the d^2 and z symbols on the momentum grid")
    _common(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_spectrum)
    return parser


def _error(message: str, code: int, constraint: str | None = None, kind: str = "error") -> int:
    body = {"error": kind, "message": message}
    if constraint:
        body["constraint"] = constraint
    print(json.dumps(body))
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return args.func(args, cfg)
    except ValidationFailure as exc:
        return _error(str(exc), EXIT_VALIDATION, exc.constraint, "validation")
    except ConstraintError as exc:
        return _error(str(exc), EXIT_VALIDATION, exc.constraint, "validation")
    except (ZeroModeError, DecompositionError) as exc:
        return _error(str(exc), EXIT_VALIDATION, type(exc).__name__, "validation")
    except (LLFDFormatError, OSError) as exc:
        return _error(str(exc), EXIT_VALIDATION, "io", "validation")
    except (LevyLeblondError, ArithmeticError) as exc:
        return _error(str(exc), EXIT_NUMERICAL, type(exc).__name__, "numerical")


if __name__ == "__main__":
    sys.exit(main())
