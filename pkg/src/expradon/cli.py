"""Command-line pipeline: ``expradon <subcommand> ...``.

Exit codes: 0 success, 1 validation failure, 2 usage or input error.
Values that start with a minus sign must be attached with ``=``, e.g.
``--mu=-0.3,0.2`` or ``--n-range=-8,8``.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ERTError
from .grids import (
    AngleGrid,
    ConstantAttenuation,
    DetectorGrid,
    HarmonicSinogram,
    PolarImage,
    RadialAttenuation,
    RadialGrid,
    Sinogram,
    derivative_s,
)
from .inversion import invert
from .io import export_csv, export_pgm, read_ert, write_ert
from .phantoms import PhantomSpec, default_phantom, phantom_harmonics
from .projector import decompose_angular, fourier_in_s, project_direct, project_harmonic
from .range_checks import (
    RangeReport,
    check_evenness,
    check_fourier_evenness,
    check_moments,
    check_moments_derivative,
    check_novikov_harmonic,
)
from .selftest import SUITES, bench, format_rows, relative_errors, run_suite
from .inversion import assemble_image

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument helpers
# --------------------------------------------------------------------------


def _floats(text, what):
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise _UsageError(f"cannot parse {what} {text!r}") from None


def _complex(text):
    parts = _floats(text, "complex value")
    if len(parts) == 1:
        return complex(parts[0])
    if len(parts) == 2:
        return complex(parts[0], parts[1])
    raise _UsageError(f"expected RE or RE,IM, got {text!r}")


def _n_range(args):
    if getattr(args, "n_range", None):
        vals = _floats(args.n_range, "harmonic range")
        if len(vals) != 2:
            raise _UsageError("--n-range needs two integers A,B")
        return int(vals[0]), int(vals[1])
    return -args.n_max, args.n_max


def _load_spec(path):
    if path is None:
        return default_phantom()
    try:
        return PhantomSpec.from_json(Path(path).read_text())
    except (OSError, ValueError, KeyError) as exc:
        raise _UsageError(f"cannot read phantom spec {path}: {exc}") from None


def _load_eta(path):
    """Text table r, re[, im] on a uniform radial grid."""
    try:
        raw = np.genfromtxt(path, delimiter=",", comments="#", invalid_raise=True)
    except (OSError, ValueError) as exc:
        raise _UsageError(f"cannot read eta table {path}: {exc}") from None
    raw = raw[~np.isnan(raw).any(axis=1)] if raw.ndim == 2 else raw
    if raw.ndim != 2 or raw.shape[1] not in (2, 3):
        raise _UsageError("eta table needs columns r,re[,im]")
    vals = raw[:, 1] + (1j * raw[:, 2] if raw.shape[1] == 3 else 0)
    return RadialAttenuation(RadialGrid(raw[:, 0]), vals)


def _attenuation(args, default=None):
    if getattr(args, "eta", None) and getattr(args, "mu", None) is not None:
        raise _UsageError("give either --mu or --eta")
    if getattr(args, "eta", None):
        return _load_eta(args.eta)
    if getattr(args, "mu", None) is not None:
        return ConstantAttenuation(_complex(args.mu))
    return default


def _read(path, *kinds):
    try:
        obj = read_ert(path)
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc}") from None
    if kinds and not isinstance(obj, kinds):
        names = " or ".join(k.__name__ for k in kinds)
        raise _UsageError(f"{path} holds a {type(obj).__name__}, expected {names}")
    return obj


def _emit(text, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text + ("" if text.endswith("\n") else "\n"))


def _render_field(obj, pixels):
    if isinstance(obj, PolarImage):
        return assemble_image(obj, n_pixels=pixels)
    if isinstance(obj, PhantomSpec):
        c = np.linspace(-1.0, 1.0, pixels)
        x, y = np.meshgrid(c, c)
        return obj(x, y)
    return np.asarray(obj.values)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_phantom(args):
    spec = _load_spec(args.spec)
    grid = RadialGrid.uniform(args.radial_nodes)
    img = phantom_harmonics(spec, grid, _n_range(args))
    write_ert(args.output, img)
    if args.render:
        export_pgm(args.render, _render_field(spec, args.pixels))
    if args.write_spec:
        Path(args.write_spec).write_text(spec.to_json(indent=2))
    return EXIT_OK


def cmd_project(args):
    att = _attenuation(args, ConstantAttenuation(0.0))
    det = DetectorGrid(args.detectors, args.s_max)
    src = Path(args.input)
    if args.direct:
        if src.suffix.lower() == ".ert":
            raise _UsageError("--direct needs a phantom spec (JSON), not a polar image")
        spec = _load_spec(src)
        out = project_direct(spec, det, AngleGrid(args.angles), att)
    elif src.suffix.lower() == ".ert":
        out = project_harmonic(_read(src, PolarImage), att, det)
    else:
        out = project_harmonic(_load_spec(src), att, det, n_range=_n_range(args))
    write_ert(args.output, out)
    return EXIT_OK


def cmd_decompose(args):
    sino = _read(args.input, Sinogram)
    write_ert(args.output, decompose_angular(sino, _n_range(args)))
    return EXIT_OK


def cmd_derivative(args):
    write_ert(args.output, derivative_s(_read(args.input, HarmonicSinogram)))
    return EXIT_OK


def cmd_invert(args):
    hp = _read(args.input, HarmonicSinogram)
    att = _attenuation(args, hp.att)
    grid = RadialGrid.uniform(args.radial_nodes)
    kw = {"form": args.form} if args.method in ("interior", "exterior") else {}
    img = invert(hp, args.method, att=att, grid=grid, **kw)
    write_ert(args.output, img)
    if not args.truth:
        return EXIT_OK
    truth = phantom_harmonics(_load_spec(args.truth), grid, (img.n_min, img.n_max))
    mask = grid.nodes >= args.r_min
    errs = relative_errors(img, truth, mask)
    worst = max(errs.values())
    report = {
        "method": args.method,
        "r_min": args.r_min,
        "tolerance": args.tolerance,
        "max_rel_l2": worst,
        "rel_l2": {str(k): v for k, v in errs.items()},
        "passed": worst <= args.tolerance,
    }
    print(json.dumps(report, indent=2))
    verdict = "<=" if report["passed"] else ">"
    print(f"max relative L2 error {worst:.3e} {verdict} {args.tolerance:g}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_FAIL


_CHECK_NAMES = ("evenness", "moments", "moments-derivative", "novikov", "fourier")


def cmd_validate(args):
    obj = _read(args.input, Sinogram, HarmonicSinogram)
    h = decompose_angular(obj, _n_range(args)) if isinstance(obj, Sinogram) else obj
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = sorted(set(checks) - set(_CHECK_NAMES))
    if unknown:
        raise _UsageError(f"unknown checks {', '.join(unknown)}")
    report = RangeReport()
    skipped = {}
    dp = derivative_s(h)
    for c in checks:
        if c == "evenness":
            if not args.minus:
                skipped[c] = "needs --minus (data at -mu)"
                continue
            other = _read(args.minus, Sinogram, HarmonicSinogram)
            if isinstance(other, Sinogram):
                other = decompose_angular(other, (h.n_min, h.n_max))
            report = report + check_evenness(h, other)
        elif c == "moments":
            report = report + check_moments(h, tuple(_floats(args.r_list, "radii")))
        elif c == "moments-derivative":
            report = report + check_moments_derivative(dp)
        elif c == "novikov":
            report = report + check_novikov_harmonic(dp, tuple(_floats(args.novikov_r, "radii")),
                                                     form=args.novikov_form)
        elif c == "fourier":
            mu = h.att.mu if isinstance(h.att, ConstantAttenuation) else None
            if mu is None or mu.imag != 0:
                skipped[c] = "needs a real constant attenuation"
                continue
            report = report + check_fourier_evenness(fourier_in_s(h))
    doc = report.to_dict()
    doc["skipped"] = skipped
    doc["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    _emit(json.dumps(doc, indent=2), args.output)
    failed = sorted({e.check for e in report.failures()})
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_render(args):
    obj = _read(args.input)
    rng = tuple(_floats(args.range, "range")) if args.range else None
    if rng is not None and len(rng) != 2:
        raise _UsageError("--range needs LO,HI")
    field = _render_field(obj, args.pixels)
    if args.output.lower().endswith(".csv"):
        export_csv(args.output, obj)
    else:
        export_pgm(args.output, field, rng)
    return EXIT_OK


def cmd_selftest(args):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        rows = run_suite(name)
        print(f"[{name}]")
        print(format_rows(rows))
        ok &= all(r.ok for r in rows)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bench(args):
    mus = [_complex(m) for m in args.mu.split(";")]
    sigmas = _floats(args.noise, "noise levels")
    n_maxes = [int(v) for v in _floats(args.n_max_list, "harmonic limits")]
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    rows = list(bench(mus, sigmas, n_maxes, methods, seed=args.seed, detectors=args.detectors,
                      radial_nodes=args.radial_nodes))
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=list(rows[0]) if rows else ["method"])
        w.writeheader()
        w.writerows(rows)
    finally:
        if args.output:
            out.close()
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="expradon", description="Exponential Radon transform toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def harmonics(sp, default=8):
        sp.add_argument("--n-max", type=int, default=default, help="symmetric harmonic limit")
        sp.add_argument("--n-range", help="explicit range A,B (overrides --n-max)")

    sp = sub.add_parser("phantom", help="phantom spec JSON -> polar image (.ert)")
    sp.add_argument("spec", nargs="?", help="phantom JSON (default phantom if omitted)")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--radial-nodes", type=int, default=256)
    sp.add_argument("--render", help="also write a PGM of the field")
    sp.add_argument("--pixels", type=int, default=256)
    sp.add_argument("--write-spec", help="write the phantom JSON actually used")
    harmonics(sp)
    sp.set_defaults(func=cmd_phantom)

    sp = sub.add_parser("project", help="forward projection")
    sp.add_argument("input", help="phantom JSON or polar image .ert")
    sp.add_argument("-o", "--output", required=True)
    mode = sp.add_mutually_exclusive_group(required=True)
    mode.add_argument("--direct", action="store_true", help="line-integral projector -> sinogram")
    mode.add_argument("--harmonic", action="store_true", help="harmonic projector -> harmonic sinogram")
    sp.add_argument("--mu", help="constant attenuation RE[,IM]")
    sp.add_argument("--eta", help="radial attenuation table r,re[,im]")
    sp.add_argument("--detectors", type=int, default=512)
    sp.add_argument("--s-max", type=float, default=1.2)
    sp.add_argument("--angles", type=int, default=256)
    harmonics(sp)
    sp.set_defaults(func=cmd_project)

    sp = sub.add_parser("decompose", help="sinogram -> harmonic sinogram")
    sp.add_argument("input")
    sp.add_argument("-o", "--output", required=True)
    harmonics(sp)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("derivative", help="p_n -> dp_n/ds")
    sp.add_argument("input")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_derivative)

    sp = sub.add_parser("invert", help="dp_n/ds -> polar image")
    sp.add_argument("input")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--method", choices=("unified", "interior", "exterior", "cormack"), default="unified")
    sp.add_argument("--radial-nodes", type=int, default=256)
    sp.add_argument("--form", choices=("corrected", "printed"), default="corrected")
    sp.add_argument("--mu", help="override the attenuation stored in the file")
    sp.add_argument("--eta", help="radial attenuation table (cormack only)")
    sp.add_argument("--truth", help="phantom JSON to score against")
    sp.add_argument("--tolerance", type=float, default=1e-2)
    sp.add_argument("--r-min", type=float, default=0.0, help="score only radii >= r-min")
    sp.set_defaults(func=cmd_invert)

    sp = sub.add_parser("validate", help="range checks -> JSON report")
    sp.add_argument("input", help="sinogram or harmonic sinogram (.ert) of p_n")
    sp.add_argument("--checks", default=",".join(_CHECK_NAMES))
    sp.add_argument("--minus", help="same object projected at -mu (for evenness)")
    sp.add_argument("--r-list", default="0", help="radii for the moment check")
    sp.add_argument("--novikov-r", default="0.3,0.6,0.9")
    sp.add_argument("--novikov-form", choices=("corrected", "printed"), default="corrected")
    sp.add_argument("-o", "--output")
    harmonics(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("render", help=".ert -> PGM (or CSV)")
    sp.add_argument("input")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--pixels", type=int, default=256)
    sp.add_argument("--range", help="fixed magnitude range LO,HI")
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("selftest", help="run invariant suites")
    sp.add_argument("--suite", choices=tuple(SUITES) + ("all",), default="all")
    sp.set_defaults(func=cmd_selftest)

    sp = sub.add_parser("bench", help="error sweep -> CSV")
    sp.add_argument("--mu", default="0.3,0.2", help="attenuations separated by ';'")
    sp.add_argument("--noise", default="0,1e-4,1e-3")
    sp.add_argument("--n-max-list", default="4,8")
    sp.add_argument("--methods", default="unified,interior,exterior,cormack")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--detectors", type=int, default=512)
    sp.add_argument("--radial-nodes", type=int, default=256)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_bench)
    return p


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"expradon {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ERTError as exc:
        print(f"expradon {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"expradon {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
