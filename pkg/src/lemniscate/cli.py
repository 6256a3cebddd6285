"""Command-line interface: ``lemniscate <subcommand> [flags]``.

Exit codes are 0 when everything passes, 1 when a verification fails, 2 for
invalid input and 3 for algebra or internal errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import __version__
from .braids import (
    LemniscateSpec,
    braid_permutation,
    braid_word,
    closure_curve,
    crossing_signs,
    prime_power,
    reduced_tangle,
    spiral_predictions,
    tangle_notation,
)
from .cyclotomic import integerize
from .errors import AlgebraError, LemniscateError, MultiComponent, VerificationError
from .fields import (
    PRESETS,
    HopfionSpec,
    brauner_polynomial,
    build_field,
    hopfion_field,
    hopfion_grid,
    milnor_polynomial,
    preset_field,
    preset_hopfion,
    preset_spec,
    stereographic_substitute,
)
from .fixtures import FIG8_FAMILY, THREE_LOBE_FAMILY, knot_name
from .knot_polynomials import (
    alexander_from_braid,
    genus_degree_check,
    knot_determinant,
    murasugi_mod_check,
    theorem2_alexander,
)
from .verify import (
    certify_spec,
    fibration_scan,
    hopf_charge,
    lambda_threshold_search,
    verify_milnor_sphere,
)

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_ALGEBRA = 0, 1, 2, 3


class UsageError(LemniscateError, ValueError):
    """Flag combination that cannot be dispatched."""


def rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc


def int_pair(text: str) -> tuple[int, int]:
    try:
        p, q = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected p,q: {text!r}") from exc
    return p, q


# ---------------------------------------------------------------------------
# output


def _frac(x) -> str | int:
    x = Fraction(x)
    return int(x) if x.denominator == 1 else str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return _frac(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _emit(args, payload: dict, rows: list[list] | None = None, header: list[str] | None = None, text: str | None = None):
    fmt = args.format
    if fmt == "json":
        body = json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if rows is None:
            w.writerow(["key", "value"])
            for k in sorted(payload):
                w.writerow([k, json.dumps(_jsonable(payload[k]), sort_keys=True)])
        else:
            if header:
                w.writerow(header)
            w.writerows(rows)
        body = buf.getvalue()
    else:
        body = (text if text is not None else _as_text(payload)) + "\n"
    _write(args.out, body)


def _write(path: str, body: str):
    if path == "-":
        sys.stdout.write(body)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(body)


def _as_text(payload: dict, indent: str = "") -> str:
    lines = []
    for k in sorted(payload):
        v = payload[k]
        if isinstance(v, dict):
            lines.append(f"{indent}{k}:")
            lines.append(_as_text(v, indent + "  "))
        else:
            lines.append(f"{indent}{k}: {json.dumps(_jsonable(v), sort_keys=True)}")
    return "\n".join(lines)


def _curve_rows(points: np.ndarray) -> list[list]:
    return [[i] + [float(x) for x in p] for i, p in enumerate(points)]


def _write_curves(path: str, curves: Sequence[np.ndarray]):
    """CSV rows ``(component, index, x, y, z[, w])``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    dim = curves[0].shape[1] if curves else 3
    w.writerow(["component", "index", "x", "y", "z", "w"][: dim + 2])
    for c, pts in enumerate(curves):
        for row in _curve_rows(pts):
            w.writerow([c] + [f"{x:.12g}" if isinstance(x, float) else x for x in row])
    _write(path, buf.getvalue())


# ---------------------------------------------------------------------------
# argument parsing


def _add_spec_flags(p: argparse.ArgumentParser, preset: bool = True):
    g = p.add_argument_group("lemniscate parameters")
    g.add_argument("--s", type=int, help="number of strands")
    g.add_argument("--r", type=int, help="repeats of the basic braid")
    g.add_argument("--l", type=int, help="lobes of the Lissajous figure")
    g.add_argument("--a", type=rational, default=Fraction(1), help="X amplitude, rational (default: %(default)s)")
    g.add_argument("--b", type=rational, default=Fraction(1), help="Y amplitude, rational (default: %(default)s)")
    g.add_argument(
        "--lambda", dest="lam", type=rational, default=None,
        help="strand scale; default 1 (1/2 for l = 3)",
    )
    g.add_argument("--n-rot", type=int, default=0, help="clockwise turns of the figure (default: %(default)s)")
    if preset:
        g.add_argument("--preset", choices=PRESETS, help="named field in place of --s/--r/--l")


def _add_output_flags(p: argparse.ArgumentParser, default_format: str = "json"):
    p.add_argument("--out", default="-", help="output path, '-' for stdout (default: %(default)s)")
    p.add_argument("--format", choices=("json", "csv", "text"), default=default_format, help="(default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lemniscate",
        description="Construct and certify polynomial fields with knotted nodal lines.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="exact field f(u, v, conj v) and its spatial form F(x, y, z)")
    _add_spec_flags(p)
    p.add_argument("--spatial", action=argparse.BooleanOptionalAction, default=True, help="include F(x, y, z)")
    _add_output_flags(p)

    p = sub.add_parser("braid", help="braid word, crossing signs and predicted invariants")
    _add_spec_flags(p, preset=False)
    p.add_argument("--curve-out", help="write the closed braid curve as CSV rows (index, x, y, z)")
    _add_output_flags(p)

    p = sub.add_parser("verify", help="numerical certificate for the nodal set and fibration")
    _add_spec_flags(p, preset=False)
    p.add_argument("--steps", type=int, default=4096, help="h samples for tracking")
    p.add_argument("--samples", type=int, default=200_000, help="S^3 samples for the fibration scan")
    p.add_argument("--tube", type=float, default=0.05, help="excluded radius around the nodal set")
    p.add_argument("--tolerance", type=float, default=1e-4, help="fibration margin")
    p.add_argument("--seed", type=int, default=0, help="quasi-random seed")
    p.add_argument("--no-fibration", action="store_true", help="skip the fibration scan")
    p.add_argument("--search-lambda", action="store_true", help="also estimate the largest certified lambda")
    p.add_argument("--curve-out", help="write the nodal curve on S^3 as CSV rows (index, x, y, z, w)")
    _add_output_flags(p)

    p = sub.add_parser("invariants", help="Alexander polynomial and consistency checks")
    _add_spec_flags(p, preset=False)
    _add_output_flags(p)

    p = sub.add_parser("hopfion", help="rational-map hopfion: charge from preimage linking")
    _add_spec_flags(p)
    p.add_argument("--N", type=int, default=1, help="power of v in the numerator")
    p.add_argument("--m", type=int, default=1, help="power of f in the denominator")
    p.add_argument("--grid", type=int, default=96, help="points per axis for seeding and export")
    p.add_argument("--half-width", type=float, default=6.0, help="half width of the box")
    p.add_argument("--grid-out", help="write (x, y, z, phi1, phi2, phi3) rows as CSV")
    _add_output_flags(p)

    p = sub.add_parser("milnor", help="real polynomial with a weakly isolated singularity")
    _add_spec_flags(p, preset=False)
    p.add_argument("--brauner", type=int_pair, help="use u^p - v^q instead, given as p,q")
    p.add_argument("--radii", type=float_list, default=[0.1, 0.05, 0.01], help="sphere radii")
    p.add_argument("--steps", type=int, default=2048, help="h samples per sphere")
    p.add_argument("--polynomial", action=argparse.BooleanOptionalAction, default=True, help="include the polynomial")
    _add_output_flags(p)
    return parser


# ---------------------------------------------------------------------------
# commands


def _spec(args) -> LemniscateSpec:
    if getattr(args, "preset", None):
        spec = preset_spec(args.preset, args.r or 2)
        if spec is None:
            raise UsageError(f"preset {args.preset} has no lemniscate parameters")
        return spec
    missing = [k for k in ("s", "r", "l") if getattr(args, k) is None]
    if missing:
        raise UsageError("missing " + ", ".join("--" + k for k in missing))
    return LemniscateSpec(args.s, args.r, args.l, args.a, args.b, args.lam, args.n_rot)


def cmd_generate(args) -> int:
    if args.preset:
        f = preset_field(args.preset, args.r or 2)
        spec = preset_spec(args.preset, args.r or 2)
        source = {"preset": args.preset}
    else:
        spec = _spec(args)
        f = build_field(spec)
        source = {"spec": spec.to_dict()}
    fi, clearing = integerize(f)
    payload = {
        **source,
        "field": fi.to_records(),
        "clearing": clearing,
        "pretty": fi.pretty(),
        "degree": {"u": fi.degree_u, "v": fi.degree_v, "total": fi.total_degree},
    }
    if spec is not None:
        payload["name"] = knot_name(spec.s, spec.r, spec.l)
    if args.spatial:
        payload["spatial"] = stereographic_substitute(fi).to_dict()
    rows = [[r["eu"], r["ev"], r["evb"], r["re"], r["im"]] for r in fi.to_records()]
    _emit(args, payload, rows, ["eu", "ev", "evb", "re", "im"], text=fi.pretty())
    return EXIT_OK


def cmd_braid(args) -> int:
    spec = _spec(args)
    word = braid_word(spec)
    perm, cycles = braid_permutation(word)
    eps = crossing_signs(spec)
    payload = {
        "spec": spec.to_dict(),
        "word": str(word),
        "signed": word.to_signed(),
        "epsilon": list(eps.signs),
        "components": cycles,
        "permutation": list(perm),
        "predictions": spiral_predictions(spec).to_dict(),
        "name": knot_name(spec.s, spec.r, spec.l),
    }
    if spec.r == 2:
        notation = tangle_notation(eps, 2)
        sign, reduced = reduced_tangle(notation)
        payload["tangle"] = {"notation": notation, "reduced": reduced, "sign": sign}
    if args.curve_out:
        _write_curves(args.curve_out, [closure_curve(spec)])
    _emit(args, payload, text=f"{word}")
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = _spec(args)
    payload: dict = {"spec": spec.to_dict(), "lambda": spec.lam, "settings": {
        "steps": args.steps, "samples": args.samples, "tube": args.tube,
        "tolerance": args.tolerance, "seed": args.seed,
    }}
    passed = True
    try:
        cert = certify_spec(spec, steps=args.steps)
        payload.update(cert.to_dict())
        payload["lambda"] = spec.lam
        payload["curveResidual"] = max(c.residual for c in cert.curves)
        passed = cert.passed and cert.components == spec.components
        if args.curve_out:
            _write_curves(args.curve_out, [c.points4 for c in cert.curves])
    except VerificationError as exc:
        cert = None
        passed = False
        payload.update({"word": None, "components": None, "error": f"{type(exc).__name__}: {exc}"})
    payload["expected_word"] = braid_word(spec).to_signed()
    if cert is not None and not args.no_fibration:
        nodal = np.vstack([c.points4 for c in cert.curves])
        rep = fibration_scan(
            build_field(spec.with_(lam=1)), spec.lam, args.samples, args.tube, nodal, args.seed, args.tolerance
        )
        payload["fibration"] = rep.to_dict()
        payload["minGradNorm"] = rep.min_grad_norm
        passed = passed and rep.margin_positive
    if args.search_lambda:
        payload["lambdaSearch"] = lambda_threshold_search(spec, steps=min(args.steps, 1024)).to_dict()
    payload["passed"] = passed
    _emit(args, payload)
    return EXIT_OK if passed else EXIT_FAILED


def cmd_invariants(args) -> int:
    spec = _spec(args)
    word = braid_word(spec)
    payload: dict = {
        "spec": spec.to_dict(),
        "components": spec.components,
        "predictions": spiral_predictions(spec).to_dict(),
        "name": knot_name(spec.s, spec.r, spec.l),
    }
    try:
        delta = alexander_from_braid(word)
    except MultiComponent as exc:
        payload["alexander"] = None
        payload["notice"] = f"MultiComponent: {exc}; Alexander polynomial is computed for knots only"
    else:
        payload["alexander"] = {"text": str(delta), **delta.to_dict()}
        payload["determinant"] = knot_determinant(delta)
        payload["genus"] = genus_degree_check(delta, spec.s, spec.r).to_dict()
        if spec.r > 1 and prime_power(spec.r) is not None:
            payload["murasugi"] = murasugi_mod_check(delta, spec.s, spec.r)
        if spec.r == 2 and spec.l == 2:
            n = (spec.s - 1) // 2
            closed = theorem2_alexander(n)
            payload["closedForm"] = {
                "n": n,
                "text": str(closed),
                "equalUpToUnit": delta == closed or delta == -closed,
            }
    fixture = None
    if spec.r == 2 and spec.l == 2:
        fixture = FIG8_FAMILY.get(spec.s)
    elif spec.r == 2 and spec.l == 3:
        fixture = THREE_LOBE_FAMILY.get(spec.s)
    if fixture is not None:
        payload["fixture"] = fixture
    _emit(args, payload, text=payload["alexander"]["text"] if payload.get("alexander") else payload.get("notice"))
    return EXIT_OK


def cmd_hopfion(args) -> int:
    if args.preset:
        hs = preset_hopfion(args.preset, args.r or 2, args.N, args.m)
        source = {"preset": args.preset}
    else:
        spec = _spec(args)
        hs = HopfionSpec(build_field(spec), args.N, args.m)
        source = {"spec": spec.to_dict()}
    field_ = hopfion_field(hs)
    payload: dict = {**source, "N": hs.N, "m": hs.m, "numeratorConstant": hs.numerator_constant,
                     "grid": args.grid, "halfWidth": args.half_width, "predicted": hs.predicted_charge}
    if args.grid_out:
        rows = hopfion_grid(field_, args.grid, args.half_width)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "z", "phi1", "phi2", "phi3"])
        w.writerows([[f"{v:.10g}" for v in row] for row in rows])
        _write(args.grid_out, buf.getvalue())
    try:
        res = hopf_charge(field_, args.grid, args.half_width)
    except VerificationError as exc:
        payload.update({"charge": None, "passed": False, "error": f"{type(exc).__name__}: {exc}"})
        _emit(args, payload)
        return EXIT_FAILED
    payload.update(res.to_dict())
    payload["passed"] = res.charge == hs.predicted_charge
    _emit(args, payload)
    return EXIT_OK if payload["passed"] else EXIT_FAILED


def cmd_milnor(args) -> int:
    if args.brauner:
        p, q = args.brauner
        F = brauner_polynomial(p, q)
        expected = None
        source = {"brauner": [p, q]}
    else:
        spec = _spec(args)
        F = milnor_polynomial(build_field(spec.with_(lam=1)), spec)
        expected = braid_word(spec)
        source = {"spec": spec.to_dict()}
    certs = []
    passed = True
    for rho in args.radii:
        try:
            c = verify_milnor_sphere(F, rho, args.steps, expected)
            certs.append(c.to_dict())
            passed = passed and c.passed
        except VerificationError as exc:
            certs.append({"rho": rho, "passed": False, "error": f"{type(exc).__name__}: {exc}"})
            passed = False
    words = {tuple(c["word"]) for c in certs if "word" in c}
    payload = {**source, "certificates": certs, "sameWord": len(words) == 1, "passed": passed and len(words) == 1}
    if args.polynomial:
        payload["polynomial"] = F.to_dict()
    _emit(args, payload)
    return EXIT_OK if payload["passed"] else EXIT_FAILED


COMMANDS = {
    "generate": cmd_generate,
    "braid": cmd_braid,
    "verify": cmd_verify,
    "invariants": cmd_invariants,
    "hopfion": cmd_hopfion,
    "milnor": cmd_milnor,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, UsageError) as exc:
        print(f"lemniscate {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (AlgebraError, LemniscateError) as exc:
        print(f"lemniscate {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ALGEBRA


if __name__ == "__main__":
    sys.exit(main())
