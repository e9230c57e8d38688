"""Command-line driver.

Subcommands: check, height, mixed, lf, supconv, norm, fan {...}, example.
Exit codes: 0 success, 1 a computed number is -infinity (still an answer),
2 input or validation error, 3 a budget was exceeded.
"""

import argparse
import json
import sys
from fractions import Fraction

from . import schema
from .adelic import ModelGreens, Place, boundary_norm, check_nef, check_semipositive, standard_boundary_divisor
from .concave import PAConcave, PARoof, lf_transform, sup_convolution
from .expr import ExprSyntaxError
from .fans import (
    Cone,
    Fan,
    NotComplete,
    ToricDivisorData,
    divisor_from_support,
    is_complete,
    is_projective,
    is_smooth,
    normal_fan,
    smooth_refinement_2d,
    support_from_divisor,
)
from .intersect import IntegrationConfig, mixed_intersection, self_intersection
from .polytopes import DimensionTooHigh
from .registry import EXAMPLES, run_example
from .schema import Report, SpecError


def _config_from_args(args):
    cfg = IntegrationConfig()
    if getattr(args, "tol", None) is not None:
        cfg = cfg.with_tol(args.tol)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "exact_only", False):
        cfg.exact_only = True
    return cfg


def _emit(report, args):
    report.finish()
    print(report.to_json() if args.json else report.to_text())
    return report.exit_code


def _load(path):
    try:
        return schema.load_divisor(path)
    except (OSError, SpecError, ExprSyntaxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(2)


def cmd_check(args):
    _, divisor = _load(args.file)
    report = Report(command=f"check {args.file}")
    cert = check_semipositive(divisor)
    report.add_certificate(cert)
    if cert.passed:
        # A negative nef verdict is a result, not a validation failure.
        verdict = check_nef(divisor)
        report.notes.append(f"nef verdict: {verdict.verdict}"
                            + (f" ({verdict.detail})" if verdict.detail else ""))
        if verdict.witness:
            report.notes.append(f"nef witness point: {verdict.witness}")
    return _emit(report, args)


def cmd_height(args):
    from .concave import UnsupportedCombination

    _, divisor = _load(args.file)
    cfg = _config_from_args(args)
    report = Report(command=f"height {args.file}")
    try:
        hv = self_intersection(divisor, cfg)
    except (ValueError, UnsupportedCombination) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report.heights.append(("height", hv, f"(dim+1)! = {_fact(divisor.dim + 1)} included"))
    return _emit(report, args)


def _fact(n):
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def cmd_mixed(args):
    from .concave import UnsupportedCombination

    divisors = [_load(f)[1] for f in args.files]
    cfg = _config_from_args(args)
    report = Report(command="mixed " + " ".join(args.files))
    try:
        hv = mixed_intersection(divisors, cfg)
    except (ValueError, UnsupportedCombination) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report.heights.append(("intersection number", hv, ""))
    return _emit(report, args)


def _load_json_arg(text):
    try:
        if text.strip().startswith("{"):
            return json.loads(text)
        with open(text, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(2)


def _parse_pa(doc, path="$"):
    if "pieces" not in doc:
        raise SpecError(f"{path}.pieces: required (list of [m..., c])")
    pieces = []
    for i, row in enumerate(doc["pieces"]):
        coords = [schema._rat(x, f"{path}.pieces[{i}]") for x in row]
        pieces.append((tuple(coords[:-1]), coords[-1]))
    return PAConcave(len(pieces[0][0]), pieces)


def cmd_lf(args):
    doc = _load_json_arg(args.spec)
    report = Report(command="lf")
    try:
        f = _parse_pa(doc)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    roof = lf_transform(f)
    report.notes.append(f"pieces: {len(f.pieces)}, dual domain vertices: "
                        + ", ".join(str(tuple(map(str, v))) for v in roof.domain.vertices))
    for p, t in sorted(roof.vertex_values().items()):
        report.notes.append(f"dual value at {tuple(map(str, p))} = {t}")
    if f.is_conical:
        report.notes.append("input is conical; dual is the indicator of its stability set")
    return _emit(report, args)


def cmd_supconv(args):
    d1 = _load_json_arg(args.roof1)
    d2 = _load_json_arg(args.roof2)
    report = Report(command="supconv")

    def to_roof(doc, path):
        if "pieces" in doc:
            return lf_transform(_parse_pa(doc, path))
        if "points" in doc:
            pts = [
                (tuple(schema._rat(x, path) for x in row[:-1]), schema._rat(row[-1], path))
                for row in doc["points"]
            ]
            return PARoof(pts, len(pts[0][0]))
        raise SpecError(f"{path}: expected 'points' (lifted) or 'pieces'")

    try:
        r1, r2 = to_roof(d1, "$1"), to_roof(d2, "$2")
        conv = sup_convolution(r1, r2)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report.notes.append(f"domain vertices: "
                        + ", ".join(str(tuple(map(str, v))) for v in conv.domain.vertices))
    if isinstance(conv, PARoof):
        for p, t in sorted(conv.vertex_values().items()):
            report.notes.append(f"value at {tuple(map(str, p))} = {t}")
    return _emit(report, args)


def cmd_norm(args):
    doc = _load_json_arg(args.divisor)
    report = Report(command="norm")
    try:
        psi = _parse_pa({"pieces": doc["psi"]}, "$.psi")
        overrides = {}
        for label, rows in doc.get("overrides", {}).items():
            place = Place.infinite() if label in ("oo", "infinity") else Place.finite(label)
            overrides[place] = _parse_pa({"pieces": rows}, f"$.overrides.{label}")
        model = ModelGreens(psi.dim, psi, overrides)
    except (SpecError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    bnd = standard_boundary_divisor(psi.dim, doc.get("S", []))
    value = boundary_norm(model, bnd)
    report.notes.append("boundary norm: " + ("+infinity" if value is None else str(value)))
    return _emit(report, args)


def _parse_fan(doc, path="$"):
    if "cones" not in doc or "dim" not in doc:
        raise SpecError(f"{path}: fan needs 'dim' and 'cones'")
    cones = [Cone([tuple(int(x) for x in g) for g in gens]) for gens in doc["cones"]]
    return Fan(int(doc["dim"]), cones)


def cmd_fan(args):
    doc = _load_json_arg(args.spec)
    report = Report(command=f"fan {args.action}")
    try:
        if args.action == "normal-fan":
            poly = schema.parse_body(doc, len(doc["polytope"][0]), "$")
            fan = normal_fan(poly)
            for c in fan.cones:
                report.notes.append(f"cone: {c.generators}")
        else:
            fan = _parse_fan(doc)
            if args.action == "check-smooth":
                report.verdicts.append(("smooth", is_smooth(fan), "exact", ""))
            elif args.action == "check-complete":
                report.verdicts.append(("complete", is_complete(fan), "exact", ""))
            elif args.action == "check-projective":
                try:
                    ok = is_projective(fan)
                except NotComplete:
                    ok = False
                report.verdicts.append(("projective", ok, "exact", ""))
            elif args.action == "refine":
                refined = smooth_refinement_2d(fan)
                for c in refined.cones:
                    report.notes.append(f"cone: {c.generators}")
                report.verdicts.append(("output smooth", is_smooth(refined), "exact", ""))
            elif args.action == "divisor":
                coeffs = {tuple(int(x) for x in k.split(",")): Fraction(v)
                          for k, v in doc.get("coefficients", {}).items()}
                sf = support_from_divisor(fan, ToricDivisorData(coeffs))
                back = divisor_from_support(sf)
                for ray, a in sorted(back.horizontal.items()):
                    report.notes.append(f"a({ray}) = {a}")
            else:
                raise SpecError(f"unknown fan action {args.action}")
    except (SpecError, ValueError, DimensionTooHigh, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return _emit(report, args)


def cmd_example(args):
    cfg = None
    if args.tol is not None:
        cfg = IntegrationConfig().with_tol(args.tol)
    report = Report(command=f"example {args.name}")
    try:
        alpha = Fraction(args.alpha) if args.alpha is not None else None
        result = run_example(args.name, alpha, cfg)
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for label, hv, expected in result.heights:
        report.heights.append((label, hv, f"expected {expected}"))
    report.notes.extend(result.notes)
    return _emit(report, args)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="toricheights",
        description="Heights of semipositive toric adelic divisors via roof functions.",
    )
    ap.add_argument("--json", action="store_true", help="machine-readable output")
    sub = ap.add_subparsers(dest="command", required=True)

    def json_flag(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")

    def common(p):
        p.add_argument("--tol", type=float, default=None, help="relative tolerance")
        p.add_argument("--seed", type=int, default=None, help="seed for the qMC fallback")
        p.add_argument("--exact-only", action="store_true", dest="exact_only")
        json_flag(p)

    p = sub.add_parser("check", help="validate and certify a divisor file")
    p.add_argument("file")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("height", help="arithmetic self-intersection number")
    p.add_argument("file")
    common(p)
    p.set_defaults(func=cmd_height)

    p = sub.add_parser("mixed", help="mixed intersection number of d+1 divisors")
    p.add_argument("files", nargs="+")
    common(p)
    p.set_defaults(func=cmd_mixed)

    p = sub.add_parser("lf", help="Legendre-Fenchel transform of a piecewise-affine function")
    p.add_argument("spec", help="JSON file or inline JSON with 'pieces'")
    json_flag(p)
    p.set_defaults(func=cmd_lf)

    p = sub.add_parser("supconv", help="sup-convolution of two exact roofs")
    p.add_argument("roof1")
    p.add_argument("roof2")
    json_flag(p)
    p.set_defaults(func=cmd_supconv)

    p = sub.add_parser("norm", help="boundary norm of model Green's data")
    p.add_argument("divisor", help="JSON with 'psi' and optional 'overrides'")
    p.add_argument("--boundary", default=None, help="reserved (standard boundary divisor)")
    json_flag(p)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("fan", help="fan utilities")
    p.add_argument(
        "action",
        choices=["refine", "check-smooth", "check-complete", "check-projective", "normal-fan", "divisor"],
    )
    p.add_argument("spec", help="JSON file or inline JSON")
    json_flag(p)
    p.set_defaults(func=cmd_fan)

    p = sub.add_parser("example", help="run a built-in example")
    p.add_argument("name", choices=sorted(EXAMPLES))
    p.add_argument("--alpha", default=None, help="exponent for ex2/ex3/ex4 (rational)")
    p.add_argument("--tol", type=float, default=None)
    json_flag(p)
    p.set_defaults(func=cmd_example)

    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    return code


if __name__ == "__main__":
    sys.exit(main())
