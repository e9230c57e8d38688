"""Divisor spec files (JSON) and machine/human reports.

Rationals travel as strings ("p/q" or integers); floats are rejected in
piecewise-affine data, where exactness is the point.  Parsing normalizes a
document to a canonical dict whose serialization is byte-stable, so
serialize(parse(file)) round-trips for canonically formatted files.
"""

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .adelic import AdelicDivisor, Place
from .concave import AnalyticRoof, PARoof, RadialRoof, indicator
from .families import RoofFamily, make_family
from .polytopes import Ball, Polytope


class SpecError(ValueError):
    """Invalid divisor document; message carries a JSON path."""


def _rat(value, path):
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            f = Fraction(value)
        except ValueError as exc:
            raise SpecError(f"{path}: bad rational {value!r}") from exc
        if "." in value:
            raise SpecError(f"{path}: decimal notation is not allowed here, use p/q")
        return f
    if isinstance(value, float):
        raise SpecError(f"{path}: floats are forbidden in exact data, use 'p/q' strings")
    raise SpecError(f"{path}: expected a rational, got {type(value).__name__}")


def _rat_str(f):
    f = Fraction(f)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def parse_body(doc, dim, path):
    if not isinstance(doc, dict):
        raise SpecError(f"{path}: expected an object")
    if "polytope" in doc:
        verts = doc["polytope"]
        if not verts:
            raise SpecError(f"{path}.polytope: empty vertex list")
        pts = [[_rat(x, f"{path}.polytope[{i}]") for x in v] for i, v in enumerate(verts)]
        for p in pts:
            if len(p) != dim:
                raise SpecError(f"{path}.polytope: vertex of length {len(p)}, dim is {dim}")
        return Polytope.from_points(pts, dim)
    if "ball" in doc:
        b = doc["ball"]
        center = [_rat(x, f"{path}.ball.center") for x in b.get("center", [0] * dim)]
        radius = _rat(b.get("radius", 1), f"{path}.ball.radius")
        return Ball(center, radius)
    raise SpecError(f"{path}: body must have 'polytope' or 'ball'")


def body_to_doc(body):
    if isinstance(body, Polytope):
        return {"polytope": [[_rat_str(x) for x in v] for v in body.vertices]}
    if isinstance(body, Ball):
        return {
            "ball": {
                "center": [_rat_str(x) for x in body.center],
                "radius": _rat_str(body.radius),
            }
        }
    raise SpecError("cannot serialize this body kind")


def parse_roof(doc, dim, domain, path):
    if not isinstance(doc, dict) or "kind" not in doc:
        raise SpecError(f"{path}: roof must be an object with 'kind'")
    kind = doc["kind"]
    if kind == "indicator":
        body = parse_body(doc["body"], dim, f"{path}.body") if "body" in doc else domain
        return indicator(body)
    if kind == "pa":
        pts = doc.get("points")
        if not pts:
            raise SpecError(f"{path}.points: required for piecewise-affine roofs")
        lifted = []
        for i, row in enumerate(pts):
            if len(row) != dim + 1:
                raise SpecError(f"{path}.points[{i}]: expected {dim + 1} entries")
            coords = [_rat(x, f"{path}.points[{i}]") for x in row[:-1]]
            lifted.append((tuple(coords), _rat(row[-1], f"{path}.points[{i}]")))
        return PARoof(lifted, dim)
    if kind == "expression":
        src = doc.get("src")
        if not isinstance(src, str):
            raise SpecError(f"{path}.src: expression source required")
        body = parse_body(doc["body"], dim, f"{path}.body") if "body" in doc else domain
        if doc.get("radial"):
            if not isinstance(body, Ball):
                raise SpecError(f"{path}: radial roofs need a ball domain")
            return RadialRoof(src, body)
        return AnalyticRoof(src, body)
    if kind == "shift":
        base = parse_roof(doc["base"], dim, domain, f"{path}.base")
        return base.add_constant(_rat(doc.get("constant", 0), f"{path}.constant"))
    if kind == "scale":
        base = parse_roof(doc["base"], dim, domain, f"{path}.base")
        return base.scale(_rat(doc.get("factor", 1), f"{path}.factor"))
    raise SpecError(f"{path}.kind: unknown roof kind {kind!r}")


class ExpressionFamily(RoofFamily):
    """Family from an expression template with an {n} placeholder."""

    def __init__(self, template, dim, domain, start, region_rule, bound_rule):
        self.template = template
        self.dim = dim
        self.domain = domain
        self.start = start
        self.region_rule = region_rule
        self.bound_rule = bound_rule
        self.name = "expression family"

    def generator(self, n):
        return AnalyticRoof(self.template.replace("{n}", str(n)), self.domain)

    def vanishing_region(self, n):
        rule = self.region_rule
        if rule is None:
            return None
        if rule == "left_tail_1d":
            lo, hi = self.domain.bounding_box()
            return Polytope.interval(Fraction(1, 2**n), hi[0])
        if rule == "inner_ball":
            return Ball(self.domain.center, self.domain.radius * (1 - Fraction(1, 2**n)))
        raise SpecError(f"unknown vanishing_region rule {rule!r}")

    def tail_bound(self, N):
        if self.bound_rule is None:
            return None
        coeff, ratio = self.bound_rule
        return float(coeff) * float(ratio) ** N


def parse_family(doc, dim, domain, path):
    start = doc.get("start", 1)
    if not isinstance(start, int):
        raise SpecError(f"{path}.start: expected an integer")
    if "builtin" in doc:
        params = {
            k: _rat(v, f"{path}.params.{k}") for k, v in doc.get("params", {}).items()
        }
        try:
            fam = make_family(doc["builtin"], **params)
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"{path}.builtin: {exc}") from exc
        fam.start = start
        return fam
    if "expression" in doc:
        template = doc["expression"]
        if not isinstance(template, str) or "{n}" not in template:
            raise SpecError(f"{path}.expression: template with an {{n}} placeholder required")
        region = doc.get("vanishing_region", {}).get("kind") if "vanishing_region" in doc else None
        bound = None
        if "tail_bound" in doc:
            tb = doc["tail_bound"]
            if tb.get("kind") != "geometric":
                raise SpecError(f"{path}.tail_bound.kind: only 'geometric' is supported")
            bound = (
                _rat(tb.get("coefficient", 1), f"{path}.tail_bound.coefficient"),
                _rat(tb.get("ratio", "1/2"), f"{path}.tail_bound.ratio"),
            )
        return ExpressionFamily(template, dim, domain, start, region, bound)
    raise SpecError(f"{path}: family needs 'builtin' or 'expression'")


def parse_divisor(doc, path="$"):
    """Validate a divisor document; returns (normalized dict, AdelicDivisor)."""
    if not isinstance(doc, dict):
        raise SpecError(f"{path}: expected a JSON object")
    dim = doc.get("dim")
    if not isinstance(dim, int) or dim < 1:
        raise SpecError(f"{path}.dim: positive integer required")
    if "domain" not in doc:
        raise SpecError(f"{path}.domain: required")
    domain = parse_body(doc["domain"], dim, f"{path}.domain")
    S = doc.get("S", [])
    if not isinstance(S, list):
        raise SpecError(f"{path}.S: expected a list of labels")
    explicit = {}
    for i, pdoc in enumerate(doc.get("places", [])):
        ppath = f"{path}.places[{i}]"
        kind = pdoc.get("kind")
        if kind not in ("infinite", "finite"):
            raise SpecError(f"{ppath}.kind: 'infinite' or 'finite' required")
        label = str(pdoc.get("label", "oo" if kind == "infinite" else ""))
        if not label:
            raise SpecError(f"{ppath}.label: required for finite places")
        weight = _rat(pdoc.get("weight", 1), f"{ppath}.weight")
        place = Place(kind, label, weight)
        if place in explicit:
            raise SpecError(f"{ppath}: duplicate place {label}")
        explicit[place] = parse_roof(pdoc.get("roof"), dim, domain, f"{ppath}.roof")
    default = None
    if "default_roof" in doc:
        default = parse_roof(doc["default_roof"], dim, domain, f"{path}.default_roof")
    family = None
    if "family" in doc:
        family = parse_family(doc["family"], dim, domain, f"{path}.family")
    divisor = AdelicDivisor(
        dim=dim,
        domain=domain,
        explicit=explicit,
        default=default,
        S=frozenset(str(s) for s in S),
        family=family,
        name=str(doc.get("name", "")),
    )
    return normalize_document(doc), divisor


def normalize_document(doc):
    """Stable key order and rational formatting for byte-stable round trips."""
    return json.loads(canonical_json(doc))


def canonical_json(doc):
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def load_divisor(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_divisor(doc)


# -- reports -------------------------------------------------------------------


def _height_to_doc(hv):
    if hv.is_minus_inf:
        out = {"kind": "minus_infinity"}
    elif hv.kind == "exact":
        out = {"kind": "exact", "value": _rat_str(hv.value)}
    else:
        out = {"kind": "numeric", "value": float(hv.value), "abs_error": hv.abs_error}
    if hv.flags:
        out["flags"] = sorted(hv.flags)
    if hv.breakdown:
        out["breakdown"] = [
            {"term": label, **_height_to_doc(sub)} for label, sub in hv.breakdown
        ]
    if hv.trace:
        out["trace"] = hv.trace.splitlines()
    return out


def _height_to_text(hv, indent=""):
    lines = [indent + hv.render() + (f"  [{', '.join(sorted(hv.flags))}]" if hv.flags else "")]
    for label, sub in hv.breakdown:
        lines.append(f"{indent}  {label}: {sub.render()}"
                     + (f"  [{', '.join(sorted(sub.flags))}]" if sub.flags else ""))
    if hv.trace:
        lines.append(indent + "  divergence trace:")
        lines.extend(indent + "    " + ln for ln in hv.trace.splitlines())
    return lines


@dataclass
class Report:
    command: str
    verdicts: list = field(default_factory=list)  # (name, passed, mode, detail)
    heights: list = field(default_factory=list)  # (label, HeightValue, note)
    notes: list = field(default_factory=list)
    started: float = field(default_factory=time.perf_counter)
    elapsed: float = None

    def finish(self):
        self.elapsed = time.perf_counter() - self.started
        return self

    def add_certificate(self, cert):
        for it in cert.items:
            self.verdicts.append((it.name, it.passed, it.mode, it.detail))
        for eps, labels in cert.eps_sets.items():
            self.notes.append(f"S({eps}) = {{{', '.join(labels)}}}")

    def to_doc(self):
        doc = {"command": self.command, "elapsed_seconds": round(self.elapsed or 0.0, 6)}
        if self.verdicts:
            doc["verdicts"] = [
                {"name": n, "passed": p, "mode": m, "detail": d}
                for n, p, m, d in self.verdicts
            ]
        if self.heights:
            doc["heights"] = [
                {"label": label, **_height_to_doc(hv), "note": note}
                for label, hv, note in self.heights
            ]
        if self.notes:
            doc["notes"] = list(self.notes)
        return doc

    def to_json(self):
        return canonical_json(self.to_doc())

    def to_text(self):
        lines = [f"command: {self.command}"]
        for name, passed, mode, detail in self.verdicts:
            lines.append(f"[{'pass' if passed else 'FAIL'}] ({mode}) {name}"
                         + (f": {detail}" if detail else ""))
        for label, hv, note in self.heights:
            lines.append(f"{label}:" + (f"  [{note}]" if note else ""))
            lines.extend(_height_to_text(hv, "  "))
        for note in self.notes:
            lines.append(f"note: {note}")
        lines.append(f"elapsed: {self.elapsed:.3f}s" if self.elapsed is not None else "elapsed: n/a")
        return "\n".join(lines)

    @property
    def exit_code(self):
        if any(not p for _, p, _, _ in self.verdicts):
            return 2
        for _, hv, _ in self.heights:
            if hv.is_minus_inf:
                return 1
        for _, hv, _ in self.heights:
            if "budget-exceeded" in hv.flags:
                return 3
        return 0
