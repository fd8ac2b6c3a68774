"""Command-line front end: root systems, enclosures, facades and the axiom suites."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

from . import exact
from .affine_apartment import (
    SPEC_ALIASES,
    ApartmentModel,
    ConvexIntersection,
    GhostWall,
    RefusedEnclosure,
    UnsupportedShape,
    enclosure,
    make_model,
    parse_shape,
    preorder_leq,
)
from .bordered_apartment import FLAVORS, BorderedApartment, NotInStar
from .group_instances import INSTANCES
from .kac_core import (
    ALIASES,
    CapTooLargeForMemory,
    KacMoodyMatrix,
    NotGCM,
    NonSquare,
    imaginary_roots,
    matrix_from_alias_or_json,
    real_roots,
    validate_and_classify,
    weyl_elements,
    weyl_group_order,
)
from .parahoric_hovel import (
    BudgetExceeded,
    ParahoricFamily,
    build_tree,
    certify_membership,
    check_MAO,
    check_parahoric_axioms,
    iwasawa_and_BBI_checks,
    residue_roots,
    tree_cross_check,
)
from .valuated_datum import check_nu_homomorphism, check_nu_reflections, check_RD_axioms, check_valuation
from .vectorial import facet_from_dict, facet_star, locate_in_tits_cone, make_facet

USAGE_ERRORS = (ValueError, KeyError, NotGCM, NonSquare, json.JSONDecodeError)


class UsageError(Exception):
    pass


@dataclass
class CommandConfig:
    subcommand: str
    matrix: Optional[str] = None
    model: Optional[str] = None
    cap: Optional[int] = None
    length: Optional[int] = None
    depth: Optional[int] = None
    samples: Optional[int] = None
    seed: int = 0
    format: str = "text"
    threads: int = 1
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def parse_model(text: str, cap: Optional[int]) -> ApartmentModel:
    """'a2,Z' | 'a1,R' | 'b2,1/2Z' | '[[2,-1],[-1,2]],Z'; the value group defaults to Z."""
    head, sep, tail = text.rpartition(",")
    group = tail.strip() if sep and (tail.strip().endswith("Z") or tail.strip() == "R") else None
    matrix_text = head if group is not None else text
    m = matrix_from_alias_or_json(matrix_text.strip())
    if group is None or group == "Z":
        step: Optional[Fraction] = Fraction(1)
    elif group == "R":
        step = None
    else:
        step = exact.frac(group[:-1])
    return make_model(m, step, cap if cap is not None else 4)


def _facet_arg(m: KacMoodyMatrix, text: str):
    """'+:J=0,1:w=1,0' style or JSON {"sign": "+", "J": [...], "word": [...]}."""
    text = text.strip()
    if text.startswith("{"):
        return facet_from_dict(m, json.loads(text))
    parts = text.split(":")
    sign = -1 if parts[0] == "-" else 1
    J, word = [], []
    for part in parts[1:]:
        key, _, vals = part.partition("=")
        nums = [int(v) for v in vals.split(",") if v != ""]
        if key == "J":
            J = nums
        elif key == "w":
            word = nums
        else:
            raise UsageError(f"unknown facet field {key!r}")
    return make_facet(m, sign, word, J)


def _emit(cfg: CommandConfig, records: List[dict], text_lines: List[str]) -> None:
    if cfg.format == "json":
        print(json.dumps({"config": json.loads(cfg.to_json())}, sort_keys=True))
        for r in records:
            print(json.dumps(r, sort_keys=True, default=str))
    else:
        print("# config " + cfg.to_json())
        for line in text_lines:
            print(line)


def _interval(ci: ConvexIntersection) -> str:
    lo, hi = None, None
    for h in ci.closed:
        a = h.form[0]
        bound = -h.level / a
        if a > 0:
            lo = bound if lo is None else max(lo, bound)
        else:
            hi = bound if hi is None else min(hi, bound)
    left = "-inf" if lo is None else exact.fmt(lo)
    right = "+inf" if hi is None else exact.fmt(hi)
    return f"[{left},{right}]"


def _reports(cfg: CommandConfig, reports) -> int:
    records = [r.to_dict() for r in reports]
    lines = [f"{r.axiom:>14} {r.instance:<14} {r.status:<8} samples={r.samples}" + (f"  ({r.reason})" if r.reason else "")
             + (f"  witness={json.dumps(r.failures[0], sort_keys=True)}" if r.failures else "") for r in reports]
    _emit(cfg, records, lines)
    return 1 if any(r.status == "fail" for r in reports) else 0


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(cfg, args) -> int:
    m = matrix_from_alias_or_json(args.matrix)
    blocks = validate_and_classify(m)
    parts = []
    for b in blocks:
        label = f" ({b.label}-shape block)" if b.label else ""
        parts.append(f"{b.kind}{label}")
    records = [{"indices": list(b.indices), "kind": b.kind, "label": b.label} for b in blocks]
    _emit(cfg, records, [" + ".join(parts)])
    return 0


def cmd_roots(cfg, args) -> int:
    m = matrix_from_alias_or_json(args.matrix)
    roots = []
    if args.kind in ("real", "all"):
        roots += real_roots(m, args.cap)
    if args.kind in ("imaginary", "all"):
        roots += imaginary_roots(m, args.cap)
    records = [r.to_dict() for r in roots]
    lines = [f"{r.tag:<9} {list(r.coords)}" for r in roots] + [f"# {len(roots)} roots"]
    _emit(cfg, records, lines)
    return 0


def cmd_weyl(cfg, args) -> int:
    m = matrix_from_alias_or_json(args.matrix)
    els = weyl_elements(m, args.length)
    order = weyl_group_order(m)
    records = [{"word": list(w.word)} for w in els] + [{"count": len(els), "order": order}]
    lines = [" ".join(map(str, w.word)) or "e" for w in els]
    lines.append(f"# {len(els)} elements of length <= {args.length}; group order {order if order is not None else 'infinite'}")
    _emit(cfg, records, lines)
    return 0


def cmd_facet(cfg, args) -> int:
    model = parse_model(args.model, args.cap)
    if args.point:
        loc = locate_in_tits_cone(model.real, exact.vec(args.point.split(",")))
        rec = {"verdict": loc.verdict, "facet": loc.facet.to_dict() if loc.facet else None, "steps": loc.steps}
        _emit(cfg, [rec], [json.dumps(rec, sort_keys=True)])
        return 0
    facet = _facet_arg(model.matrix, args.facet)
    star = facet_star(model.matrix, facet, args.length or 12)
    _emit(cfg, [f.to_dict() for f in star], [json.dumps(f.to_dict(), sort_keys=True) for f in star])
    return 0


def cmd_enclose(cfg, args) -> int:
    model = parse_model(args.model, args.cap)
    shape = parse_shape(args.shape, model.dim)
    ci = enclosure(model, args.spec, shape)
    lines = []
    if model.dim == 1:
        lines.append(_interval(ci))
    for h, tail in [(h, "") for h in ci.closed] + [(h, " (open)") for h in ci.open]:
        label = f"root {list(h.root)}" if h.root is not None else f"form {[exact.fmt(c) for c in h.form]}"
        lines.append(f"{label} level {exact.fmt(h.level)}{tail}")
    _emit(cfg, [ci.to_dict()], lines)
    return 0


def cmd_preorder(cfg, args) -> int:
    model = parse_model(args.model, args.cap)
    verdict = preorder_leq(model, exact.vec(args.x.split(",")), exact.vec(args.y.split(",")))
    _emit(cfg, [{"leq": verdict}], [verdict])
    return 0


def cmd_facade(cfg, args) -> int:
    model = parse_model(args.model, args.cap)
    bordered = BorderedApartment(args.flavor, model)
    fac = bordered.facade(_facet_arg(model.matrix, args.direction))
    rec = {
        "direction": fac.direction.to_dict(),
        "mode": fac.mode,
        "dim": fac.dim,
        "spherical": fac.spherical,
        "roots": [list(r.coords) for r in fac.real_roots()],
    }
    _emit(cfg, [rec], [json.dumps(rec, sort_keys=True)])
    return 0


def cmd_project(cfg, args) -> int:
    model = parse_model(args.model, args.cap)
    bordered = BorderedApartment(args.flavor, model)
    source = _facet_arg(model.matrix, args.source) if args.source else None
    pt = bordered.point(exact.vec(args.point.split(",")), source)
    out = bordered.project(pt, _facet_arg(model.matrix, args.target))
    _emit(cfg, [out.to_dict()], [out.to_json()])
    return 0


def _instance(args):
    if args.instance not in INSTANCES:
        raise UsageError(f"unknown instance {args.instance!r}; choose from {sorted(INSTANCES)}")
    return INSTANCES[args.instance](args.p)


def cmd_check_valuation(cfg, args) -> int:
    inst = _instance(args)
    reps = check_valuation(inst, args.samples, args.seed)
    reps += [check_nu_reflections(inst, 50, args.seed), check_nu_homomorphism(inst, 50, args.seed)]
    return _reports(cfg, reps)


def cmd_check_rd(cfg, args) -> int:
    return _reports(cfg, check_RD_axioms(_instance(args), args.samples, args.seed))


def _family(args) -> ParahoricFamily:
    inst = _instance(args)
    if not getattr(inst, "classical", False):
        raise UsageError("parahoric families need a classical instance (sl2 or sl3)")
    return ParahoricFamily(inst)


def cmd_check_parahoric(cfg, args) -> int:
    fam = _family(args)
    reps = check_parahoric_axioms(fam, args.points, args.seed)
    reps += iwasawa_and_BBI_checks(fam, args.samples, args.seed)
    code = _reports(cfg, reps)
    if args.certify:
        zero = (Fraction(0),) * fam.model.dim
        half = (Fraction(1, 2),) * fam.model.dim
        cert = certify_membership(fam, [zero, half], seed=args.seed)
        print(json.dumps({"certification": cert.to_dict()}, sort_keys=True))
        code = code or (0 if cert.ok else 1)
    return code


def cmd_check_mao(cfg, args) -> int:
    return _reports(cfg, [check_MAO(_family(args), args.trials, args.seed)])


def cmd_tree(cfg, args) -> int:
    fam = ParahoricFamily(INSTANCES["sl2"](args.p))
    tree = build_tree(fam, args.depth, cfg.threads)
    bad = tree_cross_check(tree, seed=args.seed)
    rec = {
        "p": args.p,
        "depth": args.depth,
        "spheres": tree.spheres,
        "regular": tree.regular(),
        "apartment_geodesic": tree.apartment_is_geodesic(),
        "cycles": tree.cycles,
        "cross_check_disagreements": len(bad),
    }
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(tree.to_dot())
    _emit(cfg, [rec], [f"spheres {' '.join(map(str, tree.spheres))}", f"regular {rec['regular']}",
                       f"apartment geodesic {rec['apartment_geodesic']}", f"cross-check disagreements {len(bad)}"])
    return 0 if rec["regular"] and rec["apartment_geodesic"] and not bad and not tree.cycles else 1


def cmd_residue(cfg, args) -> int:
    model = parse_model(args.model, args.cap)
    res = residue_roots(model, exact.vec(args.point.split(",")))
    rec = res.to_dict()
    _emit(cfg, [rec], [f"roots {[list(r) for r in res.roots]}", f"special {res.special}"])
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hovelkit", description="Kac-Moody apartments, enclosures and parahoric families")
    ap.add_argument("--format", choices=("text", "json"), default="text")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=fn)
        p.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS)
        p.add_argument("--seed", type=int, default=0)
        return p

    p = add("classify", cmd_classify, "finite / affine / indefinite per block")
    p.add_argument("--matrix", required=True, help=f"alias {sorted(ALIASES)} or JSON rows")
    p = add("roots", cmd_roots, "real and imaginary roots up to a height cap")
    p.add_argument("--matrix", required=True)
    p.add_argument("--cap", type=int, default=4)
    p.add_argument("--kind", choices=("real", "imaginary", "all"), default="all")
    p = add("weyl", cmd_weyl, "Weyl group elements in ShortLex order")
    p.add_argument("--matrix", required=True)
    p.add_argument("--length", type=int, default=4)
    p = add("facet", cmd_facet, "star of a vectorial facet, or locate a point in the Tits cone")
    p.add_argument("--model", required=True)
    p.add_argument("--cap", type=int)
    p.add_argument("--facet", default="+:J=")
    p.add_argument("--point")
    p.add_argument("--length", type=int)
    p = add("enclose", cmd_enclose, "enclosure certificate of a shape")
    p.add_argument("--model", required=True, help="e.g. a1,Z or a2,R")
    p.add_argument("--cap", type=int)
    p.add_argument("--spec", choices=sorted(SPEC_ALIASES), default="cl_phi")
    p.add_argument("--shape", required=True, help="point:0.3 | segment:0,0;1,1 | germ:x;y | set:a;b | ray:x;d")
    p = add("preorder", cmd_preorder, "decide x <= y")
    p.add_argument("--model", required=True)
    p.add_argument("--cap", type=int)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p = add("facade", cmd_facade, "describe the facade in a direction")
    p.add_argument("--model", required=True)
    p.add_argument("--cap", type=int)
    p.add_argument("--flavor", choices=FLAVORS, default="essential")
    p.add_argument("--direction", required=True, help="e.g. '+:J=0' or JSON")
    p = add("project", cmd_project, "project a facade point to a facade in its star")
    p.add_argument("--model", required=True)
    p.add_argument("--cap", type=int)
    p.add_argument("--flavor", choices=FLAVORS, default="essential")
    p.add_argument("--point", required=True)
    p.add_argument("--source")
    p.add_argument("--target", required=True)
    for name, fn, what in (("check-valuation", cmd_check_valuation, "sampled valuation axioms (V0)-(V4)"),
                           ("check-rd", cmd_check_rd, "sampled root datum axioms and Birkhoff uniqueness")):
        p = add(name, fn, what)
        p.add_argument("--instance", default="sl2")
        p.add_argument("--p", type=int, default=2)
        p.add_argument("--samples", type=int, default=500)
    p = add("check-parahoric", cmd_check_parahoric, "(P1)-(P10), Iwasawa and BBI checks")
    p.add_argument("--instance", default="sl2")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--certify", action="store_true")
    p = add("check-mao", cmd_check_mao, "segment equality in two apartments")
    p.add_argument("--instance", default="sl2")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--trials", type=int, default=100)
    p = add("tree", cmd_tree, "Bruhat-Tits tree of SL_2")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--dot")
    p = add("residue", cmd_residue, "residue root system at a point")
    p.add_argument("--model", required=True)
    p.add_argument("--cap", type=int)
    p.add_argument("--point", required=True)
    return ap


def _config(args) -> CommandConfig:
    known = {"subcommand", "matrix", "model", "cap", "length", "depth", "samples", "seed", "format", "func"}
    extra = {k: v for k, v in sorted(vars(args).items()) if k not in known}
    try:
        threads = max(1, int(os.environ.get("HOVELKIT_THREADS", "1")))
    except ValueError:
        threads = 1
    return CommandConfig(
        subcommand=args.subcommand, matrix=getattr(args, "matrix", None), model=getattr(args, "model", None),
        cap=getattr(args, "cap", None), length=getattr(args, "length", None), depth=getattr(args, "depth", None),
        samples=getattr(args, "samples", None), seed=args.seed, format=args.format, threads=threads, extra=extra,
    )


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    cfg = _config(args)
    try:
        return args.func(cfg, args)
    except (UsageError, GhostWall, RefusedEnclosure, UnsupportedShape, NotInStar, BudgetExceeded, CapTooLargeForMemory) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except USAGE_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
