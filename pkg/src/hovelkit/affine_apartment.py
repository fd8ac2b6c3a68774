"""Affine apartments: walls, half-apartments, enclosures, shapes and the affine Weyl group.

Points live in a realization V (usually V^q, where coordinates are the values
of the simple roots).  Linear forms are vectors in V*.  A half-space
D(form, level) is {x : form(x) + level >= 0}.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import exact
from .kac_core import (
    KacMoodyMatrix,
    Root,
    WeylElement,
    imaginary_roots,
    is_spherical,
    pairing,
    real_coroot,
    real_roots,
    simple_reflection,
    sort_key,
)
from .vectorial import (
    Realization,
    VectorialFacet,
    build_realization,
    facet_from_dict,
    facet_span_basis,
    in_tits_cone,
    interior_point,
    locate_in_tits_cone,
    make_facet,
    normal_form,
)

Vec = Tuple[Fraction, ...]
Level = Union[Fraction, float]  # float only for +inf / -inf
INF = math.inf
NEG_INF = -math.inf


class GhostWall(ValueError):
    pass


class ChainViolation(AssertionError):
    pass


class RefusedEnclosure(ValueError):
    pass


class UnsupportedShape(ValueError):
    pass


# ---------------------------------------------------------------------------
# model


@dataclass(frozen=True)
class ApartmentModel:
    """An affine apartment over a realization.

    ``value_step`` generates the discrete value group step*Z; None means the
    full real line.  ``lambda_steps`` overrides the value set of individual
    roots (keyed by positive root coordinates, so the set attached to -alpha
    is automatically the negative of the one attached to alpha).
    """

    real: Realization
    value_step: Optional[Fraction] = Fraction(1)
    height_cap: int = 4
    lambda_steps: Tuple[Tuple[Tuple[int, ...], Optional[Fraction]], ...] = ()

    @property
    def matrix(self) -> KacMoodyMatrix:
        return self.real.matrix

    @property
    def dim(self) -> int:
        return self.real.dim

    def step_for(self, root: Sequence[int]) -> Optional[Fraction]:
        key = tuple(abs(c) for c in root)
        for k, s in self.lambda_steps:
            if k == key:
                return s
        return self.value_step

    def in_lambda(self, root: Sequence[int], level: Fraction) -> bool:
        step = self.step_for(root)
        if step is None:
            return True
        return (Fraction(level) / step).denominator == 1

    def real_roots(self) -> List[Root]:
        return _real_roots(self.matrix, self.height_cap)

    def imaginary_roots(self) -> List[Root]:
        return _imaginary_roots(self.matrix, self.height_cap)

    def coroot(self, root: Sequence[int]) -> Vec:
        return self.real.coroot(_coroot(self.matrix, tuple(root)))

    def form(self, root: Sequence[int]) -> Vec:
        return self.real.form(root)

    def evaluate(self, root: Sequence[int], x: Sequence) -> Fraction:
        return self.real.evaluate(root, x)

    def describe(self) -> str:
        lam = "R" if self.value_step is None else ("Z" if self.value_step == 1 else f"{exact.fmt(self.value_step)}Z")
        return f"{self.real.kind}-realization of {[list(r) for r in self.matrix.entries]}, Lambda={lam}, cap={self.height_cap}"


@lru_cache(maxsize=None)
def _real_roots(m: KacMoodyMatrix, cap: int) -> List[Root]:
    return real_roots(m, cap)


@lru_cache(maxsize=None)
def _imaginary_roots(m: KacMoodyMatrix, cap: int) -> List[Root]:
    return imaginary_roots(m, cap)


@lru_cache(maxsize=None)
def _coroot(m: KacMoodyMatrix, root: Tuple[int, ...]) -> Tuple[int, ...]:
    return real_coroot(m, root)


def make_model(matrix: Union[KacMoodyMatrix, Sequence[Sequence[int]]], value_step=Fraction(1), height_cap: int = 4, kind: str = "q") -> ApartmentModel:
    m = matrix if isinstance(matrix, KacMoodyMatrix) else KacMoodyMatrix.from_rows(matrix)
    step = None if value_step is None else Fraction(value_step)
    return ApartmentModel(build_realization(m, kind), step, height_cap)


# ---------------------------------------------------------------------------
# half-spaces and convex intersections


@dataclass(frozen=True)
class HalfSpace:
    form: Vec
    level: Fraction
    root: Optional[Tuple[int, ...]] = None

    def value(self, x: Sequence) -> Fraction:
        return exact.dot(self.form, x) + self.level

    def contains(self, x: Sequence) -> bool:
        return self.value(x) >= 0

    def contains_open(self, x: Sequence) -> bool:
        return self.value(x) > 0

    def key(self):
        rk = (0,) + sort_key(self.root) if self.root is not None else (1, 0, ())
        return (rk, self.form, self.level)

    def to_dict(self) -> dict:
        d = {"form": [exact.fmt(c) for c in self.form], "level": exact.fmt(self.level)}
        if self.root is not None:
            d["root"] = list(self.root)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "HalfSpace":
        root = tuple(d["root"]) if "root" in d else None
        return cls(exact.vec(d["form"]), Fraction(d["level"]), root)


@dataclass(frozen=True)
class ConvexIntersection:
    """Intersection of closed and open half-spaces.

    ``unbounded_roots`` records roots whose level is -infinity (germs at
    infinity satisfy every half-space of those directions); they impose no
    set-level constraint.  ``spec`` and ``cap`` record how an enclosure was
    computed so results at different caps are never silently compared.
    """

    dim: int
    closed: Tuple[HalfSpace, ...] = ()
    open: Tuple[HalfSpace, ...] = ()
    unbounded_roots: Tuple[Tuple[int, ...], ...] = ()
    spec: Optional[str] = None
    cap: Optional[int] = None

    def contains(self, x: Sequence) -> bool:
        return all(h.contains(x) for h in self.closed) and all(h.contains_open(x) for h in self.open)

    def sup(self, form: Sequence) -> Tuple[Level, bool]:
        # maximize form = -minimize -form over the closed hull
        cons = [(tuple(-c for c in h.form), h.level) for h in self.closed + self.open]
        val = exact.lp_min(tuple(-Fraction(c) for c in form), cons)
        if val is None:
            return NEG_INF, False
        if val == NEG_INF:
            return INF, False
        return -val, False

    def is_empty(self) -> bool:
        cons = [(tuple(-c for c in h.form), h.level) for h in self.closed]
        return exact.lp_min((Fraction(0),) * self.dim, cons) is None

    def level_of(self, root: Sequence[int]) -> Optional[Level]:
        for h in self.closed:
            if h.root == tuple(root):
                return h.level
        if tuple(root) in self.unbounded_roots:
            return NEG_INF
        return None

    def normalized(self) -> "ConvexIntersection":
        """Drop redundant half-spaces by exact LP and sort by (root, level)."""
        hs = sorted(set(self.closed), key=HalfSpace.key)
        if self.is_empty():
            return ConvexIntersection(self.dim, (), (), (), self.spec, self.cap)
        keep = list(hs)
        for h in reversed(hs):
            rest = [g for g in keep if g != h]
            cons = [(tuple(-c for c in g.form), g.level) for g in rest]
            low = exact.lp_min(h.form, cons)
            if low is not None and low != NEG_INF and low >= -h.level:
                keep = rest
        return ConvexIntersection(
            self.dim, tuple(sorted(keep, key=HalfSpace.key)), tuple(sorted(set(self.open), key=HalfSpace.key)),
            tuple(sorted(set(self.unbounded_roots))), self.spec, self.cap,
        )

    def contains_set(self, other: "ConvexIntersection") -> bool:
        """other is a subset of self, decided by LP over other."""
        if other.is_empty():
            return True
        cons = [(tuple(-c for c in g.form), g.level) for g in other.closed]
        for h in self.closed:
            low = exact.lp_min(h.form, cons)
            if low == NEG_INF or (low is not None and low < -h.level):
                return False
        return True

    def same_set(self, other: "ConvexIntersection") -> bool:
        return self.contains_set(other) and other.contains_set(self)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "closed": [h.to_dict() for h in self.closed],
            "open": [h.to_dict() for h in self.open],
            "unbounded_roots": [list(r) for r in self.unbounded_roots],
            "spec": self.spec,
            "cap": self.cap,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "ConvexIntersection":
        return cls(
            d["dim"], tuple(HalfSpace.from_dict(h) for h in d["closed"]), tuple(HalfSpace.from_dict(h) for h in d["open"]),
            tuple(tuple(r) for r in d.get("unbounded_roots", [])), d.get("spec"), d.get("cap"),
        )


# ---------------------------------------------------------------------------
# shapes


@dataclass(frozen=True)
class SupValue:
    """sup of a linear form over a shape; ``strict`` means the bound is approached but never met."""

    value: Level
    strict: bool = False


def _sup_points(form: Sequence, points: Sequence[Sequence]) -> SupValue:
    return SupValue(max(exact.dot(form, p) for p in points))


def _cone_generators(real: Realization, facet: VectorialFacet) -> Tuple[List[Vec], List[Vec]]:
    """Rays and lines generating the closure of a vectorial facet."""
    n = real.matrix.size
    rays = []
    for i in range(n):
        if i in facet.J:
            continue
        vals = [int(i == j) for j in range(n)]
        v = real.act(facet.word, real.point_with_values(vals))
        rays.append(tuple(facet.sign * c for c in v))
    return rays, list(real.v0_basis)


def _direction_sign(form: Sequence, rays: Sequence[Vec], lines: Sequence[Vec]) -> Tuple[bool, bool]:
    """(positive somewhere on the closed cone, identically zero on it)."""
    vals = [exact.dot(form, r) for r in rays]
    lvals = [exact.dot(form, l) for l in lines]
    pos = any(v > 0 for v in vals) or any(v != 0 for v in lvals)
    zero = all(v == 0 for v in vals) and all(v == 0 for v in lvals)
    return pos, zero


class Shape:
    kind = "shape"

    def sup(self, model: ApartmentModel, form: Sequence) -> SupValue:
        raise NotImplementedError

    def points(self) -> List[Vec]:
        """Points whose convex hull (with ``rays``) is the closed convex hull of the shape."""
        raise UnsupportedShape(f"{self.kind} has no finite vertex description")

    def rays(self, model: ApartmentModel) -> List[Vec]:
        return []

    def sample(self, model: ApartmentModel) -> List[Vec]:
        """Finitely many points lying in (the closure of) the shape."""
        return self.points()


@dataclass(frozen=True)
class Point(Shape):
    x: Vec
    kind = "point"

    def sup(self, model, form):
        return SupValue(exact.dot(form, self.x))

    def points(self):
        return [self.x]


@dataclass(frozen=True)
class Segment(Shape):
    x: Vec
    y: Vec
    kind = "segment"

    def sup(self, model, form):
        return _sup_points(form, [self.x, self.y])

    def points(self):
        return [self.x, self.y]

    def sample(self, model):
        return [exact.add(self.x, exact.scale(Fraction(k, 4), exact.sub(self.y, self.x))) for k in range(5)]


@dataclass(frozen=True)
class OpenSegmentGerm(Shape):
    """Germ at x of the segment ]x, y]."""

    x: Vec
    y: Vec
    kind = "open_segment_germ"

    def sup(self, model, form):
        d = exact.dot(form, exact.sub(self.y, self.x))
        return SupValue(exact.dot(form, self.x), strict=d > 0)

    def points(self):
        return [self.x]


@dataclass(frozen=True)
class FiniteSet(Shape):
    pts: Tuple[Vec, ...]
    kind = "finite_set"

    def sup(self, model, form):
        return _sup_points(form, self.pts)

    def points(self):
        return list(self.pts)


@dataclass(frozen=True)
class Ray(Shape):
    x: Vec
    direction: Vec
    kind = "ray"

    def sup(self, model, form):
        if exact.dot(form, self.direction) > 0:
            return SupValue(INF)
        return SupValue(exact.dot(form, self.x))

    def points(self):
        return [self.x]

    def rays(self, model):
        return [self.direction]

    def sample(self, model):
        return [exact.add(self.x, exact.scale(k, self.direction)) for k in range(4)]


@dataclass(frozen=True)
class RayGerm(Shape):
    """Germ at infinity of the ray x + R_{>=0} direction."""

    x: Vec
    direction: Vec
    kind = "ray_germ"

    def sup(self, model, form):
        d = exact.dot(form, self.direction)
        if d > 0:
            return SupValue(INF)
        if d < 0:
            return SupValue(NEG_INF)
        return SupValue(exact.dot(form, self.x))


@dataclass(frozen=True)
class LocalFacet(Shape):
    """Germ at x of x + F^v."""

    x: Vec
    facet: VectorialFacet
    kind = "local_facet"

    def sup(self, model, form):
        rays, lines = _cone_generators(model.real, self.facet)
        pos, _ = _direction_sign(form, rays, lines)
        return SupValue(exact.dot(form, self.x), strict=pos)

    def points(self):
        return [self.x]


@dataclass(frozen=True)
class SectorFace(Shape):
    """x + F^v."""

    x: Vec
    facet: VectorialFacet
    kind = "sector_face"

    def sup(self, model, form):
        rays, lines = _cone_generators(model.real, self.facet)
        pos, _ = _direction_sign(form, rays, lines)
        return SupValue(INF) if pos else SupValue(exact.dot(form, self.x))

    def points(self):
        return [self.x]

    def rays(self, model):
        rays, lines = _cone_generators(model.real, self.facet)
        return rays + lines + [tuple(-c for c in l) for l in lines]

    def sample(self, model):
        p = interior_point(model.real, self.facet)
        return [exact.add(self.x, exact.scale(k, p)) for k in range(1, 4)]


@dataclass(frozen=True)
class SectorFaceGerm(Shape):
    """Germ at infinity of x + F^v (the filter of its shortenings)."""

    x: Vec
    facet: VectorialFacet
    kind = "sector_face_germ"

    def sup(self, model, form):
        rays, lines = _cone_generators(model.real, self.facet)
        pos, zero = _direction_sign(form, rays, lines)
        if pos:
            return SupValue(INF)
        if zero:
            return SupValue(exact.dot(form, self.x))
        return SupValue(NEG_INF)


@dataclass(frozen=True)
class Chimney(Shape):
    """cl(F + F^v) for the facet based at ``x`` with direction ``base`` and vectorial direction ``facet``."""

    x: Vec
    base: VectorialFacet
    facet: VectorialFacet
    kind = "chimney"

    def sup(self, model, form):
        rays, lines = _cone_generators(model.real, self.facet)
        pos, _ = _direction_sign(form, rays, lines)
        if pos:
            return SupValue(INF)
        return LocalFacet(self.x, self.base).sup(model, form)


@dataclass(frozen=True)
class ChimneyGerm(Shape):
    x: Vec
    base: VectorialFacet
    facet: VectorialFacet
    kind = "chimney_germ"

    def sup(self, model, form):
        rays, lines = _cone_generators(model.real, self.facet)
        pos, zero = _direction_sign(form, rays, lines)
        if pos:
            return SupValue(INF)
        if zero:
            return LocalFacet(self.x, self.base).sup(model, form)
        return SupValue(NEG_INF)


@dataclass(frozen=True)
class Polyhedron(Shape):
    """A ConvexIntersection used as a shape."""

    ci: ConvexIntersection
    kind = "convex_intersection"

    def sup(self, model, form):
        val, _ = self.ci.sup(form)
        return SupValue(val)


def shape_to_dict(shape: Shape) -> dict:
    d: Dict = {"kind": shape.kind}
    for name in ("x", "y", "direction"):
        if hasattr(shape, name):
            d[name] = [exact.fmt(c) for c in getattr(shape, name)]
    if isinstance(shape, FiniteSet):
        d["points"] = [[exact.fmt(c) for c in p] for p in shape.pts]
    for name in ("facet", "base"):
        if hasattr(shape, name):
            d[name] = getattr(shape, name).to_dict()
    if isinstance(shape, Polyhedron):
        d["ci"] = shape.ci.to_dict()
    return d


def shape_from_dict(model: ApartmentModel, d: dict) -> Shape:

    m = model.matrix
    k = d["kind"]
    v = lambda name: exact.vec(d[name])
    if k == "point":
        return Point(v("x"))
    if k == "segment":
        return Segment(v("x"), v("y"))
    if k == "open_segment_germ":
        return OpenSegmentGerm(v("x"), v("y"))
    if k == "finite_set":
        return FiniteSet(tuple(exact.vec(p) for p in d["points"]))
    if k == "ray":
        return Ray(v("x"), v("direction"))
    if k == "ray_germ":
        return RayGerm(v("x"), v("direction"))
    if k in ("local_facet", "sector_face", "sector_face_germ"):
        cls = {"local_facet": LocalFacet, "sector_face": SectorFace, "sector_face_germ": SectorFaceGerm}[k]
        return cls(v("x"), facet_from_dict(m, d["facet"]))
    if k in ("chimney", "chimney_germ"):
        cls = Chimney if k == "chimney" else ChimneyGerm
        return cls(v("x"), facet_from_dict(m, d["base"]), facet_from_dict(m, d["facet"]))
    if k == "convex_intersection":
        return Polyhedron(ConvexIntersection.from_dict(d["ci"]))
    raise UnsupportedShape(k)


def parse_shape(text: str, dim: int) -> Shape:
    """CLI shape syntax: point:0.3 | point:1/2,0 | segment:0,0;1,1 | set:0,0;1,0;0,1."""
    kind, _, rest = text.partition(":")

    def pt(s: str) -> Vec:
        v = exact.vec(s.split(","))
        if len(v) != dim:
            raise ValueError(f"point {s!r} needs {dim} coordinates")
        return v

    pieces = [p for p in rest.split(";") if p]
    if kind == "point":
        return Point(pt(pieces[0]))
    if kind == "segment":
        return Segment(pt(pieces[0]), pt(pieces[1]))
    if kind == "germ":
        return OpenSegmentGerm(pt(pieces[0]), pt(pieces[1]))
    if kind == "set":
        return FiniteSet(tuple(pt(p) for p in pieces))
    if kind == "ray":
        return Ray(pt(pieces[0]), pt(pieces[1]))
    raise ValueError(f"unknown shape kind {kind!r}")


# ---------------------------------------------------------------------------
# levels and enclosures

FAMILIES = ("phi", "delta", "ti", "sharp")
POLICIES = ("lambda", "real", "ma")


@dataclass(frozen=True)
class EnclosureSpec:
    family: str = "phi"
    policy: str = "lambda"

    def __post_init__(self):
        if self.family not in FAMILIES or self.policy not in POLICIES:
            raise ValueError(f"bad enclosure spec {self.family}/{self.policy}")
        if self.family == "ti" and self.policy != "real":
            raise RefusedEnclosure("totally imaginary family needs real levels (uncountably many directions)")

    @property
    def name(self) -> str:
        return {"phi": "cl_phi", "delta": "cl_delta", "ti": "conv", "sharp": "cl_sharp"}[self.family] + (
            "" if self.policy == "lambda" else f"_{self.policy}"
        )


SPEC_ALIASES = {
    "cl_phi": EnclosureSpec("phi", "lambda"),
    "cl_phi_r": EnclosureSpec("phi", "real"),
    "cl_delta": EnclosureSpec("delta", "lambda"),
    "cl_delta_ma": EnclosureSpec("delta", "ma"),
    "cl_delta_r": EnclosureSpec("delta", "real"),
    "cl_sharp": EnclosureSpec("sharp", "lambda"),
    "cl_sharp_r": EnclosureSpec("sharp", "real"),
    "conv": EnclosureSpec("ti", "real"),
}


def least_level(step: Optional[Fraction], sup: SupValue) -> Level:
    """Least element of step*Z (or of R when step is None) that is >= sup (> when strict)."""
    v = sup.value
    if v == INF or v == NEG_INF:
        return v
    if step is None:
        return v
    k = math.ceil(Fraction(v) / step)
    if sup.strict and k * step == v:
        k += 1
    return k * step


def _policy_step(model: ApartmentModel, root: Root, policy: str) -> Optional[Fraction]:
    if policy == "real":
        return None
    if policy == "ma" and root.tag == "imaginary":
        return None
    return model.step_for(root.coords)


def level_for(model: ApartmentModel, shape: Shape, root: Union[Root, Sequence[int]], policy: str = "lambda") -> Level:
    """Least admissible level lambda with the shape inside D(root, lambda)."""
    if not isinstance(root, Root):
        root = Root(tuple(root))
    if root.height > model.height_cap:
        raise ValueError(f"root {root.coords} is above the height cap {model.height_cap}")
    neg = tuple(-c for c in model.form(root.coords))
    return least_level(_policy_step(model, root, policy), shape.sup(model, neg))


def _family_roots(model: ApartmentModel, family: str) -> List[Root]:
    if family in ("phi", "sharp"):
        return model.real_roots()
    if family == "delta":
        return model.real_roots() + model.imaginary_roots()
    raise ValueError(family)


def certificate(model: ApartmentModel, spec: EnclosureSpec, shape: Shape) -> List[Tuple[Tuple[int, ...], Level]]:
    """Per-root levels (including +inf / -inf) of the enclosure, before normalization."""
    roots = _family_roots(model, spec.family)
    return [(r.coords, level_for(model, shape, r, spec.policy)) for r in sorted(roots, key=lambda r: sort_key(r.coords))]


def _ci_from_certificate(model: ApartmentModel, cert, spec_name: str) -> ConvexIntersection:
    closed, unbounded = [], []
    for root, lev in cert:
        if lev == INF:
            continue
        if lev == NEG_INF:
            unbounded.append(root)
            continue
        closed.append(HalfSpace(model.form(root), Fraction(lev), root))
    return ConvexIntersection(model.dim, tuple(closed), (), tuple(unbounded), spec_name, model.height_cap)


def convex_hull(model: ApartmentModel, points: Sequence[Sequence], rays: Sequence[Sequence] = ()) -> ConvexIntersection:
    """Exact H-description of conv(points) + cone(rays).

    Candidate normals come from nullspaces of small sets of edge directions;
    each candidate gets its tight level, and redundancy is removed afterwards.
    Facets are normal to (dim - 1) independent directions, so every facet is
    among the candidates.
    """
    d = model.dim
    pts = [tuple(Fraction(c) for c in p) for p in points]
    if not pts:
        raise UnsupportedShape("convex hull of an empty set")
    dirs = [exact.sub(p, pts[0]) for p in pts[1:]] + [exact.sub(p, q) for p, q in itertools.combinations(pts[1:], 2)]
    dirs += [tuple(Fraction(c) for c in r) for r in rays]
    dirs = [v for v in dirs if any(c != 0 for c in v)]
    cands = set()
    for k in range(0, min(d - 1, len(dirs)) + 1):
        for sub in itertools.combinations(dirs, k):
            for n in exact.nullspace(list(sub), d) if sub else exact.nullspace([], d):
                cands.add(n)
                cands.add(tuple(-c for c in n))
    hs = []
    for n in cands:
        if any(exact.dot(n, r) > 0 for r in rays):
            continue
        c = max(exact.dot(n, p) for p in pts)
        # n.x <= c  <=>  (-n).x + c >= 0
        hs.append(HalfSpace(tuple(-x for x in n), c, None))
    return ConvexIntersection(d, tuple(hs), (), (), "conv", model.height_cap).normalized()


def enclosure(model: ApartmentModel, spec: Union[EnclosureSpec, str], shape: Shape) -> ConvexIntersection:
    """The enclosure of a shape for the given root family and level policy.

    Families phi / delta return the raw per-root certificate (every root up
    to the cap, +inf levels dropped).  The sharp family returns a minimal
    finite sub-certificate of phi chosen by greedy elimination in reverse
    ShortLex order.  The ti family is the closed convex hull.
    """
    if isinstance(spec, str):
        spec = SPEC_ALIASES[spec]
    if spec.family == "ti":
        if isinstance(shape, Polyhedron):
            return shape.ci.normalized()
        return convex_hull(model, shape.points(), shape.rays(model))
    if spec.family == "sharp":
        base = _ci_from_certificate(model, certificate(model, EnclosureSpec("phi", spec.policy), shape), spec.name)
        return base.normalized()
    return _ci_from_certificate(model, certificate(model, spec, shape), spec.name)


CHAIN = (
    ("cl_sharp", "cl_phi"),
    ("cl_phi", "cl_delta"),
    ("cl_delta", "cl_delta_ma"),
    ("cl_delta_ma", "cl_delta_r"),
    ("cl_delta_r", "conv"),
    ("cl_phi", "cl_phi_r"),
    ("cl_phi_r", "cl_delta_r"),
)


def certificate_contains(big: ConvexIntersection, small: ConvexIntersection) -> bool:
    """Every half-space of ``big`` is implied root-by-root by ``small`` (same root, lower or equal level)."""
    for h in big.closed:
        lev = small.level_of(h.root) if h.root is not None else None
        if lev is None or (lev != NEG_INF and lev > h.level):
            return False
    return True


@dataclass
class ChainReport:
    results: Dict[str, ConvexIntersection]
    checks: List[Tuple[str, str, bool]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c[2] for c in self.checks)


def enclosure_chain(model: ApartmentModel, shape: Shape, raise_on_violation: bool = True) -> ChainReport:
    """Compute all enclosure variants at one cap and verify the containment chain.

    Root-family enclosures are compared certificate by certificate; the convex
    hull is compared through its vertices and rays; and every variant must
    contain the sample points of the shape.
    """
    names = ["cl_sharp", "cl_phi", "cl_delta", "cl_delta_ma", "cl_delta_r", "cl_phi_r", "conv"]
    res = {n: enclosure(model, n, shape) for n in names}
    report = ChainReport(res)
    try:
        samples = shape.sample(model)
    except UnsupportedShape:
        samples = []
    pts = shape.points()
    rays = shape.rays(model)
    for big, small in CHAIN:
        if small == "conv":
            ok = all(res[big].contains(p) for p in pts) and all(
                all(exact.dot(h.form, r) >= 0 for h in res[big].closed) for r in rays
            )
        elif big == "cl_sharp":
            ok = res[big].contains_set(res[small])
        else:
            ok = certificate_contains(res[big], res[small])
        report.checks.append((big, small, ok))
    for n in names:
        report.checks.append((n, "samples", all(res[n].contains(p) for p in samples)))
    if raise_on_violation and not report.ok:
        bad = [c for c in report.checks if not c[2]]
        raise ChainViolation(f"enclosure chain broken: {bad}")
    return report


# ---------------------------------------------------------------------------
# preorder


def preorder_leq(model: ApartmentModel, x: Sequence, y: Sequence, step_cap: int = 1000) -> str:
    verdict = in_tits_cone(model.real, exact.sub(y, x), step_cap)
    return {True: "yes", False: "no", None: "unknown"}[verdict]


# ---------------------------------------------------------------------------
# affine Weyl group


@dataclass(frozen=True)
class AffineWeylElement:
    linear: WeylElement
    translation: Vec

    def apply(self, real: Realization, x: Sequence) -> Vec:
        return exact.add(real.act(self.linear.word, x), self.translation)


def root_reflection_word(m: KacMoodyMatrix, root: Sequence[int]) -> Tuple[int, ...]:
    """A word for s_alpha: w s_i w^{-1} where alpha = w(alpha_i)."""

    q = tuple(abs(c) for c in root)
    word = []
    while sum(q) > 1:
        i = next(i for i in range(m.size) if pairing(m, i, q) > 0)
        word.append(i)
        q = simple_reflection(m, i, q)
    i = q.index(1)
    return tuple(word) + (i,) + tuple(reversed(word))


def identity_element(model: ApartmentModel) -> AffineWeylElement:
    return AffineWeylElement(normal_form(model.matrix, ()), (Fraction(0),) * model.dim)


def translation(model: ApartmentModel, vector: Sequence) -> AffineWeylElement:
    return AffineWeylElement(normal_form(model.matrix, ()), tuple(Fraction(c) for c in vector))


def reflection(model: ApartmentModel, root: Sequence[int], level) -> AffineWeylElement:
    """s_{alpha,lambda}(x) = x - (alpha(x) + lambda) alpha^vee; refused on ghost walls."""
    level = Fraction(level)
    if not model.in_lambda(root, level):
        raise GhostWall(f"level {level} is not in the value set of root {tuple(root)}")
    lin = normal_form(model.matrix, root_reflection_word(model.matrix, root))
    return AffineWeylElement(lin, exact.scale(-level, model.coroot(root)))


def compose(model: ApartmentModel, a: AffineWeylElement, b: AffineWeylElement) -> AffineWeylElement:
    """a after b."""
    lin = normal_form(model.matrix, a.linear.word + b.linear.word)
    t = exact.add(model.real.act(a.linear.word, b.translation), a.translation)
    return AffineWeylElement(lin, t)


def invert(model: ApartmentModel, a: AffineWeylElement) -> AffineWeylElement:
    inv_word = tuple(reversed(a.linear.word))
    lin = normal_form(model.matrix, inv_word)
    return AffineWeylElement(lin, tuple(-c for c in model.real.act(inv_word, a.translation)))


def apply(model: ApartmentModel, a: AffineWeylElement, x: Sequence) -> Vec:
    return a.apply(model.real, x)


def map_root(model: ApartmentModel, a: AffineWeylElement, root: Sequence[int]) -> Tuple[int, ...]:
    return a.linear.apply(root)


def map_halfspace(model: ApartmentModel, a: AffineWeylElement, h: HalfSpace) -> HalfSpace:
    """Image of D(f, lambda) under x -> Lx + t is D(f o L^-1, lambda - f(L^-1 t))."""
    inv = tuple(reversed(a.linear.word))
    # f o L^-1 as a vector: columns of L^-1 paired with f
    d = model.dim
    basis = [tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d)]
    new_form = tuple(exact.dot(h.form, model.real.act(inv, e)) for e in basis)
    shift = exact.dot(h.form, model.real.act(inv, a.translation))
    root = a.linear.apply(h.root) if h.root is not None else None
    return HalfSpace(new_form, h.level - shift, root)


def map_shape(model: ApartmentModel, a: AffineWeylElement, shape: Shape) -> Shape:
    f = lambda p: apply(model, a, p)
    lin = lambda v: model.real.act(a.linear.word, v)
    if isinstance(shape, Point):
        return Point(f(shape.x))
    if isinstance(shape, Segment):
        return Segment(f(shape.x), f(shape.y))
    if isinstance(shape, OpenSegmentGerm):
        return OpenSegmentGerm(f(shape.x), f(shape.y))
    if isinstance(shape, FiniteSet):
        return FiniteSet(tuple(f(p) for p in shape.pts))
    if isinstance(shape, Ray):
        return Ray(f(shape.x), lin(shape.direction))
    if isinstance(shape, RayGerm):
        return RayGerm(f(shape.x), lin(shape.direction))
    if isinstance(shape, Polyhedron):
        ci = shape.ci
        return Polyhedron(ConvexIntersection(ci.dim, tuple(map_halfspace(model, a, h) for h in ci.closed),
                                             tuple(map_halfspace(model, a, h) for h in ci.open), (), ci.spec, ci.cap))
    if isinstance(shape, (LocalFacet, SectorFace, SectorFaceGerm)):
        fac = shape.facet
        return type(shape)(f(shape.x), make_facet(model.matrix, fac.sign, a.linear.word + fac.word, fac.J))
    raise UnsupportedShape(shape.kind)


def map_ci(model: ApartmentModel, a: AffineWeylElement, ci: ConvexIntersection) -> ConvexIntersection:
    return ConvexIntersection(
        ci.dim, tuple(map_halfspace(model, a, h) for h in ci.closed), tuple(map_halfspace(model, a, h) for h in ci.open),
        tuple(a.linear.apply(r) for r in ci.unbounded_roots), ci.spec, ci.cap,
    )


def is_true_wall(model: ApartmentModel, root: Sequence[int], level: Fraction) -> bool:
    return model.in_lambda(root, level)


# ---------------------------------------------------------------------------
# chimneys


@dataclass(frozen=True)
class ChimneyInfo:
    shape: Shape
    splayed: bool
    solid: bool
    full: bool
    enclosure: ConvexIntersection


def chimney(model: ApartmentModel, x: Sequence, base: VectorialFacet, direction: VectorialFacet,
            spec: Union[str, EnclosureSpec] = "cl_phi", germ: bool = False) -> ChimneyInfo:
    """The chimney cl(F(x, base) + direction), or its germ, with classification flags.

    Splayed when the direction is spherical.  Solid when the direction of the
    support (span of base plus span of direction) has a finite pointwise
    fixator in W^v, decided at a generic point of that span.  Full when the
    support is the whole apartment.
    """

    m = model.matrix
    x = tuple(Fraction(c) for c in x)
    shape = (ChimneyGerm if germ else Chimney)(x, base, direction)
    span = facet_span_basis(model.real, base) + facet_span_basis(model.real, direction)
    support_dim = exact.rank(span) if span else 0
    generic = exact.add(interior_point(model.real, base), interior_point(model.real, direction))
    loc = locate_in_tits_cone(model.real, generic)
    solid = loc.facet is not None and is_spherical(m, loc.facet.J)
    splayed = is_spherical(m, direction.J)
    full = support_dim == model.dim
    return ChimneyInfo(shape, splayed, solid, full, enclosure(model, spec, shape))
