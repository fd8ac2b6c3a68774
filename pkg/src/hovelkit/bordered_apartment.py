"""Facades at infinity, the strong / essential / injective bordered apartments, projections
between facades and the sector-face-germ correspondence."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import exact
from .affine_apartment import (
    ApartmentModel,
    ChimneyGerm,
    HalfSpace,
    SectorFaceGerm,
    Shape,
    chimney,
    level_for,
)
from .kac_core import Root, is_spherical
from .vectorial import (
    VectorialFacet,
    facet_from_dict,
    facet_span_basis,
    in_star,
    make_facet,
    root_sign_on_facet,
)

Vec = Tuple[Fraction, ...]
FLAVORS = ("strong", "essential", "injective")


class NotInStar(ValueError):
    pass


class WrongFlavor(ValueError):
    pass


def trivial_direction(model: ApartmentModel) -> VectorialFacet:
    """The facet V_0 = F^v(I), direction of the main facade."""
    return make_facet(model.matrix, 1, (), range(model.matrix.size))


def is_trivial(model: ApartmentModel, facet: VectorialFacet) -> bool:
    return len(facet.J) == model.matrix.size


@dataclass(frozen=True)
class Facade:
    model: ApartmentModel
    direction: VectorialFacet
    mode: str  # "ne" or "e"
    quotient_basis: Tuple[Vec, ...] = ()
    _pivots: Tuple[int, ...] = ()

    @classmethod
    def build(cls, model: ApartmentModel, direction: VectorialFacet, mode: str) -> "Facade":
        if mode not in ("ne", "e"):
            raise ValueError("mode must be 'ne' or 'e'")
        basis: Tuple[Vec, ...] = ()
        pivots: Tuple[int, ...] = ()
        if mode == "e":
            span = facet_span_basis(model.real, direction)
            if span:
                rows, piv = exact.rref(span)
                basis = tuple(tuple(r) for r in rows[: len(piv)])
                pivots = tuple(piv)
        return cls(model, direction, mode, basis, pivots)

    @property
    def spherical(self) -> bool:
        return is_spherical(self.model.matrix, self.direction.J)

    @property
    def dim(self) -> int:
        return self.model.dim - len(self.quotient_basis)

    def canonical(self, x: Sequence) -> Vec:
        """Coset representative with zero pivot coordinates (mode e), or x itself (mode ne)."""
        v = [Fraction(c) for c in x]
        for row, pc in zip(self.quotient_basis, self._pivots):
            c = v[pc]
            if c:
                v = [a - c * b for a, b in zip(v, row)]
        return tuple(v)

    def real_roots(self) -> List[Root]:
        """Phi^m(F^v): roots vanishing on the direction."""
        return [r for r in self.model.real_roots() if root_sign_on_facet(self.model.real, self.direction, r.coords) == 0]

    def imaginary_roots(self) -> List[Root]:
        return [r for r in self.model.imaginary_roots() if root_sign_on_facet(self.model.real, self.direction, r.coords) == 0]

    def key(self):
        return (self.direction.sign, self.direction.word, self.direction.J, self.mode)


@dataclass(frozen=True)
class FacadePoint:
    facade: Facade
    representative: Vec

    @classmethod
    def of(cls, facade: Facade, x: Sequence) -> "FacadePoint":
        return cls(facade, facade.canonical(x))

    def __eq__(self, other) -> bool:
        if not isinstance(other, FacadePoint) or self.facade.key() != other.facade.key():
            return False
        return self.representative == other.representative

    def __hash__(self) -> int:
        return hash((self.facade.key(), self.representative))

    def to_dict(self) -> dict:
        return {
            "direction": self.facade.direction.to_dict(),
            "mode": self.facade.mode,
            "rep": [exact.fmt(c) for c in self.representative],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass
class BorderedApartment:
    """Disjoint union of facades, built lazily per direction.

    strong: every facade non-essential; essential: every facade essential;
    injective: main facade non-essential, the others essential.
    """

    flavor: str
    model: ApartmentModel
    _cache: Dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}")

    def mode_for(self, direction: VectorialFacet) -> str:
        if self.flavor == "strong":
            return "ne"
        if self.flavor == "essential":
            return "e"
        return "ne" if is_trivial(self.model, direction) else "e"

    def facade(self, direction: VectorialFacet) -> Facade:
        if is_trivial(self.model, direction):
            direction = trivial_direction(self.model)
        key = (direction.sign, direction.word, direction.J)
        with self._lock:
            fac = self._cache.get(key)
            if fac is None:
                fac = Facade.build(self.model, direction, self.mode_for(direction))
                self._cache[key] = fac
        return fac

    def main_facade(self) -> Facade:
        return self.facade(trivial_direction(self.model))

    def point(self, x: Sequence, direction: Optional[VectorialFacet] = None) -> FacadePoint:
        fac = self.facade(direction if direction is not None else trivial_direction(self.model))
        return FacadePoint.of(fac, x)

    def project(self, p: FacadePoint, target: VectorialFacet) -> FacadePoint:
        """pr_{F_1}([x + F^v]) = [x + F_1] for F_1 in the star of F^v."""
        source = p.facade.direction
        if not (is_trivial(self.model, source) or in_star(self.model.matrix, source, target)):
            raise NotInStar(f"{target.to_dict()} is not in the star of {source.to_dict()}")
        return FacadePoint.of(self.facade(target), p.representative)

    def germ_to_point(self, germ: SectorFaceGerm) -> FacadePoint:
        self._need_essential()
        return FacadePoint.of(self.facade(germ.facet), germ.x)

    def point_to_germ(self, p: FacadePoint) -> SectorFaceGerm:
        self._need_essential()
        return SectorFaceGerm(p.representative, p.facade.direction)

    def _need_essential(self) -> None:
        if self.flavor != "essential":
            raise WrongFlavor("sector-face germs correspond to points of the essential bordered apartment")


def same_germ(model: ApartmentModel, a: SectorFaceGerm, b: SectorFaceGerm) -> bool:
    """Germs at infinity agree iff same direction and base points differ by the span of the direction."""
    if (a.facet.sign, a.facet.word, a.facet.J) != (b.facet.sign, b.facet.word, b.facet.J):
        return False
    fac = Facade.build(model, a.facet, "e")
    return fac.canonical(a.x) == fac.canonical(b.x)


@dataclass(frozen=True)
class WallTrace:
    kind: str  # "wall", "empty", "halfspace" or "full"
    halfspace: Optional[HalfSpace] = None


def wall_trace(facade: Facade, root: Sequence[int], level, half: bool = False) -> WallTrace:
    """Trace of M(alpha, lambda) (or of D(alpha, lambda) when ``half``) on a facade."""
    model = facade.model
    sign = root_sign_on_facet(model.real, facade.direction, root)
    if sign < 0:
        return WallTrace("empty")
    if sign > 0:
        return WallTrace("full" if half else "empty")
    return WallTrace("halfspace" if half else "wall", HalfSpace(model.form(root), Fraction(level), tuple(root)))


def enclose_in_facade(facade: Facade, shape: Shape, policy: str = "lambda") -> List[Tuple[Tuple[int, ...], object]]:
    """Per-root levels over Phi^m(F^v); these roots vanish on the direction, so levels are
    independent of the coset representative."""
    return [(r.coords, level_for(facade.model, shape, r, policy)) for r in facade.real_roots()]


@dataclass(frozen=True)
class ClosedFacadeFacet:
    facade: Facade
    point: FacadePoint
    base_direction: VectorialFacet
    spherical_facade: bool
    spherical_in_facade: bool
    chamber_in_facade: bool


def chimney_germ_to_closed_facet(bordered: BorderedApartment, germ: ChimneyGerm) -> ClosedFacadeFacet:
    """The closed facet [R] in the facade of direction F^v attached to a chimney germ.

    Splayed chimneys land in spherical facades; solid ones give spherical
    facets of their facade and full ones give chambers.
    """
    info = chimney(bordered.model, germ.x, germ.base, germ.facet, germ=True)
    fac = bordered.facade(germ.facet)
    return ClosedFacadeFacet(fac, FacadePoint.of(fac, germ.x), germ.base, info.splayed, info.solid, info.full)


def facade_point_from_dict(bordered: BorderedApartment, d: dict) -> FacadePoint:
    direction = facet_from_dict(bordered.model.matrix, d["direction"])
    fac = bordered.facade(direction)
    if fac.mode != d.get("mode", fac.mode):
        raise WrongFlavor(f"facade mode {fac.mode} does not match {d['mode']}")
    return FacadePoint.of(fac, exact.vec(d["rep"]))
