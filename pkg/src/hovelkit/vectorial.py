"""Realizations of the vectorial apartment, vectorial facets and the Tits cone."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from . import exact
from .kac_core import (
    KacMoodyMatrix,
    RootGeneratingSystem,
    WeylElement,
    classify_block,
    is_spherical,
    positive_imaginary_roots,
    weyl_elements,
    word_action,
)

Vec = Tuple[Fraction, ...]


class NotFreeRGS(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Realization:
    matrix: KacMoodyMatrix
    kind: str
    dim: int
    root_forms: Tuple[Vec, ...]
    coroot_vectors: Tuple[Vec, ...]
    v0_basis: Tuple[Vec, ...]

    def __post_init__(self):
        a = self.matrix.entries
        for i, cor in enumerate(self.coroot_vectors):
            for j, form in enumerate(self.root_forms):
                if exact.dot(form, cor) != a[i][j]:
                    raise ValueError("root forms and coroots do not realize the matrix")

    def form(self, coords: Sequence) -> Vec:
        """Linear form on V of the element sum_i coords[i] alpha_i of Q."""
        out = [Fraction(0)] * self.dim
        for c, f in zip(coords, self.root_forms):
            if c:
                for k in range(self.dim):
                    out[k] += c * f[k]
        return tuple(out)

    def evaluate(self, coords: Sequence, v: Sequence) -> Fraction:
        self.check_point(v)
        return sum((Fraction(c) * exact.dot(f, v) for c, f in zip(coords, self.root_forms) if c), Fraction(0))

    def simple_values(self, v: Sequence) -> Vec:
        self.check_point(v)
        return tuple(exact.dot(f, v) for f in self.root_forms)

    def coroot(self, coroot_coords: Sequence) -> Vec:
        """Vector sum_i c_i alpha_i^vee."""
        out = [Fraction(0)] * self.dim
        for c, cv in zip(coroot_coords, self.coroot_vectors):
            if c:
                for k in range(self.dim):
                    out[k] += c * cv[k]
        return tuple(out)

    def check_point(self, v: Sequence) -> None:
        if len(v) != self.dim:
            raise DimensionMismatch(f"point has {len(v)} coordinates, realization has dimension {self.dim}")

    def reflect(self, i: int, v: Sequence) -> Vec:
        c = exact.dot(self.root_forms[i], v)
        return tuple(Fraction(x) - c * y for x, y in zip(v, self.coroot_vectors[i]))

    def act(self, word: Sequence[int], v: Sequence) -> Vec:
        """Apply s_{w1} ... s_{wk} to v (rightmost letter first)."""
        out = tuple(Fraction(x) for x in v)
        for i in reversed(tuple(word)):
            out = self.reflect(i, out)
        return out

    def point_with_values(self, values: Sequence) -> Vec:
        """A point v with alpha_i(v) = values[i] (roots are independent in every kind we build)."""
        sol = exact.solve(self.root_forms, [Fraction(x) for x in values])
        if sol is None:
            raise ValueError("values not attainable in this realization")
        return sol


def build_realization(
    rgs_or_matrix: Union[RootGeneratingSystem, KacMoodyMatrix],
    kind: str = "q",
    v00: Optional[Sequence[Sequence]] = None,
) -> Realization:
    """Build V^q, V^x, V^xl, or a quotient V / V00 of one of them.

    ``kind`` is 'q', 'x', 'xl', or 'quotient:<base kind>' with ``v00`` a basis
    of a subspace of the base realization's V0.
    """
    if isinstance(rgs_or_matrix, KacMoodyMatrix):
        rgs = RootGeneratingSystem.minimal_adjoint(rgs_or_matrix)
    else:
        rgs = rgs_or_matrix
    m = rgs.matrix
    n = m.size
    if kind == "q":
        forms = tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))
        cors = tuple(tuple(Fraction(x) for x in m.entries[i]) for i in range(n))
        return _finish(m, "q", forms, cors)
    if kind == "x":
        if not rgs.free:
            raise NotFreeRGS("the root forms of this system are linearly dependent")
        return _finish(m, "x", rgs.simple_root_forms, tuple(tuple(Fraction(x) for x in c) for c in rgs.simple_coroots))
    if kind == "xl":
        ext = rgs.extended()
        return _finish(m, "xl", ext.simple_root_forms, tuple(tuple(Fraction(x) for x in c) for c in ext.simple_coroots))
    if kind.startswith("quotient"):
        base_kind = kind.split(":", 1)[1] if ":" in kind else "xl"
        base = build_realization(rgs, base_kind)
        return quotient(base, v00 or [])
    raise ValueError(f"unknown realization kind {kind!r}")


def _finish(m: KacMoodyMatrix, kind: str, forms, cors) -> Realization:
    forms = tuple(tuple(Fraction(x) for x in f) for f in forms)
    dim = len(forms[0]) if forms else 0
    v0 = tuple(exact.nullspace(forms, dim))
    return Realization(m, kind, dim, forms, tuple(cors), v0)


def quotient(base: Realization, v00: Sequence[Sequence]) -> Realization:
    """V / V00 for a subspace V00 of V0, in coordinates given by a complement projection."""
    v00 = [tuple(Fraction(x) for x in b) for b in v00]
    for b in v00:
        if any(exact.dot(f, b) != 0 for f in base.root_forms):
            raise ValueError("quotient subspace must lie in V0")
    # The projection's rows span the annihilator of V00.
    proj = exact.nullspace(v00, base.dim) if v00 else [
        tuple(Fraction(int(i == j)) for j in range(base.dim)) for i in range(base.dim)
    ]
    # forms factor through the projection: f = beta . proj
    forms = []
    for f in base.root_forms:
        beta = exact.solve(exact.transpose(proj), f)
        if beta is None:
            raise ValueError("root form does not factor through the quotient")
        forms.append(beta)
    cors = [exact.mat_vec(proj, c) for c in base.coroot_vectors]
    return _finish(base.matrix, "quotient", forms, cors)


def delta_coefficients(m: KacMoodyMatrix) -> Optional[Tuple[int, ...]]:
    """Null root of an indecomposable affine matrix (least positive imaginary root)."""
    if classify_block(m) != "affine":
        return None
    cap = 1
    while True:
        im = positive_imaginary_roots(m, cap)
        if im:
            return im[0]
        cap += 1


# ---------------------------------------------------------------------------
# Weyl elements acting on roots, descents and coset representatives


def _neg(q: Sequence[int]) -> bool:
    return any(c < 0 for c in q)


def left_descent(m: KacMoodyMatrix, word: Sequence[int]) -> List[int]:
    """Generators i with l(s_i w) < l(w), i.e. w^{-1}(alpha_i) < 0."""
    inv = word_action(m, tuple(reversed(tuple(word))))
    return [i for i in range(m.size) if _neg([inv[r][i] for r in range(m.size)])]


def right_descent(m: KacMoodyMatrix, word: Sequence[int]) -> List[int]:
    """Generators i with l(w s_i) < l(w), i.e. w(alpha_i) < 0."""
    act = word_action(m, word)
    return [i for i in range(m.size) if _neg([act[r][i] for r in range(m.size)])]


def normal_form(m: KacMoodyMatrix, word: Sequence[int]) -> WeylElement:
    """ShortLex-least reduced word for the element, by greedy left descents."""
    action = word_action(m, word)
    rest = tuple(word)
    out: List[int] = []
    while True:
        desc = left_descent(m, rest)
        if not desc:
            break
        i = desc[0]
        out.append(i)
        rest = (i,) + rest
    return WeylElement(tuple(out), action)


def min_coset_rep(m: KacMoodyMatrix, word: Sequence[int], J: Iterable[int]) -> WeylElement:
    """Minimal-length representative of w W_J, with ShortLex word."""
    J = set(J)
    cur = tuple(word)
    while True:
        desc = [j for j in right_descent(m, cur) if j in J]
        if not desc:
            break
        cur = cur + (desc[0],)
    return normal_form(m, cur)


def in_parabolic(m: KacMoodyMatrix, word: Sequence[int], J: Iterable[int]) -> bool:
    return min_coset_rep(m, word, J).word == ()


# ---------------------------------------------------------------------------
# facets


@dataclass(frozen=True)
class VectorialFacet:
    sign: int
    wrep: WeylElement
    J: Tuple[int, ...]

    @property
    def word(self) -> Tuple[int, ...]:
        return self.wrep.word

    def to_dict(self) -> dict:
        return {"sign": "+" if self.sign > 0 else "-", "word": list(self.word), "J": list(self.J)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def make_facet(m: KacMoodyMatrix, sign: int, word: Sequence[int], J: Iterable[int]) -> VectorialFacet:
    J = tuple(sorted(set(J)))
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return VectorialFacet(sign, min_coset_rep(m, word, J), J)


def facet_from_dict(m: KacMoodyMatrix, data: dict) -> VectorialFacet:
    sign = 1 if data["sign"] in ("+", 1, "+1") else -1
    return make_facet(m, sign, data.get("word", []), data.get("J", []))


def is_spherical_facet(f: VectorialFacet, m: KacMoodyMatrix) -> bool:
    return is_spherical(m, f.J)


def fundamental_facet_membership(real: Realization, sign: int, J: Iterable[int], v: Sequence) -> bool:
    vals = real.simple_values(v)
    J = set(J)
    for i, a in enumerate(vals):
        if i in J:
            if a != 0:
                return False
        elif sign * a <= 0:
            return False
    return True


def facet_membership(real: Realization, facet: VectorialFacet, v: Sequence) -> bool:
    back = real.act(tuple(reversed(facet.word)), v)
    return fundamental_facet_membership(real, facet.sign, facet.J, back)


def interior_point(real: Realization, facet: VectorialFacet) -> Vec:
    """A point of the facet: alpha_i = 0 on J and 1 elsewhere, moved by w and signed."""
    vals = [0 if i in facet.J else 1 for i in range(real.matrix.size)]
    v0 = real.point_with_values(vals)
    v = real.act(facet.word, v0)
    return tuple(facet.sign * x for x in v)


def root_sign_on_facet(real: Realization, facet: VectorialFacet, coords: Sequence[int]) -> int:
    """Sign of the root (or any element of Q) on the facet, which is constant."""
    val = real.evaluate(coords, interior_point(real, facet))
    return (val > 0) - (val < 0)


def facet_span_basis(real: Realization, facet: VectorialFacet) -> List[Vec]:
    """Basis of the linear span of the facet: w of {v : alpha_j(v) = 0, j in J}."""
    rows = [real.root_forms[j] for j in facet.J]
    base = exact.nullspace(rows, real.dim)
    return [real.act(facet.word, b) for b in base]


def in_star(m: KacMoodyMatrix, facet: VectorialFacet, other: VectorialFacet) -> bool:
    """other lies in the star of facet, i.e. facet is in the closure of other."""
    if facet.sign != other.sign or not set(other.J) <= set(facet.J):
        return False
    rel = tuple(reversed(facet.word)) + other.word
    return in_parabolic(m, rel, facet.J)


def facet_star(m: KacMoodyMatrix, facet: VectorialFacet, length_cap: int = 12) -> List[VectorialFacet]:
    """Facets whose closure contains ``facet``; W_J enumerated up to ``length_cap``."""
    J = facet.J
    sub = m.sub(J) if J else None
    out = set()
    parabolic = [()] if sub is None else [tuple(J[i] for i in w.word) for w in weyl_elements(sub, length_cap)]
    for u in parabolic:
        for k in range(len(J) + 1):
            for J1 in itertools.combinations(J, k):
                out.add(make_facet(m, facet.sign, facet.word + u, J1))
    return sorted(out, key=lambda f: (-len(f.J), len(f.word), f.word, f.J))


# ---------------------------------------------------------------------------
# Tits cone


@dataclass(frozen=True)
class Located:
    verdict: str  # InPositive | InNegative | Outside | Unknown
    facet: Optional[VectorialFacet] = None
    steps: int = 0


def _descend(real: Realization, v: Vec, step_cap: Optional[int]) -> Tuple[Optional[Tuple[int, ...]], Vec, int]:
    word: List[int] = []
    steps = 0
    while True:
        vals = real.simple_values(v)
        i = next((k for k, a in enumerate(vals) if a < 0), None)
        if i is None:
            return tuple(word), v, steps
        if step_cap is not None and steps >= step_cap:
            return None, v, steps
        v = real.reflect(i, v)
        word.append(i)
        steps += 1


def _block_decision(real: Realization, v: Vec) -> Optional[bool]:
    """Exact T+ membership when no block is indefinite; None otherwise."""
    m = real.matrix
    vals = real.simple_values(v)
    for block in m.blocks():
        sub = m.sub(block)
        kind = classify_block(sub)
        if kind == "finite":
            continue
        if kind == "indefinite":
            return None
        delta = delta_coefficients(sub)
        d = sum(c * vals[i] for c, i in zip(delta, block))
        if d > 0:
            continue
        if d < 0 or any(vals[i] != 0 for i in block):
            return False
    return True


def _positive(real: Realization, v: Vec, step_cap: int) -> Located:
    decided = _block_decision(real, v)
    if decided is False:
        return Located("Outside")
    word, v0, steps = _descend(real, v, None if decided else step_cap)
    if word is None:
        return Located("Unknown", steps=steps)
    vals = real.simple_values(v0)
    J = [i for i, a in enumerate(vals) if a == 0]
    # v = s_{i1} ... s_{ik} v0 where i1 was applied first to v
    return Located("InPositive", make_facet(real.matrix, 1, tuple(word), J), steps)


def locate_in_tits_cone(real: Realization, v: Sequence, step_cap: int = 1000) -> Located:
    if step_cap < 1:
        raise ValueError("step_cap must be at least 1")
    real.check_point(v)
    v = tuple(Fraction(x) for x in v)
    pos = _positive(real, v, step_cap)
    if pos.verdict == "InPositive":
        return pos
    neg = _positive(real, tuple(-x for x in v), step_cap)
    if neg.verdict == "InPositive":
        f = neg.facet
        return Located("InNegative", VectorialFacet(-1, f.wrep, f.J), pos.steps + neg.steps)
    if pos.verdict == "Unknown" or neg.verdict == "Unknown":
        return Located("Unknown", steps=pos.steps + neg.steps)
    return Located("Outside", steps=pos.steps + neg.steps)


def in_tits_cone(real: Realization, v: Sequence, step_cap: int = 1000) -> Optional[bool]:
    """T+ membership: True, False, or None when undecided."""
    loc = _positive(real, tuple(Fraction(x) for x in v), step_cap)
    if loc.verdict == "InPositive":
        return True
    if loc.verdict == "Outside":
        return False
    return None
