"""Parahoric families for classical instances, the quotient hovel G x A / ~ at desk scale,
the Bruhat-Tits tree of SL_2, hovel spot checks and residue root systems."""

from __future__ import annotations

import hashlib
import itertools
import math
import os
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import exact
from .affine_apartment import (
    INF,
    NEG_INF,
    ApartmentModel,
    FiniteSet,
    Level,
    LocalFacet,
    OpenSegmentGerm,
    Point,
    SectorFace,
    Segment,
    Shape,
    SupValue,
    UnsupportedShape,
    apply,
    invert,
    level_for,
    preorder_leq,
)
from .bordered_apartment import BorderedApartment, FacadePoint
from .group_instances import (
    ClassicalInstance,
    SLMatrix,
    diagonal,
    elementary,
    is_monomial,
    is_unipotent_upper,
    iwahori_decompose,
    iwasawa_decompose_alcove,
    q_to_eps,
    sl_root,
)
from .kac_core import is_spherical, real_coroot, weyl_elements
from .valuated_datum import ValuationReport, nu_of, random_N_element, v_p
from .vectorial import interior_point, make_facet, root_sign_on_facet

RootT = Tuple[int, ...]
Vec = Tuple[Fraction, ...]
Levels = Dict[Tuple[int, int], Level]


class UndecidedBeyondBudget(RuntimeError):
    def __init__(self, message: str, budget_used: int):
        super().__init__(message)
        self.budget_used = budget_used


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class WholeApartment(Shape):
    """The apartment itself, as a shape: unbounded against every non-zero form."""

    dim: int
    kind = "apartment"

    def sup(self, model, form):
        return SupValue(INF) if any(form) else SupValue(Fraction(0))

    def points(self):
        zero = (Fraction(0),) * self.dim
        return [zero] + [tuple(Fraction(int(i == j)) for j in range(self.dim)) for i in range(self.dim)]


def _as_shape(where) -> Shape:
    if isinstance(where, Shape):
        return where
    return Point(exact.vec(where))


def _pointwise_data(model: ApartmentModel, shape: Shape) -> Tuple[List[Vec], List[Vec]]:
    """Points and directions that an affine map must fix to fix the shape (or a shortening of the germ)."""
    if isinstance(shape, (Point, Segment, FiniteSet, WholeApartment)):
        return shape.points(), []
    if isinstance(shape, OpenSegmentGerm):
        return [shape.x], [exact.sub(shape.y, shape.x)]
    if isinstance(shape, (SectorFace, LocalFacet)):
        return [shape.x], [interior_point(model.real, shape.facet)] + SectorFace(shape.x, shape.facet).rays(model)
    raise UnsupportedShape(f"fixators of {shape.kind} shapes are not supported")


def _v(r, p: int):
    return v_p(r, p)


def random_unit(rng: random.Random, p: int) -> Fraction:
    while True:
        a, b = rng.randint(-9, 9), rng.randint(1, 9)
        if a % p and b % p:
            return Fraction(a, b)


def scalar_at_level(rng: random.Random, p: int, level: Level, spread: int = 2) -> Fraction:
    if level == INF:
        return Fraction(0)
    base = rng.randint(-3, 3) if level == NEG_INF else int(level)
    return random_unit(rng, p) * Fraction(p) ** (base + rng.randint(0, spread))


# ---------------------------------------------------------------------------
# the minimal family


@dataclass(frozen=True)
class UAlpha:
    root: RootT
    threshold: Level

    def describe(self) -> str:
        if self.threshold == INF:
            return "{1}"
        if self.threshold == NEG_INF:
            return "all of U_alpha"
        return f"v_p(r) >= {exact.fmt(self.threshold)}"


def U_alpha_of(model: ApartmentModel, where, root: Sequence[int]) -> UAlpha:
    """U_alpha(Omega) = U_{alpha, lambda} for the least admissible lambda with Omega in D(alpha, lambda)."""
    return UAlpha(tuple(root), level_for(model, _as_shape(where), tuple(root), "lambda"))


@dataclass
class GeneratorDescription:
    shape: Shape
    root_groups: List[UAlpha]
    n_representatives: List[SLMatrix]

    def to_dict(self) -> dict:
        return {
            "shape": self.shape.kind,
            "root_groups": {",".join(map(str, u.root)): u.describe() for u in self.root_groups},
            "N_mod_Z0": len(self.n_representatives),
        }


def _nu_key(inst: ClassicalInstance, n: SLMatrix):
    el = nu_of(inst, n, verify=False)
    return el.linear.action, tuple(el.translation)


class ParahoricFamily:
    """The minimal family Q(x) = <N(x), U_alpha(x)> of a classical SL_n instance.

    Membership is the entry criterion v(g_ij) >= level of eps_i - eps_j at the
    point (0 on the diagonal, entry forced to 0 at level +inf). It is certified
    against word enumeration over the generators by ``certify_membership``.
    """

    def __init__(self, inst: ClassicalInstance):
        if not getattr(inst, "classical", False):
            raise TypeError("parahoric families are built for classical instances only")
        self.instance = inst
        self.model = inst.model
        self.n = inst.n
        self.p = inst.prime
        self._memo: Dict = {}
        self._lock = threading.Lock()

    @property
    def name(self) -> str:
        return self.instance.name

    def levels(self, where) -> Levels:
        shape = _as_shape(where)
        return dict(self._cached("levels", shape, lambda: self._levels(shape)))

    def _cached(self, kind: str, shape: Shape, compute):
        try:
            key = (kind, shape)
            hash(key)
        except TypeError:
            return compute()
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        val = compute()
        with self._lock:
            self._memo[key] = val
        return val

    def _levels(self, shape: Shape) -> Levels:
        return {
            (i, j): level_for(self.model, shape, sl_root(self.n, i, j), "lambda")
            for i in range(self.n) for j in range(self.n) if i != j
        }

    def member(self, g: SLMatrix, where) -> bool:
        levels = where if isinstance(where, dict) else self.levels(where)
        key = (g.rows, tuple(sorted(levels.items())))
        with self._lock:
            hit = self._memo.get(key)
        if hit is not None:
            return hit
        ok = entry_criterion(g, levels, self.p)
        with self._lock:
            self._memo[key] = ok
        return ok

    # generators ------------------------------------------------------------

    def generators(self, where) -> GeneratorDescription:
        shape = _as_shape(where)
        groups = [U_alpha_of(self.model, shape, r) for r in self.instance.roots()]
        return GeneratorDescription(shape, groups, self.n_representatives(shape))

    def wall_lifts(self, x: Sequence) -> List[SLMatrix]:
        """m(x_alpha(p^lambda)) for each root whose wall M(alpha, lambda) passes through x."""
        out = []
        for a in self.instance.roots():
            lam = -self.model.evaluate(a, x)
            if lam.denominator == 1:
                out.append(self.instance.m_of(a, self.instance.x(a, Fraction(self.p) ** int(lam))))
        return out

    def n_representatives(self, where, cap: int = 2000) -> List[SLMatrix]:
        """Representatives of N(Omega)/Z_0, one per affine map, found by closing N(x0) under products."""
        shape = _as_shape(where)
        return list(self._cached("N", shape, lambda: self._n_representatives(shape, cap)))

    def _n_representatives(self, shape: Shape, cap: int) -> List[SLMatrix]:
        pts, dirs = _pointwise_data(self.model, shape)
        x0 = pts[0]
        gens = self.wall_lifts(x0)
        ident = self.instance.identity()
        seen = {_nu_key(self.instance, ident): ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for a in frontier:
                for s in gens:
                    b = a * s
                    k = _nu_key(self.instance, b)
                    if k not in seen:
                        seen[k] = b
                        nxt.append(b)
                        if len(seen) > cap:
                            raise BudgetExceeded(f"N(x) closure exceeded {cap} elements")
            frontier = nxt
        return [n for k, n in sorted(seen.items(), key=lambda kv: str(kv[0])) if self._fixes(n, pts, dirs)]

    def _fixes(self, n: SLMatrix, pts, dirs) -> bool:
        el = nu_of(self.instance, n, verify=False)
        real = self.model.real
        return all(el.apply(real, x) == tuple(x) for x in pts) and all(real.act(el.linear.word, d) == tuple(d) for d in dirs)

    def unit_torus(self, rng: random.Random) -> SLMatrix:
        d = [random_unit(rng, self.p) for _ in range(self.n - 1)]
        prod = Fraction(1)
        for c in d:
            prod *= c
        return diagonal(d + [1 / prod])

    def random_member(self, where, rng: random.Random, length: int = 6, roots: Optional[Sequence[RootT]] = None,
                      with_n: bool = True) -> SLMatrix:
        shape = _as_shape(where)
        roots = list(roots) if roots is not None else self.instance.roots()
        thresholds = {r: level_for(self.model, shape, r, "lambda") for r in roots}
        usable = [r for r in roots if thresholds[r] != INF]
        reps = self.n_representatives(shape) if with_n else [self.instance.identity()]
        g = self.unit_torus(rng)
        for _ in range(length):
            if usable and rng.random() < 0.8:
                r = rng.choice(usable)
                g = g * self.instance.x(r, scalar_at_level(rng, self.p, thresholds[r]))
            else:
                g = g * rng.choice(reps) * self.unit_torus(rng)
        return g

    # decompositions -------------------------------------------------------

    def decompose_dec(self, g: SLMatrix, where, sign: int = 1) -> Optional[Tuple[SLMatrix, SLMatrix, SLMatrix]]:
        """g = a b n with a in Q(Omega) and U(sign C^v), b in Q(Omega) and U(-sign C^v), n in N(Omega)."""
        shape = _as_shape(where)
        levels = self.levels(shape)
        pts, dirs = _pointwise_data(self.model, shape)
        for nw in self.n_representatives(shape):
            h = g * nw.inverse()
            f = _ul(h) if sign > 0 else _lu(h)
            if f is None:
                continue
            a, b, t = f
            if any(_v(t[i, i], self.p) != 0 for i in range(self.n)):
                continue
            n = t * nw
            if self.member(a, levels) and self.member(b, levels) and self._fixes(n, pts, dirs):
                return a, b, n
        return None

    def weyl_lift(self, word: Sequence[int]) -> SLMatrix:
        g = self.instance.identity()
        for i in word:
            a = tuple(int(i == j) for j in range(self.n - 1))
            g = g * self.instance.m_of(a, self.instance.x(a, Fraction(1)))
        return g

    def translation_lift(self, tau_eps: Sequence[Fraction]) -> SLMatrix:
        """Torus element acting by the translation tau (eps coordinates, integral, trace zero)."""
        return diagonal([Fraction(self.p) ** int(-c) for c in tau_eps])

    def nu_apply(self, n: SLMatrix, x: Sequence) -> Vec:
        return nu_of(self.instance, n, verify=False).apply(self.model.real, x)


def entry_criterion(g: SLMatrix, levels: Levels, p: int) -> bool:
    n = g.n
    if g.det() != 1:
        return False
    for i in range(n):
        if _v(g[i, i], p) < 0:
            return False
        for j in range(n):
            if i == j:
                continue
            lev = levels[(i, j)]
            if lev == INF:
                if g[i, j] != 0:
                    return False
            elif lev != NEG_INF and _v(g[i, j], p) < lev:
                return False
    return True


def _lu_plain(rows: List[List[Fraction]]) -> Optional[Tuple[List[List[Fraction]], List[List[Fraction]]]]:
    """Doolittle factorization without pivoting: rows = L U with L unit lower triangular."""
    n = len(rows)
    L = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    U = [list(r) for r in rows]
    for k in range(n):
        if U[k][k] == 0:
            return None
        for i in range(k + 1, n):
            f = U[i][k] / U[k][k]
            L[i][k] = f
            U[i] = [a - f * b for a, b in zip(U[i], U[k])]
    return L, U


def _lu(h: SLMatrix) -> Optional[Tuple[SLMatrix, SLMatrix, SLMatrix]]:
    """h = u_minus u_plus t with unipotent factors and t diagonal (leading minors non-zero)."""
    f = _lu_plain([list(r) for r in h.rows])
    if f is None:
        return None
    L, U = f
    n = h.n
    t = [U[i][i] for i in range(n)]
    up = [[U[i][j] / t[j] for j in range(n)] for i in range(n)]
    return SLMatrix.of(L), SLMatrix.of(up), diagonal(t)


def _ul(h: SLMatrix) -> Optional[Tuple[SLMatrix, SLMatrix, SLMatrix]]:
    """h = u_plus u_minus t (trailing minors non-zero), through the antidiagonal flip."""
    n = h.n
    flip = [[h[n - 1 - i, n - 1 - j] for j in range(n)] for i in range(n)]
    f = _lu_plain(flip)
    if f is None:
        return None
    L, U = f
    up = [[L[n - 1 - i][n - 1 - j] for j in range(n)] for i in range(n)]
    low = [[U[n - 1 - i][n - 1 - j] for j in range(n)] for i in range(n)]
    t = [low[i][i] for i in range(n)]
    um = [[low[i][j] / t[j] for j in range(n)] for i in range(n)]
    return SLMatrix.of(up), SLMatrix.of(um), diagonal(t)


def decide_NQ(g: SLMatrix, levels: Levels, p: int) -> bool:
    """Whether g lies in N.Q for the entry-criterion group Q with these levels.

    n^-1 g scales the rows of g permuted by sigma; row i may be scaled by p^e_i
    with e_i >= max_j (L_ij - v(g_sigma(i) j)), and the e_i must sum to 0.
    """
    n = g.n
    for sigma in itertools.permutations(range(n)):
        total = Fraction(0)
        ok = True
        for i in range(n):
            need = NEG_INF
            for j in range(n):
                entry = g[sigma[i], j]
                lev = Fraction(0) if i == j else levels[(i, j)]
                if entry == 0 or lev == NEG_INF:
                    continue
                if lev == INF:
                    ok = False
                    break
                need = max(need, lev - _v(entry, p))
            if not ok:
                break
            if need == NEG_INF:
                ok = False  # a zero row cannot occur in an invertible matrix
                break
            total += need
        if ok and total <= 0:
            return True
    return False


# ---------------------------------------------------------------------------
# facades of the classical instances


def _blocks(n: int, J: Sequence[int]) -> List[int]:
    """Block index of each eps_i, blocks being the components of J in the A_{n-1} diagram."""
    out, b = [0], 0
    for k in range(n - 1):
        if k not in J:
            b += 1
        out.append(b)
    return out


def facade_member(family: ParahoricFamily, g: SLMatrix, point: FacadePoint) -> bool:
    """Membership in Q([x]) for a point of the essential facade of a fundamental direction +-F^v(J)."""
    direction = point.facade.direction
    if direction.word:
        raise UnsupportedShape("facade membership is implemented for fundamental directions only")
    n, p = family.n, family.p
    if g.det() != 1:
        return False
    blk = _blocks(n, direction.J)
    for i in range(n):
        for j in range(n):
            if g[i, j] != 0 and direction.sign * (blk[i] - blk[j]) > 0:
                return False
    eps = q_to_eps(point.representative)
    for b in set(blk):
        R = [i for i in range(n) if blk[i] == b]
        sub = [[g[i, j] for j in R] for i in R]
        d = exact.det(sub)
        if d == 0:
            return False
        shift = _v(d, p) / len(R)
        for i in R:
            for j in R:
                if g[i, j] != 0 and _v(g[i, j], p) < eps[j] - eps[i] + shift:
                    return False
    return True


# ---------------------------------------------------------------------------
# membership certification


@dataclass
class CertificationReport:
    instance: str
    points: List[Vec]
    enumerated: int = 0
    disagreements: List[dict] = field(default_factory=list)
    discriminations: int = 0
    completeness_checked: int = 0
    frontier_cap: Optional[int] = None

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "points": [[exact.fmt(c) for c in x] for x in self.points],
            "enumerated": self.enumerated,
            "disagreements": len(self.disagreements),
            "discriminations": self.discriminations,
            "completeness_checked": self.completeness_checked,
            "frontier_cap": self.frontier_cap,
        }


def _word_closure(gens: List[SLMatrix], ident: SLMatrix, length: int, cap: Optional[int], rng: random.Random) -> Dict:
    seen = {ident.rows: ident}
    frontier = [ident]
    for _ in range(length):
        nxt = []
        for a in frontier:
            for s in gens:
                b = a * s
                if b.rows not in seen:
                    seen[b.rows] = b
                    nxt.append(b)
        if cap is not None and len(nxt) > cap:
            nxt = rng.sample(nxt, cap)
        frontier = nxt
    return seen


def certify_membership(family: ParahoricFamily, points: Sequence[Sequence], length: int = 6,
                       frontier_cap: Optional[int] = 400, seed: int = 0) -> CertificationReport:
    """Compare the entry criterion with products of at most ``length`` generators.

    Soundness: every enumerated product is accepted. Discrimination: for each
    root, x_alpha(p^(L-1)) is rejected and never produced. Completeness (SL_2,
    uncapped on the unipotent generators): small elements accepted by the
    criterion are reached.
    """
    inst, p = family.instance, family.p
    rng = random.Random(seed)
    rep = CertificationReport(inst.name, [exact.vec(x) for x in points], frontier_cap=frontier_cap)
    for x in rep.points:
        levels = family.levels(x)
        gens = []
        for a in inst.roots():
            lev = level_for(family.model, Point(x), a, "lambda")
            gens += [inst.x(a, Fraction(p) ** int(lev)), inst.x(a, -Fraction(p) ** int(lev))]
        for w in family.wall_lifts(x):
            gens += [w, w.inverse()]
        u = Fraction(p + 1)
        for k in range(inst.n - 1):
            d = [Fraction(1)] * inst.n
            d[k], d[k + 1] = u, 1 / u
            gens += [diagonal(d), diagonal([1 / c for c in d])]
            d = [Fraction(1)] * inst.n
            d[k], d[k + 1] = Fraction(-1), Fraction(-1)
            gens.append(diagonal(d))
        words = _word_closure(gens, inst.identity(), length, frontier_cap, rng)
        rep.enumerated += len(words)
        for g in words.values():
            if not family.member(g, levels):
                rep.disagreements.append({"point": [exact.fmt(c) for c in x], "element": g.to_json(), "kind": "soundness"})
        for a in inst.roots():
            lev = level_for(family.model, Point(x), a, "lambda")
            bad = inst.x(a, Fraction(p) ** (int(lev) - 1))
            rep.discriminations += 1
            if family.member(bad, levels) or bad.rows in words:
                rep.disagreements.append({"point": [exact.fmt(c) for c in x], "element": bad.to_json(), "kind": "discrimination"})
        if inst.n == 2:
            a, b = inst.roots()
            la, lb = (int(level_for(family.model, Point(x), r, "lambda")) for r in (a, b))
            small = [inst.x(a, Fraction(p) ** la), inst.x(a, -Fraction(p) ** la), inst.x(b, Fraction(p) ** lb), inst.x(b, -Fraction(p) ** lb)]
            full = _word_closure(small, inst.identity(), length, None, rng)
            grid = [inst.x(a, k * Fraction(p) ** la) for k in range(-3, 4)] + [inst.x(b, k * Fraction(p) ** lb) for k in range(-3, 4)]
            grid += [inst.x(a, Fraction(p) ** la) * inst.x(b, k * Fraction(p) ** lb) for k in (-2, -1, 1, 2)]
            for g in grid:
                if not family.member(g, levels):
                    continue
                rep.completeness_checked += 1
                if g.rows not in full:
                    rep.disagreements.append({"point": [exact.fmt(c) for c in x], "element": g.to_json(), "kind": "completeness"})
    return rep


# ---------------------------------------------------------------------------
# axiom checks


def sample_points(family: ParahoricFamily, count: int, rng: random.Random) -> List[Vec]:
    dim = family.model.dim
    pts = [(Fraction(0),) * dim]
    while len(pts) < count:
        den = rng.choice((1, 2, 3, 4))
        pts.append(tuple(Fraction(rng.randint(-2 * den, 2 * den), den) for _ in range(dim)))
    return pts


def _fmt_vec(x) -> List[str]:
    return [exact.fmt(c) for c in x]


def check_P1(family: ParahoricFamily, points, rng) -> ValuationReport:
    rep = ValuationReport("P1", family.name)

    bordered = BorderedApartment("essential", family.model)
    m = family.model.matrix
    for x in points:
        rep.samples += 1  # main facade: U(V_0) = {1} and P(V_0) = G
        for J in [(), tuple(range(m.size - 1))] if m.size > 1 else [()]:
            facet = make_facet(m, 1, (), J)
            fp = bordered.point(x, facet)
            blk = _blocks(family.n, J)
            for _ in range(3):
                rep.samples += 1
                u = family.instance.identity()
                for i in range(family.n):
                    for j in range(family.n):
                        if blk[i] < blk[j]:
                            u = u * elementary(family.n, i, j, Fraction(rng.randint(-50, 50), rng.randint(1, 50)))
                if not facade_member(family, u, fp):
                    rep.fail({"point": _fmt_vec(x), "J": list(J), "element": u.to_json(), "kind": "U(F) not in Q"})
                levi_roots = [r for r in family.instance.roots() if root_sign_on_facet(family.model.real, facet, r) == 0]
                g = family.random_member(x, rng, 4, roots=levi_roots + [r for r in family.instance.roots() if root_sign_on_facet(family.model.real, facet, r) > 0], with_n=False)
                if not facade_member(family, g, fp):
                    rep.fail({"point": _fmt_vec(x), "J": list(J), "element": g.to_json(), "kind": "generator product rejected"})
                low = [r for r in family.instance.roots() if root_sign_on_facet(family.model.real, facet, r) < 0]
                if low:
                    bad = family.instance.x(rng.choice(low), Fraction(1))
                    if facade_member(family, bad, fp):
                        rep.fail({"point": _fmt_vec(x), "J": list(J), "element": bad.to_json(), "kind": "outside P(F) accepted"})
    return rep


def check_P2(family: ParahoricFamily, points, rng) -> ValuationReport:
    rep = ValuationReport("P2", family.name)
    for x in points:
        for n in family.n_representatives(x):
            for _ in range(2):
                nz = n * family.unit_torus(rng)
                rep.samples += 1
                if not family.member(nz, x):
                    rep.fail({"point": _fmt_vec(x), "element": nz.to_json()})
    return rep


def check_P3(family: ParahoricFamily, points, rng) -> ValuationReport:
    rep = ValuationReport("P3", family.name)
    inst = family.instance
    for x in points:
        for a in inst.roots():
            lam = math.ceil(-family.model.evaluate(a, x))
            for extra in range(3):
                r = random_unit(rng, family.p) * Fraction(family.p) ** (lam + extra)
                rep.samples += 1
                if not family.member(inst.x(a, r), x):
                    rep.fail({"point": _fmt_vec(x), "root": list(a), "level": lam + extra})
    return rep


def check_P4(family: ParahoricFamily, points, rng) -> ValuationReport:
    rep = ValuationReport("P4", family.name)
    inst = family.instance
    for x in points:
        for _ in range(3):
            n = random_N_element(inst, rng, rng.randint(0, 3))
            y = family.nu_apply(n, x)
            g = family.random_member(x, rng)
            h = family.random_member(y, rng)
            bad = inst.x(rng.choice(inst.roots()), Fraction(family.p) ** -6)
            rep.samples += 3
            if not family.member(n * g * n.inverse(), y):
                rep.fail({"point": _fmt_vec(x), "kind": "n Q(x) n^-1 not in Q(nu(n)x)", "g": g.to_json(), "n": n.to_json()})
            if not family.member(n.inverse() * h * n, x):
                rep.fail({"point": _fmt_vec(x), "kind": "Q(nu(n)x) not in n Q(x) n^-1", "h": h.to_json(), "n": n.to_json()})
            if family.member(bad, x) != family.member(n * bad * n.inverse(), y):
                rep.fail({"point": _fmt_vec(x), "kind": "conjugation changes membership", "g": bad.to_json(), "n": n.to_json()})
    return rep


def check_P5(family: ParahoricFamily, points, rng) -> ValuationReport:
    rep = ValuationReport("P5", family.name)
    inst = family.instance
    for x in points:
        cands = [n * family.unit_torus(rng) for n in family.n_representatives(x)]
        cands += [random_N_element(inst, rng, rng.randint(0, 3)) for _ in range(4)]
        for n in cands:
            rep.samples += 1
            fixes = family.nu_apply(n, x) == tuple(x)
            if fixes != family.member(n, x):
                rep.fail({"point": _fmt_vec(x), "n": n.to_json(), "fixes": fixes})
    return rep


def _conjugated_chamber(family: ParahoricFamily, g: SLMatrix, x: Vec, word: Sequence[int]):
    """Decomposition relative to w C^v, obtained by conjugating the w-lift through the fundamental case."""
    M = family.weyl_lift(word)
    Minv = M.inverse()
    xp = family.nu_apply(Minv, x)
    f = family.decompose_dec(Minv * g * M, xp, 1)
    if f is None:
        return None
    return tuple(M * c * Minv for c in f)


def check_P8(family: ParahoricFamily, points, rng, per_point: int = 5) -> ValuationReport:
    rep = ValuationReport("P8", family.name)
    m = family.model.matrix
    words = [w.word for w in weyl_elements(m, 8)]
    for x in points:
        levels = family.levels(x)
        for _ in range(per_point):
            g = family.random_member(x, rng)
            for label, f in (("+", lambda: family.decompose_dec(g, x, 1)),
                             ("-", lambda: family.decompose_dec(g, x, -1)),
                             ("w", lambda: _conjugated_chamber(family, g, x, rng.choice(words)))):
                rep.samples += 1
                res = f()
                if res is None or res[0] * res[1] * res[2] != g or not all(family.member(c, levels) for c in res):
                    rep.fail({"point": _fmt_vec(x), "chamber": label, "g": g.to_json()})
    return rep


def check_P9_partial(family: ParahoricFamily, points, rng) -> ValuationReport:
    """Q(x) cap P(F^v) fixes x + closure(F^v) in the main facade and pr_{F^v}(x) in one spherical facade."""

    rep = ValuationReport("P9", family.name, status="partial",
                          reason="only the main-facade part of the closure of x + F^v and the projection onto the facade of F^v are checked")
    bordered = BorderedApartment("essential", family.model)
    m = family.model.matrix
    real = family.model.real
    for x in points:
        for J in [()] + ([(0,)] if m.size > 1 else []):
            facet = make_facet(m, 1, (), J)
            roots = [r for r in family.instance.roots() if root_sign_on_facet(real, facet, r) >= 0]
            v = interior_point(real, facet)
            fp = bordered.point(x, facet)
            for _ in range(3):
                g = family.random_member(x, rng, roots=roots, with_n=False)
                for k in (0, 1, 2, 5):
                    rep.samples += 1
                    if not family.member(g, exact.add(x, exact.scale(k, v))):
                        rep.fail({"point": _fmt_vec(x), "J": list(J), "k": k, "g": g.to_json()})
                rep.samples += 1
                if not facade_member(family, g, fp):
                    rep.fail({"point": _fmt_vec(x), "J": list(J), "g": g.to_json(), "kind": "projection"})
    if rep.status != "fail":
        rep.status = "partial"
    return rep


def half_open_levels(family: ParahoricFamily, x: Vec, y: Vec) -> Levels:
    """Levels of Q(]x, y]) as the intersection over the points x + (y - x)/2^k, k <= 40."""
    pts = [exact.add(x, exact.scale(Fraction(1, 2 ** k), exact.sub(y, x))) for k in range(41)]
    out: Levels = {}
    for (i, j), _ in family.levels(x).items():
        a = sl_root(family.n, i, j)
        out[(i, j)] = max(math.ceil(-family.model.evaluate(a, z)) for z in pts)
    return out


def check_P10(family: ParahoricFamily, points, rng) -> ValuationReport:
    rep = ValuationReport("P10", family.name)
    for x in points:
        y = exact.add(x, tuple(Fraction(rng.randint(-8, 8), rng.choice((1, 2, 3))) for _ in x))
        if preorder_leq(family.model, x, y) != "yes" and preorder_leq(family.model, y, x) != "yes":
            continue
        half = half_open_levels(family, x, y)
        closed = family.levels(Segment(x, y))
        rep.samples += 1
        if half != closed:
            rep.fail({"x": _fmt_vec(x), "y": _fmt_vec(y), "kind": "levels differ"})
        for _ in range(3):
            g = family.instance.identity()
            for (i, j), lev in sorted(half.items()):
                g = g * elementary(family.n, i, j, scalar_at_level(rng, family.p, lev))
            rep.samples += 1
            if not family.member(g, x):
                rep.fail({"x": _fmt_vec(x), "y": _fmt_vec(y), "g": g.to_json()})
    return rep


def check_parahoric_axioms(family: ParahoricFamily, points: int = 20, seed: int = 0) -> List[ValuationReport]:
    """Reports for (P1)-(P10) on sampled apartment points of a classical instance."""
    rng = random.Random(seed)
    pts = sample_points(family, points, rng)
    reps = [check_P1(family, pts, rng), check_P2(family, pts, rng), check_P3(family, pts, rng),
            check_P4(family, pts, rng), check_P5(family, pts, rng)]
    reps.append(ValuationReport("P6", family.name, status="pass",
                                reason="Q is the minimal family, so Q(x) = P(x); the entry criterion is matched to P(x) by certify_membership"))
    reps.append(ValuationReport("P7", family.name, status="skipped",
                                reason="needs N.Q(x) intersected with N.P(F^v) across facades; no finite oracle for N.P(F^v)"))
    reps.append(check_P8(family, pts, rng))
    reps.append(check_P9_partial(family, pts, rng))
    reps.append(check_P10(family, pts, rng))
    for r in reps:
        r.seed = seed
    return reps


# ---------------------------------------------------------------------------
# good fixators

_FIXATOR_SHAPES = (Point, Segment, OpenSegmentGerm, LocalFacet, SectorFace, WholeApartment)


def _check_fixator_shape(family: ParahoricFamily, shape: Shape) -> None:
    if not isinstance(shape, _FIXATOR_SHAPES):
        raise UnsupportedShape(f"good fixators are not decided for {shape.kind} shapes")
    if isinstance(shape, (Segment, OpenSegmentGerm)):
        if "yes" not in (preorder_leq(family.model, shape.x, shape.y), preorder_leq(family.model, shape.y, shape.x)):
            raise UnsupportedShape("segment endpoints are not comparable for the preorder")
    if isinstance(shape, (SectorFace, LocalFacet)) and not is_spherical(family.model.matrix, shape.facet.J):
        raise UnsupportedShape("sector faces must have a spherical direction")


def _tf_sample(family: ParahoricFamily, shape: Shape, pts, dirs) -> List[Vec]:
    """Finite stand-in for the points of the shape (of a small shortening for germs)."""
    if isinstance(shape, WholeApartment):
        vals = (Fraction(-24), Fraction(-1, 3), Fraction(0), Fraction(1, 2), Fraction(24))
        return [tuple(v) for v in itertools.product(vals, repeat=shape.dim)]
    scales = (Fraction(1, 2 ** 40),) if isinstance(shape, (OpenSegmentGerm, LocalFacet)) else (1, 3, 50)
    return list(pts) + [exact.add(pts[0], exact.scale(k, d)) for d in dirs for k in scales]


def good_fixator_check(family: ParahoricFamily, shape: Shape, samples: int = 20, seed: int = 0) -> Dict[str, ValuationReport]:
    """Sampled (GF+), (GF-) and (TF) for a supported shape."""
    _check_fixator_shape(family, shape)
    rng = random.Random(seed)
    levels = family.levels(shape)
    pts, dirs = _pointwise_data(family.model, shape)
    out = {}
    pos = [r for r in family.instance.roots() if sum(r) > 0]
    neg = [r for r in family.instance.roots() if sum(r) < 0]
    for sign, label in ((1, "GF+"), (-1, "GF-")):
        rep = ValuationReport(label, family.name, seed=seed)
        for _ in range(samples):
            g = family.random_member(shape, rng)
            rep.samples += 1
            f = family.decompose_dec(g, shape, sign)
            if f is None or f[0] * f[1] * f[2] != g:
                rep.fail({"shape": shape.kind, "g": g.to_json(), "kind": "no decomposition"})
            first, second = (pos, neg) if sign > 0 else (neg, pos)
            a = family.random_member(shape, rng, 3, roots=first, with_n=False)
            b = family.random_member(shape, rng, 3, roots=second, with_n=False)
            n = rng.choice(family.n_representatives(shape)) * family.unit_torus(rng)
            rep.samples += 1
            if not family.member(a * b * n, levels):
                rep.fail({"shape": shape.kind, "kind": "product of factors not in Q", "g": (a * b * n).to_json()})
        out[label] = rep
    rep = ValuationReport("TF", family.name, seed=seed)
    sample = _tf_sample(family, shape, pts, dirs)
    for _ in range(samples):
        n = random_N_element(family.instance, rng, rng.randint(0, 3))
        cands = [n * family.random_member(shape, rng), n * family.random_member(pts[0], rng)]
        for g in cands:
            rep.samples += 1
            lhs = all(decide_NQ(g, family.levels(z), family.p) for z in sample)
            rhs = decide_NQ(g, levels, family.p)
            if lhs != rhs:
                rep.fail({"shape": shape.kind, "g": g.to_json(), "pointwise": lhs, "NQ": rhs})
        rep.samples += 1
        if not decide_NQ(cands[0], levels, family.p):
            rep.fail({"shape": shape.kind, "g": cands[0].to_json(), "kind": "n.q not detected"})
    out["TF"] = rep
    return out


# ---------------------------------------------------------------------------
# the quotient hovel


def fold_to_alcove(family: ParahoricFamily, x: Sequence, step_cap: int = 10000) -> Tuple[SLMatrix, Vec]:
    """n in N and x' = nu(n) x in the closed fundamental alcove {alpha_i >= 0, theta <= 1}."""
    inst, p = family.instance, family.p
    size = family.model.matrix.size
    theta = tuple([1] * size)
    n = inst.identity()
    cur = exact.vec(x)
    for _ in range(step_cap):
        i = next((i for i in range(size) if cur[i] < 0), None)
        if i is not None:
            a = tuple(int(i == j) for j in range(size))
            s = inst.m_of(a, inst.x(a, Fraction(1)))
        elif family.model.evaluate(theta, cur) > 1:
            s = inst.m_of(theta, inst.x(theta, Fraction(1, p)))
        else:
            return n, cur
        n = s * n
        cur = family.nu_apply(s, cur)
    raise BudgetExceeded("folding did not terminate")


def _alcove_vertices(size: int) -> List[Vec]:
    """0 and the fundamental coweights, in simple-root-value coordinates."""
    return [(Fraction(0),) * size] + [tuple(Fraction(int(i == k)) for i in range(size)) for k in range(size)]


def lattice_key(M: Sequence[Sequence[Fraction]], p: int) -> Tuple:
    """Canonical form of the Z_(p)-lattice spanned by the columns of M, up to homothety.

    Hermite form: rows cleared bottom-up against the column of least valuation,
    pivots scaled to powers of p, entries above each pivot reduced modulo it.
    """
    n = len(M)
    a = [[Fraction(c) for c in row] for row in M]
    cols = list(range(n))
    order = [0] * n
    for r in reversed(range(n)):
        c = min(cols, key=lambda j: (v_p(a[r][j], p), j))
        for j in cols:
            if j != c and a[r][j] != 0:
                f = a[r][j] / a[r][c]
                for i in range(n):
                    a[i][j] -= f * a[i][c]
        order[r] = c
        cols.remove(c)
    basis = [[a[i][order[r]] for i in range(n)] for r in range(n)]  # basis[r] has its last non-zero entry at row r
    e = []
    for r in range(n):
        piv = basis[r][r]
        k = int(v_p(piv, p))
        scale = Fraction(p) ** k / piv
        basis[r] = [c * scale for c in basis[r]]
        e.append(k)
    shift = Fraction(p) ** e[0]
    basis = [[c / shift for c in b] for b in basis]
    e = [k - e[0] for k in e]
    for r in range(n):
        for i in reversed(range(r)):
            c = basis[r][i]
            red = _mod_local(c, e[i], p)
            q = (c - red) / Fraction(p) ** e[i]
            if q:
                basis[r] = [x - q * y for x, y in zip(basis[r], basis[i])]
    return tuple(e), tuple(tuple(basis[r][i] for i in range(r)) for r in range(n))


def _mod_local(c: Fraction, e: int, p: int) -> Fraction:
    """Representative of c modulo p^e Z_(p) in [0, p^e) with a p-power denominator."""
    scaled = c / Fraction(p) ** e
    num, den = scaled.numerator, scaled.denominator
    s = 0
    while den % p == 0:
        den //= p
        s += 1
    if s == 0:
        return Fraction(0)
    mod = p ** s
    m = (num * pow(den, -1, mod)) % mod
    return Fraction(m, mod) * Fraction(p) ** e


def vertex_lattice(family: ParahoricFamily, v: Vec) -> SLMatrix:
    """D with Q(v) equal to the stabilizer of the lattice D Z_(p)^n (v integral on roots)."""
    eps = q_to_eps(v)
    c = [int(eps[-1] - e) for e in eps]
    return diagonal([Fraction(family.p) ** k for k in c])


@dataclass(frozen=True)
class HovelPoint:
    """The class of (g, x) in G x A / ~, with a canonical key when the instance is classical."""

    family: ParahoricFamily = field(compare=False, hash=False, repr=False)
    g: SLMatrix
    x: Vec

    def act(self, h: SLMatrix) -> "HovelPoint":
        return HovelPoint(self.family, h * self.g, self.x)

    def canonical(self) -> Tuple[SLMatrix, Vec]:
        n, xp = fold_to_alcove(self.family, self.x)
        return self.g * n.inverse(), xp

    def key(self) -> Tuple:
        gp, xp = self.canonical()
        size = self.family.model.matrix.size
        weights = [1 - sum(xp)] + list(xp)
        lattices = []
        for w, v in zip(weights, _alcove_vertices(size)):
            if w > 0:
                M = gp * vertex_lattice(self.family, v)
                lattices.append(lattice_key([list(r) for r in M.rows], self.family.p))
        return tuple(xp), tuple(lattices)

    def same(self, other: "HovelPoint") -> bool:
        return same_hovel_point(self.family, (self.g, self.x), (other.g, other.x))


def same_hovel_point(family: ParahoricFamily, first: Tuple[SLMatrix, Sequence], second: Tuple[SLMatrix, Sequence],
                     length_cap: int = 12) -> bool:
    """(g, x) ~ (h, y) iff some n in N has nu(n) x = y and g^-1 h n in Q(x).

    Any one n with nu(n) x = y decides, since the others differ by N(x), which
    lies in Q(x). Candidates are w in W^v up to ``length_cap`` with y - w x in
    the coroot lattice, lifted as a torus translation times a monomial matrix.
    """
    g, x = first
    h, y = second
    x, y = exact.vec(x), exact.vec(y)
    m = family.model.matrix
    elements = weyl_elements(m, length_cap)
    complete = max((len(w.word) for w in elements), default=0) < length_cap
    for w in elements:
        wx = family.model.real.act(w.word, x)
        tau = q_to_eps(exact.sub(y, wx))
        if any(c.denominator != 1 for c in tau):
            continue
        n0 = family.translation_lift(tau) * family.weyl_lift(w.word)
        if family.nu_apply(n0, x) != y:
            raise AssertionError("lift does not send x to y")
        return family.member(g.inverse() * h * n0, x)
    if not complete:
        raise UndecidedBeyondBudget("no candidate n within the length cap", len(elements))
    return False


# ---------------------------------------------------------------------------
# Bruhat-Tits tree of SL_2


@dataclass
class TreeVertex:
    key: Tuple
    point: HovelPoint
    depth: int
    parent: Optional[Tuple] = None


@dataclass
class Tree:
    p: int
    depth: int
    vertices: Dict[Tuple, TreeVertex]
    edges: List[Tuple[Tuple, Tuple]]
    root: Tuple
    spheres: List[int]
    apartment: List[Tuple]
    neighbor_counts: Dict[Tuple, int]
    cycles: int = 0

    def regular(self) -> bool:
        return all(c == self.p + 1 for k, c in self.neighbor_counts.items() if self.vertices[k].depth < self.depth)

    def apartment_is_geodesic(self) -> bool:
        edge_set = {frozenset(e) for e in self.edges}
        d = self.depth
        for k, key in zip(range(-d, d + 1), self.apartment):
            if key not in self.vertices or self.vertices[key].depth != abs(k):
                return False
        return all(frozenset((a, b)) in edge_set for a, b in zip(self.apartment, self.apartment[1:]))

    def to_dot(self) -> str:
        def name(k):
            return "v" + hashlib.sha1(repr(k).encode()).hexdigest()[:10]

        app = {frozenset(e) for e in zip(self.apartment, self.apartment[1:])}
        lines = ["graph tree {"]
        for k in sorted(self.vertices, key=lambda k: (self.vertices[k].depth, name(k))):
            lines.append(f'  {name(k)} [label="{name(k)[1:9]}"];')
        for a, b in sorted(self.edges, key=lambda e: (name(e[0]), name(e[1]))):
            style = " [style=bold, color=red]" if frozenset((a, b)) in app else ""
            lines.append(f"  {name(a)} -- {name(b)}{style};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _neighbors(family: ParahoricFamily, g: SLMatrix, k: int) -> List[Tuple[SLMatrix, int]]:
    p = family.p
    out = [(g * elementary(2, 1, 0, Fraction(r) * Fraction(p) ** k), k + 1) for r in range(p)]
    out.append((g, k - 1))
    return out


def _threads(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, threads)
    try:
        return max(1, int(os.environ.get("HOVELKIT_THREADS", "1")))
    except ValueError:
        return 1


def build_tree(family: ParahoricFamily, depth: int, threads: Optional[int] = None) -> Tree:
    """The Bruhat-Tits tree of SL_2(Q, v_p) around the vertex i(0), to the given depth.

    Vertex (g, k) is the class of (g, k) with k the value of the simple root;
    its neighbours are (g x_-alpha(r p^k), k+1) for r = 0..p-1 and (g, k-1).
    """
    p = family.p
    if family.n != 2:
        raise ValueError("the tree is built for SL_2")
    if p > 5 or depth > 6 or depth < 0:
        raise BudgetExceeded(f"tree budget is p <= 5 and depth <= 6 (got p={p}, depth={depth})")
    ident = family.instance.identity()
    root_pt = HovelPoint(family, ident, (Fraction(0),))
    root = root_pt.key()
    vertices = {root: TreeVertex(root, root_pt, 0)}
    edges: List[Tuple[Tuple, Tuple]] = []
    counts: Dict[Tuple, int] = {}
    spheres = [1]
    frontier = [root]
    cycles = 0

    def expand(key):
        v = vertices[key]
        out = []
        for h, k in _neighbors(family, v.point.g, int(v.point.x[0])):
            pt = HovelPoint(family, h, (Fraction(k),))
            out.append((pt.key(), pt))
        return key, out

    workers = _threads(threads)
    for d in range(1, depth + 1):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                results = list(ex.map(expand, frontier))
        else:
            results = [expand(k) for k in frontier]
        nxt = []
        for key, out in sorted(results, key=lambda r: repr(r[0])):
            counts[key] = len({k for k, _ in out})
            for nk, pt in sorted(out, key=lambda r: repr(r[0])):
                if nk == vertices[key].parent:
                    continue
                if nk in vertices:
                    cycles += 1
                    continue
                vertices[nk] = TreeVertex(nk, pt, d, key)
                edges.append((key, nk))
                nxt.append(nk)
        spheres.append(len(nxt))
        frontier = sorted(nxt, key=repr)
    apartment = [HovelPoint(family, ident, (Fraction(k),)).key() for k in range(-depth, depth + 1)]
    return Tree(p, depth, vertices, edges, root, spheres, apartment, counts, cycles)


def tree_cross_check(tree: Tree, pairs: int = 40, seed: int = 0) -> List[dict]:
    """Compare key equality with same_hovel_point on sampled vertex pairs (and translates)."""
    rng = random.Random(seed)
    keys = sorted(tree.vertices, key=repr)
    bad = []
    for _ in range(pairs):
        a, b = rng.choice(keys), rng.choice(keys)
        va, vb = tree.vertices[a].point, tree.vertices[b].point
        if (a == b) != va.same(vb):
            bad.append({"a": repr(a), "b": repr(b)})
        # a different representative of the same vertex
        fam = va.family
        n = random_N_element(fam.instance, rng, rng.randint(0, 2))
        alt = HovelPoint(fam, va.g * n.inverse(), fam.nu_apply(n, va.x))
        if alt.key() != a or not alt.same(va):
            bad.append({"a": repr(a), "kind": "representative change"})
    return bad


# ---------------------------------------------------------------------------
# hovel spot checks


def random_group_element(family: ParahoricFamily, rng: random.Random, length: int = 5) -> SLMatrix:
    inst = family.instance
    g = inst.sample_Z(rng)
    for _ in range(length):
        a = rng.choice(inst.roots())
        g = g * inst.x(a, inst.sample_scalar(rng))
    return g


def check_MAO(family: ParahoricFamily, trials: int = 100, seed: int = 0, grid: int = 4) -> ValuationReport:
    """Two apartments g.A and h.A through X = g.i(x) and Y = g.i(y) give the same segment [X, Y].

    h = g q n with q in Q({x, y}) and n in N; in h.A the endpoints sit at
    nu(n)^-1 x and nu(n)^-1 y, and the segment points are compared on a grid.
    """
    rng = random.Random(seed)
    rep = ValuationReport("MAO", family.name, seed=seed)
    dim = family.model.dim
    for t in range(trials):
        g = random_group_element(family, rng)
        x = tuple(Fraction(rng.randint(-8, 8), rng.choice((1, 2, 4))) for _ in range(dim))
        y = x if t % 10 == 0 else tuple(Fraction(rng.randint(-8, 8), rng.choice((1, 2, 4))) for _ in range(dim))
        if preorder_leq(family.model, x, y) != "yes":
            x, y = y, x
        if t % 10 == 1:
            q, n = family.instance.identity(), family.instance.identity()
        else:
            q = family.random_member(FiniteSet((x, y)), rng)
            n = random_N_element(family.instance, rng, rng.randint(0, 3))
        h = g * q * n
        back = invert(family.model, nu_of(family.instance, n, verify=False))
        for k in range(grid + 1):
            z = exact.add(x, exact.scale(Fraction(k, grid), exact.sub(y, x)))
            zz = apply(family.model, back, z)
            rep.samples += 1
            if not same_hovel_point(family, (g, z), (h, zz)):
                rep.fail({"trial": t, "x": _fmt_vec(x), "y": _fmt_vec(y), "t": f"{k}/{grid}"})
    return rep


def iwasawa_and_BBI_checks(family: ParahoricFamily, samples: int = 200, seed: int = 0) -> List[ValuationReport]:
    """G = U+ N Q(x) and G = Q(x) N Q(y) on random elements, through folding and Iwahori elimination."""
    rng = random.Random(seed)
    iw = ValuationReport("Iwasawa", family.name, seed=seed)
    bbi = ValuationReport("BBI", family.name, seed=seed)
    dim = family.model.dim
    for k in range(samples):
        g = family.instance.identity() if k == 0 else random_group_element(family, rng)
        x = tuple(Fraction(rng.randint(-6, 6), rng.choice((1, 2, 3))) for _ in range(dim))
        y = tuple(Fraction(rng.randint(-6, 6), rng.choice((1, 2, 3))) for _ in range(dim))
        nx, _ = fold_to_alcove(family, x)
        ny, _ = fold_to_alcove(family, y)
        d = iwasawa_decompose_alcove(g * nx.inverse(), family.p)
        u, mid, q = d.left, d.middle * nx, nx.inverse() * d.right * nx
        iw.samples += 1
        if not (is_unipotent_upper(u) and is_monomial(mid) and family.member(q, x) and u * mid * q == g):
            iw.fail({"index": k, "g": g.to_json(), "x": _fmt_vec(x)})
        d = iwahori_decompose(nx * g * ny.inverse(), family.p)
        q1, mid, q2 = nx.inverse() * d.left * nx, nx.inverse() * d.middle * ny, ny.inverse() * d.right * ny
        bbi.samples += 1
        if not (family.member(q1, x) and is_monomial(mid) and family.member(q2, y) and q1 * mid * q2 == g):
            bbi.fail({"index": k, "g": g.to_json(), "x": _fmt_vec(x), "y": _fmt_vec(y)})
    return [iw, bbi]


# ---------------------------------------------------------------------------
# residue root systems


@dataclass(frozen=True)
class ResidueSystem:
    x: Vec
    roots: Tuple[RootT, ...]
    slice_size: int

    @property
    def special(self) -> bool:
        return len(self.roots) == self.slice_size

    def closure_violations(self, model: ApartmentModel) -> List[Tuple[RootT, RootT]]:
        """Pairs (alpha, beta) of Phi_x with s_alpha(beta) inside the cap but outside Phi_x."""
        m = model.matrix
        have = set(self.roots)
        out = []
        for a in self.roots:
            for b in self.roots:
                c = _reflect(m, a, b)
                if sum(abs(t) for t in c) <= model.height_cap and c not in have:
                    out.append((a, b))
        neg = [(a, a) for a in self.roots if tuple(-t for t in a) not in have]
        return neg + out

    def to_dict(self) -> dict:
        return {"x": _fmt_vec(self.x), "roots": [list(r) for r in self.roots], "special": self.special}


def _reflect(m, alpha: RootT, beta: RootT) -> RootT:
    cor = real_coroot(m, alpha)
    k = sum(cor[i] * sum(m.entries[i][j] * beta[j] for j in range(m.size)) for i in range(m.size))
    return tuple(b - k * a for a, b in zip(alpha, beta))


def residue_roots(model: ApartmentModel, x: Sequence) -> ResidueSystem:
    """Phi_x = {alpha real within the cap : -alpha(x) in Lambda_alpha}."""
    x = exact.vec(x)
    roots = model.real_roots()
    keep = tuple(r.coords for r in roots if model.in_lambda(r.coords, -model.evaluate(r.coords, x)))
    return ResidueSystem(x, keep, len(roots))
