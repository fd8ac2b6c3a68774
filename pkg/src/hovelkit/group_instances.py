"""Concrete valued root data: SL_2 and SL_3 over Q with a p-adic valuation, loop SL_2 over
Laurent polynomials, and the elimination algorithms behind the Bruhat, Birkhoff, Iwasawa and
Iwahori factorizations."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import exact
from .affine_apartment import make_model
from .kac_core import ALIASES, KacMoodyMatrix, WeylElement, real_roots, sort_key, word_for_action
from .valuated_datum import RootDatumInstance, v_p
from .vectorial import normal_form

RootT = Tuple[int, ...]


class NotPrime(ValueError):
    pass


def _check_prime(p: int) -> None:
    if p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
        raise NotPrime(f"{p} is not prime")


@dataclass(frozen=True)
class PAdicScalar:
    value: Fraction
    prime: int

    @property
    def valuation(self):
        return v_p(self.value, self.prime)

    def __mul__(self, other: "PAdicScalar") -> "PAdicScalar":
        return PAdicScalar(self.value * other.value, self.prime)

    def __add__(self, other: "PAdicScalar") -> "PAdicScalar":
        return PAdicScalar(self.value + other.value, self.prime)


# ---------------------------------------------------------------------------
# matrices over Q


@dataclass(frozen=True)
class SLMatrix:
    rows: Tuple[Tuple[Fraction, ...], ...]

    @classmethod
    def of(cls, rows: Sequence[Sequence]) -> "SLMatrix":
        return cls(tuple(tuple(Fraction(x) for x in r) for r in rows))

    @classmethod
    def identity(cls, n: int) -> "SLMatrix":
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    def __mul__(self, other: "SLMatrix") -> "SLMatrix":
        return SLMatrix(tuple(tuple(r) for r in exact.mat_mul(self.rows, other.rows)))

    def inverse(self) -> "SLMatrix":
        return SLMatrix(tuple(tuple(r) for r in exact.mat_inv(self.rows)))

    def det(self) -> Fraction:
        return exact.det(self.rows)

    def transpose(self) -> "SLMatrix":
        return SLMatrix(tuple(zip(*self.rows)))

    def __getitem__(self, ij: Tuple[int, int]) -> Fraction:
        return self.rows[ij[0]][ij[1]]

    def to_json(self) -> str:
        return json.dumps([[exact.fmt(x) for x in r] for r in self.rows])

    @classmethod
    def from_json(cls, text: str) -> "SLMatrix":
        return cls.of(json.loads(text))


def elementary(n: int, i: int, j: int, r) -> SLMatrix:
    rows = [[Fraction(int(a == b)) for b in range(n)] for a in range(n)]
    rows[i][j] += Fraction(r)
    return SLMatrix.of(rows)


def diagonal(entries: Sequence) -> SLMatrix:
    n = len(entries)
    return SLMatrix.of([[Fraction(entries[i]) if i == j else 0 for j in range(n)] for i in range(n)])


def sl_root(n: int, i: int, j: int) -> RootT:
    """Coordinates of eps_i - eps_j on the simple roots eps_k - eps_{k+1}."""
    lo, hi = min(i, j), max(i, j)
    sign = 1 if i < j else -1
    return tuple(sign if lo <= k < hi else 0 for k in range(n - 1))


def sl_indices(root: Sequence[int]) -> Tuple[int, int]:
    support = [k for k, c in enumerate(root) if c != 0]
    lo, hi = support[0], support[-1] + 1
    if any(root[k] not in (1, -1) for k in support) or support != list(range(lo, hi)) or len(set(root[k] for k in support)) != 1:
        raise ValueError(f"{tuple(root)} is not a root of type A")
    return (lo, hi) if root[lo] > 0 else (hi, lo)


def eps_to_q(x: Sequence) -> Tuple[Fraction, ...]:
    return tuple(Fraction(x[k]) - Fraction(x[k + 1]) for k in range(len(x) - 1))


def q_to_eps(q: Sequence) -> Tuple[Fraction, ...]:
    """Point of the trace-zero hyperplane with the given simple-root values."""
    vals = [Fraction(0)]
    for c in reversed(q):
        vals.append(vals[-1] + Fraction(c))
    vals.reverse()
    mean = sum(vals, Fraction(0)) / len(vals)
    return tuple(v - mean for v in vals)


# ---------------------------------------------------------------------------
# elimination


@dataclass(frozen=True)
class Decomposition:
    """input = left * middle * right, with ``cell`` the Weyl label of the monomial middle factor."""

    kind: str
    left: SLMatrix
    middle: SLMatrix
    right: SLMatrix
    cell: WeylElement

    def product(self) -> SLMatrix:
        return self.left * self.middle * self.right


class _Eliminator:
    """Mutable working copy tracking L and R with L g R = current."""

    def __init__(self, g: SLMatrix):
        n = g.n
        self.n = n
        self.a = [list(r) for r in g.rows]
        self.L = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        self.R = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]

    def row_add(self, i: int, k: int, s: Fraction) -> None:
        """row i += s * row k (left multiplication by I + s E_ik)."""
        if s == 0:
            return
        for M in (self.a, self.L):
            M[i] = [x + s * y for x, y in zip(M[i], M[k])]

    def col_add(self, j: int, i: int, s: Fraction) -> None:
        """col j += s * col i (right multiplication by I + s E_ij)."""
        if s == 0:
            return
        for M in (self.a, self.R):
            for row in M:
                row[j] += s * row[i]

    def result(self, kind: str, m: KacMoodyMatrix) -> Decomposition:
        mid = SLMatrix.of(self.a)
        left = SLMatrix.of(self.L).inverse()
        right = SLMatrix.of(self.R).inverse()
        return Decomposition(kind, left, mid, right, monomial_cell(m, mid))


def monomial_cell(m: KacMoodyMatrix, mono: SLMatrix) -> WeylElement:
    n = mono.n
    sigma = []
    for j in range(n):
        rows = [i for i in range(n) if mono[i, j] != 0]
        if len(rows) != 1:
            raise ValueError("matrix is not monomial")
        sigma.append(rows[0])
    images = [sl_root(n, sigma[k], sigma[k + 1]) for k in range(n - 1)]
    action = tuple(tuple(images[c][r] for c in range(n - 1)) for r in range(n - 1))
    return normal_form(m, word_for_action(m, action))


def _type_a(n: int) -> KacMoodyMatrix:
    return KacMoodyMatrix.from_rows([[2 if i == j else (-1 if abs(i - j) == 1 else 0) for j in range(n - 1)] for i in range(n - 1)])


def birkhoff_decompose(g: SLMatrix) -> Decomposition:
    """g = u+ n u- : rows bottom-up, pivot at the rightmost nonzero entry."""
    e = _Eliminator(g)
    cols = list(range(g.n))
    for r in reversed(range(g.n)):
        c = max(j for j in cols if e.a[r][j] != 0)
        for j in cols:
            if j < c and e.a[r][j] != 0:
                e.col_add(j, c, -e.a[r][j] / e.a[r][c])
        for i in range(r):
            e.row_add(i, r, -e.a[i][c] / e.a[r][c])
        cols.remove(c)
    return e.result("birkhoff", _type_a(g.n))


def bruhat_decompose(g: SLMatrix, sign: int = 1) -> Decomposition:
    """g = b n b' with b, b' upper (sign +) or lower (sign -) triangular."""
    if sign < 0:
        d = bruhat_decompose(g.transpose(), 1)
        m = _type_a(g.n)
        mid = d.middle.transpose()
        return Decomposition("bruhat-", d.right.transpose(), mid, d.left.transpose(), monomial_cell(m, mid))
    e = _Eliminator(g)
    cols = list(range(g.n))
    for r in reversed(range(g.n)):
        c = min(j for j in cols if e.a[r][j] != 0)
        for j in cols:
            if j > c and e.a[r][j] != 0:
                e.col_add(j, c, -e.a[r][j] / e.a[r][c])
        for i in range(r):
            e.row_add(i, r, -e.a[i][c] / e.a[r][c])
        cols.remove(c)
    return e.result("bruhat+", _type_a(g.n))


def iwasawa_decompose_alcove(g: SLMatrix, p: int) -> Decomposition:
    """g = u n k with u in U+, n monomial and k in the standard Iwahori subgroup.

    The Iwahori subgroup is integral at p with strictly lower entries in pZ_(p).
    Rows are cleared bottom-up; the pivot is the leftmost entry of least
    valuation, which keeps every column operation inside the Iwahori.
    """
    e = _Eliminator(g)
    cols = list(range(g.n))
    for r in reversed(range(g.n)):
        best = min(v_p(e.a[r][j], p) for j in cols)
        c = min(j for j in cols if v_p(e.a[r][j], p) == best)
        for j in cols:
            if j != c and e.a[r][j] != 0:
                e.col_add(j, c, -e.a[r][j] / e.a[r][c])
        for i in range(r):
            e.row_add(i, r, -e.a[i][c] / e.a[r][c])
        cols.remove(c)
    return e.result("iwasawa", _type_a(g.n))


def iwahori_decompose(g: SLMatrix, p: int) -> Decomposition:
    """g = k n k' with k, k' in the standard Iwahori subgroup (Bruhat-Tits decomposition)."""
    e = _Eliminator(g)
    rows, cols = list(range(g.n)), list(range(g.n))
    while rows:
        best = min(v_p(e.a[i][j], p) for i in rows for j in cols)
        r = max(i for i in rows for j in cols if v_p(e.a[i][j], p) == best)
        c = min(j for j in cols if v_p(e.a[r][j], p) == best)
        piv = e.a[r][c]
        for i in rows:
            if i != r:
                e.row_add(i, r, -e.a[i][c] / piv)
        for j in cols:
            if j != c:
                e.col_add(j, c, -e.a[r][j] / piv)
        rows.remove(r)
        cols.remove(c)
    return e.result("iwahori", _type_a(g.n))


def bruhat_cell(inst: "ClassicalInstance", g: SLMatrix, sign: int = 1) -> WeylElement:
    return bruhat_decompose(g, sign).cell


def birkhoff_cell(inst: "ClassicalInstance", g: SLMatrix) -> WeylElement:
    return birkhoff_decompose(g).cell


def iwasawa_decompose(inst: "ClassicalInstance", g: SLMatrix) -> Decomposition:
    return iwasawa_decompose_alcove(g, inst.prime)


def in_iwahori(g: SLMatrix, p: int) -> bool:
    n = g.n
    return all(v_p(g[i, j], p) >= (1 if i > j else 0) for i in range(n) for j in range(n)) and v_p(g.det(), p) == 0


def is_unipotent_upper(g: SLMatrix) -> bool:
    return all(g[i, j] == (1 if i == j else g[i, j]) for i in range(g.n) for j in range(g.n)) and all(
        g[i, j] == 0 for i in range(g.n) for j in range(i)
    )


def is_unipotent_lower(g: SLMatrix) -> bool:
    return is_unipotent_upper(g.transpose())


def is_monomial(g: SLMatrix) -> bool:
    return all(sum(1 for j in range(g.n) if g[i, j] != 0) == 1 for i in range(g.n)) and all(
        sum(1 for i in range(g.n) if g[i, j] != 0) == 1 for j in range(g.n)
    )


# ---------------------------------------------------------------------------
# classical instances


class ClassicalInstance(RootDatumInstance):
    """SL_n over Q, root groups I + r E_ij, Z the diagonal torus, phi = v_p."""

    classical = True

    def __init__(self, n: int, p: int, height_cap: Optional[int] = None):
        _check_prime(p)
        self.n = n
        self.prime = p
        self.name = f"SL{n}(Q,v{p})"
        self.matrix = _type_a(n)
        self.model = make_model(self.matrix, 1, height_cap or n)

    def roots(self) -> List[RootT]:
        return sorted((sl_root(self.n, i, j) for i in range(self.n) for j in range(self.n) if i != j), key=sort_key)

    def identity(self) -> SLMatrix:
        return SLMatrix.identity(self.n)

    def x(self, root: RootT, r) -> SLMatrix:
        i, j = sl_indices(root)
        return elementary(self.n, i, j, r)

    def identify_root_element(self, g: SLMatrix):
        off = [(i, j) for i in range(self.n) for j in range(self.n) if g[i, j] != (1 if i == j else 0)]
        if len(off) != 1 or off[0][0] == off[0][1]:
            return None
        i, j = off[0]
        return sl_root(self.n, i, j), g[i, j]

    def in_Z(self, g: SLMatrix) -> bool:
        return all(g[i, j] == 0 for i in range(self.n) for j in range(self.n) if i != j)

    def sample_Z(self, rng: random.Random) -> SLMatrix:
        d = [self.sample_scalar(rng) for _ in range(self.n - 1)]
        prod = Fraction(1)
        for x in d:
            prod *= x
        return diagonal(d + [1 / prod])

    def torus(self, entries: Sequence) -> SLMatrix:
        return diagonal(entries)

    def prenilpotent_pairs(self) -> List[Tuple[RootT, RootT]]:
        roots = self.roots()
        return [(a, b) for a in roots for b in roots if a != b and a != tuple(-c for c in b)]

    def commutator_decomposition(self, a, b, g):
        """Chevalley identity: [x_ij(s), x_jl(t)] = x_il(st), [x_ij(s), x_ki(t)] = x_kj(-st), else 1."""
        if g == self.identity():
            return []
        ident = self.identify_root_element(g)
        if ident is None:
            return None
        gamma = tuple(x + y for x, y in zip(a, b))
        if ident[0] != gamma:
            return None
        return [(gamma, (1, 1), ident[1])]

    def in_U_minus(self, g: SLMatrix) -> bool:
        return is_unipotent_lower(g)

    def birkhoff(self, g: SLMatrix) -> Decomposition:
        return birkhoff_decompose(g)


def sl2_instance(p: int = 2) -> ClassicalInstance:
    return ClassicalInstance(2, p)


def sl3_instance(p: int = 2) -> ClassicalInstance:
    return ClassicalInstance(3, p)


# ---------------------------------------------------------------------------
# loop SL_2


@dataclass(frozen=True)
class Laurent:
    """Laurent polynomial with rational coefficients, as sorted (exponent, coefficient) pairs."""

    terms: Tuple[Tuple[int, Fraction], ...] = ()

    @classmethod
    def of(cls, d: Dict[int, Fraction]) -> "Laurent":
        return cls(tuple(sorted((int(k), Fraction(v)) for k, v in d.items() if v != 0)))

    @classmethod
    def const(cls, c) -> "Laurent":
        return cls.of({0: Fraction(c)})

    @classmethod
    def monomial(cls, c, e: int) -> "Laurent":
        return cls.of({e: Fraction(c)})

    def __add__(self, other: "Laurent") -> "Laurent":
        d = dict(self.terms)
        for k, v in other.terms:
            d[k] = d.get(k, Fraction(0)) + v
        return Laurent.of(d)

    def __neg__(self) -> "Laurent":
        return Laurent(tuple((k, -v) for k, v in self.terms))

    def __sub__(self, other: "Laurent") -> "Laurent":
        return self + (-other)

    def __mul__(self, other: "Laurent") -> "Laurent":
        d: Dict[int, Fraction] = {}
        for k1, v1 in self.terms:
            for k2, v2 in other.terms:
                d[k1 + k2] = d.get(k1 + k2, Fraction(0)) + v1 * v2
        return Laurent.of(d)

    def is_zero(self) -> bool:
        return not self.terms

    def to_dict(self) -> Dict[str, str]:
        return {str(k): exact.fmt(v) for k, v in self.terms}


ZERO, ONE = Laurent(), Laurent.const(1)


@dataclass(frozen=True)
class LoopSL2Element:
    a: Laurent
    b: Laurent
    c: Laurent
    d: Laurent

    @classmethod
    def identity(cls) -> "LoopSL2Element":
        return cls(ONE, ZERO, ZERO, ONE)

    def __mul__(self, o: "LoopSL2Element") -> "LoopSL2Element":
        return LoopSL2Element(
            self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d,
        )

    def det(self) -> Laurent:
        return self.a * self.d - self.b * self.c

    def inverse(self) -> "LoopSL2Element":
        if self.det() != ONE:
            raise ValueError("determinant is not 1")
        return LoopSL2Element(self.d, -self.b, -self.c, self.a)

    def to_json(self) -> str:
        return json.dumps([[self.a.to_dict(), self.b.to_dict()], [self.c.to_dict(), self.d.to_dict()]])


class LoopSL2Instance(RootDatumInstance):
    """SL_2 over Q[t, 1/t] with roots alpha + n delta (upper entry r t^n) and -alpha + n delta
    (lower entry r t^n).  In simple-root coordinates alpha_1 = alpha and alpha_0 = delta - alpha,
    so alpha + n delta = (n, n + 1) and -alpha + n delta = (n, n - 1)."""

    classical = False

    def __init__(self, p: int = 2, height_cap: int = 5):
        _check_prime(p)
        self.prime = p
        self.name = f"loopSL2(Q,v{p})"
        self.matrix = KacMoodyMatrix.from_rows(ALIASES["aff_a1"])
        self.model = make_model(self.matrix, 1, height_cap)
        self.height_cap = height_cap

    def roots(self) -> List[RootT]:
        return [r.coords for r in real_roots(self.matrix, self.height_cap)]

    def identity(self) -> LoopSL2Element:
        return LoopSL2Element.identity()

    @staticmethod
    def _shape(root: Sequence[int]) -> Tuple[bool, int]:
        n0, n1 = root
        if n1 - n0 not in (1, -1):
            raise ValueError(f"{tuple(root)} is not a real root of the loop group")
        return n1 - n0 == 1, n0

    def x(self, root: RootT, r) -> LoopSL2Element:
        upper, n = self._shape(root)
        mono = Laurent.monomial(r, n)
        return LoopSL2Element(ONE, mono, ZERO, ONE) if upper else LoopSL2Element(ONE, ZERO, mono, ONE)

    def identify_root_element(self, g: LoopSL2Element):
        if g.a != ONE or g.d != ONE:
            return None
        if g.c.is_zero() and len(g.b.terms) == 1:
            n, r = g.b.terms[0]
            return (n, n + 1), r
        if g.b.is_zero() and len(g.c.terms) == 1:
            n, r = g.c.terms[0]
            return (n, n - 1), r
        return None

    def in_Z(self, g: LoopSL2Element) -> bool:
        consts = all(len(x.terms) == 1 and x.terms[0][0] == 0 for x in (g.a, g.d))
        return consts and g.b.is_zero() and g.c.is_zero()

    def sample_Z(self, rng: random.Random) -> LoopSL2Element:
        c = self.sample_scalar(rng)
        return LoopSL2Element(Laurent.const(c), ZERO, ZERO, Laurent.const(1 / c))

    def diag_t(self, c, m: int) -> LoopSL2Element:
        """diag(c t^m, c^-1 t^-m): in Z when m = 0, otherwise in N with non-trivial linear part."""
        return LoopSL2Element(Laurent.monomial(c, m), ZERO, ZERO, Laurent.monomial(1 / Fraction(c), -m))

    def prenilpotent_pairs(self) -> List[Tuple[RootT, RootT]]:
        """Pairs whose alpha-parts have the same sign; their root groups commute."""
        roots = self.roots()
        return [(a, b) for a in roots for b in roots if a != b and (a[1] - a[0]) == (b[1] - b[0])]

    def commutator_decomposition(self, a, b, g):
        return [] if g == self.identity() else None


def loop_sl2_instance(p: int = 2, height_cap: int = 5) -> LoopSL2Instance:
    return LoopSL2Instance(p, height_cap)


INSTANCES: Dict[str, Callable[[int], RootDatumInstance]] = {
    "sl2": sl2_instance,
    "sl3": sl3_instance,
    "loop_sl2": loop_sl2_instance,
}
