"""Kac-Moody matrices, root generating systems, roots and the vectorial Weyl group.

Everything here is exact integer or rational arithmetic.  Roots are integer
vectors over the simple roots; heights are always capped explicitly.

>>> a2 = KacMoodyMatrix.from_rows([[2, -1], [-1, 2]])
>>> len(real_roots(a2, 2))
6
>>> simple_reflection(a2, 0, (0, 1))
(1, 1)
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_form

from . import exact

IntVec = Tuple[int, ...]
IntMat = Tuple[Tuple[int, ...], ...]

MEMORY_SOFT_LIMIT = 2_000_000
WEYL_FINITENESS_LIMIT = 1_000_000


class NotGCM(ValueError):
    """A generalized Cartan matrix invariant fails."""

    def __init__(self, message: str, entry: Tuple[int, int]):
        super().__init__(message)
        self.entry = entry


class NonSquare(ValueError):
    pass


class IndexOutOfRange(IndexError):
    pass


class CapTooLargeForMemory(MemoryError):
    pass


@dataclass(frozen=True)
class KacMoodyMatrix:
    size: int
    entries: IntMat

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "KacMoodyMatrix":
        rows = [list(r) for r in rows]
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise NonSquare(f"matrix must be square and nonempty, got {len(rows)} rows")
        m = cls(n, tuple(tuple(int(x) for x in r) for r in rows))
        m.validate()
        return m

    @classmethod
    def from_json(cls, text: str) -> "KacMoodyMatrix":
        data = json.loads(text)
        if isinstance(data, dict):
            rows = data["entries"]
            if len(rows) != data.get("size", len(rows)):
                raise NonSquare("size does not match entries")
        else:
            rows = data
        return cls.from_rows(rows)

    def to_json(self) -> str:
        return json.dumps({"size": self.size, "entries": [list(r) for r in self.entries]})

    def validate(self) -> None:
        a = self.entries
        for i in range(self.size):
            if a[i][i] != 2:
                raise NotGCM(f"diagonal entry a[{i}][{i}] = {a[i][i]} is not 2", (i, i))
            for j in range(self.size):
                if i == j:
                    continue
                if a[i][j] > 0:
                    raise NotGCM(f"off-diagonal entry a[{i}][{j}] = {a[i][j]} is positive", (i, j))
                if (a[i][j] == 0) != (a[j][i] == 0):
                    raise NotGCM(f"zero pattern not symmetric at a[{i}][{j}]", (i, j))

    def __getitem__(self, ij: Tuple[int, int]) -> int:
        return self.entries[ij[0]][ij[1]]

    def sub(self, indices: Sequence[int]) -> "KacMoodyMatrix":
        idx = list(indices)
        return KacMoodyMatrix(len(idx), tuple(tuple(self.entries[i][j] for j in idx) for i in idx))

    def max_offdiag(self) -> int:
        return max((abs(x) for r in self.entries for x in r), default=2)

    def blocks(self) -> List[Tuple[int, ...]]:
        """Indecomposable blocks as sorted index tuples."""
        seen: set = set()
        out = []
        for s in range(self.size):
            if s in seen:
                continue
            comp, stack = [], [s]
            seen.add(s)
            while stack:
                i = stack.pop()
                comp.append(i)
                for j in range(self.size):
                    if j not in seen and self.entries[i][j] != 0:
                        seen.add(j)
                        stack.append(j)
            out.append(tuple(sorted(comp)))
        return out


@dataclass(frozen=True)
class RootGeneratingSystem:
    """A matrix together with a lattice Y, simple root forms and simple coroots.

    ``simple_root_forms[j]`` lists the values of the j-th simple root on the
    basis of Y; ``simple_coroots[i]`` is the i-th coroot in that basis.
    """

    matrix: KacMoodyMatrix
    rank_y: int
    simple_root_forms: Tuple[Tuple[Fraction, ...], ...]
    simple_coroots: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        a = self.matrix.entries
        for i, cor in enumerate(self.simple_coroots):
            for j, form in enumerate(self.simple_root_forms):
                if exact.dot(form, cor) != a[i][j]:
                    raise ValueError(f"root {j} on coroot {i} is not a[{i}][{j}]")

    @property
    def free(self) -> bool:
        return exact.rank(self.simple_root_forms) == self.matrix.size

    @property
    def adjoint(self) -> bool:
        # The roots generate X = Hom(Y, Z) iff their integer span is the whole
        # dual lattice, i.e. the Smith invariants are all 1.
        forms = [[int(x) for x in f] for f in self.simple_root_forms]
        if any(Fraction(x).denominator != 1 for f in self.simple_root_forms for x in f):
            return False
        if exact.rank(forms) != self.rank_y:
            return False
        snf = smith_normal_form(Matrix(forms))
        return all(abs(snf[i, i]) == 1 for i in range(self.rank_y))

    @classmethod
    def minimal_adjoint(cls, m: KacMoodyMatrix) -> "RootGeneratingSystem":
        """Y = Q*, simple roots are the coordinate forms, coroots are rows of the matrix."""
        n = m.size
        forms = tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))
        coroots = tuple(tuple(m.entries[i]) for i in range(n))
        return cls(m, n, forms, coroots)

    @classmethod
    def simply_connected(cls, m: KacMoodyMatrix) -> "RootGeneratingSystem":
        """Y spanned by the coroots themselves; free only when the matrix is invertible."""
        n = m.size
        coroots = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
        forms = tuple(tuple(Fraction(m.entries[i][j]) for i in range(n)) for j in range(n))
        return cls(m, n, forms, coroots)

    def extended(self) -> "RootGeneratingSystem":
        """The free system with lattice Y + Q*: roots pick up a coordinate form on Q*."""
        n = self.matrix.size
        forms = tuple(
            tuple(self.simple_root_forms[j]) + tuple(Fraction(int(j == k)) for k in range(n)) for j in range(n)
        )
        coroots = tuple(tuple(self.simple_coroots[i]) + (0,) * n for i in range(n))
        return RootGeneratingSystem(self.matrix, self.rank_y + n, forms, coroots)


@dataclass(frozen=True, order=True)
class Root:
    coords: IntVec
    tag: str = field(default="real", compare=False)

    def __post_init__(self):
        if all(c == 0 for c in self.coords):
            raise ValueError("zero is not a root")
        if any(c > 0 for c in self.coords) and any(c < 0 for c in self.coords):
            raise ValueError("roots are sign-homogeneous")

    @property
    def height(self) -> int:
        return sum(abs(c) for c in self.coords)

    @property
    def positive(self) -> bool:
        return any(c > 0 for c in self.coords)

    def __neg__(self) -> "Root":
        return Root(tuple(-c for c in self.coords), self.tag)

    def to_dict(self) -> dict:
        return {"coords": list(self.coords), "tag": self.tag, "height": self.height}


def sort_key(v: Sequence[int]) -> Tuple[int, Tuple[int, ...]]:
    return (sum(abs(c) for c in v), tuple(v))


def roots_to_json(roots: Iterable[Root]) -> str:
    ordered = sorted(roots, key=lambda r: sort_key(r.coords))
    return json.dumps([r.to_dict() for r in ordered])


# ---------------------------------------------------------------------------
# reflections


def pairing(m: KacMoodyMatrix, i: int, q: Sequence[int]) -> int:
    """<q, alpha_i^vee> = sum_j a_ij q_j."""
    return sum(m.entries[i][j] * q[j] for j in range(m.size))


def simple_reflection(m: KacMoodyMatrix, i: int, q: Sequence[int]) -> IntVec:
    """s_i(q) = q - <q, alpha_i^vee> alpha_i."""
    if not 0 <= i < m.size:
        raise IndexOutOfRange(f"generator {i} not in 0..{m.size - 1}")
    if len(q) != m.size:
        raise ValueError("vector length does not match matrix size")
    c = pairing(m, i, q)
    out = list(q)
    out[i] -= c
    return tuple(out)


def reflection_matrix(m: KacMoodyMatrix, i: int) -> IntMat:
    """Matrix of s_i on Q (columns are images of simple roots)."""
    n = m.size
    cols = [simple_reflection(m, i, tuple(int(j == k) for k in range(n))) for j in range(n)]
    return tuple(tuple(cols[j][r] for j in range(n)) for r in range(n))


def _mat_mul(a: IntMat, b: IntMat) -> IntMat:
    n = len(a)
    return tuple(tuple(sum(a[r][k] * b[k][c] for k in range(n)) for c in range(n)) for r in range(n))


def identity(n: int) -> IntMat:
    return tuple(tuple(int(r == c) for c in range(n)) for r in range(n))


# ---------------------------------------------------------------------------
# roots


def _check_budget(m: KacMoodyMatrix, cap: int, limit: Optional[int]) -> None:
    limit = MEMORY_SOFT_LIMIT if limit is None else limit
    estimate = comb(cap + m.size, m.size)
    if estimate > limit:
        raise CapTooLargeForMemory(f"about {estimate} lattice points below height {cap}; limit is {limit}")


def _upward_closure(m: KacMoodyMatrix, seeds: Iterable[IntVec], cap: int, limit: Optional[int] = None) -> set:
    """Close a set of positive vectors under height-increasing simple reflections."""
    limit = MEMORY_SOFT_LIMIT if limit is None else limit
    found = set(seeds)
    frontier = list(found)
    while frontier:
        nxt = []
        for q in frontier:
            for i in range(m.size):
                if pairing(m, i, q) < 0:
                    r = simple_reflection(m, i, q)
                    if sum(r) <= cap and r not in found:
                        found.add(r)
                        nxt.append(r)
        if len(found) > limit:
            raise CapTooLargeForMemory(f"more than {limit} roots below height {cap}")
        frontier = nxt
    return found


def positive_real_roots(m: KacMoodyMatrix, cap: int, limit: Optional[int] = None) -> List[IntVec]:
    """Positive real roots up to the height cap.

    A positive real root other than a simple one has some i with
    <beta, alpha_i^vee> > 0, and s_i(beta) is a positive real root of smaller
    height.  Reversing that descent shows every root below the cap is reached
    from the simple roots through roots below the cap.
    """
    if cap < 1:
        raise ValueError("height cap must be at least 1")
    seeds = [tuple(int(i == j) for j in range(m.size)) for i in range(m.size)]
    return sorted(_upward_closure(m, seeds, cap, limit), key=sort_key)


def real_roots(m: KacMoodyMatrix, cap: int, limit: Optional[int] = None) -> List[Root]:
    pos = positive_real_roots(m, cap, limit)
    out = [Root(q, "real") for q in pos] + [Root(tuple(-x for x in q), "real") for q in pos]
    return sorted(out, key=lambda r: sort_key(r.coords))


def _connected_support(m: KacMoodyMatrix, q: Sequence[int]) -> bool:
    supp = [i for i, c in enumerate(q) if c != 0]
    if not supp:
        return False
    seen, stack = {supp[0]}, [supp[0]]
    while stack:
        i = stack.pop()
        for j in supp:
            if j not in seen and m.entries[i][j] != 0:
                seen.add(j)
                stack.append(j)
    return len(seen) == len(supp)


def _nonneg_vectors(n: int, cap: int):
    for h in range(1, cap + 1):
        for cut in itertools.combinations(range(h + n - 1), n - 1):
            prev, parts = -1, []
            for c in cut:
                parts.append(c - prev - 1)
                prev = c
            parts.append(h + n - 1 - prev - 1)
            yield tuple(parts)


def fundamental_cone(m: KacMoodyMatrix, cap: int) -> List[IntVec]:
    """Nonzero positive vectors with connected support and <q, alpha_i^vee> <= 0 for all i."""
    return [
        q
        for q in _nonneg_vectors(m.size, cap)
        if _connected_support(m, q) and all(pairing(m, i, q) <= 0 for i in range(m.size))
    ]


def positive_imaginary_roots(m: KacMoodyMatrix, cap: int, limit: Optional[int] = None) -> List[IntVec]:
    """W-orbit of the fundamental cone, truncated at the cap.

    The same descent argument as for real roots applies: a positive imaginary
    root outside the cone has a simple reflection lowering its height and
    keeping it positive imaginary.
    """
    if cap < 1:
        raise ValueError("height cap must be at least 1")
    _check_budget(m, cap, limit)
    return sorted(_upward_closure(m, fundamental_cone(m, cap), cap, limit), key=sort_key)


def imaginary_roots(m: KacMoodyMatrix, cap: int, limit: Optional[int] = None) -> List[Root]:
    pos = positive_imaginary_roots(m, cap, limit)
    out = [Root(q, "imaginary") for q in pos] + [Root(tuple(-x for x in q), "imaginary") for q in pos]
    return sorted(out, key=lambda r: sort_key(r.coords))


def all_roots(m: KacMoodyMatrix, cap: int) -> List[Root]:
    return sorted(real_roots(m, cap) + imaginary_roots(m, cap), key=lambda r: sort_key(r.coords))


def real_coroot(m: KacMoodyMatrix, root: Sequence[int]) -> Tuple[int, ...]:
    """Coroot of a real root, as integer coefficients on the simple coroots.

    Found by descending the root to a simple root and carrying the coroot back
    up with the dual action s_i(c) = c - (sum_j c_j a_ji) e_i.
    """
    q = tuple(root)
    sign = 1
    if any(c < 0 for c in q):
        q = tuple(-c for c in q)
        sign = -1
    word = []
    while sum(q) > 1:
        i = next((i for i in range(m.size) if pairing(m, i, q) > 0), None)
        if i is None:
            raise ValueError(f"{root} is not a real root")
        word.append(i)
        q = simple_reflection(m, i, q)
    if sum(q) != 1 or min(q) < 0:
        raise ValueError(f"{root} is not a real root")
    c = list(q)
    for i in reversed(word):
        coeff = sum(c[j] * m.entries[j][i] for j in range(m.size))
        c[i] -= coeff
    return tuple(sign * x for x in c)


# ---------------------------------------------------------------------------
# Weyl group


@dataclass(frozen=True)
class WeylElement:
    word: Tuple[int, ...]
    action: IntMat

    @property
    def length(self) -> int:
        return len(self.word)

    def apply(self, q: Sequence[int]) -> IntVec:
        n = len(q)
        return tuple(sum(self.action[r][c] * q[c] for c in range(n)) for r in range(n))


def word_action(m: KacMoodyMatrix, word: Sequence[int]) -> IntMat:
    acc = identity(m.size)
    for i in word:
        acc = _mat_mul(acc, reflection_matrix(m, i))
    return acc


def weyl_elements(m: KacMoodyMatrix, length_cap: int, limit: Optional[int] = None) -> List[WeylElement]:
    """All elements of length <= cap with ShortLex-minimal words.

    Breadth-first by length; parents are visited in ShortLex order and
    extended by generators in increasing order, so the first word reaching a
    matrix is its ShortLex-least word (prefixes of ShortLex-minimal words are
    ShortLex-minimal).
    """
    if length_cap < 0:
        raise ValueError("length cap must be nonnegative")
    limit = MEMORY_SOFT_LIMIT if limit is None else limit
    gens = [reflection_matrix(m, i) for i in range(m.size)]
    start = WeylElement((), identity(m.size))
    seen = {start.action: start}
    level = [start]
    for _ in range(length_cap):
        nxt = []
        for el in level:
            for i, g in enumerate(gens):
                a = _mat_mul(el.action, g)
                if a not in seen:
                    w = WeylElement(el.word + (i,), a)
                    seen[a] = w
                    nxt.append(w)
        if len(seen) > limit:
            raise CapTooLargeForMemory(f"more than {limit} Weyl elements")
        if not nxt:
            break
        level = nxt
    return sorted(seen.values(), key=lambda w: (len(w.word), w.word))


def canonical_element(m: KacMoodyMatrix, word: Sequence[int]) -> WeylElement:
    """ShortLex-canonical form of the element represented by ``word``."""
    target = word_action(m, word)
    for w in weyl_elements(m, len(word)):
        if w.action == target:
            return w
    raise AssertionError("element not reached within its own word length")


def weyl_group_order(m: KacMoodyMatrix, limit: int = WEYL_FINITENESS_LIMIT) -> Optional[int]:
    """|W| if it is at most ``limit``, else None."""
    gens = [reflection_matrix(m, i) for i in range(m.size)]
    seen = {identity(m.size)}
    frontier = list(seen)
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = _mat_mul(a, g)
                if b not in seen:
                    seen.add(b)
                    nxt.append(b)
                    if len(seen) > limit:
                        return None
        frontier = nxt
    return len(seen)


# ---------------------------------------------------------------------------
# classification


def _principal_minors_positive(m: KacMoodyMatrix, proper_only: bool = False) -> bool:
    n = m.size
    for k in range(1, n + (0 if proper_only else 1)):
        for idx in itertools.combinations(range(n), k):
            if exact.det([[m.entries[i][j] for j in idx] for i in idx]) <= 0:
                return False
    return True


def symmetrizer(m: KacMoodyMatrix) -> Optional[Tuple[Fraction, ...]]:
    """Positive d with d_i a_ij = d_j a_ji, or None when not symmetrizable."""
    n = m.size
    d: List[Optional[Fraction]] = [None] * n
    for block in m.blocks():
        d[block[0]] = Fraction(1)
        stack = [block[0]]
        while stack:
            i = stack.pop()
            for j in block:
                if i != j and m.entries[i][j] != 0:
                    val = d[i] * m.entries[i][j] / m.entries[j][i]
                    if d[j] is None:
                        d[j] = val
                        stack.append(j)
                    elif d[j] != val:
                        return None
    return tuple(d)  # type: ignore[arg-type]


def classify_block(m: KacMoodyMatrix) -> str:
    """Vinberg trichotomy for an indecomposable matrix.

    Finite iff every principal minor is positive; affine iff the determinant
    vanishes and every proper principal minor is positive; indefinite
    otherwise.  When the matrix is not symmetrizable the finite verdict is
    double-checked by enumerating the Weyl group.
    """
    if _principal_minors_positive(m):
        if symmetrizer(m) is None and weyl_group_order(m) is None:
            return "indefinite"
        return "finite"
    if exact.det(m.entries) == 0 and _principal_minors_positive(m, proper_only=True):
        return "affine"
    return "indefinite"


def finite_type_label(m: KacMoodyMatrix) -> str:
    """Cartan-type label of an indecomposable finite-type matrix (A2, B2, G2, ...)."""
    n = m.size
    products = {m.entries[i][j] * m.entries[j][i] for i in range(n) for j in range(n) if i != j}
    nroots = len(real_roots(m, 64))
    if 3 in products:
        return "G2"
    if 2 in products:
        if n == 4 and nroots == 48:
            return "F4"
        d = symmetrizer(m)
        if n == 2:
            return "B2"
        short = [i for i in range(n) if d[i] == min(d)]
        return f"B{n}" if len(short) == 1 else f"C{n}"
    if nroots == n * (n + 1):
        return f"A{n}"
    if nroots == 2 * n * (n - 1):
        return f"D{n}"
    return f"E{n}"


@dataclass(frozen=True)
class BlockClass:
    indices: Tuple[int, ...]
    kind: str
    label: Optional[str] = None


def validate_and_classify(m: KacMoodyMatrix) -> List[BlockClass]:
    m.validate()
    out = []
    for block in m.blocks():
        sub = m.sub(block)
        kind = classify_block(sub)
        out.append(BlockClass(block, kind, finite_type_label(sub) if kind == "finite" else None))
    return out


def is_spherical(m: KacMoodyMatrix, J: Iterable[int]) -> bool:
    J = sorted(set(J))
    if any(not 0 <= j < m.size for j in J):
        raise IndexOutOfRange(f"{J} not inside 0..{m.size - 1}")
    if not J:
        return True
    return all(b.kind == "finite" for b in validate_and_classify(m.sub(J)))


ALIASES: Dict[str, Tuple[Tuple[int, ...], ...]] = {
    "a1": ((2,),),
    "a2": ((2, -1), (-1, 2)),
    "b2": ((2, -2), (-1, 2)),
    "g2": ((2, -1), (-3, 2)),
    "aff_a1": ((2, -2), (-2, 2)),
    "hyp_33": ((2, -3), (-3, 2)),
}


def matrix_from_alias_or_json(text: str) -> KacMoodyMatrix:
    if text in ALIASES:
        return KacMoodyMatrix.from_rows(ALIASES[text])
    return KacMoodyMatrix.from_json(text)


def word_for_action(m: KacMoodyMatrix, action: Sequence[Sequence[int]], length_cap: int = 200) -> Tuple[int, ...]:
    """A reduced word of the Weyl element with the given action on Q, peeled by right descents."""
    cur = tuple(tuple(r) for r in action)
    word: List[int] = []
    while cur != identity(m.size):
        col_neg = [i for i in range(m.size) if any(cur[r][i] < 0 for r in range(m.size))]
        if not col_neg or len(word) > length_cap:
            raise ValueError("matrix is not the action of a Weyl element within the length cap")
        i = col_neg[0]
        word.append(i)
        cur = _mat_mul(cur, reflection_matrix(m, i))
    return tuple(reversed(word))
