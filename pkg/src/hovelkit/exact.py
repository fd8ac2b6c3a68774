"""Exact rational helpers: parsing, formatting, small dense linear algebra, LP."""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple


Vec = Tuple[Fraction, ...]


def frac(value) -> Fraction:
    """Coerce ints, Fractions and strings like '3/4' or '0.3' to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass a string or Fraction")
    return Fraction(value)


def vec(values: Sequence) -> Vec:
    return tuple(frac(v) for v in values)


def fmt(q: Fraction) -> str:
    """Serialize a rational as 'num/den' (or 'num' when integral)."""
    q = frac(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def dot(a: Sequence, b: Sequence) -> Fraction:
    if len(a) != len(b):
        raise ValueError("dimension mismatch")
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def add(a: Sequence, b: Sequence) -> Vec:
    return tuple(Fraction(x) + y for x, y in zip(a, b))


def sub(a: Sequence, b: Sequence) -> Vec:
    return tuple(Fraction(x) - y for x, y in zip(a, b))


def scale(c, a: Sequence) -> Vec:
    return tuple(Fraction(c) * x for x in a)


def mat_vec(m: Sequence[Sequence], v: Sequence) -> Vec:
    return tuple(dot(row, v) for row in m)


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> List[List[Fraction]]:
    cols = list(zip(*b))
    return [[dot(row, col) for col in cols] for row in a]


def transpose(m: Sequence[Sequence]) -> List[List]:
    return [list(r) for r in zip(*m)]


def rref(rows: Sequence[Sequence]) -> Tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form and pivot columns."""
    m = [[frac(x) for x in r] for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: Optional[int] = None) -> List[Vec]:
    """Basis of {v : rows . v = 0}."""
    if not rows:
        n = ncols or 0
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    m, pivots = rref(rows)
    n = len(m[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, pc in zip(m, pivots):
            v[pc] = -row[f]
        basis.append(tuple(v))
    return basis


def solve(a: Sequence[Sequence], b: Sequence) -> Optional[Vec]:
    """One solution of a.x = b, or None when inconsistent."""
    aug = [list(r) + [y] for r, y in zip(a, b)]
    m, pivots = rref(aug)
    n = len(a[0])
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for row, pc in zip(m, pivots):
        x[pc] = row[n]
    return tuple(x)


def det(m: Sequence[Sequence]) -> Fraction:
    a = [[frac(x) for x in r] for r in m]
    n = len(a)
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            d = -d
        d *= a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] / a[c][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return d


def mat_inv(m: Sequence[Sequence]) -> List[List[Fraction]]:
    n = len(m)
    aug = [[frac(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(m)]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in red]


def _pivot(tab: List[List[Fraction]], basis: List[int], r: int, c: int) -> None:
    piv = tab[r][c]
    prow = [v / piv if v else v for v in tab[r]]
    tab[r] = prow
    nz = [j for j, v in enumerate(prow) if v]
    for k, row in enumerate(tab):
        f = row[c]
        if k != r and f:
            row = list(row)
            for j in nz:
                row[j] -= f * prow[j]
            tab[k] = row
    basis[r] = c


def _run_simplex(tab: List[List[Fraction]], basis: List[int], ncols: int) -> bool:
    """Minimize the objective stored in the last row; Bland's rule. False when unbounded."""
    while True:
        enter = next((j for j in range(ncols) if tab[-1][j] < 0), None)
        if enter is None:
            return True
        best, leave = None, None
        for i in range(len(tab) - 1):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return False
        _pivot(tab, basis, leave, enter)


def lp_min(objective: Sequence, constraints: Sequence[Tuple[Sequence, Fraction]]):
    """Minimize objective.x over {x : a.x <= b for (a, b) in constraints}, x free.

    Returns a Fraction, ``float('-inf')`` when unbounded, or ``None`` when
    infeasible.  Two-phase tableau simplex in exact arithmetic with Bland's
    rule; free variables are split as x = p - q.
    """
    dim = len(objective)
    c = [frac(v) for v in objective]
    rows = [([frac(v) for v in a], frac(b)) for a, b in constraints]
    if not rows:
        return float("-inf") if any(c) else Fraction(0)
    m = len(rows)
    # columns: p (dim), q (dim), slacks (m), then one artificial per row with b < 0;
    # rows with b >= 0 start with their slack in the basis
    nvar = 2 * dim + m
    needy = [i for i, (_, b) in enumerate(rows) if b < 0]
    art = {i: nvar + k for k, i in enumerate(needy)}
    ncols = nvar + len(needy)
    zero = Fraction(0)
    tab, basis = [], []
    for i, (a, b) in enumerate(rows):
        sign = -1 if b < 0 else 1
        row = [sign * v for v in a] + [-sign * v for v in a] + [zero] * (m + len(needy))
        row[2 * dim + i] = Fraction(sign)
        if i in art:
            row[art[i]] = Fraction(1)
        row.append(sign * b)
        tab.append(row)
        basis.append(art.get(i, 2 * dim + i))
    if needy:
        phase1 = [zero] * nvar + [Fraction(1)] * len(needy) + [zero]
        for i in needy:
            phase1 = [x - y for x, y in zip(phase1, tab[i])]
        tab.append(phase1)
        _run_simplex(tab, basis, ncols)
        if tab[-1][-1] != 0:
            return None
        tab.pop()
        # drive artificials out of the basis where possible
        for i in range(m):
            if basis[i] >= nvar:
                j = next((j for j in range(nvar) if tab[i][j] != 0), None)
                if j is not None:
                    _pivot(tab, basis, i, j)
    keep = [i for i in range(m) if basis[i] < nvar]
    tab = [tab[i][:nvar] + [tab[i][-1]] for i in keep]
    basis = [basis[i] for i in keep]
    cost = c + [-v for v in c] + [Fraction(0)] * m + [Fraction(0)]
    for i, bcol in enumerate(basis):
        f = cost[bcol]
        if f:
            cost = [x - f * y for x, y in zip(cost, tab[i])]
    tab.append(cost)
    if not _run_simplex(tab, basis, nvar):
        return float("-inf")
    return -tab[-1][-1]
