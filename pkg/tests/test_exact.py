import itertools
from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from hovelkit import exact

small = st.integers(-3, 3)
level = st.fractions(min_value=-6, max_value=6, max_denominator=3)


def vertex_min(objective, constraints, dim):
    """Minimum over the vertices of a bounded polytope, by brute force over dim-subsets of constraints."""
    best = None
    for subset in itertools.combinations(constraints, dim):
        x = exact.solve([a for a, _ in subset], [b for _, b in subset])
        if x is None or exact.rank([a for a, _ in subset]) < dim:
            continue
        if all(exact.dot(a, x) <= b for a, b in constraints):
            val = exact.dot(objective, x)
            best = val if best is None else min(best, val)
    return best


def boxed(cons, dim, r=20):
    box = []
    for i in range(dim):
        e = tuple(Fraction(int(i == j)) for j in range(dim))
        box.append((e, Fraction(r)))
        box.append((tuple(-c for c in e), Fraction(r)))
    return list(cons) + box


@given(st.integers(1, 3), st.data())
def test_lp_matches_vertex_enumeration(dim, data):
    cons = data.draw(st.lists(st.tuples(st.tuples(*[small] * dim), level), max_size=6))
    cons = boxed([(tuple(Fraction(c) for c in a), b) for a, b in cons], dim)
    obj = data.draw(st.tuples(*[small] * dim))
    assert exact.lp_min(obj, cons) == vertex_min(obj, cons, dim)


@given(st.tuples(small, small), st.tuples(level, level))
def test_degenerate_single_point(obj, x):
    # a point cut out by many redundant tight constraints
    forms = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, 3), (-1, -3), (2, 1)]
    cons = [(f, exact.dot(f, x)) for f in forms]
    assert exact.lp_min(obj, cons) == exact.dot(obj, x)


def test_unbounded_and_infeasible():
    assert exact.lp_min((1, 0), [((0, 1), Fraction(1))]) == float("-inf")
    assert exact.lp_min((1,), [((1,), Fraction(0)), ((-1,), Fraction(-1))]) is None
    assert exact.lp_min((0, 0), [((0, 0), Fraction(-1))]) is None
    assert exact.lp_min((0, 0), []) == 0


def test_rref_and_nullspace():
    rows, piv = exact.rref([[1, 2, 3], [2, 4, 6], [0, 1, 1]])
    assert piv == [0, 1]
    for v in exact.nullspace([[1, 2, 3], [0, 1, 1]], 3):
        assert exact.dot((1, 2, 3), v) == 0 and exact.dot((0, 1, 1), v) == 0
    assert exact.det([[2, 1], [1, 1]]) == 1


def test_formatting_round_trip():
    for q in (Fraction(-7, 3), Fraction(0), Fraction(5)):
        assert exact.frac(exact.fmt(q)) == q
    assert exact.frac("0.3") == Fraction(3, 10)
