import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hovelkit.group_instances import (
    INSTANCES,
    NotPrime,
    SLMatrix,
    birkhoff_decompose,
    bruhat_decompose,
    elementary,
    eps_to_q,
    in_iwahori,
    is_monomial,
    is_unipotent_lower,
    is_unipotent_upper,
    iwahori_decompose,
    iwasawa_decompose_alcove,
    q_to_eps,
)
from hovelkit.valuated_datum import v_p

import oracles


@st.composite
def sl_elements(draw, n, length=6, p=2):
    g = SLMatrix.identity(n)
    for _ in range(draw(st.integers(0, length))):
        i = draw(st.integers(0, n - 1))
        j = draw(st.integers(0, n - 1).filter(lambda j: j != i))
        k = draw(st.integers(-3, 3))
        u = draw(st.sampled_from([1, -1, 3, Fraction(1, 3), 5]))
        g = g * elementary(n, i, j, Fraction(u) * Fraction(p) ** k)
    return g


@given(st.fractions(max_denominator=200).filter(lambda q: q != 0), st.sampled_from([2, 3, 5]))
def test_valuation_matches_factor_count(q, p):
    assert v_p(q, p) == oracles.v_p(q, p)


def test_valuation_of_zero_is_infinite():
    assert v_p(0, 2) == float("inf")


@pytest.mark.parametrize("p", [1, 4, 9])
def test_instances_need_primes(p):
    with pytest.raises(NotPrime):
        INSTANCES["sl2"](p)


@given(st.sampled_from([2, 3]), st.data())
def test_birkhoff_and_bruhat_reconstruct(n, data):
    g = data.draw(sl_elements(n))
    d = birkhoff_decompose(g)
    assert d.product() == g
    assert is_unipotent_upper(d.left) and is_monomial(d.middle) and is_unipotent_lower(d.right)
    for sign in (1, -1):
        b = bruhat_decompose(g, sign)
        assert b.product() == g and is_monomial(b.middle)


@given(st.sampled_from([2, 3]), st.data())
def test_iwasawa_and_iwahori_reconstruct(n, data):
    g = data.draw(sl_elements(n))
    d = iwasawa_decompose_alcove(g, 2)
    assert d.product() == g
    assert is_unipotent_upper(d.left) and is_monomial(d.middle) and in_iwahori(d.right, 2)
    b = iwahori_decompose(g, 2)
    assert b.product() == g
    assert in_iwahori(b.left, 2) and is_monomial(b.middle) and in_iwahori(b.right, 2)


def test_iwahori_membership():
    assert in_iwahori(SLMatrix.of([[1, 0], [2, 1]]), 2)
    assert in_iwahori(SLMatrix.of([[3, 5], [2, Fraction(11, 3)]]), 2)
    assert not in_iwahori(SLMatrix.of([[1, 0], [1, 1]]), 2)
    assert not in_iwahori(SLMatrix.of([[1, Fraction(1, 2)], [0, 1]]), 2)


@given(st.tuples(*[st.fractions(max_denominator=5, min_value=-3, max_value=3)] * 2))
def test_eps_coordinates_round_trip(q):
    eps = q_to_eps(q)
    assert sum(eps) == 0
    assert eps_to_q(eps) == q


def test_root_elements_and_torus():
    inst = INSTANCES["sl3"](2)
    assert len(inst.roots()) == 6
    g = inst.x((1, 1), 4)
    assert g == elementary(3, 0, 2, 4)
    assert inst.identify_root_element(g) == ((1, 1), 4)
    rng = random.Random(0)
    t = inst.sample_Z(rng)
    assert inst.in_Z(t) and t.det() == 1


def test_loop_instance_roots_are_affine():
    inst = INSTANCES["loop_sl2"](2)
    real, _ = oracles.affine_a1_roots(inst.model.height_cap)
    assert set(inst.roots()) <= real
