import pytest
from hypothesis import given
from hypothesis import strategies as st

from hovelkit.affine_apartment import make_model
from hovelkit.kac_core import ALIASES
from hovelkit.vectorial import (
    facet_membership,
    facet_star,
    in_star,
    interior_point,
    locate_in_tits_cone,
    make_facet,
    root_sign_on_facet,
)

rationals = st.fractions(min_value=-6, max_value=6, max_denominator=4)


def model(name):
    return make_model(ALIASES[name], 1, 4)


@given(st.tuples(rationals, rationals))
def test_finite_tits_cone_is_everything(v):
    assert locate_in_tits_cone(model("a2").real, v).verdict == "InPositive"


@given(st.tuples(rationals, rationals))
def test_affine_tits_cone_is_positive_delta_halfspace(v):
    delta = v[0] + v[1]
    verdict = locate_in_tits_cone(model("aff_a1").real, v).verdict
    if v == (0, 0) or delta > 0:
        assert verdict == "InPositive"
    elif delta < 0:
        assert verdict == "InNegative"
    else:
        assert verdict == "Outside"


@given(st.tuples(rationals, rationals))
def test_located_facet_contains_the_vector(v):
    real = model("b2").real
    loc = locate_in_tits_cone(real, v)
    assert facet_membership(real, loc.facet, v)


@pytest.mark.parametrize("name", ["a2", "b2", "g2", "aff_a1"])
def test_interior_points_and_root_signs(name):
    m = model(name)
    for word in [(), (0,), (1, 0), (0, 1, 0)]:
        for J in [(), (0,), (1,)]:
            for sign in (1, -1):
                f = make_facet(m.matrix, sign, word, J)
                p = interior_point(m.real, f)
                assert facet_membership(m.real, f, p)
                for r in m.real_roots():
                    val = m.evaluate(r.coords, p)
                    s = root_sign_on_facet(m.real, f, r.coords)
                    assert (val > 0) - (val < 0) == s


def test_facet_canonical_form_ignores_parabolic_tail():
    m = model("a2").matrix
    assert make_facet(m, 1, (1,), (0,)) == make_facet(m, 1, (1, 0), (0,))
    assert make_facet(m, 1, (), (0,)) == make_facet(m, 1, (0,), (0,))
    assert make_facet(m, 1, (), ()) != make_facet(m, 1, (0,), ())


def test_star_sizes_in_a2():
    m = model("a2").matrix
    assert len(facet_star(m, make_facet(m, 1, (), ()))) == 1
    assert len(facet_star(m, make_facet(m, 1, (), (0,)))) == 3
    # the cone point of A2: 6 chambers, 6 panels, itself
    assert len(facet_star(m, make_facet(m, 1, (), (0, 1)))) == 13


@given(st.lists(st.integers(0, 1), max_size=4), st.sampled_from([(), (0,), (1,), (0, 1)]))
def test_star_members_are_in_star(word, J):
    m = model("b2").matrix
    f = make_facet(m, -1, word, J)
    for g in facet_star(m, f):
        assert in_star(m, f, g)
        assert set(g.J) <= set(f.J)


def test_star_in_affine_type_is_truncated():
    m = model("aff_a1").matrix
    star = facet_star(m, make_facet(m, 1, (), (0,)))
    assert len(star) == 3
    assert all(in_star(m, make_facet(m, 1, (), (0,)), g) for g in star)
    assert not in_star(m, make_facet(m, 1, (), (0,)), make_facet(m, -1, (), ()))


def test_opposite_signs_never_in_star():
    m = model("a2").matrix
    assert not in_star(m, make_facet(m, 1, (), (0,)), make_facet(m, -1, (), ()))
