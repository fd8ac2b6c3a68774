from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hovelkit import exact
from hovelkit.affine_apartment import ChimneyGerm, SectorFaceGerm, make_model
from hovelkit.bordered_apartment import (
    BorderedApartment,
    NotInStar,
    WrongFlavor,
    chimney_germ_to_closed_facet,
    facade_point_from_dict,
    same_germ,
    wall_trace,
)
from hovelkit.kac_core import ALIASES
from hovelkit.vectorial import facet_span_basis, facet_star, make_facet

coord = st.fractions(min_value=-4, max_value=4, max_denominator=3)
point = st.tuples(coord, coord)
types = st.sampled_from([(), (0,), (1,)])
words = st.lists(st.integers(0, 1), max_size=3)


def bordered(flavor, name="b2"):
    return BorderedApartment(flavor, make_model(ALIASES[name], 1, 4))


@given(point, words, st.sampled_from([(0,), (1,), (0, 1)]), st.data())
def test_projections_compose(x, word, J, data):
    B = bordered("essential")
    m = B.model.matrix
    f = make_facet(m, 1, word, J)
    f1 = data.draw(st.sampled_from(facet_star(m, f)))
    f2 = data.draw(st.sampled_from(facet_star(m, f1)))
    p = B.point(x, f)
    assert B.project(B.project(p, f1), f2) == B.project(p, f2)


@given(point, words, types)
def test_projection_from_main_facade_is_the_quotient_map(x, word, J):
    B = bordered("injective")
    f = make_facet(B.model.matrix, -1, word, J)
    p = B.project(B.point(x), f)
    span = facet_span_basis(B.model.real, f)
    # representative differs from x by an element of the span of the direction
    diff = tuple(a - b for a, b in zip(x, p.representative))
    if span:
        assert exact.rank(list(span) + [diff]) == exact.rank(list(span))
    else:
        assert not any(diff)


def test_projection_outside_star_is_refused():
    B = bordered("essential", "a2")
    m = B.model.matrix
    p = B.point((1, 2), make_facet(m, 1, (), (0,)))
    with pytest.raises(NotInStar):
        B.project(p, make_facet(m, 1, (), (1,)))
    with pytest.raises(NotInStar):
        B.project(p, make_facet(m, -1, (), ()))


@pytest.mark.parametrize("flavor, main, other", [("strong", "ne", "ne"), ("essential", "e", "e"), ("injective", "ne", "e")])
def test_flavor_modes(flavor, main, other):
    B = bordered(flavor)
    assert B.main_facade().mode == main
    assert B.facade(make_facet(B.model.matrix, 1, (), (0,))).mode == other


def test_facade_dimensions_in_a2():
    B = bordered("essential", "a2")
    m = B.model.matrix
    assert B.main_facade().dim == 2
    assert B.facade(make_facet(m, 1, (), (0,))).dim == 1
    assert B.facade(make_facet(m, 1, (), ())).dim == 0


@given(point, words, types)
def test_germ_point_round_trip(x, word, J):
    B = bordered("essential")
    f = make_facet(B.model.matrix, 1, word, J)
    p = B.germ_to_point(SectorFaceGerm(x, f))
    germ = B.point_to_germ(p)
    assert same_germ(B.model, germ, SectorFaceGerm(x, f))
    assert B.germ_to_point(germ) == p


def test_germ_correspondence_needs_essential_flavor():
    B = bordered("strong")
    with pytest.raises(WrongFlavor):
        B.germ_to_point(SectorFaceGerm((0, 0), make_facet(B.model.matrix, 1, (), ())))


@given(point, coord)
def test_germs_differ_by_span_of_direction(x, t):
    m = make_model(ALIASES["a2"], 1, 4)
    f = make_facet(m.matrix, 1, (), (0,))
    (v,) = facet_span_basis(m.real, f)
    y = tuple(a + t * b for a, b in zip(x, v))
    assert same_germ(m, SectorFaceGerm(x, f), SectorFaceGerm(y, f))
    z = tuple(a - b for a, b in zip(x, (v[1], -v[0])))
    assert not same_germ(m, SectorFaceGerm(x, f), SectorFaceGerm(z, f))


def test_wall_traces():
    B = bordered("essential", "a2")
    fac = B.facade(make_facet(B.model.matrix, 1, (), (0,)))
    assert wall_trace(fac, (1, 0), 0).kind == "wall"
    assert wall_trace(fac, (1, 0), 0, half=True).kind == "halfspace"
    assert wall_trace(fac, (0, 1), 0).kind == "empty"
    assert wall_trace(fac, (0, 1), 0, half=True).kind == "full"
    assert wall_trace(fac, (0, -1), 0, half=True).kind == "empty"


def test_facade_point_json_round_trip():
    B = bordered("injective")
    p = B.point((Fraction(1, 2), 3), make_facet(B.model.matrix, -1, (1,), (0,)))
    assert facade_point_from_dict(B, p.to_dict()) == p
    q = B.point((Fraction(1, 2), 3))
    assert facade_point_from_dict(B, q.to_dict()) == q


def test_chimney_lands_in_spherical_facade():
    B = bordered("essential", "a2")
    m = B.model.matrix
    germ = ChimneyGerm((0, 0), make_facet(m, 1, (), ()), make_facet(m, 1, (), (0,)))
    closed = chimney_germ_to_closed_facet(B, germ)
    assert closed.spherical_facade and closed.chamber_in_facade
    assert closed.facade.direction == make_facet(m, 1, (), (0,))
