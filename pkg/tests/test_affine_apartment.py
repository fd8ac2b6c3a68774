from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hovelkit.affine_apartment import (
    INF,
    FiniteSet,
    OpenSegmentGerm,
    Point,
    RefusedEnclosure,
    Segment,
    apply,
    certificate,
    compose,
    enclosure,
    enclosure_chain,
    EnclosureSpec,
    invert,
    make_model,
    parse_shape,
    preorder_leq,
    reflection,
    translation,
)
from hovelkit.kac_core import ALIASES

import oracles

coord = st.fractions(min_value=-3, max_value=3, max_denominator=3)


def pt(dim):
    return st.tuples(*[coord] * dim)


@st.composite
def shapes(draw, dim):
    kind = draw(st.sampled_from(["point", "segment", "set", "germ"]))
    a = draw(pt(dim))
    if kind == "point":
        return Point(a)
    b = draw(pt(dim).filter(lambda v: v != a))
    if kind == "segment":
        return Segment(a, b)
    if kind == "germ":
        return OpenSegmentGerm(a, b)
    c = draw(pt(dim))
    return FiniteSet((a, b, c))


def brute_matches(model, spec, shape):
    if isinstance(shape, OpenSegmentGerm):
        pts, germ = [shape.x], tuple(y - x for x, y in zip(shape.x, shape.y))
    else:
        pts, germ = shape.points(), None
    for root, level in certificate(model, EnclosureSpec(spec), shape):
        want = oracles.brute_level(root, pts, germ)
        if want is None:
            if -10 <= level <= 10:
                return False
        elif level != want:
            return False
    return True


@pytest.mark.parametrize("name", ["a1", "a2", "b2", "aff_a1"])
@given(data=st.data())
def test_lambda_levels_match_brute_force(name, data):
    m = make_model(ALIASES[name], 1, 4)
    shape = data.draw(shapes(m.dim))
    assert brute_matches(m, "phi", shape)
    assert brute_matches(m, "delta", shape)


@given(shapes(2))
def test_real_levels_are_exact_suprema(shape):
    m = make_model(ALIASES["g2"], None, 4)
    pts = [shape.x] if isinstance(shape, OpenSegmentGerm) else shape.points()
    for root, level in certificate(m, EnclosureSpec("phi", "real"), shape):
        assert level == oracles.real_line_level(root, pts)


def test_root_families_match_oracle():
    m = make_model(ALIASES["aff_a1"], 1, 6)
    cert_phi = {r for r, _ in certificate(m, EnclosureSpec("phi"), Point((0, 0)))}
    cert_delta = {r for r, _ in certificate(m, EnclosureSpec("delta"), Point((0, 0)))}
    real, imag = oracles.affine_a1_roots(6)
    assert cert_phi == real
    assert cert_delta == real | imag


def test_point_enclosure_in_a1():
    m = make_model(ALIASES["a1"], 1, 4)
    ci = enclosure(m, "cl_phi", parse_shape("point:0.3", 1))
    assert sorted((h.root, h.level) for h in ci.closed) == [((-1,), 1), ((1,), 0)]
    assert ci.contains((Fraction(0),)) and ci.contains((Fraction(1),)) and not ci.contains((Fraction(3, 2),))


def test_half_integer_value_group():
    m = make_model(ALIASES["a1"], Fraction(1, 2), 4)
    ci = enclosure(m, "cl_phi", Point((Fraction(3, 10),)))
    assert sorted((h.root, h.level) for h in ci.closed) == [((-1,), Fraction(1, 2)), ((1,), 0)]


@given(shapes(2))
def test_enclosures_contain_the_shape(shape):
    m = make_model(ALIASES["b2"], 1, 4)
    for spec in ("cl_phi", "cl_delta", "cl_sharp", "conv"):
        ci = enclosure(m, spec, shape)
        assert all(ci.contains(p) for p in shape.sample(m))


@pytest.mark.parametrize("name", ["a2", "aff_a1", "hyp_33"])
@given(data=st.data())
def test_chain_holds(name, data):
    m = make_model(ALIASES[name], 1, 4)
    assert enclosure_chain(m, data.draw(shapes(2)), raise_on_violation=False).ok


def test_totally_imaginary_family_needs_real_levels():
    with pytest.raises(RefusedEnclosure):
        EnclosureSpec("ti", "lambda")


def test_conv_of_a_segment_is_the_segment():
    m = make_model(ALIASES["a2"], None, 4)
    ci = enclosure(m, "conv", Segment((0, 0), (1, 1)))
    assert ci.contains((Fraction(1, 2), Fraction(1, 2)))
    assert not ci.contains((Fraction(1, 2), Fraction(0)))
    assert not ci.contains((Fraction(2), Fraction(2)))


@pytest.mark.parametrize("bad", ["blob:1", "point:1,2"])
def test_parse_shape_rejects(bad):
    with pytest.raises(ValueError):
        parse_shape(bad, 1)


@given(pt(2), pt(2))
def test_preorder_affine(x, y):
    m = make_model(ALIASES["aff_a1"], 1, 4)
    d = (y[0] - x[0]) + (y[1] - x[1])
    assert preorder_leq(m, x, y) == ("yes" if d > 0 or x == y else "no")


@given(pt(2), pt(2))
def test_preorder_finite_is_total(x, y):
    assert preorder_leq(make_model(ALIASES["g2"], 1, 4), x, y) == "yes"


@given(st.sampled_from(["a2", "b2", "aff_a1"]), st.integers(-3, 3), pt(2), pt(2), st.data())
def test_affine_weyl_group_laws(name, level, x, v, data):
    m = make_model(ALIASES[name], 1, 4)
    root = data.draw(st.sampled_from(m.real_roots())).coords
    s = reflection(m, root, level)
    t = translation(m, v)
    assert apply(m, compose(m, s, s), x) == tuple(Fraction(c) for c in x)
    on_wall = apply(m, s, x)
    assert m.evaluate(root, on_wall) + level == -(m.evaluate(root, x) + level)
    g = compose(m, s, t)
    assert apply(m, compose(m, invert(m, g), g), x) == tuple(Fraction(c) for c in x)
    assert apply(m, g, x) == apply(m, s, apply(m, t, x))


def test_infinite_levels_for_rays():
    m = make_model(ALIASES["a2"], 1, 4)
    cert = dict(certificate(m, EnclosureSpec("phi"), parse_shape("ray:0,0;1,1", 2)))
    assert cert[(-1, -1)] == INF
    assert cert[(1, 1)] == 0


@pytest.mark.parametrize("name", ["a2", "b2", "g2"])
@given(word=st.lists(st.integers(0, 1), max_size=6), data=st.data())
def test_enclosures_are_weyl_equivariant(name, word, data):
    # finite types only: there the height cap is W-stable
    m = make_model(ALIASES[name], 1, 12)
    shape = FiniteSet(data.draw(st.lists(pt(2), min_size=1, max_size=3)))
    moved = FiniteSet([m.real.act(word, x) for x in shape.points()])
    levels = dict(certificate(m, EnclosureSpec("phi"), shape))
    for root, level in certificate(m, EnclosureSpec("phi"), moved):
        # roots alpha with alpha = root o w on the shape, i.e. w.alpha = root
        match = [r for r in levels if all(m.evaluate(r, x) == m.evaluate(root, y) for x, y in zip(shape.points(), moved.points()))]
        assert match and all(levels[r] == level for r in match)
    hull, moved_hull = enclosure(m, "conv", shape), enclosure(m, "conv", moved)
    assert all(moved_hull.contains(m.real.act(word, v)) for v in shape.points())
    assert len(hull.closed) == len(moved_hull.closed)
