from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hovelkit.affine_apartment import apply
from hovelkit.group_instances import INSTANCES, diagonal
from hovelkit.valuated_datum import (
    InconsistentSystem,
    ValuationReport,
    check_nu_homomorphism,
    check_nu_reflections,
    check_RD_axioms,
    check_valuation,
    lambda_set,
    nu_of,
)

import oracles

nonzero = st.fractions(min_value=-40, max_value=40, max_denominator=40).filter(lambda q: q != 0)
point1 = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@pytest.fixture(scope="module")
def sl2():
    return INSTANCES["sl2"](2)


@given(nonzero, point1)
def test_nu_of_m_is_the_reflection_in_its_wall(r, x):
    inst = INSTANCES["sl2"](2)
    lam = oracles.v_p(r, 2)
    # alpha(x) = x and alpha(coroot) = 2 in these coordinates
    s = nu_of(inst, inst.m_of((1,), inst.x((1,), r)))
    assert apply(inst.model, s, (x,)) == (-x - 2 * lam,)
    s = nu_of(inst, inst.m_of((-1,), inst.x((-1,), r)))
    assert apply(inst.model, s, (x,)) == (-x + 2 * lam,)


@given(point1, st.integers(-3, 3))
def test_torus_acts_by_coroot_translations(x, k):
    inst = INSTANCES["sl2"](2)
    t = diagonal([Fraction(2) ** k, Fraction(2) ** -k])
    assert apply(inst.model, nu_of(inst, t), (x,)) == (x - 2 * k,)


def test_units_act_trivially(sl2):
    assert apply(sl2.model, nu_of(sl2, diagonal([3, Fraction(1, 3)])), (Fraction(1, 7),)) == (Fraction(1, 7),)


def test_nu_rejects_non_normalizer(sl2):
    with pytest.raises(InconsistentSystem):
        nu_of(sl2, sl2.x((1,), 1))


@pytest.mark.parametrize("name", ["sl2", "sl3", "loop_sl2"])
def test_valuation_suite_passes(name):
    reps = check_valuation(INSTANCES[name](2), samples=60, seed=3)
    assert {r.axiom for r in reps} == {"V0", "V1", "V2.1", "V2.2", "V3", "V4"}
    assert all(r.status in ("pass", "skipped") for r in reps)
    assert next(r for r in reps if r.axiom == "V4").reason


@pytest.mark.parametrize("name", ["sl2", "sl3"])
def test_root_datum_suite_passes(name):
    reps = check_RD_axioms(INSTANCES[name](3), samples=60, seed=1)
    assert all(r.status in ("pass", "skipped", "informational") for r in reps), [r.to_dict() for r in reps]
    assert next(r for r in reps if r.axiom == "Birkhoff-uniqueness").status == "pass"


@pytest.mark.parametrize("name", ["sl2", "sl3", "loop_sl2"])
def test_nu_checks(name):
    inst = INSTANCES[name](2)
    assert check_nu_reflections(inst, 20, 0).status == "pass"
    assert check_nu_homomorphism(inst, 20, 0).status == "pass"


def test_lambda_sets_are_symmetric(sl2):
    values, symmetric = lambda_set(sl2, (1,), budget=30)
    assert symmetric
    assert all(v.denominator == 1 for v in values)


def test_report_serialization_is_deterministic():
    rep = ValuationReport("V1", "test", samples=3)
    rep.fail({"r": "1/2"})
    assert rep.status == "fail"
    assert rep.to_json() == rep.to_json()
    assert rep.to_dict()["witness"] == {"r": "1/2"}


def test_reports_are_seeded():
    inst = INSTANCES["sl3"](2)
    a = [r.to_dict() for r in check_valuation(inst, 20, seed=7)]
    b = [r.to_dict() for r in check_valuation(inst, 20, seed=7)]
    assert a == b
