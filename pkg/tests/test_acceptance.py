"""Acceptance criteria, one timed check each.

Each check appends a PASS/FAIL line to the terminal summary. Running this
file directly prints the same lines without pytest.
"""
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import conftest  # noqa: E402
import oracles  # noqa: E402
from hovelkit.affine_apartment import (  # noqa: E402
    EnclosureSpec,
    FiniteSet,
    OpenSegmentGerm,
    Point,
    Segment,
    certificate,
    enclosure_chain,
    make_model,
)
from hovelkit.group_instances import INSTANCES  # noqa: E402
from hovelkit.kac_core import ALIASES, KacMoodyMatrix, imaginary_roots, real_roots, weyl_elements  # noqa: E402
from hovelkit.parahoric_hovel import (  # noqa: E402
    ParahoricFamily,
    build_tree,
    certify_membership,
    check_MAO,
    check_parahoric_axioms,
    residue_roots,
)
from hovelkit.valuated_datum import (  # noqa: E402
    check_nu_homomorphism,
    check_nu_reflections,
    check_RD_axioms,
    check_valuation,
)


def record(number: int, title: str, limit: float, body) -> None:
    start = time.perf_counter()
    problems = body()
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed <= limit
    verdict = "PASS" if ok else "FAIL"
    detail = "" if ok else f" :: {problems if problems else 'over time limit'}"
    conftest.ACCEPTANCE_LINES.append(
        f"ACCEPTANCE {number:2d}: {verdict} {title} ({elapsed:.1f} s, limit {limit:.0f} s){detail}")
    assert ok, conftest.ACCEPTANCE_LINES[-1]


def test_01_root_counts():
    def body():
        out = []
        for name in ("a2", "b2", "g2", "hyp_33"):
            m = KacMoodyMatrix.from_rows(ALIASES[name])
            got = {r.coords for r in real_roots(m, 6)}
            if got != oracles.orbit_real_roots(ALIASES[name], 6):
                out.append(name)
        m = KacMoodyMatrix.from_rows(ALIASES["aff_a1"])
        for cap in (5, 21):
            real, imag = oracles.affine_a1_roots(cap)
            if {r.coords for r in real_roots(m, cap)} != real or {r.coords for r in imaginary_roots(m, cap)} != imag:
                out.append(f"aff_a1 cap {cap}")
        if len(real_roots(m, 21)) != 44 or len(imaginary_roots(m, 21)) != 20:
            out.append("aff_a1 cap 21 counts")
        a2 = KacMoodyMatrix.from_rows(ALIASES["a2"])
        if len(real_roots(a2, 10)) != 6 or imaginary_roots(a2, 10):
            out.append("a2 counts")
        if len(real_roots(KacMoodyMatrix.from_rows([[2, -1], [-3, 2]]), 10)) != 12:
            out.append("g2 count")
        return out
    record(1, "root enumeration matches orbit oracles", 5, body)


def test_02_weyl_orders():
    def body():
        want = {"a2": (10, 6), "b2": (10, 8), "g2": (12, 12), "aff_a1": (4, 9)}
        out = []
        for name, (cap, count) in want.items():
            els = weyl_elements(KacMoodyMatrix.from_rows(ALIASES[name]), cap)
            mats = oracles.weyl_matrices(ALIASES[name], cap)
            if len(els) != count or len(mats) != count:
                out.append((name, len(els), len(mats)))
        return out
    record(2, "Weyl group orders and bounded-length counts", 5, body)


def _random_shape(rng: random.Random, dim: int):
    def p():
        return tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 3)) for _ in range(dim))
    kind = rng.choice(["point", "segment", "set", "germ"])
    a = p()
    if kind == "point":
        return Point(a)
    b = p()
    while b == a:
        b = p()
    if kind == "segment":
        return Segment(a, b)
    if kind == "germ":
        return OpenSegmentGerm(a, b)
    return FiniteSet((a, b, p()))


def test_03_levels_against_brute_force():
    def body():
        rng = random.Random(0)
        names = ["a1", "a2", "b2", "g2", "aff_a1", "hyp_33"]
        out = []
        for i in range(200):
            name = names[i % len(names)]
            m = make_model(ALIASES[name], 1, 4)
            shape = _random_shape(rng, m.dim)
            if isinstance(shape, OpenSegmentGerm):
                pts, germ = [shape.x], tuple(y - x for x, y in zip(shape.x, shape.y))
            else:
                pts, germ = shape.points(), None
            for spec in ("phi", "delta"):
                for root, level in certificate(m, EnclosureSpec(spec), shape):
                    want = oracles.brute_level(root, pts, germ)
                    if want is None:
                        if -10 <= level <= 10:
                            out.append((name, spec, root, level))
                    elif level != want:
                        out.append((name, spec, root, level, want))
        return out[:5]
    record(3, "enclosure levels agree with brute force on 200 shapes", 60, body)


def test_04_bruhat_tits_tree():
    def body():
        tree = build_tree(ParahoricFamily(INSTANCES["sl2"](2)), 4)
        out = []
        if tree.spheres != [1, 3, 6, 12, 24]:
            out.append(("spheres", tree.spheres))
        if tree.spheres != oracles.tree_spheres(2, 4):
            out.append("lattice oracle")
        if tree.spheres != [oracles.sphere_formula(2, d) for d in range(5)]:
            out.append("sphere formula")
        if not (tree.regular() and tree.apartment_is_geodesic() and tree.cycles == 0):
            out.append("shape")
        return out
    record(4, "tree for SL2 over Q_2 to depth 4", 30, body)


def test_05_valuation_axioms():
    def body():
        out = []
        for name in ("sl2", "sl3", "loop_sl2"):
            reps = {r.axiom: r for r in check_valuation(INSTANCES[name](2), samples=500, seed=0)}
            for ax in ("V0", "V1", "V2.1", "V2.2"):
                if reps[ax].status != "pass":
                    out.append((name, ax, reps[ax].status))
            if reps["V4"].status != "skipped" or not reps["V4"].reason:
                out.append((name, "V4"))
            if name == "sl3" and reps["V3"].status != "pass":
                out.append((name, "V3", reps["V3"].status))
        return out
    record(5, "valuation axioms at 500 samples", 60, body)


def test_06_root_datum():
    def body():
        out = []
        for name in ("sl2", "sl3"):
            for r in check_RD_axioms(INSTANCES[name](2), samples=500, seed=0):
                if r.status == "skipped" and name == "sl2" and r.axiom == "RD2":
                    continue
                if r.status not in ("pass", "informational"):
                    out.append((name, r.axiom, r.status))
                if r.axiom == "Birkhoff-uniqueness" and r.status != "pass":
                    out.append((name, "Birkhoff"))
        return out
    record(6, "root group datum axioms at 500 samples", 60, body)


def test_07_parahoric_axioms():
    def body():
        out = []
        for name in ("sl2", "sl3"):
            fam = ParahoricFamily(INSTANCES[name](2))
            reps = {r.axiom: r for r in check_parahoric_axioms(fam, points=20, seed=0)}
            for ax in ("P1", "P2", "P3", "P4", "P5", "P8", "P10"):
                if reps[ax].status != "pass":
                    out.append((name, ax, reps[ax].status))
            pts = [tuple(Fraction(0) for _ in range(fam.model.dim)),
                   tuple(Fraction(k + 1, 3 + k) for k in range(fam.model.dim))]
            cert = certify_membership(fam, pts, length=6, seed=0)
            if cert.disagreements:
                out.append((name, "certification", cert.disagreements[:2]))
        return out
    record(7, "parahoric axioms and membership certification", 120, body)


def test_08_apartments_and_nu():
    def body():
        out = []
        fam = ParahoricFamily(INSTANCES["sl2"](2))
        rep = check_MAO(fam, trials=100, seed=0)
        if rep.status != "pass":
            out.append(("MAO", rep.status))
        for name in ("sl2", "sl3", "loop_sl2"):
            inst = INSTANCES[name](2)
            if check_nu_reflections(inst, 50, 0).status != "pass":
                out.append((name, "nu reflections"))
            if check_nu_homomorphism(inst, 50, 0).status != "pass":
                out.append((name, "nu homomorphism"))
        return out
    record(8, "apartment compatibility and the action of N", 60, body)


def test_09_enclosure_chain():
    def body():
        rng = random.Random(1)
        out = []
        for name in ("a2", "b2", "g2", "aff_a1", "hyp_33"):
            m = make_model(ALIASES[name], 1, 4)
            for _ in range(100):
                shape = _random_shape(rng, 2)
                rep = enclosure_chain(m, shape, raise_on_violation=False)
                if not rep.ok:
                    out.append((name, shape, [c for c in rep.checks if not c[2]][:2]))
        return out[:3]
    record(9, "enclosure containment chain on rank-2 models", 30, body)


def test_10_residues():
    def body():
        rng = random.Random(2)
        out = []
        for name in ("a2", "aff_a1"):
            m = make_model(ALIASES[name], 1, 4)
            coords = [r.coords for r in m.real_roots()]
            for i in range(50):
                den = 1 if i % 5 == 0 else rng.randint(1, 4)
                x = (Fraction(rng.randint(-8, 8), den), Fraction(rng.randint(-8, 8), rng.choice([1, den])))
                res = residue_roots(m, x)
                if set(res.roots) != oracles.residue_set(coords, x) or res.closure_violations(m):
                    out.append((name, x, "roots"))
                if name == "a2":
                    special = all(c.denominator == 1 for c in x)
                else:
                    special = x[0].denominator == 1 and (x[0] + x[1]).denominator == 1
                if res.special != special:
                    out.append((name, x, "special", res.special))
        return out
    record(10, "residue root systems and special points", 10, body)


if __name__ == "__main__":
    failed = 0
    for fn in [v for k, v in sorted(globals().items()) if k.startswith("test_")]:
        try:
            fn()
        except AssertionError:
            failed += 1
    print("\n".join(conftest.ACCEPTANCE_LINES))
    sys.exit(1 if failed else 0)
