"""Hauptmodul expansions: frozen values, symbolic displays, residuals."""

from __future__ import annotations

import random

import pytest

from triforms.core_series import DomainError, MPoly, bipoly, rat
from triforms.schwarz import (
    VRat,
    antisymmetry_check,
    cusp_expansion,
    elliptic_expansion,
    expansion_residual,
    universal_coeffs,
    universal_residual,
)
from triforms.triangle import INF, TriangleType, classify, parse_type


# ──────────────────────────────────────────────────────────────────────────
# concrete expansions, frozen oracle values
# ──────────────────────────────────────────────────────────────────────────


def test_modular_cusp_coefficients():
    e = cusp_expansion(parse_type("2,3,inf"), 6)
    cs = e.coefficients()
    assert cs[0] == rat(31, 72)
    assert cs[1] == rat(1823, 27648)
    # same value in the common-denominator form 196884/1728^2
    assert cs[1] == rat(5469, 82944)
    assert cs[2] == rat(10495, 2519424)
    assert e.series.coeff(-1) == 1


def test_24inf_c1():
    e = cusp_expansion(parse_type("2,4,inf"), 3)
    assert e.coefficients()[1] == rat(1093, 16384)


def test_elliptic_first_vertex_values():
    # leading 1 + x, then the known rational tail for the modular group
    e = elliptic_expansion(parse_type("2,3,inf"), 1, 6)
    assert e.series.coeff(0) == 1 and e.series.coeff(1) == 1
    a = e.coefficients()
    assert a[0] == rat(23, 54)
    assert a[1] == rat(6227, 58320)
    assert a[2] == rat(3319, 174960)
    assert a[3] == rat(263489, 97977600)
    assert a[4] == rat(1693777, 5290790400)


def test_second_vertex_normalization():
    e = elliptic_expansion(parse_type("2,3,inf"), 2, 4)
    assert e.series.valuation() == 1
    assert e.series.coeff(1) == 1  # b_1 pinned by the coordinate scaling
    assert e.point == "zeta2"
    assert e.series.tag == "qt2"


def test_no_cusp_type_expansion():
    e = cusp_expansion(parse_type("2,3,7"), 8)
    assert e.coefficients()[0] == rat(1483, 3456)
    assert expansion_residual(e).is_zero()


def test_bad_arguments():
    t = parse_type("2,3,inf")
    with pytest.raises(ValueError):
        elliptic_expansion(t, 3, 10)
    with pytest.raises(ValueError):
        elliptic_expansion(t, 1, 1)
    with pytest.raises(ValueError):
        cusp_expansion(t, -1)


# ──────────────────────────────────────────────────────────────────────────
# ODE residuals
# ──────────────────────────────────────────────────────────────────────────


def _random_types(count: int, seed: int) -> list[TriangleType]:
    rng = random.Random(seed)
    pool = [2, 3, 4, 5, 6, 7, 8, 9, INF]
    out = []
    while len(out) < count:
        res = classify(rng.choice(pool), rng.choice(pool), rng.choice(pool))
        if res.hyperbolic and res.ttype not in out:
            out.append(res.ttype)
    return out


@pytest.mark.parametrize("t", _random_types(10, 20260818),
                         ids=lambda t: t.label())
def test_cusp_residual_random_types(t):
    assert expansion_residual(cusp_expansion(t, 26)).is_zero()


@pytest.mark.parametrize("spec,i", [("2,3,inf", 1), ("2,3,inf", 2),
                                    ("2,3,7", 1), ("2,3,7", 2),
                                    ("3,inf,inf", 2), ("inf,inf,inf", 1),
                                    ("4,6,inf", 2)])
def test_elliptic_residuals(spec, i):
    # covers elliptic vertices and vertices that are themselves cusps
    e = elliptic_expansion(parse_type(spec), i, 14)
    assert expansion_residual(e).is_zero()


def test_universal_residual_symbolic():
    assert universal_residual(10).is_zero()


# ──────────────────────────────────────────────────────────────────────────
# universal cusped coefficients: golden displays
# ──────────────────────────────────────────────────────────────────────────

# exponent convention: (gamma_plus power, gamma_minus power)
GOLDEN_CUSPED = [
    (bipoly({(0, 0): 1, (0, 1): -1}), 2),
    (bipoly({(0, 0): 5, (1, 0): -2, (0, 2): -3}), 64),
    (bipoly({(0, 3): -1, (1, 1): -1, (0, 1): 2}), 54),
    (bipoly({(0, 0): -31, (1, 0): 76, (2, 0): -28, (0, 2): 690,
             (1, 2): -404, (0, 4): -303}), 32768),
    (bipoly({(0, 1): -274, (1, 1): 765, (2, 1): -314, (0, 3): 2807,
             (1, 3): -1865, (0, 5): -1119}), 216000),
    (bipoly({(0, 0): 19683, (1, 0): -121770, (2, 0): 199044,
             (0, 2): -1909439, (1, 2): 5990732, (3, 0): -68472,
             (0, 4): 12854105, (2, 2): -2699804, (1, 4): -9509386,
             (0, 6): -4754693}), 1528823808),
    (bipoly({(0, 1): 341510, (1, 1): -2360379, (0, 3): -13805911,
             (2, 1): 4269300, (3, 1): -1587244, (1, 3): 48264782,
             (0, 5): 70933968, (2, 3): -23644656, (1, 5): -57687959,
             (0, 7): -24723411}), 12644352000),
]


def test_universal_cusped_displays():
    uc = universal_coeffs(6, "cusped")
    assert uc.case == "cusped" and uc.order == 6
    for n, (num, den) in enumerate(GOLDEN_CUSPED):
        assert uc.coeffs[n] == num / rat(den), f"c_{n} mismatch"


def test_universal_matches_concrete():
    uc = universal_coeffs(5, "cusped")
    for spec in ("2,3,inf", "4,6,inf", "2,7,inf", "inf,inf,inf"):
        t = parse_type(spec)
        assert uc.evaluate(t) == cusp_expansion(t, 5).coefficients()


def test_universal_vanishing_specializations():
    uc = universal_coeffs(8, "cusped")
    # both angles 1/2: series terminates after the linear term
    gp = rat(1, 2)
    gm = rat(0)
    vals = [c.subs((gp, gm)) for c in uc.coeffs]
    assert vals[0] == rat(1, 2)
    assert vals[1] == rat(1, 16)
    assert all(v == 0 for v in vals[2:])
    # (v1, v2) = (1, 0): every coefficient dies
    vals = [c.subs((rat(1), rat(1))) for c in uc.coeffs]
    assert all(v == 0 for v in vals)


def test_antisymmetry():
    assert antisymmetry_check(10)


def test_cusped_rejects_nocusp_eval():
    uc = universal_coeffs(2, "cusped")
    with pytest.raises(DomainError):
        uc.evaluate(parse_type("2,3,7"))


# ──────────────────────────────────────────────────────────────────────────
# universal no-cusp coefficients: golden displays
# ──────────────────────────────────────────────────────────────────────────


def _p3(terms: dict) -> MPoly:
    return MPoly(3, {e: rat(c) for e, c in terms.items()})


# exponent convention: (gamma_plus, gamma_minus, v3^2)
GOLDEN_NOCUSP = [
    (_p3({(0, 0, 0): -1, (0, 1, 0): 1, (0, 0, 1): 1}), 2, {1: 1}),
    (_p3({(0, 0, 0): 5, (1, 0, 0): -2, (0, 2, 0): -3,
          (0, 0, 1): -6, (1, 0, 1): 2, (0, 0, 2): 1}), 16, {1: 1, 2: 1}),
    (_p3({(0, 1, 0): -2, (1, 1, 0): 1, (0, 3, 0): 1,
          (0, 1, 1): 2, (1, 1, 1): -1}), 6, {1: 2, 3: 1}),
    (_p3({(0, 0, 0): -31, (1, 0, 0): 76, (0, 2, 0): 690, (2, 0, 0): -28,
          (1, 2, 0): -404, (0, 4, 0): -303,
          (0, 0, 1): 100, (1, 0, 1): -244, (2, 0, 1): 88, (0, 2, 1): -1052,
          (1, 2, 1): 660, (0, 4, 1): 192,
          (0, 0, 2): -114, (1, 0, 2): 276, (2, 0, 2): -96, (0, 2, 2): 390,
          (1, 2, 2): -288, (0, 4, 2): -24,
          (0, 0, 3): 52, (1, 0, 3): -124, (2, 0, 3): 40, (0, 2, 3): -24,
          (1, 2, 3): 32,
          (0, 0, 4): -7, (1, 0, 4): 16, (2, 0, 4): -4, (0, 2, 4): -4}),
     128, {1: 3, 2: 2, 4: 1}),
]


def test_universal_nocusp_displays():
    uc = universal_coeffs(3, "nocusp")
    for n, (num, den_scalar, den) in enumerate(GOLDEN_NOCUSP):
        want = VRat(num / rat(den_scalar), den)
        got = uc.coeffs[n]
        assert got.equivalent(want), f"c_{n} differs as a function"
        assert got == want, f"c_{n} not in reduced display form"


def test_nocusp_specializes_to_cusped():
    # setting v3^2 = 0 in the no-cusp family recovers the cusped family
    nc = universal_coeffs(4, "nocusp")
    cu = universal_coeffs(4, "cusped")
    for spec in ("2,3,inf", "3,5,inf"):
        t = parse_type(spec)
        v1, v2 = t.v(1), t.v(2)
        gp, gm = v1 * v1 + v2 * v2, v1 * v1 - v2 * v2
        got = [c.evaluate(gp, gm, rat(0)) for c in nc.coeffs]
        assert got == [c.subs((gp, gm)) for c in cu.coeffs]


def test_nocusp_matches_concrete():
    uc = universal_coeffs(4, "nocusp")
    for spec in ("2,3,7", "3,4,5", "7,7,7"):
        t = parse_type(spec)
        assert uc.evaluate(t) == cusp_expansion(t, 4).coefficients()


def test_nocusp_singular_evaluation_rejected():
    uc = universal_coeffs(2, "nocusp")
    with pytest.raises(DomainError):
        uc.coeffs[1].evaluate(rat(1, 2), rat(0), rat(4))


def test_vrat_arithmetic():
    one = VRat.const(1)
    f = VRat(_p3({(0, 0, 1): 1, (0, 0, 0): -1}), {})  # V - 1
    g = VRat(MPoly.const(3, rat(1)), {1: 1})          # 1/(V-1)
    assert f * g == one
    assert (g + g) == VRat(MPoly.const(3, rat(2)), {1: 1})
    assert (g - g) == VRat.const(0)
    assert not (g - g)
    assert g ** 2 == VRat(MPoly.const(3, rat(1)), {1: 2})
    assert (one / 2 + one / 2) == one


def test_expansion_to_obj():
    e = cusp_expansion(parse_type("2,3,inf"), 2)
    obj = e.to_obj()
    assert obj["type"] == "(2,3,inf)"
    assert obj["point"] == "zeta3"
    assert obj["order"] == 2
    assert obj["series"]["tag"] == "qt3"
