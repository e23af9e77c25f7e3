"""Arbitrary-precision evaluation layer for the triangle-group engine.

Contents: a small value carrier that remembers its working precision,
digamma at rational arguments through a finite cosine sum, a routed Gauss
hypergeometric evaluator covering the four degeneration classes of the
cusped family, closed forms for the vertex expansion constants, the loop
monodromy matrices, and the inverse Schwarz map together with a series
roundtrip residual against the exact cusp expansion.

Every numerical routine takes the requested bit precision explicitly and
runs inside ``mpmath.workprec`` with guard bits; the ambient mpmath
context is never modified. Parameters are kept as exact rationals until
the final evaluation step, so degenerate parameter classes are detected
by exact equality rather than by closeness thresholds.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import mpmath

from .core_series import (
    DomainError,
    RATIONAL_TYPES,
    Rational,
    parse_rat,
    rat,
    rat_str,
)
from .schwarz import cusp_expansion
from .triangle import INF, TriangleType, group_data

GUARD_BITS = 32


# ──────────────────────────────────────────────────────────────────────────
# coercion helpers
# ──────────────────────────────────────────────────────────────────────────


def _as_rat(x) -> Rational:
    """Exact rational from int, Rational, Fraction, or a 'p/q' string."""
    if isinstance(x, bool):
        raise TypeError("bool is not a rational parameter")
    if isinstance(x, int):
        return rat(x)
    if isinstance(x, RATIONAL_TYPES):
        return x
    if isinstance(x, Fraction):
        return rat(int(x.numerator), int(x.denominator))
    if isinstance(x, str):
        return parse_rat(x)
    raise TypeError(f"exact rational required, got {type(x).__name__}")


def _mpf_rat(q):
    # exact rational -> mpf at the ambient working precision
    return mpmath.mpf(int(q.numerator)) / int(q.denominator)


def _to_mpnum(x):
    # python / mpmath scalar -> mpf or mpc (no rounding surprises for
    # rationals: they go through an exact quotient)
    if isinstance(x, BigFloat):
        return x.value
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return x
    if isinstance(x, RATIONAL_TYPES) and not isinstance(x, int):
        return _mpf_rat(x)
    if isinstance(x, Fraction):
        return mpmath.mpf(int(x.numerator)) / int(x.denominator)
    return mpmath.mpmathify(x)


# ──────────────────────────────────────────────────────────────────────────
# precision-carrying values
# ──────────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class BigFloat:
    """A real or complex value tagged with its working precision in bits.

    ``value`` is an mpmath number; ``precision`` is what the producing
    computation was asked for, excluding internal guard bits. Equality is
    deliberately not overloaded: compare with :meth:`close_to` and an
    explicit tolerance. Arithmetic with plain numbers is supported and
    keeps the smaller operand precision.
    """

    value: object
    precision: int = 128

    def __post_init__(self):
        if int(self.precision) < 8:
            raise ValueError("precision below 8 bits is not supported")
        v = self.value
        if not isinstance(v, (mpmath.mpf, mpmath.mpc)):
            with mpmath.workprec(self.precision + GUARD_BITS):
                v = _to_mpnum(v)
        if isinstance(v, mpmath.mpc) and v.imag == 0:
            v = v.real
        object.__setattr__(self, "value", v)

    # conversions ----------------------------------------------------------

    @property
    def is_real(self) -> bool:
        return isinstance(self.value, mpmath.mpf)

    def __float__(self) -> float:
        if not self.is_real:
            raise TypeError("complex BigFloat has no float value")
        return float(self.value)

    def __complex__(self) -> complex:
        return complex(self.value)

    def __str__(self) -> str:
        return mpmath.nstr(self.value, max(4, int(self.precision * 0.30103)))

    # comparison -----------------------------------------------------------

    def close_to(self, other, tol) -> bool:
        """True when |self - other| <= tol * max(1, |self|, |other|).

        The scale floor of 1 makes the test absolute near zero and
        relative for large values; ``tol`` must be given by the caller.
        """
        with mpmath.workprec(self.precision + GUARD_BITS):
            a = self.value
            b = _to_mpnum(other)
            scale = max(mpmath.mpf(1), abs(a), abs(b))
            return bool(abs(a - b) <= mpmath.mpf(tol) * scale)

    # arithmetic -----------------------------------------------------------

    def _bin(self, other, op):
        p = self.precision
        if isinstance(other, BigFloat):
            p = min(p, other.precision)
        with mpmath.workprec(p + GUARD_BITS):
            out = op(self.value, _to_mpnum(other))
        return BigFloat(out, p)

    def __add__(self, other):
        return self._bin(other, lambda x, y: x + y)

    __radd__ = __add__

    def __sub__(self, other):
        return self._bin(other, lambda x, y: x - y)

    def __rsub__(self, other):
        return self._bin(other, lambda x, y: y - x)

    def __mul__(self, other):
        return self._bin(other, lambda x, y: x * y)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._bin(other, lambda x, y: x / y)

    def __rtruediv__(self, other):
        return self._bin(other, lambda x, y: y / x)

    def __neg__(self):
        return BigFloat(-self.value, self.precision)

    def __abs__(self):
        return BigFloat(abs(self.value), self.precision)


# ──────────────────────────────────────────────────────────────────────────
# digamma at rational arguments
# ──────────────────────────────────────────────────────────────────────────


def _digamma_mn(m: int, n: int):
    # finite closed form on (0, 1); assumes an active workprec context;
    # the k = n/2 summand is halved for even n
    pi = +mpmath.pi
    out = -mpmath.euler - mpmath.log(n) - pi / (2 * mpmath.tan(pi * m / n))
    for k in range(1, n // 2 + 1):
        w = mpmath.cos(2 * pi * m * k / n) * mpmath.log(
            2 - 2 * mpmath.cos(2 * pi * k / n))
        out += w / 2 if 2 * k == n else w
    return out


def digamma_rational(m: int, n: int, prec: int = 128) -> BigFloat:
    """Digamma at m/n for 0 < m < n, by the finite cosine-log sum.

    The value is assembled from Euler's constant and elementary functions
    at rational multiples of pi; no series truncation is involved, so the
    result carries the full working precision.

    Parameters
    ----------
    m, n:
        Numerator and denominator, 0 < m < n (the quotient need not be in
        lowest terms).
    prec:
        Working precision in bits.
    """
    m, n = int(m), int(n)
    if not 0 < m < n:
        raise DomainError(f"digamma_rational needs 0 < m < n, got {m}/{n}")
    with mpmath.workprec(prec + GUARD_BITS):
        val = +_digamma_mn(m, n)
    return BigFloat(val, prec)


def _psi_rat(q):
    # digamma at any non-pole rational, via the recurrence into (0, 1];
    # assumes an active workprec context
    q = rat(q) if isinstance(q, int) else q
    if q.denominator == 1 and q <= 0:
        raise DomainError(f"digamma pole at {rat_str(q)}")
    shift = mpmath.mpf(0)
    while q > 1:
        q = q - 1
        shift += 1 / _mpf_rat(q)
    while q <= 0:
        shift -= 1 / _mpf_rat(q)
        q = q + 1
    if q == 1:
        return -mpmath.euler + shift
    return _digamma_mn(int(q.numerator), int(q.denominator)) + shift


# ──────────────────────────────────────────────────────────────────────────
# connection cases
# ──────────────────────────────────────────────────────────────────────────

CONNECTION_TAGS = ("inf0", "inf1", "inf2", "inf3")


def _is_integer(q) -> bool:
    return q.denominator == 1


def _infer_tag(a, b, c) -> str:
    # covered parameter region: a, b, c in (0, 2); each exponent
    # difference either exactly zero or non-integral with magnitude < 1
    for name, val in (("a", a), ("b", b), ("c", c)):
        if not 0 < val < 2:
            raise DomainError(
                f"parameter {name} = {rat_str(val)} outside the covered "
                f"range (0, 2)")
    d_one = c - a - b
    d_inf = b - a
    d_zero = 1 - c
    if c == 1 and (d_inf != 0 or d_one != 0):
        raise DomainError(
            "third parameter 1 with non-degenerate remaining parameters: "
            "the logarithmic solution at the origin is not covered")
    if _is_integer(c) and c != 1:
        raise DomainError(f"integral third parameter {rat_str(c)} not covered")
    for d in (d_one, d_inf, d_zero):
        if d != 0 and (_is_integer(d) or abs(d) >= 1):
            raise DomainError(
                f"exponent difference {rat_str(d)} is a nonzero integer or "
                f"has magnitude >= 1; this parameter combination is not "
                f"covered by the connection displays")
    if d_inf != 0:
        return "inf0"
    if d_one != 0:
        return "inf1"
    if d_zero != 0:
        return "inf2"
    return "inf3"


@dataclass(frozen=True)
class ConnectionCase:
    """Exact parameter triple (a, b, c) with its degeneration tag.

    The tag counts which local exponent differences vanish: ``inf0`` none,
    ``inf1`` the one at infinity (a == b), ``inf2`` additionally the one
    at unity (c == a + b), ``inf3`` all three, forcing (1/2, 1/2, 1).
    Construction validates that the triple is covered by the evaluator
    and that the stated tag matches the parameters.
    """

    tag: str
    a: object
    b: object
    c: object

    def __post_init__(self):
        a, b, c = (_as_rat(x) for x in (self.a, self.b, self.c))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        if self.tag not in CONNECTION_TAGS:
            raise DomainError(f"unknown connection tag {self.tag!r}")
        inferred = _infer_tag(a, b, c)
        if inferred != self.tag:
            raise DomainError(
                f"tag {self.tag} does not match parameters ({rat_str(a)}, "
                f"{rat_str(b)}, {rat_str(c)}): expected {inferred}")

    @staticmethod
    def from_parameters(a, b, c) -> "ConnectionCase":
        a, b, c = _as_rat(a), _as_rat(b), _as_rat(c)
        return ConnectionCase(_infer_tag(a, b, c), a, b, c)

    @staticmethod
    def for_type(t: TriangleType) -> "ConnectionCase":
        """The case attached to a hyperbolic type's uniformizing equation."""
        return ConnectionCase.from_parameters(*group_data(t).hypergeometric)

    def partner(self) -> "ConnectionCase":
        """Case of the companion solution z^(1-c) F(a-c+1, b-c+1; 2-c; z).

        The parameter map preserves all three exponent differences, so the
        partner always carries the same tag.
        """
        a, b, c = self.a, self.b, self.c
        return ConnectionCase.from_parameters(a - c + 1, b - c + 1, 2 - c)

    @property
    def differences(self) -> tuple:
        """Exponent difference magnitudes (|1-c|, |c-a-b|, |b-a|), exact."""
        return (abs(1 - self.c), abs(self.c - self.a - self.b),
                abs(self.b - self.a))

    def label(self) -> str:
        return (f"{self.tag}({rat_str(self.a)},{rat_str(self.b)};"
                f"{rat_str(self.c)})")


# ──────────────────────────────────────────────────────────────────────────
# series evaluators (all assume an active workprec context)
# ──────────────────────────────────────────────────────────────────────────


def _eps_slack():
    # stop threshold a few bits above the ulp of the ambient context
    return mpmath.mpf(2) ** (8 - mpmath.mp.prec)


def _terms_budget(absw) -> int:
    # geometric tail: one term gains -log2|w| bits; refuse near the circle
    if absw == 0:
        return 8
    bits_per_term = -mpmath.log(absw) / mpmath.log(2)
    if bits_per_term <= mpmath.mpf("0.02"):
        raise DomainError(
            f"series argument with |w| = {mpmath.nstr(absw, 6)} too close "
            f"to the unit circle for direct summation")
    return int((mpmath.mp.prec + 16) / bits_per_term) + 80


def _series_2f1(a, b, c, w):
    # plain sum of (a)_n (b)_n / ((c)_n n!) w^n with incremental terms
    af, bf, cf = (_mpf_rat(x) for x in (a, b, c))
    maxterms = _terms_budget(abs(w))
    eps = _eps_slack()
    term = mpmath.mpc(1)
    total = mpmath.mpc(1)
    settled = 0
    for n in range(maxterms):
        term = term * (af + n) * (bf + n) * w / ((cf + n) * (n + 1))
        total += term
        if abs(term) <= eps * (1 + abs(total)):
            settled += 1
            if settled >= 2:
                return total
        else:
            settled = 0
    raise DomainError(
        f"hypergeometric series did not settle within {maxterms} terms at "
        f"|w| = {mpmath.nstr(abs(w), 6)}")


def _euler_direct(a, b, c, z):
    # Euler transformation (1-z)^(c-a-b) F(c-a, c-b; c; z); same argument,
    # better-behaved parameters; reduces to the direct series when c = a+b
    return (1 - z) ** _mpf_rat(c - a - b) * _series_2f1(c - a, c - b, c, z)


def _one_minus_two_term(a, b, c, z):
    # two-term connection about unity; needs c - a - b nonintegral
    G = mpmath.gamma
    af, bf, cf = (_mpf_rat(x) for x in (a, b, c))
    w = 1 - z
    coA = G(cf) * G(cf - af - bf) / (G(cf - af) * G(cf - bf))
    coB = G(cf) * G(af + bf - cf) / (G(af) * G(bf))
    f1 = _series_2f1(a, b, a + b - c + 1, w)
    f2 = _series_2f1(c - a, c - b, c - a - b + 1, w)
    return coA * f1 + coB * w ** (cf - af - bf) * f2


def _one_minus_log(a, b, z):
    # logarithmic connection about unity for c = a + b exactly
    af, bf = _mpf_rat(a), _mpf_rat(b)
    w = 1 - z
    lw = mpmath.log(w)
    maxterms = _terms_budget(abs(w))
    eps = _eps_slack()
    psi1 = -mpmath.euler
    psia = _psi_rat(a)
    psib = _psi_rat(b)
    poch = mpmath.mpc(1)
    total = mpmath.mpc(0)
    settled = 0
    for n in range(maxterms):
        total += poch * (2 * psi1 - psia - psib - lw)
        # bracket grows only like log n, folded into the stop threshold
        if abs(poch) * (abs(lw) + 2 * mpmath.log(n + 2) + 8) <= \
                eps * (1 + abs(total)):
            settled += 1
            if settled >= 2:
                break
        else:
            settled = 0
        poch = poch * (af + n) * (bf + n) * w / (n + 1) ** 2
        psi1 += mpmath.mpf(1) / (n + 1)
        psia += 1 / (af + n)
        psib += 1 / (bf + n)
    else:
        raise DomainError(
            f"logarithmic series about unity did not settle within "
            f"{maxterms} terms at |1 - z| = {mpmath.nstr(abs(w), 6)}")
    return mpmath.gamma(af + bf) / (mpmath.gamma(af) * mpmath.gamma(bf)) * total


def _inverse_two_term(a, b, c, z):
    # two-term connection about infinity; needs b - a nonintegral
    G = mpmath.gamma
    af, bf, cf = (_mpf_rat(x) for x in (a, b, c))
    zi = 1 / z
    co1 = G(cf) * G(bf - af) / (G(bf) * G(cf - af))
    co2 = G(cf) * G(af - bf) / (G(af) * G(cf - bf))
    f1 = _series_2f1(a, a - c + 1, a - b + 1, zi)
    f2 = _series_2f1(b, b - c + 1, b - a + 1, zi)
    return co1 * (-z) ** (-af) * f1 + co2 * (-z) ** (-bf) * f2


def _inverse_log(a, c, z):
    # logarithmic connection about infinity for equal upper parameters;
    # the settling powers are z^(-n), with the branch data in (-z)^(-a)
    af, cf = _mpf_rat(a), _mpf_rat(c)
    zi = 1 / z
    lmz = mpmath.log(-z)
    maxterms = _terms_budget(abs(zi))
    eps = _eps_slack()
    psi1 = -mpmath.euler
    psia = _psi_rat(a)           # psi(a + n), incremented
    psidn = _psi_rat(c - a)      # psi(c - a - n), decremented
    poch = mpmath.mpc(1)
    total = mpmath.mpc(0)
    settled = 0
    for n in range(maxterms):
        total += poch * (lmz + 2 * psi1 - psia - psidn)
        if abs(poch) * (abs(lmz) + 2 * mpmath.log(n + 2) + 8) <= \
                eps * (1 + abs(total)):
            settled += 1
            if settled >= 2:
                break
        else:
            settled = 0
        poch = poch * (af + n) * (af - cf + 1 + n) * zi / (n + 1) ** 2
        psi1 += mpmath.mpf(1) / (n + 1)
        psia += 1 / (af + n)
        psidn -= 1 / (cf - af - (n + 1))
    else:
        raise DomainError(
            f"logarithmic series about infinity did not settle within "
            f"{maxterms} terms at |z| = {mpmath.nstr(abs(z), 6)}")
    pref = mpmath.gamma(cf) / (mpmath.gamma(af) * mpmath.gamma(cf - af))
    return pref * (-z) ** (-af) * total


# ──────────────────────────────────────────────────────────────────────────
# routed evaluation
# ──────────────────────────────────────────────────────────────────────────

ROUTES = ("direct", "one-minus", "inverse", "euler")


def _route_point(z) -> str:
    # region selection; ties go to the direct series; the annulus
    # 0.98 < |z| < 1.02 away from unity is not covered
    az, aw = abs(z), abs(1 - z)
    half = mpmath.mpf(1) / 2
    if az <= half:
        return "direct"
    if aw <= half:
        return "one-minus"
    if az >= 2:
        return "inverse"
    if az <= mpmath.mpf("0.98"):
        return "euler"
    if az >= mpmath.mpf("1.02"):
        return "inverse"
    raise DomainError(
        f"argument z = {mpmath.nstr(z, 8)} in the annulus 0.98 < |z| < 1.02 "
        f"with |1 - z| > 1/2: not covered by the connection displays")


def _hyp_raw(a, b, c, z, route=None):
    # dispatch on the region and the degeneracy pattern; assumes an
    # active workprec context and validated parameters
    if mpmath.im(z) == 0 and mpmath.re(z) >= 1:
        raise DomainError(
            f"argument z = {mpmath.nstr(z, 8)} on the branch cut [1, inf)")
    if route is None:
        route = _route_point(z)
    elif route not in ROUTES:
        raise ValueError(f"unknown route {route!r}; pick from {ROUTES}")
    if route == "direct":
        return _series_2f1(a, b, c, z)
    if route == "euler":
        return _euler_direct(a, b, c, z)
    if route == "one-minus":
        if c - a - b == 0:
            return _one_minus_log(a, b, z)
        return _one_minus_two_term(a, b, c, z)
    if a == b:
        return _inverse_log(a, c, z)
    return _inverse_two_term(a, b, c, z)


def hyp2f1(a, b, c, z, prec: int = 128, route: str | None = None) -> BigFloat:
    """Gauss hypergeometric value F(a, b; c; z) by region-routed series.

    Parameters a, b, c are exact rationals inside the covered
    degeneration classes (see :class:`ConnectionCase`); z is any complex
    number off the branch cut [1, inf) and off the annulus
    0.98 < |z| < 1.02 when that annulus is further than 1/2 from unity.
    Routing: |z| <= 1/2 direct series; |1 - z| <= 1/2 connection about
    unity (two-term, or logarithmic when c = a + b); |z| >= 2 connection
    about infinity (two-term, or logarithmic when a = b); otherwise the
    Euler-transformed series inside the disc and the slow inverse
    connection outside, both with a term budget that grows as the
    argument approaches the unit circle.

    ``route`` forces one representation ("direct", "one-minus",
    "inverse", "euler") regardless of region; convergence is still
    enforced, so forcing a divergent representation raises DomainError.
    Intended for overlap consistency checks.
    """
    case = ConnectionCase.from_parameters(a, b, c)
    with mpmath.workprec(prec + GUARD_BITS):
        zv = _to_mpnum(z)
        val = +_hyp_raw(case.a, case.b, case.c, zv, route)
    return BigFloat(val, prec)


def solution_pair(case: ConnectionCase, z, prec: int = 128) -> tuple:
    """Values (u1, u2) of the standard solution basis at z.

    u1 = F(a, b; c; z) and u2 = z^(1-c) F(a-c+1, b-c+1; 2-c; z) with
    principal branches throughout, which fixes u2 on both half-planes at
    once. For the fully degenerate class the companion solution is
    u2 = i F(1/2, 1/2; 1; 1 - z) instead.
    """
    if not isinstance(case, ConnectionCase):
        raise TypeError("solution_pair needs a ConnectionCase")
    with mpmath.workprec(prec + GUARD_BITS):
        zv = _to_mpnum(z)
        u1 = +_hyp_raw(case.a, case.b, case.c, zv)
        if case.tag == "inf3":
            u2 = +(1j * _hyp_raw(case.a, case.b, case.c, 1 - zv))
        else:
            p = case.partner()
            u2 = +(mpmath.mpc(zv) ** _mpf_rat(1 - case.c)
                   * _hyp_raw(p.a, p.b, p.c, zv))
    return BigFloat(u1, prec), BigFloat(u2, prec)


# ──────────────────────────────────────────────────────────────────────────
# vertex expansion constants
# ──────────────────────────────────────────────────────────────────────────


def _mu_raw(a, c):
    # scale factor between the companion solution and the disc coordinate
    G = mpmath.gamma
    af, cf = _mpf_rat(a), _mpf_rat(c)
    return (mpmath.sinpi(cf - af) / mpmath.sinpi(af)
            * G(af - cf + 1) ** 2 * G(cf) / (G(af) ** 2 * G(2 - cf)))


def _alpha_cusp_raw(v1, v2):
    # cosine-product closed form at an infinite-order vertex
    ab = (1 + v1 - v2) / 2
    cd = (1 + v1 + v2) / 2
    out = mpmath.mpf(int(ab.denominator) * int(cd.denominator))
    for q in (ab, cd):
        num, den = int(q.numerator), int(q.denominator)
        for k in range(1, den):
            base = 2 - 2 * mpmath.cospi(mpmath.mpf(2 * k) / den)
            expo = -mpmath.cospi(mpmath.mpf(2 * k * num) / den) / 2
            out *= base ** expo
    return out


def _alpha_finite_raw(v1, v2, i: int):
    # Gamma-quotient closed form at a finite-order vertex, i in {1, 2}
    G = mpmath.gamma
    f1, f2 = _mpf_rat(v1), _mpf_rat(v2)
    vi, vo = (f1, f2) if i == 1 else (f2, f1)
    pref = mpmath.cospi((f1 + f2) / 2) / mpmath.cospi((f1 - f2) / 2)
    return (pref * G(1 + vi) * G((1 - vi + vo) / 2) ** 2
            / (G(1 - vi) * G((1 + f1 + f2) / 2) ** 2))


class AlphaConstants(NamedTuple):
    """Vertex expansion constants, the basis ratio mu, and the width h3."""

    alpha1: BigFloat
    alpha2: BigFloat
    alpha3: BigFloat
    mu: BigFloat
    h3: BigFloat


def alpha_constants(t: TriangleType, prec: int = 128) -> AlphaConstants:
    """Normalizing constants for the local expansions of a cusped type.

    alpha1 and alpha2 come from the Gamma-quotient closed form when the
    vertex order is finite; at an interior cusp the cosine-product form
    is used for them as well (the two displays agree there). alpha3 is
    always the cosine product, and is checked to be positive, which is
    the normalization matching the generator convention with the third
    vertex at i*inf. Raises DomainError for types with m3 finite.
    """
    if t.m3 != INF:
        raise DomainError(
            f"expansion constants need a cusp at the third vertex, got "
            f"{t.label()}")
    v1, v2 = t.v(1), t.v(2)
    at, bt, ct = group_data(t).hypergeometric
    with mpmath.workprec(prec + GUARD_BITS):
        a3 = +_alpha_cusp_raw(v1, v2)
        a1 = +(a3 if t.m1 == INF else _alpha_finite_raw(v1, v2, 1))
        a2 = +(a3 if t.m2 == INF else _alpha_finite_raw(v1, v2, 2))
        mu = +_mu_raw(at, ct)
        h3 = +(2 * mpmath.cospi(_mpf_rat(v1)) + 2 * mpmath.cospi(_mpf_rat(v2)))
        if not a3 > 0:
            raise DomainError("cusp expansion constant failed positivity")
    return AlphaConstants(*(BigFloat(x, prec) for x in (a1, a2, a3, mu, h3)))


# ──────────────────────────────────────────────────────────────────────────
# loop monodromy
# ──────────────────────────────────────────────────────────────────────────


def _mat_mul(A, B):
    return (
        (A[0][0] * B[0][0] + A[0][1] * B[1][0],
         A[0][0] * B[0][1] + A[0][1] * B[1][1]),
        (A[1][0] * B[0][0] + A[1][1] * B[1][0],
         A[1][0] * B[0][1] + A[1][1] * B[1][1]),
    )


def _mat_inv(A):
    det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    return ((A[1][1] / det, -A[0][1] / det),
            (-A[1][0] / det, A[0][0] / det))


def _loop_one_matrix(a, b, c):
    # closed form for the counterclockwise loop about unity, acting on the
    # row (u1, u2); validated against direct numerical continuation of the
    # differential equation around the loop (see the monodromy tests)
    G = mpmath.gamma
    s = mpmath.sinpi
    af, bf, cf = (_mpf_rat(x) for x in (a, b, c))
    if c - a - b == 0:
        x = 2j * s(af) * s(bf) / s(cf)
        m01 = -2j * mpmath.pi * G(1 - cf) * G(2 - cf) / (
            G(1 - af) * G(1 - bf) * G(af - cf + 1) * G(bf - cf + 1))
        m10 = -2j * mpmath.pi * G(cf - 1) * G(cf) / (
            G(cf - af) * G(cf - bf) * G(af) * G(bf))
        return ((1 - x, m01), (m10, 1 + x))
    df = cf - af - bf
    sg = mpmath.expjpi(2 * df)
    den = s(cf) * s(df)
    m00 = (s(cf - af) * s(cf - bf) - sg * s(af) * s(bf)) / den
    m11 = (sg * s(cf - af) * s(cf - bf) - s(af) * s(bf)) / den
    m01 = -mpmath.pi * (sg - 1) * G(1 - cf) * G(2 - cf) / (
        s(df) * G(1 - af) * G(1 - bf) * G(af - cf + 1) * G(bf - cf + 1))
    m10 = -mpmath.pi * (sg - 1) * G(cf - 1) * G(cf) / (
        s(df) * G(cf - af) * G(cf - bf) * G(af) * G(bf))
    return ((m00, m01), (m10, m11))


def monodromy(case: ConnectionCase, prec: int = 128) -> tuple:
    """Loop matrices (M0, M1, Minf) acting on the solution row (u1, u2).

    Counterclockwise continuation around the origin or around unity sends
    the basis to (u1, u2) M, i.e. the continued u1 is
    M[0][0] u1 + M[1][0] u2. The loop about infinity is fixed by the
    composition relation Minf = M1^(-1) M0^(-1). Entries are mpmath
    complex numbers; in the fully degenerate class they are exact
    integers. M0 is diagonal (1, exp(-2 pi i c)); M1 is a closed Gamma
    and sine expression, with a separate limit branch for c = a + b.
    """
    if not isinstance(case, ConnectionCase):
        raise TypeError("monodromy needs a ConnectionCase")
    with mpmath.workprec(prec + GUARD_BITS):
        if case.tag == "inf3":
            one, zero = mpmath.mpc(1), mpmath.mpc(0)
            m0 = ((one, 2 * one), (zero, one))
            m1 = ((one, zero), (-2 * one, one))
        else:
            m0 = ((mpmath.mpc(1), mpmath.mpc(0)),
                  (mpmath.mpc(0), mpmath.expjpi(-2 * _mpf_rat(case.c))))
            m1 = _loop_one_matrix(case.a, case.b, case.c)
        minf = _mat_mul(_mat_inv(m1), _mat_inv(m0))
    return m0, m1, minf


# ──────────────────────────────────────────────────────────────────────────
# inverse Schwarz map and roundtrip residual
# ──────────────────────────────────────────────────────────────────────────

# S3 orbit of the quotient coordinate, paired with the matching relocation
# of the half-period ratio: if w = g(lam) and s0 is the ratio at w, then
# the ratio at lam itself is G(s0).
_LAMBDA_ORBIT = (
    ("identity", lambda x: x, lambda s: s),
    ("one-minus", lambda x: 1 - x, lambda s: -1 / s),
    ("reciprocal", lambda x: 1 / x, lambda s: s / (1 - s)),
    ("recip-one-minus", lambda x: 1 / (1 - x), lambda s: -1 / (s + 1)),
    ("ratio-down", lambda x: (x - 1) / x, lambda s: (s - 1) / s),
    ("ratio-up", lambda x: x / (x - 1), lambda s: s - 1),
)


def _tau_lambda_raw(z):
    # fully cusped type: invert through the classical quotient coordinate
    # lam = 1/(1 - z), picking the orbit representative whose series
    # arguments stay well inside the unit circle; the engine coordinate
    # is twice the half-period ratio
    half, one = rat(1, 2), rat(1)
    lam = 1 / (1 - z)
    scored = []
    for name, move, relocate in _LAMBDA_ORBIT:
        try:
            w = move(lam)
        except ZeroDivisionError:
            continue
        scored.append((float(max(abs(w), abs(1 - w))), name, w, relocate))
    scored.sort(key=lambda rec: rec[0])
    for _score, _name, w, relocate in scored:
        try:
            f_here = _hyp_raw(half, half, one, w)
            f_there = _hyp_raw(half, half, one, 1 - w)
        except DomainError:
            continue
        sigma = relocate(1j * f_there / f_here)
        if mpmath.im(sigma) > 0:
            return 2 * sigma
    raise DomainError(
        "no orbit representative of the argument lies in the convergent "
        "region; z is too close to 0, 1, or infinity")


def schwarz_map(t: TriangleType, z, prec: int = 128) -> BigFloat:
    """Point tau(z) of the upper half-plane hit by the inverse uniformizer.

    The cusped type's solution basis is combined into the disc coordinate
    and then moved to the half-plane model with the first vertex corner
    on the unit circle; for the fully cusped type the classical quotient
    coordinate route is used instead. z must avoid {0, 1} and the real
    ray [1, inf). Points of the lower half-plane are accepted and land in
    the reflected triangle.
    """
    if t.m3 != INF:
        raise DomainError(
            f"inverse map implemented for cusped types, got {t.label()}")
    with mpmath.workprec(prec + GUARD_BITS):
        zv = mpmath.mpc(_to_mpnum(z))
        if zv == 0 or zv == 1:
            raise DomainError("z sits at a singular point of the equation")
        if t.cusp_count == 3:
            tau = _tau_lambda_raw(zv)
        else:
            case = ConnectionCase.for_type(t)
            p = case.partner()
            u1 = _hyp_raw(case.a, case.b, case.c, zv)
            u2 = (mpmath.mpc(zv) ** _mpf_rat(1 - case.c)
                  * _hyp_raw(p.a, p.b, p.c, zv))
            phi = _mu_raw(case.a, case.c) * u2 / u1
            zeta1 = -mpmath.expjpi(-_mpf_rat(t.v(1)))
            tau = (phi + zeta1) / (zeta1 * phi + 1)
        tau = +tau
        if not mpmath.im(tau) > 0:
            raise DomainError(
                "inverse map left the upper half-plane; z is outside the "
                "covered region")
    return BigFloat(tau, prec)


@functools.lru_cache(maxsize=64)
def _cusp_series_exact(t: TriangleType, N: int) -> tuple:
    return tuple(cusp_expansion(t, N).coefficients())


def schwarz_roundtrip(t: TriangleType, z, N: int = 60,
                      prec: int = 128) -> BigFloat:
    """Residual |J(tau(z)) - (1 - z)| of the map-then-reexpand roundtrip.

    J is summed from the exact normalized cusp coefficients in the
    variable qt3 = alpha3 exp(2 pi i tau / h3). The radius of convergence
    in qt3 equals alpha3, so the sum only settles when tau keeps some
    height: the roundtrip raises DomainError when |qt3| reaches 90
    percent of the radius or when the empirical tail estimate of the
    truncated sum exceeds 1e-9.
    """
    if N < 8:
        raise ValueError("need N >= 8 cusp coefficients")
    tau = schwarz_map(t, z, prec=prec).value
    consts = alpha_constants(t, prec=prec)
    with mpmath.workprec(prec + GUARD_BITS):
        a3 = consts.alpha3.value
        h3 = consts.h3.value
        qt3 = a3 * mpmath.exp(2j * mpmath.pi * tau / h3)
        ratio = abs(qt3) / a3
        if ratio >= mpmath.mpf("0.9"):
            raise DomainError(
                f"tau = {mpmath.nstr(tau, 8)} too close to the real axis: "
                f"|qt3| is at {mpmath.nstr(ratio, 4)} of the convergence "
                f"radius")
        coeffs = _cusp_series_exact(t, N)
        total = 1 / qt3
        power = mpmath.mpc(1)
        tail_window = []
        for n, cn in enumerate(coeffs):
            term = _mpf_rat(cn) * power
            total += term
            power *= qt3
            if n >= len(coeffs) - 5:
                tail_window.append(abs(term))
        tail = max(tail_window) * ratio / (1 - ratio) * 100
        if tail > mpmath.mpf("1e-9"):
            raise DomainError(
                f"cusp series tail estimate {mpmath.nstr(tail, 4)} exceeds "
                f"1e-9 at N = {N}; tau = {mpmath.nstr(tau, 8)} is too close "
                f"to the real axis")
        resid = +abs(total - (1 - mpmath.mpc(_to_mpnum(z))))
    return BigFloat(resid, prec)
