"""Holomorphic form spaces for cusped triangle types.

Everything is built from the Hauptmodul expansion at the cusp: with
theta = qt3 d/dqt3 and c_i = ceil(k/m_i), the weight-2k series

    f_{2k} = (-1)^k (theta J)^k J^{c2-k} (J-1)^{c1-k}
           = qt3^{d_{2k}} + O(qt3^{d_{2k}+1}),   d_{2k} = k - c1 - c2,

spans the space together with its multiples by powers of J: the members
f_{2k} J^l for 0 <= l <= d_{2k} have leading orders d_{2k}, ..., 0, so the
dimension is d_{2k}+1 (k >= 0). The weight-2L member with L = lcm(m1, m2)
vanishes only at the cusp, to order n_delta = L(1 - 1/m1 - 1/m2); its
logarithmic derivative is the weight-2 quasi-form, with constant term
n_delta, entering the Serre-type derivative D_k = theta - (k/2L) E2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core_series import (
    DomainError,
    R1,
    Rational,
    Series,
    rat,
    rat_str,
    series_log_derivative,
)
from .schwarz import cusp_expansion
from .triangle import INF, TriangleType

# longest hauptmodul expansion seen so far, per type; callers here only
# ever truncate downward, so growing the cache is safe
_J_CACHE: dict = {}


def _hauptmodul_series(t: TriangleType, N: int) -> Series:
    cached = _J_CACHE.get(t)
    if cached is None or cached.order < N:
        cached = cusp_expansion(t, N).series
        _J_CACHE[t] = cached
    return cached.truncate(N)


def _ceil_div(k: int, m) -> int:
    """ceil(k/m) with ceil(k/inf) = 0 for k >= 0."""
    if m == INF:
        return 0
    return -(-k // int(m))


def _require_cusp(t: TriangleType) -> None:
    if t.m3 != INF:
        raise DomainError("form spaces here need m3 = inf")


def d_exponent(t: TriangleType, k: int) -> int:
    """Leading qt3-order d_{2k} of the weight-2k spanning series."""
    return k - _ceil_div(k, t.m1) - _ceil_div(k, t.m2)


def dimension(t: TriangleType, weight: int) -> int:
    """Dimension of the holomorphic forms of the given even weight."""
    _require_cusp(t)
    if weight % 2:
        raise ValueError("forms exist in even weight only")
    k = weight // 2
    if k < 0:
        return 0
    return max(0, d_exponent(t, k) + 1)


def lcm_orders(t: TriangleType) -> int:
    """lcm(m1, m2) with lcm(m, inf) = m and lcm(inf, inf) = 1."""
    finite = [int(m) for m in (t.m1, t.m2) if m != INF]
    if not finite:
        return 1
    return math.lcm(*finite)


# ──────────────────────────────────────────────────────────────────────────
# the spanning series and bases
# ──────────────────────────────────────────────────────────────────────────


def form_f(t: TriangleType, k: int, N: int) -> Series:
    """The monic weight-2k series f_{2k} to qt3-order N."""
    _require_cusp(t)
    if k < 0:
        raise ValueError("need k >= 0")
    # k extra terms: each factor of theta(J) costs one order of precision
    J = _hauptmodul_series(t, N + k + 4)
    one = Series.one("qt3", J.order)
    c1, c2 = _ceil_div(k, t.m1), _ceil_div(k, t.m2)
    f = J.theta().pow_int(k) * J.pow_int(c2 - k) * (J - one).pow_int(c1 - k)
    if k % 2:
        f = -f
    return f.truncate(min(f.order, N))


@dataclass(frozen=True)
class FormBasis:
    """Basis f_{2k} J^l, 0 <= l <= d, of the weight-2k forms.

    ``elements[l]`` has leading term qt3^(d-l) with unit coefficient, so
    the members are triangular in the leading order and independent; the
    list is empty when the space is zero.
    """

    ttype: TriangleType
    k: int
    weight: int
    d: int
    elements: tuple

    def to_obj(self) -> dict:
        return {
            "type": self.ttype.label(),
            "weight": self.weight,
            "d": self.d,
            "elements": [
                {"l": l,
                 "coeffs": [rat_str(el.coeff(n))
                            for n in range(el.order + 1)]}
                for l, el in enumerate(self.elements)
            ],
        }


def basis(t: TriangleType, k: int, N: int) -> FormBasis:
    """FormBasis of weight 2k to series order N."""
    _require_cusp(t)
    if k < 0:
        raise ValueError("need k >= 0")
    d = d_exponent(t, k)
    if d < 0:
        return FormBasis(t, k, 2 * k, d, ())
    J = _hauptmodul_series(t, N + d + 4)
    f = form_f(t, k, N + d + 2)
    elements = []
    el = f
    for _ in range(d + 1):
        elements.append(el.truncate(N))
        el = el * J
    return FormBasis(t, k, 2 * k, d, tuple(elements))


# ──────────────────────────────────────────────────────────────────────────
# the cusp form, the quasi-form, and the derivative
# ──────────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class DeltaPackage:
    """The weight-2L form vanishing only at the cusp, and its data."""

    ttype: TriangleType
    L: int
    delta: Series
    n_delta: Rational
    e2: Series

    def to_obj(self) -> dict:
        return {
            "type": self.ttype.label(),
            "L": self.L,
            "n_delta": rat_str(self.n_delta),
            "delta": self.delta.to_obj(),
            "e2": self.e2.to_obj(),
        }


def delta_and_e2(t: TriangleType, N: int) -> DeltaPackage:
    """Delta = f_{2L} and E2 = theta(Delta)/Delta, both to order N.

    The constant term of E2 equals the cusp order n_delta of Delta; with
    the 1/h3 unit absorbed, E2 is exactly the normalized logarithmic
    derivative, so all coefficients stay rational.
    """
    _require_cusp(t)
    L = lcm_orders(t)
    n_delta = rat(L) * (R1 - t.v(1) - t.v(2))
    # inverting a series of valuation n_delta costs 2 n_delta < 2L orders
    delta = form_f(t, L, N + 2 * L + 2)
    e2 = series_log_derivative(delta).truncate(N)
    if delta.valuation() != n_delta or e2.coeff(0) != n_delta:
        raise DomainError("cusp order of the distinguished form is off")
    return DeltaPackage(t, L, delta.truncate(N), n_delta, e2)


def serre_derivative(f: Series, k: int, pkg: DeltaPackage) -> Series:
    """D_k f = theta(f) - (k/2L) E2 f for a weight-k form series.

    The result is verified to lie in the weight-(k+2) space by triangular
    elimination against the basis; a nonzero residual raises (the input
    was not a holomorphic form of weight k).
    """
    if k % 2:
        raise ValueError("even weight expected")
    g = f.theta() - (f * pkg.e2).scale(rat(k, 2 * pkg.L))
    order = g.order
    b = basis(pkg.ttype, k // 2 + 1, order)
    if order < b.d:
        raise ValueError("series order too small to certify membership")
    r = g
    # elements[l] is monic of leading order d - l; eliminate by ascending
    # leading order so earlier subtractions cannot disturb later pivots
    for l in range(b.d, -1, -1):
        c = r.coeff(b.d - l)
        if c:
            r = r - b.elements[l].scale(c)
    if not r.truncate(order).is_zero():
        raise DomainError("derivative left the form space; residual "
                          f"{dict(r.truncate(order).nonzero_items())}")
    return g


# ──────────────────────────────────────────────────────────────────────────
# generators
# ──────────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class GeneratorSet:
    """Minimal generators of the form algebra, both descriptions.

    ``form_side`` lists (weight, label) built from the f-series;
    ``halphen_side`` lists (weight, variant, k) of Eisenstein-like
    generators where that description exists, else None.
    """

    case: str
    form_side: tuple
    halphen_side: tuple | None


def generator_weights(t: TriangleType) -> GeneratorSet:
    _require_cusp(t)
    m1, m2 = t.m1, t.m2
    if m1 == INF and m2 == INF:
        return GeneratorSet(
            "all-cusps", ((2, "f_2"), (2, "J*f_2")), None)
    if m2 == INF:
        m = int(m1)
        return GeneratorSet(
            "one-finite",
            tuple((2 * k, f"f_{2 * k}") for k in range(1, m + 1)),
            tuple((2 * k, 1, k) for k in range(1, m + 1)))
    m1, m2 = int(m1), int(m2)
    form_side = [(2 * l, f"f_{2 * l}") for l in range(2, m2 + 1)]
    halphen_side = [(2 * l, 2, l) for l in range(2, m2 + 1)]
    for l in range(3, m1 + 1):
        form_side.append((2 * l, f"J^{d_exponent(t, l)}*f_{2 * l}"))
        halphen_side.append((2 * l, 1, l))
    return GeneratorSet("two-finite", tuple(form_side), tuple(halphen_side))


def eisenstein_conversion(t: TriangleType, k: int, variant: int,
                          N: int) -> Series:
    """f_{2k} rebuilt from the Eisenstein-like series of the other engine:

        f_{2k} = E^{(1)}_{2k} J^{c2-k+1} (J-1)^{c1-1}
               = E^{(2)}_{2k} J^{c2-1}   (J-1)^{c1-k+1}

    expressed in qt3 through the exact dictionary qt3 = lambda * qhat.
    The (-1)^k of the f-definition is absorbed by the sign orientation of
    the logarithmic-derivative identities. Raises when the rebuilt series
    disagrees with form_f, so a passing call certifies the generator map.
    """
    from .halphen import eisenstein_like, solve_cusp
    _require_cusp(t)
    if k < 1:
        raise ValueError("need k >= 1")
    if variant not in (1, 2):
        raise ValueError("variant is 1 or 2")
    lam = solve_cusp(t, 1).lambda_scale
    if k == 1:
        sol = solve_cusp(t, N + 4)
        e = (sol.s[0] - sol.s[1]) if variant == 1 else (sol.s[2] - sol.s[1])
    else:
        e = eisenstein_like(t, k, variant, N + 4)
    er = e.rescale(R1 / lam)
    e_t = Series("qt3", er.offset, list(er.coeffs), er.order, er.zero)
    J = _hauptmodul_series(t, N + k + 4)
    one = Series.one("qt3", J.order)
    c1, c2 = _ceil_div(k, t.m1), _ceil_div(k, t.m2)
    if variant == 1:
        g = e_t * J.pow_int(c2 - k + 1) * (J - one).pow_int(c1 - 1)
    else:
        g = e_t * J.pow_int(c2 - 1) * (J - one).pow_int(c1 - k + 1)
    g = g.truncate(min(g.order, N))
    f = form_f(t, k, g.order)
    if not (g - f).is_zero():
        raise DomainError(
            f"generator map failed for weight {2 * k} variant {variant}")
    return g


def nocusp_dimension(t: TriangleType, k: int) -> int:
    """Dimension of weight-2k forms when all three vertex orders are
    finite: max(0, k + 1 - sum of ceil(k/m_i)), with k = 0 giving 1."""
    if any(m == INF for m in t.orders):
        raise DomainError("finite type expected")
    if k < 0:
        return 0
    val = k + 1 - sum(_ceil_div(k, m) for m in t.orders)
    return max(0, val)
