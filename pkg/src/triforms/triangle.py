"""Hyperbolic triangle types (m1, m2, m3) and their group data.

A type is hyperbolic when 1/m1 + 1/m2 + 1/m3 < 1 (1/inf = 0); the
complement, rejected here, consists of the spherical and flat families
(2,2,m), (2,3,n) for n <= 6, (2,4,4) and (3,3,3), in any order. The order
of the entries is significant downstream (expansions at the first and
second vertex differ), so classification records both the tuple as given
and the sorted canonical form.

Conventions fixed for the whole package: v_i = 1/m_i, corners
zeta1 = -e^{-pi i v1}, zeta2 = e^{pi i v2}, zeta3 = i*infinity, parabolic
width h3 = 2cos(pi v1) + 2cos(pi v2), generators

    g1 = [[2cos(pi v1), 1], [-1, 0]]    (fixes zeta1)
    g2 = [[0, 1], [-1, 2cos(pi v2)]]    (fixes zeta2)
    g3 = [[1, h3], [0, 1]]

with g1 g2 g3 = g1^{m1} = g2^{m2} = -I. Matrix entries are exact elements
of Z[sqrt2, sqrt3] whenever every finite m_i lies in {2, 3, 4, 6}; otherwise
they are 128-bit binary floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from .core_series import DomainError, R0, Rational, rat, rat_str

INF = math.inf

#: sorted types of the arithmetic cusped triangle groups
ARITHMETIC_TYPES = (
    (2, 3, INF), (2, 4, INF), (2, 6, INF), (2, INF, INF),
    (3, 3, INF), (3, INF, INF), (4, 4, INF), (6, 6, INF),
    (INF, INF, INF),
)

FLOAT_PRECISION_BITS = 128


def parse_order(tok: str | int | float):
    """One vertex order from user input; 'inf' (any case) means infinity."""
    if isinstance(tok, str):
        t = tok.strip().lower()
        if t in ("inf", "infinity", "oo"):
            return INF
        return int(t)
    if tok == INF:
        return INF
    if isinstance(tok, float):
        if tok.is_integer():
            return int(tok)
        raise ValueError(f"vertex order must be integral or inf: {tok!r}")
    return int(tok)


def parse_type(spec: str) -> "TriangleType":
    """Parse 'm1,m2,m3' with 'inf' allowed; raises ValueError if rejected."""
    parts = [p for p in spec.split(",") if p.strip()]
    if len(parts) != 3:
        raise ValueError(f"type spec needs three entries: {spec!r}")
    res = classify(*(parse_order(p) for p in parts))
    if not res.hyperbolic:
        raise ValueError(res.reason)
    return res.ttype


# ──────────────────────────────────────────────────────────────────────────
# classification
# ──────────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class TriangleType:
    """A hyperbolic type in the order given by the caller."""

    orders: tuple  # entries: int >= 2 or INF

    def __post_init__(self):
        if len(self.orders) != 3:
            raise ValueError("a triangle type has three vertex orders")

    # convenience ------------------------------------------------------------

    @property
    def m1(self):
        return self.orders[0]

    @property
    def m2(self):
        return self.orders[1]

    @property
    def m3(self):
        return self.orders[2]

    def v(self, i: int) -> Rational:
        """Angle parameter v_i = 1/m_i (0 at a cusp); i in {1, 2, 3}."""
        m = self.orders[i - 1]
        return R0 if m == INF else rat(1, int(m))

    @property
    def canonical(self) -> tuple:
        return tuple(sorted(self.orders, key=lambda m: (m == INF, m)))

    @property
    def cusp_count(self) -> int:
        return sum(1 for m in self.orders if m == INF)

    @property
    def has_cusp(self) -> bool:
        return self.orders[2] == INF

    def swapped(self) -> "TriangleType":
        """The type with the first two vertices exchanged."""
        return TriangleType((self.orders[1], self.orders[0], self.orders[2]))

    def label(self) -> str:
        return "(" + ",".join(
            "inf" if m == INF else str(int(m)) for m in self.orders) + ")"

    def __repr__(self):
        return f"TriangleType{self.label()}"


@dataclass(frozen=True)
class ClassifyResult:
    hyperbolic: bool
    ttype: TriangleType | None = None
    reason: str = ""
    canonical: tuple = ()


def classify(m1, m2, m3) -> ClassifyResult:
    """Decide hyperbolicity of (m1, m2, m3).

    Accepts integers >= 2 and INF (math.inf); the angle-sum criterion
    1/m1 + 1/m2 + 1/m3 < 1 is applied exactly. Returns a ClassifyResult
    carrying the TriangleType (entries in the caller's order) when
    hyperbolic, else the rejection reason.
    """
    ms = tuple(parse_order(m) for m in (m1, m2, m3))
    for m in ms:
        if m != INF and m < 2:
            raise ValueError(f"vertex order below 2: {m}")
    angle = sum((rat(1, int(m)) for m in ms if m != INF), start=R0)
    canon = tuple(sorted(ms, key=lambda m: (m == INF, m)))
    if angle >= 1:
        kind = "flat" if angle == 1 else "spherical"
        return ClassifyResult(
            False, None,
            f"non-hyperbolic type {TriangleType(ms).label()}: angle sum "
            f"{rat_str(angle)} >= 1 ({kind})", canon)
    return ClassifyResult(True, TriangleType(ms), "", canon)


def is_arithmetic(t: TriangleType) -> bool:
    """Membership in the nine arithmetic cusped types.

    Raises DomainError for types without a cusp: the classification
    implemented here is only for the cusped family.
    """
    if t.cusp_count == 0:
        raise DomainError(
            f"arithmeticity test implemented only for cusped types, got "
            f"{t.label()}")
    return t.canonical in ARITHMETIC_TYPES


# ──────────────────────────────────────────────────────────────────────────
# exact real quadratic arithmetic for matrix entries
# ──────────────────────────────────────────────────────────────────────────


class RealQuad:
    """Element a + b*sqrt2 + c*sqrt3 + d*sqrt6 of Q(sqrt2, sqrt3)."""

    __slots__ = ("r",)

    def __init__(self, a=0, b=0, c=0, d=0):
        self.r = (rat(a), rat(b), rat(c), rat(d))

    def __bool__(self):
        return any(self.r)

    def _coerce(self, other):
        if isinstance(other, RealQuad):
            return other
        if isinstance(other, (int, Rational)):
            return RealQuad(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RealQuad(*(x + y for x, y in zip(self.r, o.r)))

    __radd__ = __add__

    def __neg__(self):
        return RealQuad(*(-x for x in self.r))

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is None else self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is None else o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a0, a1, a2, a3 = self.r
        b0, b1, b2, b3 = o.r
        # sqrt2*sqrt3 = sqrt6, sqrt2*sqrt6 = 2 sqrt3, sqrt3*sqrt6 = 3 sqrt2
        return RealQuad(
            a0 * b0 + 2 * a1 * b1 + 3 * a2 * b2 + 6 * a3 * b3,
            a0 * b1 + a1 * b0 + 3 * (a2 * b3 + a3 * b2),
            a0 * b2 + a2 * b0 + 2 * (a1 * b3 + a3 * b1),
            a0 * b3 + a3 * b0 + a1 * b2 + a2 * b1,
        )

    __rmul__ = __mul__

    def __eq__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is None else self.r == o.r

    def __hash__(self):
        return hash(("rq", self.r))

    def is_rational(self):
        return not (self.r[1] or self.r[2] or self.r[3])

    def rational_part(self):
        if not self.is_rational():
            raise DomainError(f"{self} is irrational")
        return self.r[0]

    def __float__(self):
        a, b, c, d = (float(x) for x in self.r)
        return a + b * 2 ** 0.5 + c * 3 ** 0.5 + d * 6 ** 0.5

    def __repr__(self):
        parts = []
        for x, n in zip(self.r, ("", "*v2", "*v3", "*v6")):
            if x:
                parts.append(f"{rat_str(x)}{n}")
        return "+".join(parts) or "0"


_EXACT_COS = {  # 2cos(pi/m) for the exactly representable orders
    2: RealQuad(0),
    3: RealQuad(1),
    4: RealQuad(0, 1),
    6: RealQuad(0, 0, 1),
    INF: RealQuad(2),
}


def two_cos_pi_over(m) -> RealQuad | None:
    """Exact 2cos(pi/m) when available (m in {2,3,4,6,inf}), else None."""
    return _EXACT_COS.get(m)


def _mat_mul(A, B):
    return (
        (A[0][0] * B[0][0] + A[0][1] * B[1][0],
         A[0][0] * B[0][1] + A[0][1] * B[1][1]),
        (A[1][0] * B[0][0] + A[1][1] * B[1][0],
         A[1][0] * B[0][1] + A[1][1] * B[1][1]),
    )


def _mat_pow(A, k: int):
    out = None
    base = A
    while k:
        if k & 1:
            out = base if out is None else _mat_mul(out, base)
        k >>= 1
        if k:
            base = _mat_mul(base, base)
    return out


# ──────────────────────────────────────────────────────────────────────────
# group data
# ──────────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class GroupData:
    """Derived constants and generators for one hyperbolic type.

    h3 is exact (RealQuad) when every finite vertex order is in
    {2, 3, 4, 6}; the float image is always provided. Matrices follow the
    same rule; ``matrices_exact`` says which case holds.
    """

    ttype: TriangleType
    v: tuple                      # (v1, v2, v3) rationals
    halphen_abc: tuple            # (a, b, c) rationals
    hypergeometric: tuple         # (a~, b~, c~) rationals
    h3_exact: RealQuad | None
    h3_float: object              # mpmath mpf
    corners: tuple                # (zeta1, zeta2, "i*inf") complex, complex, str
    gamma: tuple | None           # three 2x2 matrices; None when m3 is finite
    matrices_exact: bool
    precision_bits: int = FLOAT_PRECISION_BITS


def group_data(t: TriangleType) -> GroupData:
    """Angle parameters, associated ODE parameters, corners, generators.

    The quadratic-system parameters (a, b, c) solve 1-a-b = v1,
    1-c-b = v2, 1-a-c = v3; the hypergeometric parameters are
    a~ = (1-v1-v2-v3)/2, b~ = (1-v1-v2+v3)/2, c~ = 1-v1.
    """
    v1, v2, v3 = t.v(1), t.v(2), t.v(3)
    a = (1 + v2 - v1 - v3) / 2
    b = (1 + v3 - v1 - v2) / 2
    c = (1 + v1 - v2 - v3) / 2
    at = (1 - v1 - v2 - v3) / 2
    bt = (1 - v1 - v2 + v3) / 2
    ct = 1 - v1

    cos1 = two_cos_pi_over(t.m1)
    cos2 = two_cos_pi_over(t.m2)
    exact = cos1 is not None and cos2 is not None
    # the translation generator g3 realizes the third vertex as i*inf, so the
    # matrix triple exists only for cusped types; otherwise parameters only
    build_matrices = t.m3 == INF

    def as_mpf(x: Rational):
        n, d = _ratio(x)
        return mpmath.mpf(n) / d

    with mpmath.workprec(FLOAT_PRECISION_BITS):
        f1 = 2 * mpmath.cos(mpmath.pi * as_mpf(v1))
        f2 = 2 * mpmath.cos(mpmath.pi * as_mpf(v2))
        h3f = f1 + f2
        zeta1 = -mpmath.e ** (-mpmath.pi * 1j * as_mpf(v1))
        zeta2 = mpmath.e ** (mpmath.pi * 1j * as_mpf(v2))

    h3e = cos1 + cos2 if exact else None
    gamma = None
    if build_matrices:
        if exact:
            one, zero = RealQuad(1), RealQuad(0)
            gamma = (((cos1, one), (-one, zero)),
                     ((zero, one), (-one, cos2)),
                     ((one, h3e), (zero, one)))
        else:
            one, zero = mpmath.mpf(1), mpmath.mpf(0)
            gamma = (((f1, one), (-one, zero)),
                     ((zero, one), (-one, f2)),
                     ((one, h3f), (zero, one)))

    return GroupData(
        ttype=t,
        v=(v1, v2, v3),
        halphen_abc=(a, b, c),
        hypergeometric=(at, bt, ct),
        h3_exact=h3e,
        h3_float=h3f,
        corners=(complex(zeta1), complex(zeta2), "i*inf"),
        gamma=gamma,
        matrices_exact=exact and build_matrices,
    )


def _ratio(x: Rational) -> tuple[int, int]:
    return int(x.numerator), int(x.denominator)


def check_relations(gd: GroupData, tol: float = 1e-12) -> dict:
    """Verify g1 g2 g3 = -I and g_i^{m_i} = -I (finite orders).

    Exact matrices are compared exactly; float matrices to ``tol``.
    Returns a dict of booleans keyed by relation name.
    """
    if gd.gamma is None:
        raise DomainError(
            f"no generator matrices for {gd.ttype.label()} (third vertex "
            f"is not a cusp)")
    g1, g2, g3 = gd.gamma
    t = gd.ttype

    def is_minus_identity(M) -> bool:
        target = ((-1, 0), (0, -1))
        for i in range(2):
            for j in range(2):
                x, want = M[i][j], target[i][j]
                if gd.matrices_exact:
                    if not (x == RealQuad(want)):
                        return False
                else:
                    if abs(float(x) - want) > tol:
                        return False
        return True

    out = {"product": is_minus_identity(_mat_mul(_mat_mul(g1, g2), g3))}
    for idx, (g, m) in enumerate(((g1, t.m1), (g2, t.m2)), start=1):
        if m != INF:
            out[f"power{idx}"] = is_minus_identity(_mat_pow(g, int(m)))
    return out
