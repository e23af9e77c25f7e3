"""Local expansions of the normalized Hauptmodul from its Schwarzian ODE.

The Hauptmodul J of a hyperbolic type sends the three vertices to 1, 0 and
infinity. Writing th = x d/dx for the local coordinate x at any one vertex,
J satisfies

    [-2 (th^3 J)(th J) + 3 (th^2 J)^2 - n_z^{-2} (th J)^2] * J^2 (J-1)^2
        = (th J)^4 * B(J),

    B(J) = (1-v3^2) J^2 + (v2^2 - v1^2 + v3^2 - 1) J + (1 - v2^2),

where n_z is the order of the stabilizer at the expansion point (infinite
at a cusp). With the leading terms pinned to

    J = 1 + x + sum_{k>=2} a_k x^k      at the first vertex,
    J =     x + sum_{k>=2} b_k x^k      at the second,
    J = x^{-1} + sum_{n>=0} c_n x^n     at the third,

the remaining coefficients are determined one linear solve at a time: the
residual row first touched by a new coefficient is linear in it with an
explicitly known pivot. The same recursion runs over plain rationals, over
polynomials in gamma_plus = v1^2 + v2^2 and gamma_minus = v1^2 - v2^2
(universal cusped coefficients), and over rational functions with
denominators built from (v3^2 - k^2) (universal coefficients when the third
vertex is not a cusp).

The incremental engine keeps every power and derivative cache up to date
under single-monomial corrections, so an order-N expansion costs O(N^2)
coefficient operations.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core_series import (
    DomainError,
    MPoly,
    R0,
    R1,
    Rational,
    Series,
    rat,
)
from .triangle import INF, TriangleType

POINT_TAGS = {"zeta1": "qt1", "zeta2": "qt2", "zeta3": "qt3"}

# variable layout for universal coefficients: gamma_plus, gamma_minus, v3^2
_GP, _GM, _V = 0, 1, 2


# ──────────────────────────────────────────────────────────────────────────
# rational functions with denominator prod_k (v3^2 - k^2)^{e_k}
# ──────────────────────────────────────────────────────────────────────────


def _vfactor(k: int) -> MPoly:
    return MPoly(3, {(0, 0, 1): R1, (0, 0, 0): rat(-k * k)})


class VRat:
    """num / prod_k (v3^2 - k^2)^{e_k} with num in Q[gp, gm, v3^2].

    Kept reduced: no denominator factor divides the numerator. The factors
    are linear in v3^2 and pairwise distinct, so the reduced form is unique
    and equality is componentwise.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: MPoly, den: dict | None = None, reduce: bool = True):
        self.num = num
        self.den = {k: e for k, e in (den or {}).items() if e}
        if reduce:
            self._reduce()

    def _reduce(self):
        if not self.num:
            self.den = {}
            return
        for k in sorted(self.den):
            while self.den.get(k, 0) > 0:
                try:
                    self.num = self.num.divexact(_vfactor(k))
                except DomainError:
                    break
                self.den[k] -= 1
            if not self.den.get(k, 1):
                del self.den[k]

    # construction --------------------------------------------------------

    @staticmethod
    def const(c) -> "VRat":
        return VRat(MPoly.const(3, rat(c)), None, reduce=False)

    @staticmethod
    def poly(p: MPoly) -> "VRat":
        return VRat(p, None, reduce=False)

    @staticmethod
    def _coerce(x):
        if isinstance(x, VRat):
            return x
        if isinstance(x, MPoly):
            return VRat(x, None, reduce=False)
        if isinstance(x, (int, Rational)):
            return VRat.const(x)
        return None

    def __bool__(self):
        return bool(self.num)

    # ring operations ------------------------------------------------------

    def _den_poly(self) -> MPoly:
        p = MPoly.const(3, R1)
        for k, e in self.den.items():
            p = p * _vfactor(k) ** e
        return p

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        den = {k: max(self.den.get(k, 0), o.den.get(k, 0))
               for k in set(self.den) | set(o.den)}
        na, nb = self.num, o.num
        for k, e in den.items():
            da, db = e - self.den.get(k, 0), e - o.den.get(k, 0)
            if da:
                na = na * _vfactor(k) ** da
            if db:
                nb = nb * _vfactor(k) ** db
        return VRat(na + nb, den)

    __radd__ = __add__

    def __neg__(self):
        return VRat(-self.num, self.den, reduce=False)

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
        den = {k: self.den.get(k, 0) + o.den.get(k, 0)
               for k in set(self.den) | set(o.den)}
        return VRat(self.num * o.num, den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)):
            return VRat(self.num / rat(other), self.den, reduce=False)
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise DomainError("negative powers of VRat not supported")
        out = VRat.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash(("vrat", self.num, tuple(sorted(self.den.items()))))

    def equivalent(self, other: "VRat") -> bool:
        """Equality by cross multiplication (independent of reduction)."""
        return self.num * other._den_poly() == other.num * self._den_poly()

    def divide_by_cusp_pivot(self, n: int) -> "VRat":
        """Solve step for the third-vertex branch: divide by
        -2(n+1)((n+1)^2 - v3^2) = 2(n+1)(v3^2 - (n+1)^2)."""
        den = dict(self.den)
        den[n + 1] = den.get(n + 1, 0) + 1
        return VRat(self.num / rat(2 * (n + 1)), den)

    def evaluate(self, gp, gm, v3sq) -> Rational:
        """Exact evaluation; rejects the singular locus v3^2 = k^2."""
        num = self.num.subs((gp, gm, v3sq))
        den = R1
        for k, e in self.den.items():
            f = v3sq - k * k
            if f == 0:
                raise DomainError(
                    f"evaluation at v3^2 = {k * k} hits a denominator zero")
            den *= f ** e
        return num / den

    def __repr__(self):
        if not self.den:
            return f"({self.num.pretty(('gp', 'gm', 'V'))})"
        den = "*".join(
            f"(V-{k * k})" + (f"^{e}" if e > 1 else "")
            for k, e in sorted(self.den.items()))
        return f"({self.num.pretty(('gp', 'gm', 'V'))})/({den})"


# ──────────────────────────────────────────────────────────────────────────
# incremental residual engine
# ──────────────────────────────────────────────────────────────────────────


def _madd(target: dict, src: dict, c, p: int, cutoff: int):
    """target += c * x^p * src, dropping exponents above cutoff."""
    if not c:
        return
    for e, a in src.items():
        f = e + p
        if f > cutoff:
            continue
        v = target.get(f)
        v = c * a if v is None else v + c * a
        if v:
            target[f] = v
        elif f in target:
            del target[f]


def _mono(target: dict, c, p: int, cutoff: int):
    """target += c * x^p."""
    if not c or p > cutoff:
        return
    v = target.get(p)
    v = c if v is None else v + c
    if v:
        target[p] = v
    elif p in target:
        del target[p]


class _Engine:
    """Caches of all series entering the residual, patchable by monomials.

    Invariant: with J the sum of all terms added so far,
      W_k = J^k, V_k = (th J)^k, D2 = th^2 J, D3 = th^3 J,
      P1 = D3 * V1, P2 = D2^2,
      S = -2 P1 + 3 P2 - nz2inv * V2,
      H = W4 - 2 W3 + W2,
      B = b0 + b1 W1 + b2 W2,
    all truncated beyond ``cutoff``. The residual is S*H - V4*B; only
    single rows of it are ever materialized.
    """

    def __init__(self, beta3, nz2inv, zero, cutoff: int):
        self.b0, self.b1, self.b2 = beta3
        self.nz2inv = nz2inv
        self.zero = zero
        self.cutoff = cutoff
        for name in ("J", "W1", "W2", "W3", "W4", "V1", "V2", "V3", "V4",
                     "D2", "D3", "P1", "P2", "S", "H"):
            setattr(self, name, {})
        self.B = {}
        _mono(self.B, self.b0, 0, cutoff)

    def add_term(self, c, p: int):
        """Patch J += c * x^p, updating every cache in O(cutoff) time."""
        if not c:
            return
        cut = self.cutoff
        c1 = p * c
        c2 = p * c1
        c3 = p * c2

        dW4, dW3, dW2 = {}, {}, {}
        _madd(dW4, self.W3, 4 * c, p, cut)
        _madd(dW4, self.W2, 6 * c * c, 2 * p, cut)
        _madd(dW4, self.W1, 4 * c * c * c, 3 * p, cut)
        _mono(dW4, c * c * c * c, 4 * p, cut)
        _madd(dW3, self.W2, 3 * c, p, cut)
        _madd(dW3, self.W1, 3 * c * c, 2 * p, cut)
        _mono(dW3, c * c * c, 3 * p, cut)
        _madd(dW2, self.W1, 2 * c, p, cut)
        _mono(dW2, c * c, 2 * p, cut)

        dV4, dV3, dV2 = {}, {}, {}
        if c1:
            _madd(dV4, self.V3, 4 * c1, p, cut)
            _madd(dV4, self.V2, 6 * c1 * c1, 2 * p, cut)
            _madd(dV4, self.V1, 4 * c1 * c1 * c1, 3 * p, cut)
            _mono(dV4, c1 * c1 * c1 * c1, 4 * p, cut)
            _madd(dV3, self.V2, 3 * c1, p, cut)
            _madd(dV3, self.V1, 3 * c1 * c1, 2 * p, cut)
            _mono(dV3, c1 * c1 * c1, 3 * p, cut)
            _madd(dV2, self.V1, 2 * c1, p, cut)
            _mono(dV2, c1 * c1, 2 * p, cut)

        dP1, dP2 = {}, {}
        if c1:
            _madd(dP1, self.D3, c1, p, cut)
            _madd(dP1, self.V1, c3, p, cut)
            _mono(dP1, c3 * c1, 2 * p, cut)
            _madd(dP2, self.D2, 2 * c2, p, cut)
            _mono(dP2, c2 * c2, 2 * p, cut)

        for tgt, d in ((self.W4, dW4), (self.W3, dW3), (self.W2, dW2),
                       (self.V4, dV4), (self.V3, dV3), (self.V2, dV2),
                       (self.P1, dP1), (self.P2, dP2)):
            _madd(tgt, d, 1, 0, cut)
        _mono(self.W1, c, p, cut)
        _mono(self.V1, c1, p, cut)
        _mono(self.D2, c2, p, cut)
        _mono(self.D3, c3, p, cut)
        _mono(self.J, c, p, cut)

        _madd(self.S, dP1, -2, 0, cut)
        _madd(self.S, dP2, 3, 0, cut)
        if self.nz2inv:
            _madd(self.S, dV2, -self.nz2inv, 0, cut)
        _madd(self.H, dW4, 1, 0, cut)
        _madd(self.H, dW3, -2, 0, cut)
        _madd(self.H, dW2, 1, 0, cut)
        if self.b2:
            _madd(self.B, dW2, self.b2, 0, cut)
        if self.b1:
            _mono(self.B, self.b1 * c, p, cut)

    def _conv(self, A: dict, B: dict, r: int, acc):
        if len(B) < len(A):
            A, B = B, A
        for e, a in A.items():
            b = B.get(r - e)
            if b is not None:
                acc = acc + a * b
        return acc

    def row(self, r: int):
        """Coefficient of x^r in the residual S*H - V4*B."""
        val = self._conv(self.S, self.H, r, self.zero)
        neg = self._conv(self.V4, self.B, r, self.zero)
        return val - neg


def _beta3(v1sq, v2sq, v3sq, one):
    """B(J) = b0 + b1 J + b2 J^2 read off the angle parameters."""
    return (one - v2sq, v2sq - v1sq + v3sq - one, one - v3sq)


def _run(engine: _Engine, init, identity_rows, unknowns, row_of, solve_c):
    for c, p in init:
        engine.add_term(c, p)
    for r in identity_rows:
        if engine.row(r):
            raise DomainError(
                f"normalization inconsistent: residual row {r} nonzero")
    out = []
    for n in unknowns:
        c = solve_c(engine.row(row_of(n)), n)
        engine.add_term(c, n)
        out.append(c)
    return out


# ──────────────────────────────────────────────────────────────────────────
# public API
# ──────────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class HauptmodulExpansion:
    """One local expansion of J in its normalized coordinate."""

    ttype: TriangleType
    point: str            # "zeta1" | "zeta2" | "zeta3"
    series: Series        # tag qt1 / qt2 / qt3
    order: int

    def coefficient(self, k: int):
        return self.series.coeff(k)

    def coefficients(self) -> list:
        """a_k, b_k or c_k from the first solved index onward."""
        start = {"zeta1": 2, "zeta2": 2, "zeta3": 0}[self.point]
        return [self.series.coeff(k) for k in range(start, self.order + 1)]

    def to_obj(self) -> dict:
        return {
            "type": self.ttype.label(),
            "point": self.point,
            "series": self.series.to_obj(),
            "order": self.order,
            "variable_note": "coordinate scaled so the pinned leading "
                             "coefficients are 1; the tau-space multiplier "
                             "is alpha_i from the constants module",
        }


def cusp_expansion(t: TriangleType, N: int) -> HauptmodulExpansion:
    """J = x^{-1} + c_0 + c_1 x + ... at the third vertex, exact rationals.

    Works for both a cusp (m3 = inf) and a finite third vertex; the value
    of v3 enters the pivot and the polynomial B.
    """
    if N < 0:
        raise ValueError("need N >= 0")
    v1sq, v2sq, v3sq = (t.v(i) ** 2 for i in (1, 2, 3))
    eng = _Engine(_beta3(v1sq, v2sq, v3sq, R1), v3sq, R0, N - 5 + 8)

    def solve(val, n):
        return -val / (2 * (n + 1) * ((n + 1) ** 2 - v3sq))

    cs = _run(eng, [(R1, -1)], [-6], range(0, N + 1), lambda n: n - 5, solve)
    ser = Series("qt3", -1, [R1] + cs, N, zero=R0)
    return HauptmodulExpansion(t, "zeta3", ser, N)


def elliptic_expansion(t: TriangleType, i: int, N: int) -> HauptmodulExpansion:
    """Expansion at the first (i=1, J = 1 + x + ...) or second vertex
    (i=2, J = x + ...); if vertex i is itself a cusp the same recursion
    applies with an infinite stabilizer."""
    if i not in (1, 2):
        raise ValueError("vertex index must be 1 or 2")
    if N < 2:
        raise ValueError("need N >= 2")
    v1sq, v2sq, v3sq = (t.v(j) ** 2 for j in (1, 2, 3))
    visq = v1sq if i == 1 else v2sq
    eng = _Engine(_beta3(v1sq, v2sq, v3sq, R1), visq, R0, N + 3 + 8)

    def solve(val, k):
        return val / (2 * (k - 1) * ((k - 1) ** 2 - visq))

    init = [(R1, 0), (R1, 1)] if i == 1 else [(R1, 1)]
    cs = _run(eng, init, [0, 1, 2, 3, 4], range(2, N + 1),
              lambda k: k + 3, solve)
    if i == 1:
        ser = Series("qt1", 0, [R1, R1] + cs, N, zero=R0)
    else:
        ser = Series("qt2", 1, [R1] + cs, N, zero=R0)
    return HauptmodulExpansion(t, f"zeta{i}", ser, N)


@dataclass(frozen=True)
class UniversalCoeffs:
    """Type-independent third-vertex coefficients c_0 ... c_N.

    cusped: entries are MPoly in (gamma_plus, gamma_minus).
    nocusp: entries are VRat in (gamma_plus, gamma_minus, v3^2).
    """

    case: str
    coeffs: tuple

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, t: TriangleType) -> list:
        """Specialize every coefficient at a concrete type."""
        v1, v2, v3 = t.v(1), t.v(2), t.v(3)
        gp, gm = v1 * v1 + v2 * v2, v1 * v1 - v2 * v2
        if self.case == "cusped":
            if t.m3 != INF:
                raise DomainError("cusped coefficients need m3 = inf")
            return [c.subs((gp, gm)) for c in self.coeffs]
        return [c.evaluate(gp, gm, v3 * v3) for c in self.coeffs]


def universal_coeffs(N: int, case: str = "cusped") -> UniversalCoeffs:
    """Solve the third-vertex recursion once for all types.

    cusped keeps polynomial entries (the pivot 2(n+1)^3 is scalar); nocusp
    entries pick up one denominator factor (v3^2 - (n+1)^2) per step.
    """
    if case == "cusped":
        gp, gm = MPoly.var(2, 0), MPoly.var(2, 1)
        half = MPoly.const(2, rat(1, 2))
        v1sq, v2sq = (gp + gm) * half, (gp - gm) * half
        zero, one = MPoly.const(2, R0), MPoly.const(2, R1)
        eng = _Engine(_beta3(v1sq, v2sq, zero, one), zero, zero, N - 5 + 8)

        def solve(val, n):
            return val / rat(-2 * (n + 1) ** 3)

        cs = _run(eng, [(one, -1)], [-6], range(0, N + 1),
                  lambda n: n - 5, solve)
        return UniversalCoeffs("cusped", tuple(cs))

    if case != "nocusp":
        raise ValueError("case must be 'cusped' or 'nocusp'")
    gp, gm, vv = (VRat.poly(MPoly.var(3, j)) for j in (_GP, _GM, _V))
    v1sq, v2sq = (gp + gm) / 2, (gp - gm) / 2
    zero, one = VRat.const(0), VRat.const(1)
    eng = _Engine(_beta3(v1sq, v2sq, vv, one), vv, zero, N - 5 + 8)
    cs = _run(eng, [(one, -1)], [-6], range(0, N + 1), lambda n: n - 5,
              lambda val, n: val.divide_by_cusp_pivot(n))
    return UniversalCoeffs("nocusp", tuple(cs))


def antisymmetry_check(N: int) -> bool:
    """c_n(gp, -gm) == (-1)^{n+1} c_n(gp, gm) for 1 <= n <= N."""
    uc = universal_coeffs(N, "cusped")
    for n in range(1, N + 1):
        c = uc.coeffs[n]
        flipped = MPoly(2, {e: (-k if e[1] % 2 else k)
                            for e, k in c.terms.items()})
        want = flipped if (n + 1) % 2 == 0 else -flipped
        if want != c:
            return False
    return True


# ──────────────────────────────────────────────────────────────────────────
# independent residual verification
# ──────────────────────────────────────────────────────────────────────────


def ode_residual(J: Series, v_sq: tuple, nz2inv, one=R1) -> Series:
    """Rebuild the full residual from scratch with plain series products.

    Independent of the incremental engine: uses only Series arithmetic.
    The result being the zero series (to its truncation order) certifies
    the expansion.
    """
    t1 = J.theta()
    t2 = t1.theta()
    t3 = t2.theta()
    v1sq, v2sq, v3sq = v_sq
    b0, b1, b2 = _beta3(v1sq, v2sq, v3sq, one)
    S = (t3 * t1).scale(-2) + (t2 * t2).scale(3)
    if nz2inv:
        S = S - (t1 * t1).scale(nz2inv)
    onef = Series.one(J.tag, J.order, one=one, zero=J.zero)
    Jm1 = J - onef
    H = J * J * Jm1 * Jm1
    B = onef.scale(b0) + J.scale(b1) + (J * J).scale(b2)
    return S * H - t1 * t1 * t1 * t1 * B


def expansion_residual(exp: HauptmodulExpansion) -> Series:
    """Residual of a computed expansion; zero series iff correct."""
    t = exp.ttype
    v_sq = tuple(t.v(j) ** 2 for j in (1, 2, 3))
    nz = {"zeta1": v_sq[0], "zeta2": v_sq[1], "zeta3": v_sq[2]}[exp.point]
    return ode_residual(exp.series, v_sq, nz)


def universal_residual(N: int) -> Series:
    """Residual of the universal cusped series, symbolically in gp, gm."""
    uc = universal_coeffs(N, "cusped")
    gp, gm = MPoly.var(2, 0), MPoly.var(2, 1)
    half = MPoly.const(2, rat(1, 2))
    v1sq, v2sq = (gp + gm) * half, (gp - gm) * half
    zero, one = MPoly.const(2, R0), MPoly.const(2, R1)
    terms = {-1: one}
    terms.update({n: c for n, c in enumerate(uc.coeffs)})
    J = Series.from_terms("qt3", terms, N, zero=zero)
    return ode_residual(J, (v1sq, v2sq, zero), zero, one=one)
