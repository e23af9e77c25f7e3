"""Quadratic first-order system attached to a triangle type, solved at the
cusp as exact power series.

For parameters (a, b, c) the system is

    t1' = (a-1)(t1 t2 + t1 t3 - t2 t3) + (b+c-1) t1^2
    t2' = (b-1)(t2 t1 + t2 t3 - t1 t3) + (a+c-1) t2^2
    t3' = (c-1)(t3 t1 + t3 t2 - t1 t2) + (a+b-1) t3^2

with ' = d/dtau. Everything here is stored in the rescaled components
s_i = (h3 / 2 pi i) t_i as series in qhat = nu e^{2 pi i tau / h3}: the
system keeps exactly the same shape with ' replaced by the Euler operator
qhat d/dqhat, and every series coefficient is rational. The constant
term is (s1, s2, s3)(0) = (0, -1, 0); the order-1 vector is the kappa
direction below (this is what fixes the unit nu), and each higher order
is a 3x3 linear solve whose determinant is n^2 (n-1) for every type.

The coefficient vectors have a second life as polynomials in (m1, m2);
``symbolic_t_coeffs`` computes those polynomials exactly. Vertex orders
of infinity are handled by the leading-coefficient convention: the value
of a polynomial at m = infinity is the coefficient of its highest power
of m, applied jointly across a vector when a common scale must survive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core_series import (
    DomainError,
    MPoly,
    R0,
    R1,
    Rational,
    Series,
    bipoly,
    rat,
    rat_str,
    series_log_derivative,
)
from .triangle import INF, TriangleType, group_data

# kappa vector: s_{i,1} = kappa_i * ttilde_{i,1}; exponent pairs are
# (power of m1, power of m2)
KAPPA_POLY = (
    bipoly({(2, 2): -1, (1, 2): -1, (2, 1): 1}),
    bipoly({(1, 1): 1, (1, 0): 1, (0, 1): 1}),
    bipoly({(2, 2): 1, (1, 2): -1, (2, 1): 1}),
)

# first coefficient vector itself: ttilde_{.,1} = (1, m1 - m2, 1)
S1_POLY = (
    KAPPA_POLY[0],
    KAPPA_POLY[1] * bipoly({(1, 0): 1, (0, 1): -1}),
    KAPPA_POLY[2],
)

# j = JT_SLOPE * J + JT_SHIFT is the affine change making j = qhat^{-1}
# + 0 + O(qhat)
JT_SLOPE = bipoly({(2, 2): 2})
JT_SHIFT = bipoly({(2, 2): -1, (0, 2): 1, (2, 0): -1})


# ──────────────────────────────────────────────────────────────────────────
# infinity specialization of (m1, m2)-polynomials
# ──────────────────────────────────────────────────────────────────────────


def _is_exact(x) -> bool:
    return hasattr(x, "denominator")


def _lead_terms(terms: dict, var: int, deg: int) -> dict:
    return {e: c for e, c in terms.items() if e[var] == deg}


def _eval_finite(terms: dict, m1, m2) -> Rational:
    """Evaluate after infinite variables have been cut to a single degree
    slice (their residual powers are ignored)."""
    val = R0
    for (e1, e2), c in terms.items():
        v = c
        if m1 != INF:
            v = v * rat(int(m1)) ** e1
        if m2 != INF:
            v = v * rat(int(m2)) ** e2
        val = val + v
    return val


def specialize_poly(p: MPoly, m1, m2) -> Rational:
    """Evaluate p(m1, m2), taking the leading coefficient in any variable
    that is infinite."""
    terms = dict(p.terms)
    for var, m in ((0, m1), (1, m2)):
        if m == INF and terms:
            deg = max(e[var] for e in terms)
            terms = _lead_terms(terms, var, deg)
    return _eval_finite(terms, m1, m2)


def specialize_vector(ps, m1, m2) -> list:
    """Joint leading-coefficient rule: the degree cut at an infinite vertex
    is the maximum over the whole vector, so that a common rescaling of the
    vector survives the limit. Components below the cut become zero."""
    rows = [dict(p.terms) for p in ps]
    for var, m in ((0, m1), (1, m2)):
        if m == INF:
            deg = max((max((e[var] for e in t), default=0) for t in rows),
                      default=0)
            rows = [_lead_terms(t, var, deg) for t in rows]
    return [_eval_finite(t, m1, m2) for t in rows]


# ──────────────────────────────────────────────────────────────────────────
# the quadratic system
# ──────────────────────────────────────────────────────────────────────────


def halphen_rhs(triple, params):
    """Right-hand side of the system for a triple in any commutative ring
    containing the parameters."""
    return _bilinear(triple, triple, params)


def _bilinear(u, v, params):
    """Bilinear Phi with Phi(s, s) = halphen_rhs(s); summing over ordered
    index pairs reconstructs the quadratic right-hand side."""
    a, b, c = params
    u1, u2, u3 = u
    v1, v2, v3 = v
    return (
        (a - 1) * (u1 * v2 + u1 * v3 - u2 * v3) + (b + c - 1) * (u1 * v1),
        (b - 1) * (u2 * v1 + u2 * v3 - u1 * v3) + (a + c - 1) * (u2 * v2),
        (c - 1) * (u3 * v1 + u3 * v2 - u1 * v2) + (a + b - 1) * (u3 * v3),
    )


def _linear_matrix(params, s0, zero, one):
    """M[i][j] = Phi(s0, e_j)_i + Phi(e_j, s0)_i, the linearization at s0."""
    cols = []
    for j in range(3):
        e = [zero, zero, zero]
        e[j] = one
        f = _bilinear(s0, e, params)
        g = _bilinear(e, s0, params)
        cols.append([f[i] + g[i] for i in range(3)])
    return [[cols[j][i] for j in range(3)] for i in range(3)]


def _solve3(A, rhs, det_expected):
    """Cramer solve of an exact 3x3 system; the caller must know the
    determinant, which is asserted."""
    (a11, a12, a13), (a21, a22, a23), (a31, a32, a33) = A
    det = (a11 * (a22 * a33 - a23 * a32)
           - a12 * (a21 * a33 - a23 * a31)
           + a13 * (a21 * a32 - a22 * a31))
    if det != det_expected:
        raise DomainError(f"pivot determinant {det} is not {det_expected}")
    b1, b2, b3 = rhs
    x1 = (b1 * (a22 * a33 - a23 * a32)
          - a12 * (b2 * a33 - a23 * b3)
          + a13 * (b2 * a32 - a22 * b3))
    x2 = (a11 * (b2 * a33 - a23 * b3)
          - b1 * (a21 * a33 - a23 * a31)
          + a13 * (a21 * b3 - b2 * a31))
    x3 = (a11 * (a22 * b3 - b2 * a32)
          - a12 * (a21 * b3 - b2 * a31)
          + b1 * (a21 * a32 - a22 * a31))
    return [x1 / det_expected, x2 / det_expected, x3 / det_expected]


def _recursion(params, s0, s1, N, zero, one):
    """Coefficient vectors s_0 .. s_N. Orders 0 and 1 are inputs (they sit
    in the kernel of the order-n solve); order n >= 2 solves
    (n I - M) s_n = sum_{k=1}^{n-1} Phi(s_k, s_{n-k}) with determinant
    n^2 (n - 1)."""
    M = _linear_matrix(params, s0, zero, one)
    rows = [list(s0), list(s1)]
    for n in range(2, N + 1):
        g = [zero, zero, zero]
        for k in range(1, n):
            f = _bilinear(rows[k], rows[n - k], params)
            g = [g[i] + f[i] for i in range(3)]
        A = [[(n if i == j else 0) - M[i][j] for j in range(3)]
             for i in range(3)]
        rows.append(_solve3(A, g, rat(n * n * (n - 1))))
    return rows


# ──────────────────────────────────────────────────────────────────────────
# concrete solutions
# ──────────────────────────────────────────────────────────────────────────


@dataclass
class HalphenSolution:
    """Series solution at the cusp for one type.

    ``s`` holds the three qhat-series with constant terms (0, -1, 0).
    ``lambda_scale`` is the exact ratio between the local Hauptmodul
    coordinate and qhat (qt3 = lambda_scale * qhat), which is how series
    from the two engines are compared. ``nu_value()`` evaluates the
    transcendental unit of qhat = nu e^{2 pi i tau / h3}; it needs the
    special-function constants, so it is computed on demand.
    """

    ttype: TriangleType
    s: tuple
    order: int
    kappa_poly: tuple = KAPPA_POLY
    lambda_scale: Rational = R1
    _nu: object = field(default=None, repr=False)

    def first_vector(self) -> list:
        return [si.coeff(1) for si in self.s]

    def nu_value(self):
        """The unit nu: rational 8 when both finite-vertex angles vanish,
        otherwise half the product of the nonzero squared angles times the
        leading-coefficient constant (a float)."""
        if self._nu is None:
            t = self.ttype
            v1, v2 = t.v(1), t.v(2)
            if v1 == 0 and v2 == 0:
                self._nu = rat(8)
            else:
                import mpmath

                from .special_functions import alpha_constants
                pref = rat(1, 2)
                for v in (v1, v2):
                    if v != 0:
                        pref = pref * v * v
                a3 = alpha_constants(t).alpha3
                num, den = pref.numerator, pref.denominator
                self._nu = a3 * mpmath.mpf(int(num)) / mpmath.mpf(int(den))
        return self._nu

    def to_obj(self) -> dict:
        nu = self.nu_value()
        return {
            "type": self.ttype.label(),
            "N": self.order,
            "nu": rat_str(nu) if _is_exact(nu) else repr(float(nu)),
            "kappa": [rat_str(specialize_poly(p, self.ttype.m1,
                                              self.ttype.m2))
                      for p in self.kappa_poly],
            "lambda": rat_str(self.lambda_scale),
            "first_vector": [rat_str(x) for x in self.first_vector()],
            "series": {f"s{i + 1}": si.to_obj()
                       for i, si in enumerate(self.s)},
        }


def solve_cusp(t: TriangleType, N: int) -> HalphenSolution:
    """Series solution to order N; requires the third vertex at infinity."""
    if t.m3 != INF:
        raise DomainError("cusp normalization needs m3 = inf")
    if N < 1:
        raise ValueError("need N >= 1")
    params = group_data(t).halphen_abc
    s0 = [R0, rat(-1), R0]
    s1 = specialize_vector(S1_POLY, t.m1, t.m2)
    rows = _recursion(params, s0, s1, N, R0, R1)
    series = tuple(
        Series("qhat", 0, [rows[n][i] for n in range(N + 1)], N, zero=R0)
        for i in range(3))
    return HalphenSolution(t, series, N, KAPPA_POLY, s1[2] - s1[0])


def halphen_residual(sol: HalphenSolution) -> tuple:
    """theta s_i - rhs_i(s) for the three components. The solver only pins
    coefficient rows n >= 2, so vanishing of rows 0 and 1 is a real check
    on the constant vector and the kappa direction."""
    params = group_data(sol.ttype).halphen_abc
    r = halphen_rhs(sol.s, params)
    return tuple(sol.s[i].theta() - r[i] for i in range(3))


# ──────────────────────────────────────────────────────────────────────────
# symbolic coefficients in Q[m1, m2]
# ──────────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class SymbolicTCoeffs:
    """ttilde_{i,j} polynomials in (m1, m2) for i = 1..3, j = 1..N."""

    order: int
    table: tuple

    def value(self, i: int, j: int) -> MPoly:
        return self.table[i - 1][j - 1]


def symbolic_t_coeffs(N: int) -> SymbolicTCoeffs:
    """Solve the recursion once over Q[v1, v2] and convert to (m1, m2).

    The rescaled vectors r_n = lambda^{-n} s_n (lambda = 2 m1^2 m2^2)
    satisfy the same recursion with starting vector

        r_1 = (-c, (1 - b)(v2 - v1), a)

    and the only divisions are by n^2 (n - 1), so r_n stays polynomial.
    Clearing v -> 1/m gives s_{i,n} = 2^n * m1^{2n} m2^{2n} r_{i,n}(1/m),
    and ttilde_{i,n} is the exact polynomial quotient by kappa_i.
    """
    if N < 1:
        raise ValueError("need N >= 1")
    v1, v2 = MPoly.var(2, 0), MPoly.var(2, 1)
    one = MPoly.const(2, R1)
    zero = MPoly(2)
    half = rat(1, 2)
    a = (one + v2 - v1) * half
    b = (one - v1 - v2) * half
    c = (one + v1 - v2) * half
    s0 = [zero, -one, zero]
    r1 = [-c, (one - b) * (v2 - v1), a]
    rows = _recursion((a, b, c), s0, r1, N, zero, one)

    table: list[list[MPoly]] = [[], [], []]
    for n in range(1, N + 1):
        two_n = rat(2) ** n
        for i in range(3):
            s_in = rows[n][i].mirror((2 * n, 2 * n)) * two_n
            table[i].append(s_in.divexact(KAPPA_POLY[i]))
    return SymbolicTCoeffs(N, tuple(tuple(col) for col in table))


# ──────────────────────────────────────────────────────────────────────────
# series built from the solution
# ──────────────────────────────────────────────────────────────────────────


def eisenstein_like(t: TriangleType, k: int, variant: int, N: int) -> Series:
    """Weight-2k combination (s1-s2)(s3-s2)^{k-1} (variant 1) or
    (s1-s2)^{k-1}(s3-s2) (variant 2); both start 1 + O(qhat)."""
    if k < 2:
        raise ValueError("weight index k must be >= 2")
    if variant not in (1, 2):
        raise ValueError("variant must be 1 or 2")
    s1, s2, s3 = solve_cusp(t, N).s
    d12, d32 = s1 - s2, s3 - s2
    if variant == 1:
        return d12 * d32.pow_int(k - 1)
    return d12.pow_int(k - 1) * d32


def hauptmodul_from_halphen(t: TriangleType, N: int):
    """(J, j) as qhat-Laurent series: J = (s3 - s2)/(s3 - s1), and its
    affine renormalization j = slope * J + shift with the two scalars
    evaluated by the leading-coefficient rule, so j = qhat^{-1} + O(qhat).
    """
    sol = solve_cusp(t, N + 2)
    s1, s2, s3 = sol.s
    J = (s3 - s2) / (s3 - s1)
    slope = specialize_poly(JT_SLOPE, t.m1, t.m2)
    shift = specialize_poly(JT_SHIFT, t.m1, t.m2)
    j = J.scale(slope) + Series.from_terms("qhat", {0: shift}, J.order)
    return J.truncate(min(J.order, N)), j.truncate(min(j.order, N))


def _retag(s: Series, tag: str) -> Series:
    return Series(tag, s.offset, list(s.coeffs), s.order, s.zero)


def identity_suite(t: TriangleType, N: int) -> dict:
    """Exact series identities tying the system to the Hauptmodul.

    Verifies, through order about N: the two logarithmic-derivative
    identities s1 - s2 = -theta(J)/J and s3 - s2 = -theta(J)/(J - 1)
    (theta = qhat d/dqhat; J has a pole at the cusp, hence the signs), the
    qhat-orders of the six standard combinations, the weight-2 quasi-form
    combination against the forms module, and for the all-cusps type the
    theta-nullwert match with an honestly determined substitution.
    Returns a report dict; raises DomainError when an identity fails.
    """
    sol = solve_cusp(t, N + 2)
    s1, s2, s3 = sol.s
    J, _ = hauptmodul_from_halphen(t, N)
    report: dict = {"type": t.label(), "order": N}

    tJ = J.theta()
    lhs1 = ((s1 - s2) + tJ / J).truncate(N - 1)
    one = Series.one("qhat", J.order)
    lhs2 = ((s3 - s2) + tJ / (J - one)).truncate(N - 1)
    for name, diff in (("s1 - s2 = -theta(J)/J", lhs1),
                       ("s3 - s2 = -theta(J)/(J-1)", lhs2)):
        if not diff.is_zero():
            raise DomainError(f"identity {name} fails; residual "
                              f"{dict(diff.nonzero_items())}")
    report["log_derivative_identities"] = "ok"

    orders = {
        "s1": s1.valuation(), "s2": s2.valuation(), "s3": s3.valuation(),
        "s1-s2": (s1 - s2).valuation(), "s3-s2": (s3 - s2).valuation(),
        "s1-s3": (s1 - s3).valuation(),
    }
    expected = {"s1": 1, "s2": 0, "s3": 1, "s1-s2": 0, "s3-s2": 0,
                "s1-s3": 1}
    if orders != expected:
        raise DomainError(f"cusp vanishing orders {orders} != {expected}")
    report["cusp_orders"] = orders

    # J as a ratio of the weight-4 and weight-6 Eisenstein-like series
    e4 = (s1 - s2) * (s3 - s2)
    e6 = (s1 - s2) * e4
    num = e4.pow_int(3)
    den = (num - e6.pow_int(2)).truncate(num.order)
    ratio = num * den.inverse()
    if not (ratio - J).truncate(N - 3).is_zero():
        raise DomainError("E4^3/(E4^3 - E6^2) does not reproduce the "
                          "Hauptmodul")
    report["eisenstein_ratio"] = "ok"

    # weight-2 quasi-form: (1/n_delta) E2 = ((b-a)/b) s1 - s2
    #                                       + ((a+b-1)/b) s3
    from .forms import delta_and_e2
    a, b, _c = group_data(t).halphen_abc
    pkg = delta_and_e2(t, N + 2)
    e2 = _retag(pkg.e2.rescale(sol.lambda_scale), "qhat")
    c1, c3 = (b - a) / b, (a + b - 1) / b
    comb = s1.scale(c1) - s2 + s3.scale(c3)
    diff = (e2.scale(R1 / pkg.n_delta) - comb).truncate(N)
    if not diff.is_zero():
        raise DomainError("weight-2 quasi-form combination fails; residual "
                          f"{dict(diff.nonzero_items())}")
    report["e2_combination"] = {
        "coeff_s1": rat_str(c1), "coeff_s3": rat_str(c3),
        "n_delta": rat_str(pkg.n_delta),
    }

    if t.canonical == (INF, INF, INF):
        report["theta_match"] = _darboux_theta_check(sol, N)
    return report


def _darboux_theta_check(sol: HalphenSolution, N: int) -> dict:
    """Match the all-cusps solution against null-theta log derivatives.

    Candidate substitutions qhat -> c x^p on the eighth-root lattice
    x = q^{1/8} are generated from leading coefficients and verified as
    full series identities; only a verified match is reported.
    """
    from .classical import theta_series
    order = 8 * N
    L = {}
    for j in (2, 3, 4):
        # q = x^8, so x d/dx = 8 q d/dq and this is 2 q d/dq log theta_j
        L[j] = series_log_derivative(theta_series(j, order)).scale(
            rat(1, 4))
    pairing = (3, 2, 4)
    scalar = sol.s[1].coeff(0) / L[2].coeff(0)
    for step in range(1, 9):
        lead = L[4].coeff(step)
        if not lead:
            continue
        cval = lead * scalar / sol.s[2].coeff(1)
        ok = True
        for i in (0, 1, 2):
            lhs = sol.s[i].substitute_monomial(cval, step, "q18")
            rhs = L[pairing[i]].scale(scalar).truncate(lhs.order)
            if not (lhs - rhs).is_zero():
                ok = False
                break
        if ok:
            return {"c": rat_str(cval), "exponent": rat_str(rat(step, 8)),
                    "scalar": rat_str(scalar),
                    "theta_for_s": list(pairing)}
    raise DomainError("no monomial substitution matches the theta identity")
