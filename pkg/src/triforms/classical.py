"""Classical q-expansion oracles for the nine arithmetic cusped types.

Everything here is built from scratch out of Eisenstein series, Jacobi
theta nullwerte, and eta products, independently of the Schwarzian and
quadratic-system engines, so agreement between the two sides is a real
check rather than a tautology. The registry records, for each arithmetic
type, a concrete realization as a classical group together with the exact
dictionary between the canonical cusp parameter and q (or q^(1/2)).

Conventions: Eisenstein series carry the standard normalization
E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n (so 240 and -504 in weights 4
and 6); theta nullwerte live on the q^(1/8) grid; eta quotients are only
exposed through integral-exponent combinations.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core_series import (
    CYC0,
    CycloScalar,
    DomainError,
    R1,
    Series,
    rat,
    rat_str,
    series_log_derivative,
)
from .schwarz import cusp_expansion
from .triangle import INF, TriangleType

# ──────────────────────────────────────────────────────────────────────────
# realization registry
# ──────────────────────────────────────────────────────────────────────────

_I = CycloScalar.i()
_S3 = CycloScalar.sqrt3()


@dataclass(frozen=True)
class RealizationRow:
    """One arithmetic cusped type realized as a classical group.

    ``alpha3`` is the exact positive modulus of the expansion dictionary;
    ``alpha_eff`` the exact (signed or phased) substitution constant with
    qt3 = alpha_eff * x for x the local parameter; ``sqrt_q`` says whether
    x is q^(1/2) rather than q; ``rescale_rho`` is the integer with
    qt3 = rescale_rho * Q for the integral-basis variable Q.
    """

    label: str
    group: str
    conjugator: str
    fixed_points: tuple
    generators: tuple
    alpha3: CycloScalar
    alpha_eff: CycloScalar
    sqrt_q: bool
    rescale_rho: int

    def to_obj(self) -> dict:
        return {
            "type": self.label,
            "group": self.group,
            "conjugator": self.conjugator,
            "fixed_points": list(self.fixed_points),
            "generators": list(self.generators),
            "alpha3": self.alpha3.to_strings(),
            "alpha_eff": self.alpha_eff.to_strings(),
            "local_parameter": "q^(1/2)" if self.sqrt_q else "q",
            "rescale_rho": self.rescale_rho,
        }


ARITHMETIC_REALIZATIONS = {
    "(2,3,inf)": RealizationRow(
        "(2,3,inf)", "Gamma(1)", "1",
        ("i", "omega", "inf"), ("S", "[0 1; -1 1]", "T"),
        CycloScalar(1728), CycloScalar(1728), False, 1728),
    "(2,4,inf)": RealizationRow(
        "(2,4,inf)", "Gamma_0(2)+", "[2 0; 0 1]",
        ("i/sqrt2", "(-1+i)/2", "inf"), ("W2", "[2 1; -2 0]/sqrt2", "T"),
        CycloScalar(256), CycloScalar(256), False, 256),
    "(2,6,inf)": RealizationRow(
        "(2,6,inf)", "Gamma_0(3)+", "[3 0; 1 1]",
        ("i/sqrt3", "(-3+i*sqrt3)/6", "inf"), ("W3", "[3 1; -3 0]/sqrt3",
                                               "T"),
        CycloScalar(108), CycloScalar(108), False, 108),
    "(2,inf,inf)": RealizationRow(
        "(2,inf,inf)", "Gamma_0(2)", "[1 1; 0 2]",
        ("(1+i)/2", "0", "inf"), ("[1 -1; 2 -1]", "U^2", "T"),
        CycloScalar(64), CycloScalar(-64), False, -64),
    "(3,3,inf)": RealizationRow(
        "(3,3,inf)", "Gamma(1)*", "1",
        ("omega^2", "omega", "inf"), ("[1 1; -1 0]", "[0 1; -1 1]", "T^2"),
        CycloScalar(0, 0, 48), CycloScalar(0, 0, 0, 48), True, 144),
    "(3,inf,inf)": RealizationRow(
        "(3,inf,inf)", "Gamma_0(3)", "[1 -1; 0 3]",
        ("(3+i*sqrt3)/6", "0", "inf"), ("[1 -1; 3 -2]", "U^3", "T"),
        CycloScalar(27), CycloScalar(-27), False, -27),
    "(4,4,inf)": RealizationRow(
        "(4,4,inf)", "Gamma_0(2)+*", "[2 0; 1 1]",
        ("(i-1)/2", "(1+i)/2", "inf"),
        ("[2 1; -2 0]/sqrt2", "[0 1; -2 2]/sqrt2", "T^2"),
        CycloScalar(32), CycloScalar(0, 32), True, 32),
    "(6,6,inf)": RealizationRow(
        "(6,6,inf)", "Gamma_0(3)+*", "[3 0; 1 1]",
        ("(-3+i*sqrt3)/6", "(3+i*sqrt3)/6", "inf"),
        ("[3 1; -3 0]/sqrt3", "[0 1; -3 3]/sqrt3", "T^2"),
        CycloScalar(0, 0, 12), CycloScalar(0, 0, 0, 12), True, 36),
    "(inf,inf,inf)": RealizationRow(
        "(inf,inf,inf)", "Gamma(2)", "[1 1; 0 2]",
        ("0", "1", "inf"), ("U^2", "[-1 2; -2 3]", "T^2"),
        CycloScalar(16), CycloScalar(16), True, 16),
}


def realization(t: TriangleType) -> RealizationRow:
    row = ARITHMETIC_REALIZATIONS.get(t.label())
    if row is None:
        raise DomainError(f"{t.label()} is not an arithmetic cusped type")
    return row


def registry_obj() -> list:
    return [row.to_obj() for row in ARITHMETIC_REALIZATIONS.values()]


# ──────────────────────────────────────────────────────────────────────────
# Eisenstein series
# ──────────────────────────────────────────────────────────────────────────


def _bernoulli_list(n: int) -> list:
    """B_0 .. B_n, computed by the defining recurrence."""
    out = [R1]
    binom = [1, 1]
    for m in range(1, n + 1):
        # binom holds C(m+1, j) for j = 0..m+1 incrementally
        binom = [1] + [binom[j] + binom[j + 1]
                       for j in range(len(binom) - 1)] + [1]
        acc = rat(0)
        for j in range(m):
            acc += rat(binom[j]) * out[j]
        out.append(-acc / rat(binom[m]))
    return out


def _divisor_power_sums(power: int, N: int) -> list:
    """[sigma_power(1), ..., sigma_power(N)] by sieving multiples."""
    out = [0] * (N + 1)
    for d in range(1, N + 1):
        dp = d ** power
        for n in range(d, N + 1, d):
            out[n] += dp
    return out[1:]


def eisenstein_classical(k: int, N: int) -> Series:
    """Weight-k Eisenstein q-series, standard normalization, to order N."""
    if k < 2 or k % 2:
        raise ValueError("weight must be even and at least 2")
    bern = _bernoulli_list(k)[k]
    pref = -rat(2 * k) / bern
    sig = _divisor_power_sums(k - 1, N)
    return Series("q", 0, [R1] + [pref * s for s in sig], N)


def hecke_eisenstein(p: int, k: int, N: int) -> Series:
    """(E_2k(tau) + p^k E_2k(p tau)) / (p^k + 1) to order N."""
    if p not in (2, 3):
        raise ValueError("level p must be 2 or 3")
    if k < 2:
        raise ValueError("need k >= 2")
    e = eisenstein_classical(2 * k, N)
    ep = eisenstein_classical(2 * k, N // p + 1).stretch(p, "q").truncate(N)
    w = rat(p ** k)
    return (e + ep.scale(w)).scale(R1 / (w + 1))


# ──────────────────────────────────────────────────────────────────────────
# theta nullwerte (on the q^(1/8) grid)
# ──────────────────────────────────────────────────────────────────────────


def theta_series(which: int, order: int) -> Series:
    """Theta nullwert 2, 3, or 4 as a series in x = q^(1/8) to x-order
    ``order``: support (2n+1)^2 with coefficient 2, or 4n^2 with
    coefficient 2 (constant 1), alternating in sign for the fourth."""
    if which not in (2, 3, 4):
        raise ValueError("theta index is 2, 3, or 4")
    coeffs = [rat(0)] * (order + 1)
    if which == 2:
        n = 0
        while (2 * n + 1) ** 2 <= order:
            coeffs[(2 * n + 1) ** 2] = rat(2)
            n += 1
    else:
        coeffs[0] = R1
        n = 1
        while 4 * n * n <= order:
            coeffs[4 * n * n] = rat(2) if (which == 3 or n % 2 == 0) \
                else rat(-2)
            n += 1
    return Series("q18", 0, coeffs, order)


# ──────────────────────────────────────────────────────────────────────────
# eta products
# ──────────────────────────────────────────────────────────────────────────


def _euler_factor(step: int, N: int) -> Series:
    """prod_{n >= 1} (1 - q^(step*n)) to q-order N."""
    out = Series.one("q", N)
    n = step
    while n <= N:
        out = out * Series.from_terms("q", {0: R1, n: rat(-1)}, N)
        n += step
    return out


def eta_quotient_hauptmodul(level: int, N: int) -> Series:
    """(eta(tau)/eta(level*tau))^(24/(level-1)) as an exact q-series.

    The eta prefactors combine to q^(-1), so the result is an honest
    Laurent series with integer coefficients and leading term q^(-1).
    """
    if level not in (2, 3):
        raise ValueError("level must be 2 or 3")
    e = 24 // (level - 1)
    num = _euler_factor(1, N + 1).pow_int(e)
    den = _euler_factor(level, N + 1).pow_int(e)
    ratio = num * den.inverse()
    return Series("q", -1, list(ratio.coeffs), ratio.order - 1)


def eta_hauptmodul(level: int, N: int) -> Series:
    """The level-2 or level-3 eta Hauptmodul, affinely normalized so its
    two leading coefficients match the hypergeometric engine's expansion
    (under qt3 = alpha_eff * q); reproduces the classical displays."""
    t = TriangleType((level, INF, INF))
    row = realization(t)
    alpha = row.alpha_eff.rational_part()
    Jt3 = cusp_expansion(t, 2).series
    raw = eta_quotient_hauptmodul(level, N)
    scale = (R1 / alpha) / raw.coeff(-1)
    shift = Jt3.coeff(0) - scale * raw.coeff(0)
    return raw.scale(scale) + Series.from_terms("q", {0: shift}, raw.order)


# ──────────────────────────────────────────────────────────────────────────
# Hauptmoduln of the nine types
# ──────────────────────────────────────────────────────────────────────────


def _sqrt_monic(s: Series) -> Series:
    """Square root of a rational series with constant term 1."""
    if s.offset != 0 or s.coeff(0) != 1:
        raise DomainError("series square root needs constant term 1")
    out = [R1]
    half = rat(1, 2)
    for n in range(1, s.order + 1):
        acc = s.coeff(n)
        for k in range(1, n):
            acc -= out[k] * out[n - k]
        out.append(acc * half)
    return Series("q", 0, out, s.order)


def _eisenstein_pair(m: int, N: int) -> tuple:
    """The weight-4 and weight-6 generators of the (2,m,inf) realization
    for m in {3, 4, 6}: level-1 Eisenstein or the level-p average."""
    if m == 3:
        return (eisenstein_classical(4, N), eisenstein_classical(6, N))
    return (hecke_eisenstein(m // 2, 2, N), hecke_eisenstein(m // 2, 3, N))


def _ratio_hauptmodul(f4: Series, f6: Series) -> Series:
    """f4^3 / (f4^3 - f6^2); the denominator vanishes to first order."""
    num = f4.pow_int(3)
    den = num - f6.pow_int(2)
    if den.valuation() != 1:
        raise DomainError("weight-12 difference should vanish simply")
    return num * den.inverse()


_MM_SQRT_LEAD = {3: CycloScalar(0, 0, 0, 24), 4: CycloScalar(0, 16),
                 6: CycloScalar(0, 0, 0, 6)}


def mm_type_hauptmodul(m: int, N: int) -> Series:
    """Hauptmodul of type (m,m,inf), m in {3,4,6}, as a q^(1/2)-series
    over Q(i, sqrt3): (1/2)(f6/sqrt(f6^2 - f4^3) + 1), the branch fixed
    by a positive-imaginary leading square root."""
    if m not in (3, 4, 6):
        raise ValueError("m must be 3, 4, or 6")
    f4, f6 = _eisenstein_pair(m, N + 2)
    g = f6.pow_int(2) - f4.pow_int(3)
    lead = _MM_SQRT_LEAD[m]
    if g.valuation() != 1 or g.coeff(1) != (lead * lead).rational_part():
        raise DomainError("branch data off for the square root")
    h = Series("q", 0, [g.coeff(n + 1) / g.coeff(1)
                        for n in range(g.order)], g.order - 1)
    u = f6 * _sqrt_monic(h).inverse()
    ux = u.truncate(N).stretch(2, "q12")
    inv = CycloScalar(1) / lead
    half = CycloScalar(rat(1, 2))
    body = Series("q12", ux.offset - 1, [half * (inv * c)
                                         for c in ux.coeffs],
                  ux.order - 1, CYC0)
    out = body + Series.from_terms("q12", {0: half}, body.order, CYC0)
    return out.truncate(min(out.order, N))


@dataclass(frozen=True)
class ClassicalJ:
    """A classically constructed Hauptmodul expansion with its dictionary.

    ``series`` is in q (sqrt_q False) or q^(1/2); the engine's canonical
    parameter satisfies qt3 = alpha_eff * (local parameter).
    """

    ttype: TriangleType
    series: Series
    sqrt_q: bool
    alpha_eff: CycloScalar


def classical_hauptmodul(t: TriangleType, N: int) -> ClassicalJ:
    """Dispatch the classical construction for one arithmetic type."""
    row = realization(t)
    label = t.label()
    if label == "(2,3,inf)":
        J = _ratio_hauptmodul(*_eisenstein_pair(3, N + 3)).truncate(N)
    elif label in ("(2,4,inf)", "(2,6,inf)"):
        m = 4 if label == "(2,4,inf)" else 6
        J = _ratio_hauptmodul(*_eisenstein_pair(m, N + 3)).truncate(N)
    elif label in ("(2,inf,inf)", "(3,inf,inf)"):
        J = eta_hauptmodul(int(t.m1), N)
    elif label in ("(3,3,inf)", "(4,4,inf)", "(6,6,inf)"):
        J = mm_type_hauptmodul(int(t.m1), N)
    else:
        t3 = theta_series(3, 4 * N + 8).pow_int(4)
        t2 = theta_series(2, 4 * N + 8).pow_int(4)
        J = (t3 * t2.inverse()).contract(4, "q12").truncate(N)
    return ClassicalJ(t, J, row.sqrt_q, row.alpha_eff)


def crosscheck_hauptmodul(t: TriangleType, N: int) -> dict:
    """Exact coefficientwise equality of the classical Hauptmodul and the
    hypergeometric engine's expansion under qt3 = alpha_eff * x.

    Raises on the first mismatch; returns a small report otherwise.
    """
    cj = classical_hauptmodul(t, N)
    engine = cusp_expansion(t, N).series
    alpha = cj.alpha_eff
    for n in range(-1, N + 1):
        left = cj.series.coeff(n)
        right = alpha ** n * engine.coeff(n)
        if not isinstance(left, CycloScalar):
            left = CycloScalar(left)
        if left != right:
            raise DomainError(
                f"{t.label()}: classical and engine Hauptmodul differ at "
                f"exponent {n}: {left!r} vs {right!r}")
    return {"type": t.label(), "order": N,
            "alpha_eff": cj.alpha_eff.to_strings(), "match": "exact"}


# ──────────────────────────────────────────────────────────────────────────
# integrality of the rescaled form bases
# ──────────────────────────────────────────────────────────────────────────


def proposition1_check(t: TriangleType, weight_bound: int = 24,
                       order: int = 100) -> dict:
    """Rescale every basis element by the registry integer and record any
    non-integer coefficient. Violations are reported, not raised."""
    from .forms import basis
    rho = rat(realization(t).rescale_rho)
    violations = []
    checked = 0
    for k in range(0, weight_bound // 2 + 1):
        for l, el in enumerate(basis(t, k, order).elements):
            checked += 1
            scaled = el.rescale(rho)
            for n, c in scaled.nonzero_items():
                if c.denominator != 1:
                    violations.append({"weight": 2 * k, "l": l, "n": n,
                                       "coefficient": rat_str(c)})
    return {"type": t.label(), "weight_bound": weight_bound,
            "order": order, "elements_checked": checked,
            "rescale": rat_str(rho), "violations": violations,
            "ok": not violations}


# ──────────────────────────────────────────────────────────────────────────
# small classical identities used as cross-checks
# ──────────────────────────────────────────────────────────────────────────


def eta_log_derivative_identity(level: int, N: int) -> None:
    """24 q d/dq log(eta(tau)/eta(level tau)) = E2(tau) - level*E2(level
    tau); raises if the series disagree (the 1/24 of theta-log eta is
    written out explicitly here)."""
    e = 24 // (level - 1)
    quot = eta_quotient_hauptmodul(level, N + 1)
    lhs = series_log_derivative(quot).scale(rat(24, e)).truncate(N)
    e2 = eisenstein_classical(2, N)
    e2p = eisenstein_classical(2, N // level + 1).stretch(level, "q")
    rhs = (e2 - e2p.truncate(N).scale(rat(level))).truncate(N)
    if not (lhs - rhs).is_zero():
        raise DomainError(f"eta log-derivative identity fails at level "
                          f"{level}")


def jacobi_quartic_identity(order: int) -> None:
    """theta4^4 = theta3^4 - theta2^4 exactly to the x-order given."""
    t2 = theta_series(2, order).pow_int(4)
    t3 = theta_series(3, order).pow_int(4)
    t4 = theta_series(4, order).pow_int(4)
    if not (t3 - t2 - t4).is_zero():
        raise DomainError("theta quartic identity fails")
