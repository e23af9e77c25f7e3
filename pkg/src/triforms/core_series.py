"""Exact truncated Laurent series over tagged local variables.

Everything downstream (hauptmodul expansions, Halphen systems, rings of
modular forms) is computed as truncated series with exact coefficients.
A series knows three things besides its coefficients:

* ``tag``: which local variable it lives in. Canonical tags are
  ``qt1 qt2 qt3`` (normalized elliptic / cusp coordinates), ``qhat``
  (normalized Halphen coordinate), ``q`` (e^{2 pi i tau}), fractional-step
  retags such as ``q^(1/2)`` and ``q^(1/8)``, ``Q`` (rescaled realization
  variable) and ``z`` (hypergeometric argument). Binary operations demand
  equal tags; fractional powers are handled by retagging to a smaller unit
  step, never by fractional exponents.
* ``offset``: exponent of the first stored slot (may be negative).
* ``order``: the largest exponent whose coefficient is known. The invariant
  ``len(coeffs) == order - offset + 1`` holds for every series.

Coefficients are exact: rationals (gmpy2 ``mpq`` when available, else
``fractions.Fraction``), elements of Q(i, sqrt3) (:class:`CycloScalar`), or
sparse multivariate polynomials (:class:`MPoly`). Mixed-domain arithmetic is
rejected, not coerced; lift explicitly with :meth:`Series.map_coefficients`.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

# ──────────────────────────────────────────────────────────────────────────
# rational scalars
# ──────────────────────────────────────────────────────────────────────────

try:
    from gmpy2 import mpq as _mpq

    def rat(num: int | str = 0, den: int = 1):
        """Exact rational. ``rat("3/4")`` and ``rat(3, 4)`` both work."""
        return _mpq(num, den) if not isinstance(num, str) else _mpq(num)

    _RatType = type(_mpq(0))
except ImportError:  # pragma: no cover - exercised only without gmpy2
    from fractions import Fraction as _Frac

    def rat(num: int | str = 0, den: int = 1):
        """Exact rational. ``rat("3/4")`` and ``rat(3, 4)`` both work."""
        return _Frac(num, den) if not isinstance(num, str) else _Frac(num)

    _RatType = _Frac

Rational = _RatType

R0 = rat(0)
R1 = rat(1)

RATIONAL_TYPES = (int, _RatType)


def rat_str(x) -> str:
    """Serialize a rational as ``num`` or ``num/den`` (reduced, den > 0)."""
    n, d = x.numerator, x.denominator
    return str(n) if d == 1 else f"{n}/{d}"


def parse_rat(s: str):
    """Inverse of :func:`rat_str`; accepts ``-3``, ``3/4``, ``-3/4``."""
    if "/" in s:
        n, d = s.split("/")
        return rat(int(n), int(d))
    return rat(int(s))


def _is_rat(x) -> bool:
    return isinstance(x, RATIONAL_TYPES)


class DomainError(ValueError):
    """Raised on mixed-domain arithmetic or an impossible exact operation."""


class SeriesTagError(ValueError):
    """Raised when binary series operations see different variable tags."""


# ──────────────────────────────────────────────────────────────────────────
# Q(i, sqrt 3) scalars
# ──────────────────────────────────────────────────────────────────────────


class CycloScalar:
    """Element r0 + r1*i + r2*sqrt3 + r3*i*sqrt3 of Q(i, sqrt3).

    Large enough for every exact modulus and phase used by the hauptmodul
    registry (values such as 48*sqrt3*i and -64 appear as expansion
    rescalings). Components are exact rationals.
    """

    __slots__ = ("r",)

    def __init__(self, r0=0, r1=0, r2=0, r3=0):
        self.r = (rat(r0) + R0, rat(r1) + R0, rat(r2) + R0, rat(r3) + R0)

    # construction helpers -------------------------------------------------

    @staticmethod
    def from_rat(x) -> "CycloScalar":
        return CycloScalar(x)

    @staticmethod
    def i() -> "CycloScalar":
        return CycloScalar(0, 1)

    @staticmethod
    def sqrt3() -> "CycloScalar":
        return CycloScalar(0, 0, 1)

    # predicates ------------------------------------------------------------

    def __bool__(self) -> bool:
        return any(self.r)

    def is_rational(self) -> bool:
        return not (self.r[1] or self.r[2] or self.r[3])

    def rational_part(self):
        if not self.is_rational():
            raise DomainError(f"{self} is not rational")
        return self.r[0]

    # ring ops --------------------------------------------------------------

    def _coerce(self, other) -> "CycloScalar | None":
        if isinstance(other, CycloScalar):
            return other
        if _is_rat(other):
            return CycloScalar(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self.r, o.r
        return CycloScalar(a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3])

    __radd__ = __add__

    def __neg__(self):
        a = self.r
        return CycloScalar(-a[0], -a[1], -a[2], -a[3])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a0, a1, a2, a3 = self.r
        b0, b1, b2, b3 = o.r
        # basis products: i*i=-1, s*s=3, (is)*(is)=-3, i*s=is, s*(is)=3i, i*(is)=-s
        return CycloScalar(
            a0 * b0 - a1 * b1 + 3 * (a2 * b2 - a3 * b3),
            a0 * b1 + a1 * b0 + 3 * (a2 * b3 + a3 * b2),
            a0 * b2 + a2 * b0 - a1 * b3 - a3 * b1,
            a0 * b3 + a3 * b0 + a1 * b2 + a2 * b1,
        )

    __rmul__ = __mul__

    def inverse(self) -> "CycloScalar":
        if not self:
            raise ZeroDivisionError("CycloScalar inverse of zero")
        a0, a1, a2, a3 = self.r
        conj_i = CycloScalar(a0, -a1, a2, -a3)
        y = self * conj_i  # lands in Q(sqrt3)
        p, q = y.r[0], y.r[2]
        nrm = p * p - 3 * q * q
        if not nrm:
            raise ZeroDivisionError("CycloScalar inverse: zero norm")
        return conj_i * CycloScalar(p / nrm, 0, -q / nrm, 0)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out = CycloScalar(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.r == o.r

    def __hash__(self):
        return hash(("cyclo", self.r))

    def __complex__(self) -> complex:
        s3 = 3 ** 0.5
        a0, a1, a2, a3 = (float(x) for x in self.r)
        return complex(a0 + a2 * s3, a1 + a3 * s3)

    def to_strings(self) -> list[str]:
        return [rat_str(c) for c in self.r]

    def __repr__(self) -> str:
        names = ("", "i", "v3", "i*v3")
        parts = [
            (rat_str(c) + ("*" + n if n else "") if c != 1 or not n else n)
            for c, n in zip(self.r, names)
            if c
        ]
        return "Cyclo(" + (" + ".join(parts) if parts else "0") + ")"


CYC0 = CycloScalar(0)
CYC1 = CycloScalar(1)


# ──────────────────────────────────────────────────────────────────────────
# sparse multivariate polynomials
# ──────────────────────────────────────────────────────────────────────────


class MPoly:
    """Sparse polynomial over the rationals in ``nvars`` variables.

    Terms map exponent tuples to nonzero rational coefficients. Supports the
    exact operations the parameter-generic engines need: ring arithmetic,
    scalar division, lexicographic exact division (raises when the division
    leaves a remainder), evaluation, and exponent mirroring for the
    v -> 1/m substitution.
    """

    __slots__ = ("n", "terms")

    def __init__(self, nvars: int, terms: dict | None = None):
        self.n = nvars
        self.terms = {}
        if terms:
            for e, c in terms.items():
                c = rat(c) + R0 if not _is_rat(c) or isinstance(c, int) else c
                if c:
                    self.terms[tuple(e)] = c

    # constructors ----------------------------------------------------------

    @staticmethod
    def const(nvars: int, c) -> "MPoly":
        return MPoly(nvars, {(0,) * nvars: rat(0) + c} if c else None)

    @staticmethod
    def var(nvars: int, i: int) -> "MPoly":
        e = [0] * nvars
        e[i] = 1
        return MPoly(nvars, {tuple(e): R1})

    # predicates ------------------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or set(self.terms) == {(0,) * self.n}

    def constant(self):
        return self.terms.get((0,) * self.n, R0)

    def __eq__(self, other):
        if isinstance(other, MPoly):
            return self.n == other.n and self.terms == other.terms
        if _is_rat(other):
            return self == MPoly.const(self.n, other)
        return NotImplemented

    def __hash__(self):
        return hash(("mpoly", self.n, frozenset(self.terms.items())))

    # ring ops --------------------------------------------------------------

    def _coerce(self, other) -> "MPoly | None":
        if isinstance(other, MPoly):
            if other.n != self.n:
                raise DomainError("MPoly arity mismatch")
            return other
        if _is_rat(other):
            return MPoly.const(self.n, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        terms = dict(self.terms)
        for e, c in o.terms.items():
            s = terms.get(e, R0) + c
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        out = MPoly(self.n)
        out.terms = terms
        return out

    __radd__ = __add__

    def __neg__(self):
        out = MPoly(self.n)
        out.terms = {e: -c for e, c in self.terms.items()}
        return out

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if _is_rat(other):
            if not other:
                return MPoly(self.n)
            out = MPoly(self.n)
            out.terms = {e: c * other for e, c in self.terms.items()}
            return out
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(e, R0) + c1 * c2
                if s:
                    terms[e] = s
                else:
                    terms.pop(e, None)
        out = MPoly(self.n)
        out.terms = terms
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        if _is_rat(other):
            if not other:
                raise ZeroDivisionError
            return self * (R1 / other)
        if isinstance(other, MPoly):
            return self.divexact(other)
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = MPoly.const(self.n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # structure -------------------------------------------------------------

    def degree(self, var: int) -> int:
        """Degree in one variable; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(e[var] for e in self.terms)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def _lex_lead(self) -> tuple:
        return max(self.terms)

    def divexact(self, other: "MPoly") -> "MPoly":
        """Exact division; raises DomainError when a remainder survives."""
        o = self._coerce(other)
        if not o:
            raise ZeroDivisionError("MPoly division by zero")
        rem = self
        quot = MPoly(self.n)
        lead = o._lex_lead()
        lead_c = o.terms[lead]
        while rem.terms:
            e = rem._lex_lead()
            diff = tuple(a - b for a, b in zip(e, lead))
            if any(d < 0 for d in diff):
                raise DomainError("inexact MPoly division")
            c = rem.terms[e] / lead_c
            mono = MPoly(self.n, {diff: c})
            quot = quot + mono
            rem = rem - mono * o
        return quot

    def subs(self, values: Sequence) -> object:
        """Evaluate at scalars (rational or CycloScalar); full substitution."""
        if len(values) != self.n:
            raise DomainError("MPoly.subs arity mismatch")
        acc = None
        for e, c in self.terms.items():
            term = c
            for v, k in zip(values, e):
                for _ in range(k):
                    term = term * v
            acc = term if acc is None else acc + term
        if acc is None:
            return R0 if all(_is_rat(v) for v in values) else values[0] * 0
        return acc

    def mirror(self, caps: Sequence[int]) -> "MPoly":
        """Exponent reversal e_i -> caps_i - e_i (the v -> 1/m substitution
        cleared of denominators). Requires caps_i >= degree_i."""
        for i, cap in enumerate(caps):
            if self.degree(i) > cap:
                raise DomainError("mirror cap below degree")
        out = MPoly(self.n)
        out.terms = {
            tuple(cap - x for cap, x in zip(caps, e)): c
            for e, c in self.terms.items()
        }
        return out

    def map_vars(self, images: Sequence["MPoly"]) -> "MPoly":
        """Substitute each variable by a polynomial (same arity results)."""
        out = MPoly.const(images[0].n if images else self.n, 0)
        for e, c in self.terms.items():
            term = MPoly.const(out.n, c)
            for img, k in zip(images, e):
                term = term * img ** k
            out = out + term
        return out

    # serialization ---------------------------------------------------------

    def to_obj(self) -> list[dict]:
        return [
            {"exp": list(e), "coeff": rat_str(c)}
            for e, c in sorted(self.terms.items())
        ]

    @staticmethod
    def from_obj(nvars: int, obj: Iterable[dict]) -> "MPoly":
        return MPoly(nvars, {tuple(t["exp"]): parse_rat(t["coeff"]) for t in obj})

    def pretty(self, names: Sequence[str]) -> str:
        if not self.terms:
            return "0"
        bits = []
        for e, c in sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0])):
            mono = "*".join(
                (n if k == 1 else f"{n}^{k}") for n, k in zip(names, e) if k
            )
            if mono:
                bits.append(f"{rat_str(c)}*{mono}" if c != 1 else mono)
            else:
                bits.append(rat_str(c))
        return " + ".join(bits).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"MPoly({self.n}, {len(self.terms)} terms)"


BiPoly = MPoly  # two-variable instances are the common case downstream


def bipoly(terms: dict) -> MPoly:
    """Two-variable polynomial from {(i, j): coeff}."""
    return MPoly(2, terms)


# ──────────────────────────────────────────────────────────────────────────
# tagged truncated Laurent series
# ──────────────────────────────────────────────────────────────────────────

DEFAULT_ORDER = 50

CANONICAL_TAGS = ("qt1", "qt2", "qt3", "qhat", "q", "Q", "z")


def _zero_like(x):
    """Additive identity in the same coefficient domain as x."""
    if _is_rat(x):
        return R0
    if isinstance(x, CycloScalar):
        return CYC0
    if isinstance(x, MPoly):
        return MPoly(x.n)
    return x - x


def _dom_key(x) -> str:
    if _is_rat(x):
        return "rational"
    if isinstance(x, CycloScalar):
        return "cyclo"
    if isinstance(x, MPoly):
        return f"mpoly{x.n}"
    return type(x).__name__


class Series:
    """Truncated Laurent series: sum of coeffs[k] * x**(offset+k).

    ``order`` is the largest trusted exponent; arithmetic propagates the
    minimum attainable order, so precision loss is explicit, never silent.
    """

    __slots__ = ("tag", "offset", "coeffs", "order", "zero")

    def __init__(self, tag: str, offset: int, coeffs: list, order: int,
                 zero=R0):
        if len(coeffs) != order - offset + 1:
            raise ValueError(
                f"series invariant violated: {len(coeffs)} coefficients for "
                f"exponents {offset}..{order}"
            )
        self.tag = tag
        self.offset = offset
        self.coeffs = coeffs
        self.order = order
        self.zero = zero

    # constructors ----------------------------------------------------------

    @staticmethod
    def from_terms(tag: str, terms: dict, order: int, zero=R0) -> "Series":
        """Series from {exponent: coefficient}; unlisted slots are zero."""
        if terms:
            off = min(terms)
            if max(terms) > order:
                raise ValueError("term beyond requested order")
        else:
            off = order + 1  # empty: canonical zero series
            return Series(tag, order + 1, [], order, zero)
        coeffs = [zero] * (order - off + 1)
        for e, c in terms.items():
            coeffs[e - off] = c
        return Series(tag, off, coeffs, order, zero)

    @staticmethod
    def zero_series(tag: str, order: int, zero=R0) -> "Series":
        return Series(tag, order + 1, [], order, zero)

    @staticmethod
    def one(tag: str, order: int, one=R1, zero=R0) -> "Series":
        return Series.from_terms(tag, {0: one}, order, zero)

    @staticmethod
    def x(tag: str, order: int, one=R1, zero=R0) -> "Series":
        return Series.from_terms(tag, {1: one}, order, zero)

    def copy(self) -> "Series":
        return Series(self.tag, self.offset, list(self.coeffs), self.order,
                      self.zero)

    # accessors -------------------------------------------------------------

    def coeff(self, e: int):
        """Coefficient of x**e; raises beyond the trusted order."""
        if e > self.order:
            raise IndexError(f"exponent {e} beyond truncation {self.order}")
        if e < self.offset:
            return self.zero
        return self.coeffs[e - self.offset]

    def valuation(self) -> int | None:
        """Smallest exponent with nonzero coefficient, None if none known."""
        for k, c in enumerate(self.coeffs):
            if c:
                return self.offset + k
        return None

    def is_zero(self) -> bool:
        return self.valuation() is None

    def nonzero_items(self):
        for k, c in enumerate(self.coeffs):
            if c:
                yield self.offset + k, c

    def truncate(self, order: int) -> "Series":
        if order > self.order:
            raise ValueError("cannot extend a series by truncation")
        if order < self.offset:
            return Series.zero_series(self.tag, order, self.zero)
        return Series(self.tag, self.offset,
                      self.coeffs[: order - self.offset + 1], order, self.zero)

    def _trim(self) -> "Series":
        """Drop leading stored zeros (canonicalizes offset)."""
        k = 0
        while k < len(self.coeffs) and not self.coeffs[k]:
            k += 1
        if k == 0:
            return self
        return Series(self.tag, self.offset + k, self.coeffs[k:], self.order,
                      self.zero)

    # checks ----------------------------------------------------------------

    def _binary_check(self, other: "Series") -> None:
        if not isinstance(other, Series):
            raise DomainError(f"expected Series, got {type(other).__name__}")
        if self.tag != other.tag:
            raise SeriesTagError(f"tag mismatch: {self.tag} vs {other.tag}")
        if _dom_key(self.zero) != _dom_key(other.zero):
            raise DomainError(
                f"coefficient domain mismatch: {_dom_key(self.zero)} vs "
                f"{_dom_key(other.zero)}"
            )

    # ring ops --------------------------------------------------------------

    def __add__(self, other: "Series") -> "Series":
        self._binary_check(other)
        order = min(self.order, other.order)
        off = min(self.offset, other.offset, order + 1)
        n = order - off + 1
        out = [self.zero] * n
        for src in (self, other):
            for k, c in enumerate(src.coeffs):
                e = src.offset + k
                if e > order:
                    break
                if c:
                    out[e - off] = out[e - off] + c
        return Series(self.tag, off, out, order, self.zero)

    def __neg__(self) -> "Series":
        return Series(self.tag, self.offset, [-c for c in self.coeffs],
                      self.order, self.zero)

    def __sub__(self, other: "Series") -> "Series":
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Series):
            return self.scale(other)
        self._binary_check(other)
        a, b = self._trim(), other._trim()
        if not a.coeffs or not b.coeffs:
            # either factor vanishes up to its order; best trusted order of
            # the product is still governed by the usual formula
            return Series.zero_series(
                self.tag, min(a.order + b.offset, b.order + a.offset),
                self.zero)
        off = a.offset + b.offset
        order = min(a.order + b.offset, b.order + a.offset)
        n = order - off + 1
        out = [self.zero] * n
        bc = b.coeffs
        for i, ca in enumerate(a.coeffs):
            if not ca or i >= n:
                continue
            jmax = min(len(bc), n - i)
            for j in range(jmax):
                cb = bc[j]
                if cb:
                    out[i + j] = out[i + j] + ca * cb
        return Series(self.tag, off, out, order, self.zero)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c) -> "Series":
        """Multiply every coefficient by a scalar of the same domain."""
        return Series(self.tag, self.offset, [x * c for x in self.coeffs],
                      self.order, self.zero)

    def inverse(self) -> "Series":
        """Multiplicative inverse; the valuation coefficient must be a unit."""
        s = self._trim()
        v = s.valuation()
        if v is None:
            raise ZeroDivisionError("inverse of (truncated) zero series")
        rel = s.order - v  # relative precision of the unit part
        u = s.coeffs[:]  # u[0] nonzero
        u0 = u[0]
        if _is_rat(u0):
            inv0 = R1 / u0
        elif isinstance(u0, CycloScalar):
            inv0 = u0.inverse()
        else:
            if isinstance(u0, MPoly) and u0.is_constant():
                inv0 = MPoly.const(u0.n, R1 / u0.constant())
            else:
                raise DomainError("cannot invert leading coefficient exactly")
        out = [self.zero] * (rel + 1)
        out[0] = inv0
        for n in range(1, rel + 1):
            acc = self.zero
            kmax = min(n, len(u) - 1)
            for k in range(1, kmax + 1):
                if u[k]:
                    acc = acc + u[k] * out[n - k]
            out[n] = -inv0 * acc if acc else self.zero
        return Series(self.tag, -v, out, s.order - 2 * v, self.zero)

    def __truediv__(self, other):
        if isinstance(other, Series):
            return self * other.inverse()
        # scalar division
        if _is_rat(other):
            return self.scale(R1 / other)
        if isinstance(other, CycloScalar):
            return self.scale(other.inverse())
        raise DomainError("unsupported series division")

    def pow_int(self, k: int) -> "Series":
        if k < 0:
            return self.inverse().pow_int(-k)
        # binary powering; truncation handled by __mul__
        result = None
        base = self
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        if result is None:
            return Series.one(self.tag, self.order,
                              _one_like(self.zero), self.zero)
        return result

    # calculus --------------------------------------------------------------

    def theta(self) -> "Series":
        """Euler operator x d/dx applied termwise."""
        out = [c * rat(self.offset + k) for k, c in enumerate(self.coeffs)]
        return Series(self.tag, self.offset, out, self.order, self.zero)

    # variable changes -------------------------------------------------------

    def map_coefficients(self, fn: Callable, zero=None) -> "Series":
        z = zero if zero is not None else fn(self.zero)
        return Series(self.tag, self.offset, [fn(c) for c in self.coeffs],
                      self.order, z)

    def rescale(self, c) -> "Series":
        """x -> c*x. Coefficient at exponent e picks up c**e."""
        out = []
        cur = c ** self.offset if self.coeffs else None
        for a in self.coeffs:
            out.append(a * cur if a else self.zero)
            cur = cur * c
        return Series(self.tag, self.offset, out, self.order, self.zero)

    def stretch(self, p: int, new_tag: str) -> "Series":
        """Reinterpret x = y**p (finer unit step); exponents scale by p."""
        if p <= 0:
            raise ValueError("stretch factor must be positive")
        terms = {p * e: c for e, c in self.nonzero_items()}
        return Series.from_terms(new_tag, terms, self.order * p, self.zero) \
            if terms else Series.zero_series(new_tag, self.order * p, self.zero)

    def contract(self, p: int, new_tag: str) -> "Series":
        """Inverse of stretch: requires support on multiples of p."""
        terms = {}
        for e, c in self.nonzero_items():
            if e % p:
                raise DomainError(f"exponent {e} not a multiple of {p}")
            terms[e // p] = c
        order = self.order // p
        return Series.from_terms(new_tag, terms, order, self.zero) \
            if terms else Series.zero_series(new_tag, order, self.zero)

    def substitute_monomial(self, c, p: int, new_tag: str) -> "Series":
        """x -> c * y**p."""
        return self.rescale(c).stretch(p, new_tag)

    def compose(self, inner: "Series") -> "Series":
        """self(inner). Requires offset >= 0 here and valuation >= 1 inside."""
        if self.offset < 0:
            raise DomainError("compose needs a nonnegative-offset outer series")
        v = inner.valuation()
        if v is not None and v < 1:
            raise DomainError("compose needs valuation >= 1 inner series")
        order = min(inner.order, self.order)
        acc = Series.zero_series(inner.tag, order, self.zero)
        for k in range(len(self.coeffs) - 1, -1, -1):
            acc = acc * inner.truncate(order) if not acc.is_zero() else acc
            c = self.coeffs[k]
            if c:
                acc = acc + Series.from_terms(inner.tag, {0: c}, order,
                                              self.zero)
        # account for x**offset
        if self.offset:
            acc = acc * inner.truncate(order).pow_int(self.offset)
        return acc

    def exp(self) -> "Series":
        """exp of a series with zero constant term and valuation >= 1."""
        v = self.valuation()
        if v is not None and v < 1:
            raise DomainError("series exp needs valuation >= 1")
        order = self.order
        u = [self.coeff(e) for e in range(1, order + 1)]
        out = [_one_like(self.zero)] + [self.zero] * order
        for n in range(1, order + 1):
            acc = self.zero
            for k in range(1, n + 1):
                if u[k - 1]:
                    acc = acc + u[k - 1] * out[n - k] * rat(k)
            out[n] = acc * rat(1, n)
        return Series(self.tag, 0, out, order, self.zero)

    # serialization ----------------------------------------------------------

    def to_obj(self) -> dict:
        dom = _dom_key(self.zero)
        if dom == "rational":
            payload = [rat_str(c) for c in self.coeffs]
        elif dom == "cyclo":
            payload = [c.to_strings() for c in self.coeffs]
        else:
            payload = [c.to_obj() for c in self.coeffs]
        return {
            "tag": self.tag,
            "offset": self.offset,
            "order": self.order,
            "domain": dom,
            "coefficients": payload,
        }

    def __repr__(self) -> str:
        head = []
        for e, c in self.nonzero_items():
            head.append(f"{c!r}*{self.tag}^{e}")
            if len(head) >= 4:
                head.append("...")
                break
        body = " + ".join(head) if head else "0"
        return f"Series[{self.tag}; O({self.order + 1})]({body})"


def _one_like(zero):
    if _is_rat(zero):
        return R1
    if isinstance(zero, CycloScalar):
        return CYC1
    if isinstance(zero, MPoly):
        return MPoly.const(zero.n, 1)
    raise DomainError("no unit for this coefficient domain")


# ──────────────────────────────────────────────────────────────────────────
# public operations
# ──────────────────────────────────────────────────────────────────────────


def series_ring_ops(a: Series, b: Series, op: str) -> Series:
    """Ring operation dispatch: op in {"add", "sub", "mul", "div"}.

    Tags and coefficient domains must match exactly; the result order is the
    best one attainable from the operands (minimum propagation).
    """
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown series op {op!r}")


def series_pow_rational(s: Series, e) -> Series:
    """Raise a unit-normalized series (constant term 1) to a rational power.

    Uses the first-order ODE recurrence for f = s**e,
        n f_n = sum_{k=1..n} (k(e+1) - n) s_k f_{n-k},
    which is exact over any coefficient domain admitting rational scalars.

    Parameters
    ----------
    s : Series with offset effects trimmed to leading term 1 at exponent 0.
    e : rational exponent (int, Fraction, or mpq).
    """
    s = s._trim()
    if s.valuation() != 0 or s.coeff(0) != _one_like(s.zero):
        raise DomainError("series_pow_rational needs leading coefficient 1 "
                          "at exponent 0")
    e = rat(0) + e
    order = s.order
    sk = [s.coeff(k) for k in range(order + 1)]
    out = [_one_like(s.zero)] + [s.zero] * order
    for n in range(1, order + 1):
        acc = s.zero
        for k in range(1, n + 1):
            if sk[k]:
                acc = acc + sk[k] * out[n - k] * (rat(k) * (e + 1) - n)
        out[n] = acc * rat(1, n)
    return Series(s.tag, 0, out, order, s.zero)


def series_revert(s: Series) -> Series:
    """Compositional inverse of a series with valuation exactly 1.

    Lagrange inversion: n [x^n] t = [x^{n-1}] (x / s(x))^n. The linear
    coefficient must be invertible. revert(q + q^2) starts q - q^2 + 2q^3 -
    5q^4 (signed Catalan numbers).
    """
    s = s._trim()
    if s.valuation() != 1:
        raise DomainError("series_revert needs valuation exactly 1")
    order = s.order
    base = Series(s.tag, 0, list(s.coeffs), order - 1, s.zero).inverse()
    out = {0: s.zero}
    powk = Series.one(s.tag, base.order, _one_like(s.zero), s.zero)
    for n in range(1, order + 1):
        powk = powk * base  # (x/s)^n up to available order
        if n - 1 > powk.order:
            break
        out[n] = powk.coeff(n - 1) * rat(1, n)
    top = max(out)
    return Series.from_terms(s.tag, {e: c for e, c in out.items() if c},
                             top, s.zero)


def series_log_derivative(s: Series) -> Series:
    """Logarithmic derivative (x ds/dx) / s; tolerates any valuation."""
    return s.theta() / s
