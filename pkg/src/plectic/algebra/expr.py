"""Exact scalar coefficients for calculus on R^m.

An ``Expr`` is a quotient N/D of finite sums of monomials

    c * x^alpha * r^a * R^b * tau^t

with rational ``c``, exponent vector ``alpha`` over the coordinates
``x0 .. x(m-1)``, and formal generators

    r   = sqrt(x1^2 + ... + x(m-1)^2)        (the radius of the x1.. block)
    R   = sqrt(x0^2 + r^2)                   (the full radius)
    tau = arctan(x0 / r)

Even powers of r and R are rewritten through their defining relations, so
canonical monomials carry a, b in {0, 1}.  tau is kept as a transcendental
generator and never rewritten; zero testing therefore decides equality of
the underlying functions on the dense open set r != 0.  Denominators are
required to be tau-free.

The values stored in ``RadPoly.terms`` map a monomial key
``(alpha, a, b, t)`` to its rational coefficient; zero coefficients are
never stored.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import mpmath

from ..errors import ArityMismatch, PoleError, SingularLocusError, TauDivisionError

Scalar = Union[int, Fraction]
MonoKey = tuple  # (alpha: tuple[int, ...], a: int, b: int, t: int)

_GUARD_DIGITS = 15


def _sqrt_fraction(value: Fraction) -> Optional[Fraction]:
    """Exact square root of a nonnegative rational, or None."""
    if value < 0:
        return None
    num, den = value.numerator, value.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


class RadPoly:
    """Canonical sum of monomials c * x^alpha * r^a * R^b * tau^t."""

    __slots__ = ("arity", "terms")

    def __init__(self, arity: int, terms: Optional[dict] = None):
        self.arity = arity
        self.terms = terms if terms is not None else {}

    # -- construction ------------------------------------------------

    @classmethod
    def const(cls, c: Scalar, arity: int) -> "RadPoly":
        c = Fraction(c)
        if c == 0:
            return cls(arity)
        key = ((0,) * arity, 0, 0, 0)
        return cls(arity, {key: c})

    @classmethod
    def coordinate(cls, i: int, arity: int) -> "RadPoly":
        if not 0 <= i < arity:
            raise ArityMismatch(f"coordinate {i} out of range for arity {arity}")
        alpha = tuple(1 if j == i else 0 for j in range(arity))
        return cls(arity, {(alpha, 0, 0, 0): Fraction(1)})

    def copy(self) -> "RadPoly":
        return RadPoly(self.arity, dict(self.terms))

    # -- canonicalisation ---------------------------------------------

    def _square_block(self, include_x0: bool) -> "RadPoly":
        """Polynomial r^2 (or R^2 when include_x0) for this arity."""
        terms = {}
        start = 0 if include_x0 else 1
        for i in range(start, self.arity):
            alpha = tuple(2 if j == i else 0 for j in range(self.arity))
            terms[(alpha, 0, 0, 0)] = Fraction(1)
        return RadPoly(self.arity, terms)

    def _add_term(self, key: MonoKey, coeff: Fraction) -> None:
        # Reduce even radical powers before storing.
        alpha, a, b, t = key
        if a >= 2 or b >= 2:
            reduced = RadPoly(self.arity, {(alpha, a % 2, b % 2, t): coeff})
            if a >= 2:
                p = self._square_block(include_x0=False)
                for _ in range(a // 2):
                    reduced = reduced * p
            if b >= 2:
                q = self._square_block(include_x0=True)
                for _ in range(b // 2):
                    reduced = reduced * q
            for k, c in reduced.terms.items():
                cur = self.terms.get(k, Fraction(0)) + c
                if cur:
                    self.terms[k] = cur
                else:
                    self.terms.pop(k, None)
            return
        cur = self.terms.get(key, Fraction(0)) + coeff
        if cur:
            self.terms[key] = cur
        else:
            self.terms.pop(key, None)

    # -- ring operations ----------------------------------------------

    def _check(self, other: "RadPoly") -> None:
        if self.arity != other.arity:
            raise ArityMismatch(f"arity {self.arity} vs {other.arity}")

    def __add__(self, other: "RadPoly") -> "RadPoly":
        self._check(other)
        out = self.copy()
        for k, c in other.terms.items():
            cur = out.terms.get(k, Fraction(0)) + c
            if cur:
                out.terms[k] = cur
            else:
                out.terms.pop(k, None)
        return out

    def __neg__(self) -> "RadPoly":
        return RadPoly(self.arity, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "RadPoly") -> "RadPoly":
        return self + (-other)

    def __mul__(self, other: "RadPoly") -> "RadPoly":
        self._check(other)
        out = RadPoly(self.arity)
        for (a1, r1, R1, t1), c1 in self.terms.items():
            for (a2, r2, R2, t2), c2 in other.terms.items():
                alpha = tuple(x + y for x, y in zip(a1, a2))
                out._add_term((alpha, r1 + r2, R1 + R2, t1 + t2), c1 * c2)
        return out

    def scale(self, c: Scalar) -> "RadPoly":
        c = Fraction(c)
        if c == 0:
            return RadPoly(self.arity)
        return RadPoly(self.arity, {k: v * c for k, v in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def has_tau(self) -> bool:
        return any(k[3] for k in self.terms)

    def has_radical(self) -> bool:
        return any(k[1] or k[2] for k in self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, RadPoly) and self.arity == other.arity and self.terms == other.terms

    __hash__ = None

    # -- content and display -------------------------------------------

    def content(self) -> Fraction:
        """gcd of the coefficients (positive), 0 for the zero sum."""
        if not self.terms:
            return Fraction(0)
        num = 0
        den = 1
        for c in self.terms.values():
            num = math.gcd(num, abs(c.numerator))
            den = den * c.denominator // math.gcd(den, c.denominator)
        return Fraction(num, den)

    def leading_sign(self) -> int:
        if not self.terms:
            return 0
        key = max(self.terms)
        return 1 if self.terms[key] > 0 else -1

    def sorted_terms(self) -> list:
        return sorted(self.terms.items())

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (alpha, a, b, t), c in self.sorted_terms():
            factors = []
            if c != 1 or (not any(alpha) and not a and not b and not t):
                factors.append(str(c))
            factors += [f"x{i}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(alpha) if e]
            if a:
                factors.append("r")
            if b:
                factors.append("R")
            if t:
                factors.append("tau" + (f"^{t}" if t > 1 else ""))
            parts.append("*".join(factors))
        return " + ".join(parts)


def _poly_partial(poly: RadPoly, i: int) -> Tuple[RadPoly, RadPoly]:
    """Formal partial derivative of a canonical sum, as (numerator, denominator).

    Uses d r/dxi = xi/r (i >= 1), d R/dxi = xi/R, d tau/dx0 = r/R^2 and
    d tau/dxi = -x0 xi/(r R^2); radical derivatives are cleared to the
    tau-free denominators r^2 and R^2, accumulated over one common
    denominator to avoid fraction blowup.
    """
    m = poly.arity

    def bump(alpha, j):
        return tuple(e + 1 if k == j else e for k, e in enumerate(alpha))

    plain = RadPoly(m)      # denominator 1
    over_p = RadPoly(m)     # denominator r^2
    over_q = RadPoly(m)     # denominator R^2
    over_pq = RadPoly(m)    # denominator r^2 R^2
    for (alpha, a, b, t), c in poly.terms.items():
        if alpha[i] > 0:
            down = tuple(e - 1 if j == i else e for j, e in enumerate(alpha))
            plain._add_term((down, a, b, t), c * alpha[i])
        if a and i >= 1:
            over_p._add_term((bump(alpha, i), 1, b, t), c)
        if b:
            over_q._add_term((bump(alpha, i), a, 1, t), c)
        if t:
            if i == 0:
                over_q._add_term((alpha, a + 1, b, t - 1), c * t)
            else:
                over_pq._add_term((bump(bump(alpha, 0), i), a + 1, b, t - 1), -c * t)
    need_p = not (over_p.is_zero() and over_pq.is_zero())
    need_q = not (over_q.is_zero() and over_pq.is_zero())
    if not (need_p or need_q):
        return plain, RadPoly.const(1, m)
    p_block = RadPoly(m)._square_block(include_x0=False)
    q_block = RadPoly(m)._square_block(include_x0=True)
    den = RadPoly.const(1, m)
    if need_p:
        den = den * p_block
    if need_q:
        den = den * q_block
    num = plain * den
    if not over_p.is_zero():
        num = num + (over_p * q_block if need_q else over_p)
    if not over_q.is_zero():
        num = num + (over_q * p_block if need_p else over_q)
    if not over_pq.is_zero():
        num = num + over_pq
    return num, den


class PointContext:
    """Precomputed radical data for evaluating expressions at one point."""

    def __init__(self, point: Sequence[Scalar], digits: int = 50):
        self.point = tuple(Fraction(v) for v in point)
        self.digits = digits
        self.r2 = sum((v * v for v in self.point[1:]), Fraction(0))
        self.R2 = self.point[0] * self.point[0] + self.r2
        self.r_exact = _sqrt_fraction(self.r2)
        self.R_exact = _sqrt_fraction(self.R2)
        self._mp = None

    def mp_values(self):
        if self._mp is None:
            with mpmath.workdps(self.digits + _GUARD_DIGITS):
                xs = [mpmath.mpf(v.numerator) / v.denominator for v in self.point]
                r = mpmath.sqrt(mpmath.mpf(self.r2.numerator) / self.r2.denominator)
                R = mpmath.sqrt(mpmath.mpf(self.R2.numerator) / self.R2.denominator)
                tau = mpmath.atan(xs[0] / r) if r != 0 else None
                self._mp = (xs, r, R, tau)
        return self._mp


class Expr:
    """Element of the exact coefficient ring (fraction with tau-free denominator)."""

    __slots__ = ("num", "den")

    def __init__(self, num: RadPoly, den: RadPoly):
        if den.is_zero():
            raise PoleError("zero denominator")
        if den.has_tau():
            raise TauDivisionError("denominator depends on tau")
        self.num = num
        self.den = den
        self._normalise()

    # -- constructors --------------------------------------------------

    @classmethod
    def const(cls, c: Scalar, arity: int) -> "Expr":
        return cls(RadPoly.const(c, arity), RadPoly.const(1, arity))

    @classmethod
    def zero(cls, arity: int) -> "Expr":
        return cls.const(0, arity)

    @classmethod
    def one(cls, arity: int) -> "Expr":
        return cls.const(1, arity)

    @classmethod
    def x(cls, i: int, arity: int) -> "Expr":
        return cls(RadPoly.coordinate(i, arity), RadPoly.const(1, arity))

    @classmethod
    def r(cls, arity: int) -> "Expr":
        key = ((0,) * arity, 1, 0, 0)
        return cls(RadPoly(arity, {key: Fraction(1)}), RadPoly.const(1, arity))

    @classmethod
    def R(cls, arity: int) -> "Expr":
        key = ((0,) * arity, 0, 1, 0)
        return cls(RadPoly(arity, {key: Fraction(1)}), RadPoly.const(1, arity))

    @classmethod
    def tau(cls, arity: int) -> "Expr":
        key = ((0,) * arity, 0, 0, 1)
        return cls(RadPoly(arity, {key: Fraction(1)}), RadPoly.const(1, arity))

    @property
    def arity(self) -> int:
        return self.num.arity

    # -- normalisation ---------------------------------------------------

    def _normalise(self) -> None:
        if self.num.is_zero():
            self.den = RadPoly.const(1, self.den.arity)
            return
        # cancel a common monomial factor
        keys = list(self.num.terms) + list(self.den.terms)
        m = self.num.arity
        min_alpha = tuple(min(k[0][j] for k in keys) for j in range(m))
        min_a = min(k[1] for k in keys)
        min_b = min(k[2] for k in keys)
        if any(min_alpha) or min_a or min_b:
            def strip(poly: RadPoly) -> RadPoly:
                terms = {}
                for (alpha, a, b, t), c in poly.terms.items():
                    alpha = tuple(e - d for e, d in zip(alpha, min_alpha))
                    terms[(alpha, a - min_a, b - min_b, t)] = c
                return RadPoly(poly.arity, terms)
            self.num = strip(self.num)
            self.den = strip(self.den)
        # scale so the denominator has content 1 and positive leading sign
        c = self.den.content() * self.den.leading_sign()
        if c not in (0, 1):
            inv = 1 / c
            self.num = self.num.scale(inv)
            self.den = self.den.scale(inv)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "Expr":
        if isinstance(other, Expr):
            return other
        if isinstance(other, (int, Fraction)):
            return Expr.const(other, self.arity)
        return NotImplemented

    def __add__(self, other) -> "Expr":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.arity != other.arity:
            raise ArityMismatch(f"arity {self.arity} vs {other.arity}")
        if self.den == other.den:
            return Expr(self.num + other.num, self.den.copy())
        return Expr(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr(-self.num, self.den.copy())

    def __sub__(self, other) -> "Expr":
        other = self._coerce(other)
        return self + (-other)

    def __rsub__(self, other) -> "Expr":
        return (-self) + other

    def __mul__(self, other) -> "Expr":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.arity != other.arity:
            raise ArityMismatch(f"arity {self.arity} vs {other.arity}")
        return Expr(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Expr":
        other = self._coerce(other)
        if other.num.has_tau():
            raise TauDivisionError("cannot divide by a tau-dependent expression")
        if other.num.is_zero():
            raise PoleError("division by zero expression")
        return Expr(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "Expr":
        return self._coerce(other) / self

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self.num * other.den) == (other.num * self.den)

    __hash__ = None

    def has_tau(self) -> bool:
        return self.num.has_tau()

    # -- calculus ----------------------------------------------------------

    def diff(self, i: int) -> "Expr":
        """Partial derivative along coordinate i (quotient rule)."""
        if not 0 <= i < self.arity:
            raise ArityMismatch(f"coordinate {i} out of range for arity {self.arity}")
        dn_num, dn_den = _poly_partial(self.num, i)
        dd_num, dd_den = _poly_partial(self.den, i)
        if dd_num.is_zero():
            # constant-in-xi denominator: d(N/D) = dN / D
            return Expr(dn_num, dn_den * self.den)
        # (dN * D - N * dD) / D^2, over the radical-cleared denominators
        if dn_den == dd_den:
            num = dn_num * self.den - self.num * dd_num
            shared = dn_den
        else:
            num = dn_num * dd_den * self.den - self.num * dd_num * dn_den
            shared = dn_den * dd_den
        return Expr(num, shared * self.den * self.den)

    # -- evaluation ----------------------------------------------------------

    def _eval_poly_exact(self, poly: RadPoly, ctx: PointContext) -> Optional[Fraction]:
        total = Fraction(0)
        for (alpha, a, b, t), c in poly.terms.items():
            if t:
                return None
            if a and ctx.r_exact is None:
                return None
            if b and ctx.R_exact is None:
                return None
            val = c
            for xv, e in zip(ctx.point, alpha):
                if e:
                    val *= xv ** e
            if a:
                val *= ctx.r_exact
            if b:
                val *= ctx.R_exact
            total += val
        return total

    def _eval_poly_mp(self, poly: RadPoly, ctx: PointContext):
        xs, r, R, tau = ctx.mp_values()
        total = mpmath.mpf(0)
        for (alpha, a, b, t), c in poly.terms.items():
            if t and tau is None:
                raise SingularLocusError("tau undefined at r = 0")
            val = mpmath.mpf(c.numerator) / c.denominator
            for xv, e in zip(xs, alpha):
                if e:
                    val *= xv ** e
            if a:
                val *= r
            if b:
                val *= R
            if t:
                val *= tau ** t
            total += val
        return total

    def eval(self, point: Sequence[Scalar], digits: int = 50,
             ctx: Optional[PointContext] = None):
        """Value at a rational point: exact Fraction when the monomials allow
        it, otherwise an mpmath float correct to ``digits`` digits."""
        if ctx is None:
            ctx = PointContext(point, digits)
        if self.num.has_tau() and ctx.r2 == 0:
            raise SingularLocusError("tau undefined at r = 0")
        den_val = self._eval_poly_exact(self.den, ctx)
        if den_val is not None:
            if den_val == 0:
                raise PoleError("denominator vanishes at the point")
            num_val = self._eval_poly_exact(self.num, ctx)
            if num_val is not None:
                return num_val / den_val
        with mpmath.workdps(digits + _GUARD_DIGITS):
            dv = self._eval_poly_mp(self.den, ctx)
            if dv == 0:
                raise PoleError("denominator vanishes at the point")
            value = self._eval_poly_mp(self.num, ctx) / dv
        with mpmath.workdps(digits):
            return +value

    # -- display -------------------------------------------------------------

    def __repr__(self) -> str:
        if self.den == RadPoly.const(1, self.arity):
            return repr(self.num)
        return f"({self.num!r}) / ({self.den!r})"

    def to_json(self):
        def encode(poly: RadPoly):
            return [
                {"x": list(alpha), "r": a, "R": b, "tau": t, "c": str(c)}
                for (alpha, a, b, t), c in poly.sorted_terms()
            ]
        return {"num": encode(self.num), "den": encode(self.den)}


def random_rational(rng, bound: int = 100) -> Fraction:
    """Nonzero-denominator rational with numerator/denominator bounded."""
    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def random_expr(rng, arity: int, terms: int = 3, max_degree: int = 2,
                allow_tau: bool = True, allow_radicals: bool = True) -> Expr:
    """Small random ring element for property tests (seeded by the caller)."""
    num = RadPoly(arity)
    for _ in range(terms):
        alpha = tuple(rng.randint(0, max_degree) for _ in range(arity))
        a = rng.randint(0, 1) if allow_radicals else 0
        b = rng.randint(0, 1) if allow_radicals else 0
        t = rng.randint(0, 1) if allow_tau else 0
        num._add_term((alpha, a, b, t), random_rational(rng, 9))
    den = RadPoly.const(rng.randint(1, 5), arity)
    if allow_radicals and rng.random() < 0.4:
        den = den * RadPoly(arity, {((0,) * arity, rng.randint(0, 1), rng.randint(0, 1), 0): Fraction(1)})
        if den.is_zero():
            den = RadPoly.const(1, arity)
    if num.is_zero():
        num = RadPoly.const(1, arity)
    return Expr(num, den)
