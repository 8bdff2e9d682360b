"""Precision-tracked p-adic numbers, p-adic discs and Hensel root isolation.

A nonzero element is stored as ``p**valuation * unit`` where ``unit`` is
known modulo ``p**(abs_precision - valuation)``.  Precision is propagated
pessimistically and never silently restored.

Zero comes in two flavours.  The exact zero has infinite valuation and
infinite absolute precision.  A value that is only known to vanish modulo
``p**k`` (for instance ``x - x``) also reports infinite valuation but keeps
``abs_precision == k``; ``is_exact_zero`` tells the two apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .errors import PrecisionError, SimpleRootViolation
from .poly import Poly, is_squarefree, to_fraction

INFINITE = math.inf

Rational = Union[int, Fraction]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def vp_int(n: int, p: int) -> float:
    if n == 0:
        return INFINITE
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp(q, p: int) -> float:
    """p-adic valuation of an exact rational (INFINITE for 0)."""
    q = to_fraction(q)
    if q == 0:
        return INFINITE
    return vp_int(q.numerator, p) - vp_int(q.denominator, p)


def residue(q, p: int, k: int) -> int:
    """The integer in [0, p**k) congruent to the p-integral rational ``q``."""
    q = to_fraction(q)
    mod = p**k
    if q.denominator % p == 0:
        raise ValueError(f"{q} is not {p}-integral")
    return q.numerator * pow(q.denominator, -1, mod) % mod


def truncate(q, p: int, r) -> Fraction:
    """Canonical representative of ``q`` modulo ``p**r``: digits below p^r only."""
    q = to_fraction(q)
    v = vp(q, p)
    if v >= r:
        return Fraction(0)
    unit = q / Fraction(p) ** v
    m = residue(unit, p, int(r - v))
    return m * Fraction(p) ** v


@dataclass(frozen=True)
class PadicContext:
    prime: int
    precision: int = 20

    def __post_init__(self):
        if not is_prime(self.prime):
            raise ValueError(f"{self.prime} is not prime")
        if self.precision < 1:
            raise ValueError("precision must be at least 1")

    @property
    def alpha(self) -> float:
        """The real norm of p."""
        return 1.0 / self.prime

    def __call__(self, q) -> PadicNumber:
        return padic_from_rational(q, self)

    def zero(self) -> PadicNumber:
        return PadicNumber(self, INFINITE, 0, INFINITE)

    def one(self) -> PadicNumber:
        return padic_from_rational(1, self)


class PadicNumber:
    """Element of Q_p carried to finite absolute precision."""

    __slots__ = ("ctx", "valuation", "unit", "abs_precision")

    def __init__(self, ctx: PadicContext, valuation, unit: int, abs_precision):
        self.ctx = ctx
        self.valuation = valuation
        self.unit = unit
        self.abs_precision = abs_precision

    # construction

    @classmethod
    def from_int(cls, ctx: PadicContext, value: int, abs_precision) -> PadicNumber:
        """``value`` known modulo ``p**abs_precision`` (abs_precision may be negative)."""
        p = ctx.prime
        if abs_precision == INFINITE:
            return padic_from_rational(value, ctx)
        return cls._normalize(ctx, Fraction(value), abs_precision)

    @classmethod
    def _normalize(cls, ctx: PadicContext, value: Fraction, abs_precision) -> PadicNumber:
        p = ctx.prime
        if value == 0:
            return cls(ctx, INFINITE, 0, abs_precision)
        v = vp(value, p)
        if v >= abs_precision:
            return cls(ctx, INFINITE, 0, abs_precision)
        abs_precision = min(abs_precision, v + ctx.precision)
        u = residue(value / Fraction(p) ** v, p, abs_precision - v)
        return cls(ctx, v, u, abs_precision)

    # properties

    @property
    def p(self) -> int:
        return self.ctx.prime

    @property
    def relative_precision(self):
        if self.valuation == INFINITE:
            return 0
        return self.abs_precision - self.valuation

    def is_zero(self) -> bool:
        return self.valuation == INFINITE

    def is_exact_zero(self) -> bool:
        return self.valuation == INFINITE and self.abs_precision == INFINITE

    def valuation_lower_bound(self):
        return self.abs_precision if self.valuation == INFINITE else self.valuation

    def norm(self) -> float:
        return 0.0 if self.is_zero() else float(self.p) ** (-self.valuation)

    def to_rational(self) -> Fraction:
        """A rational representative (the truncated p-adic expansion)."""
        if self.is_zero():
            return Fraction(0)
        return self.unit * Fraction(self.p) ** self.valuation

    def digits(self) -> list[int]:
        """Base-p digits of the unit, least significant first."""
        out, u = [], self.unit
        for _ in range(self.relative_precision):
            out.append(u % self.p)
            u //= self.p
        return out

    def __repr__(self):
        if self.is_exact_zero():
            return "0"
        if self.is_zero():
            return f"O({self.p}^{self.abs_precision})"
        return f"{self.to_rational()} + O({self.p}^{self.abs_precision})"

    def to_json(self) -> dict:
        val = None if self.is_zero() else int(self.valuation)
        prec = None if self.abs_precision == INFINITE else int(self.abs_precision)
        return {"valuation": val, "digits": self.digits(), "abs_precision": prec}

    @classmethod
    def from_json(cls, ctx: PadicContext, data: dict) -> PadicNumber:
        prec = INFINITE if data["abs_precision"] is None else data["abs_precision"]
        if data["valuation"] is None:
            return cls(ctx, INFINITE, 0, prec)
        unit = sum(d * ctx.prime**k for k, d in enumerate(data["digits"]))
        return cls(ctx, data["valuation"], unit, prec)

    # arithmetic

    def _coerce(self, other) -> PadicNumber:
        if isinstance(other, PadicNumber):
            if other.ctx.prime != self.ctx.prime:
                raise ValueError("mixing different primes")
            return other
        if isinstance(other, (int, Fraction)):
            return padic_from_rational(other, self.ctx)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_exact_zero():
            return other
        if other.is_exact_zero():
            return self
        prec = min(self.abs_precision, other.abs_precision)
        if self.is_zero() or other.is_zero():
            x = other if self.is_zero() else self
            if x.is_zero():
                return PadicNumber(self.ctx, INFINITE, 0, prec)
            return x._reduce(prec)
        p = self.p
        m = min(self.valuation, other.valuation)
        s = self.unit * p ** (self.valuation - m) + other.unit * p ** (other.valuation - m)
        if prec <= m:
            return PadicNumber(self.ctx, INFINITE, 0, prec)
        s %= p ** (prec - m)
        if s == 0:
            return PadicNumber(self.ctx, INFINITE, 0, prec)
        k = 0
        while s % p == 0:
            s //= p
            k += 1
        v = m + k
        rel = min(prec - v, self.ctx.precision)
        return PadicNumber(self.ctx, v, s % p**rel, v + rel)

    def _reduce(self, prec) -> PadicNumber:
        """Forget digits at and beyond p**prec."""
        if prec >= self.abs_precision:
            return self
        if prec <= self.valuation:
            return PadicNumber(self.ctx, INFINITE, 0, prec)
        rel = prec - self.valuation
        return PadicNumber(self.ctx, self.valuation, self.unit % self.p**rel, prec)

    __radd__ = __add__

    def __neg__(self):
        if self.is_zero():
            return self
        mod = self.p ** self.relative_precision
        return PadicNumber(self.ctx, self.valuation, (-self.unit) % mod, self.abs_precision)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_exact_zero() or other.is_exact_zero():
            return self.ctx.zero()
        if self.is_zero() or other.is_zero():
            if self.is_zero() and other.is_zero():
                return PadicNumber(self.ctx, INFINITE, 0, self.abs_precision + other.abs_precision)
            z, x = (self, other) if self.is_zero() else (other, self)
            return PadicNumber(self.ctx, INFINITE, 0, z.abs_precision + x.valuation)
        v = self.valuation + other.valuation
        rel = min(self.relative_precision, other.relative_precision)
        u = self.unit * other.unit % self.p**rel
        return PadicNumber(self.ctx, v, u, v + rel)

    __rmul__ = __mul__

    def inverse(self) -> PadicNumber:
        if self.is_exact_zero():
            raise ZeroDivisionError("division by exact p-adic zero")
        if self.is_zero():
            raise PrecisionError(f"division by {self!r}: divisor indistinguishable from zero")
        rel = self.relative_precision
        u = pow(self.unit, -1, self.p**rel)
        return PadicNumber(self.ctx, -self.valuation, u, -self.valuation + rel)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.ctx.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        """Equality modulo the smaller of the two absolute precisions."""
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        diff = self - other
        return diff.is_zero()

    __hash__ = None

    def __float__(self):
        return float(self.to_rational())


def padic_from_rational(q, ctx: PadicContext) -> PadicNumber:
    q = to_fraction(q)
    if q == 0:
        return ctx.zero()
    v = vp(q, ctx.prime)
    return PadicNumber._normalize(ctx, q, v + ctx.precision)


def padic_arith(x: PadicNumber, y: PadicNumber, op: str) -> PadicNumber:
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError(f"unknown operation {op!r}")


def padic_valuation(x) -> float:
    """Valuation of a PadicNumber or an exact rational (needs prime for the latter)."""
    return x.valuation


@dataclass(frozen=True)
class PadicDisc:
    """Closed ball ``{x : v_p(x - center) >= radius_valuation}``.

    The center is kept as its canonical truncation modulo ``p**radius_valuation``
    so that equal discs compare equal.
    """

    center: Fraction
    radius_valuation: int
    prime: int

    def __post_init__(self):
        c = self.center
        if isinstance(c, PadicNumber):
            c = c.to_rational()
        object.__setattr__(self, "center", truncate(c, self.prime, self.radius_valuation))

    def contains(self, x) -> bool:
        if isinstance(x, PadicNumber):
            if x.abs_precision < self.radius_valuation:
                raise PrecisionError("point known too coarsely to test disc membership")
            x = x.to_rational()
        return vp(to_fraction(x) - self.center, self.prime) >= self.radius_valuation

    def contains_disc(self, other: PadicDisc) -> bool:
        return other.radius_valuation >= self.radius_valuation and self.contains(other.center)

    def relation(self, other: PadicDisc) -> str:
        """One of ``equal``, ``subset``, ``superset``, ``disjoint``."""
        if self == other:
            return "equal"
        if self.contains_disc(other):
            return "superset"
        if other.contains_disc(self):
            return "subset"
        return "disjoint"

    def disjoint(self, other: PadicDisc) -> bool:
        return self.relation(other) == "disjoint"

    def children(self) -> list[PadicDisc]:
        step = Fraction(self.prime) ** self.radius_valuation
        return [PadicDisc(self.center + a * step, self.radius_valuation + 1, self.prime)
                for a in range(self.prime)]

    def __str__(self):
        return f"{self.center} + {self.prime}^{self.radius_valuation} Z_{self.prime}"


# ---------------------------------------------------------------------------
# Hensel lifting


def _weierstrass_count(b: Sequence[Fraction], p: int) -> tuple[int, float]:
    """Number of roots (with multiplicity, over C_p) of sum b_k t^k in |t| <= 1."""
    vals = [vp(c, p) for c in b]
    m = min(vals)
    count = max(k for k, v in enumerate(vals) if v == m)
    return count, m


def _newton_lift(b: Sequence[Fraction], p: int, digits: int, min_residual) -> tuple[Fraction, bool]:
    """Lift the unique root of sum b_k t^k in Z_p to ``digits`` p-adic digits.

    Iterates until the root is pinned to ``digits`` digits and the residual
    has valuation at least ``min_residual``.  Returns ``(t, exact)``.
    """
    h = Poly(b)
    dh = h.derivative()
    v1 = vp(b[1], p)
    keep = int(max(digits, min_residual - v1)) + 2
    t = Fraction(0)
    while True:
        ht = h(t)
        if ht == 0:
            return t, True
        vh = vp(ht, p)
        if vh - v1 >= digits and vh >= min_residual:
            return t, False
        t = Fraction(residue(t - ht / dh(t), p, keep))


def hensel_lift_roots(g, ctx: PadicContext, search_disc: PadicDisc | None = None,
                      *, max_depth: int | None = None) -> list[PadicNumber]:
    """All roots of ``g`` in ``search_disc`` (default Z_p), to the context precision.

    Roots are isolated by recursive subdivision of the disc: the Weierstrass
    count of the recentred polynomial says how many C_p-roots the current disc
    holds; a count of one is lifted by Newton iteration, a count of zero is
    discarded, and larger counts are split into the p residue subdiscs.
    """
    if not isinstance(g, Poly):
        g = Poly(g)
    if g.degree < 1:
        return []
    p = ctx.prime
    if search_disc is None:
        search_disc = PadicDisc(Fraction(0), 0, p)
    if not is_squarefree(g):
        raise SimpleRootViolation("polynomial has repeated roots (gcd(g, g') is nonconstant)")
    if max_depth is None:
        max_depth = search_disc.radius_valuation + ctx.precision + 8

    roots: list[PadicNumber] = []
    stack = [search_disc]
    while stack:
        disc = stack.pop()
        r = disc.radius_valuation
        b = g.taylor_shift(disc.center, Fraction(p) ** r)
        count, _ = _weierstrass_count(b, p)
        if count == 0:
            continue
        if count == 1:
            target = max(r, 0) + ctx.precision
            digits = target - r
            t, exact = _newton_lift(b, p, digits, target)
            value = disc.center + t * Fraction(p) ** r
            if exact:
                roots.append(padic_from_rational(value, ctx))
            else:
                roots.append(PadicNumber._normalize(ctx, value, target))
            continue
        if r >= max_depth:
            raise SimpleRootViolation(
                f"{count} roots remain unseparated in {disc} at depth {r}; "
                "the Hensel criterion v(g(a)) > 2 v(g'(a)) never becomes available"
            )
        stack.extend(disc.children())
    roots.sort(key=lambda x: x.to_rational())
    return roots
