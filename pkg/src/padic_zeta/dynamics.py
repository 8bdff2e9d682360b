"""Rational maps with exact rational coefficients and their orbit data."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .errors import (
    DegenerateCriticalPoint,
    DegreeGuardExceeded,
    IrrationalCriticalPoint,
    PoleHit,
)
from .padic import PadicNumber
from .poly import Poly, poly_gcd, rational_roots, to_fraction

DEGREE_GUARD = 4096


class RationalMapSpec:
    """f = numerator / denominator, stored in lowest terms."""

    def __init__(self, numerator, denominator=(1,)):
        num = numerator if isinstance(numerator, Poly) else Poly(numerator)
        den = denominator if isinstance(denominator, Poly) else Poly(denominator)
        if not den:
            raise ValueError("denominator is identically zero")
        g = poly_gcd(num, den)
        if g.degree > 0:
            num, den = num // g, den // g
        # normalise so the denominator is monic
        lc = den.lc
        self.numerator = num * (1 / lc)
        self.denominator = den * (1 / lc)
        self._d1 = None
        self._d2 = None

    @classmethod
    def polynomial(cls, coeffs) -> RationalMapSpec:
        return cls(coeffs, [1])

    @property
    def degree(self) -> int:
        return max(self.numerator.degree, self.denominator.degree)

    @property
    def is_polynomial(self) -> bool:
        return self.denominator.degree == 0

    def as_poly(self) -> Poly:
        if not self.is_polynomial:
            raise ValueError("map is not a polynomial")
        return self.numerator * (1 / self.denominator.lc)

    def __repr__(self):
        if self.is_polynomial:
            return f"RationalMapSpec({self.as_poly()})"
        return f"RationalMapSpec(({self.numerator}) / ({self.denominator}))"

    def to_json(self) -> dict:
        return {
            "numerator": [str(c) for c in self.numerator.coeffs],
            "denominator": [str(c) for c in self.denominator.coeffs],
        }

    # derivative numerators: f' = d1 / D^2, f'' = d2 / D^3

    def _derivs(self):
        if self._d1 is None:
            N, D = self.numerator, self.denominator
            d1 = N.derivative() * D - N * D.derivative()
            d2 = d1.derivative() * D - 2 * d1 * D.derivative()
            self._d1, self._d2 = d1, d2
        return self._d1, self._d2

    def _den(self, x, index=0):
        d = self.denominator(x)
        if _is_zero(d):
            raise PoleHit(index)
        return d

    def __call__(self, x, _index: int = 0):
        if self.is_polynomial:
            return self.as_poly()(x)
        d = self._den(x, _index)
        return self.numerator(x) / d

    def derivative(self, x):
        d1, _ = self._derivs()
        if self.is_polynomial:
            return self.as_poly().derivative()(x)
        d = self._den(x)
        return d1(x) / (d * d)

    def second_derivative(self, x):
        _, d2 = self._derivs()
        if self.is_polynomial:
            return self.as_poly().derivative().derivative()(x)
        d = self._den(x)
        return d2(x) / (d * d * d)

    def derivative_map(self) -> RationalMapSpec:
        d1, _ = self._derivs()
        return RationalMapSpec(d1, self.denominator * self.denominator)

    def iterate(self, n: int) -> RationalMapSpec:
        """f^n as a rational map (exact composition)."""
        num, den = Poly([0, 1]), Poly([1])
        for _ in range(n):
            num, den = _compose_rational(self, num, den)
        return RationalMapSpec(num, den)


def _compose_rational(f: RationalMapSpec, num: Poly, den: Poly) -> tuple[Poly, Poly]:
    """f(num/den) written as a quotient of polynomials."""
    d = f.degree
    powers_num = [Poly([1])]
    powers_den = [Poly([1])]
    for _ in range(d):
        powers_num.append(powers_num[-1] * num)
        powers_den.append(powers_den[-1] * den)

    def homogenise(p: Poly) -> Poly:
        acc = Poly()
        for k, c in enumerate(p.coeffs):
            if c:
                acc = acc + c * powers_num[k] * powers_den[d - k]
        return acc

    return homogenise(f.numerator), homogenise(f.denominator)


def _is_zero(x) -> bool:
    if isinstance(x, PadicNumber):
        return x.is_zero()
    return x == 0


def evaluate_orbit(f: RationalMapSpec, x0, n: int) -> list:
    """[x0, f(x0), ..., f^n(x0)]."""
    if isinstance(x0, (int, str)):
        x0 = to_fraction(x0)
    orbit = [x0]
    for k in range(n):
        try:
            orbit.append(f(orbit[-1]))
        except PoleHit:
            raise PoleHit(k) from None
    return orbit


def derivatives_along_orbit(f: RationalMapSpec, x, n: int):
    """((f^n)'(x), (f^n)''(x)) by the forward chain-rule recurrences."""
    if isinstance(x, (int, str)):
        x = to_fraction(x)
    d1, d2 = 1 + 0 * x, 0 * x
    y = x
    for k in range(n):
        try:
            a, b = f.derivative(y), f.second_derivative(y)
            y_next = f(y)
        except PoleHit:
            raise PoleHit(k) from None
        d1, d2 = a * d1, b * d1 * d1 + a * d2
        y = y_next
    return d1, d2


def multiplier(f: RationalMapSpec, x, n: int):
    return derivatives_along_orbit(f, x, n)[0]


def fixed_point_polynomial(f: RationalMapSpec, n: int, *, guard: int = DEGREE_GUARD) -> Poly:
    """g_n with roots the affine fixed points of f^n.

    For a polynomial map this is f^n(x) - x; for a rational map the
    numerator of f^n(x) - x.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if f.degree**n > guard:
        raise DegreeGuardExceeded(f"(deg f)^n = {f.degree}^{n} exceeds the guard {guard}")
    if f.is_polynomial:
        p = f.as_poly()
        acc = Poly([0, 1])
        for _ in range(n):
            acc = p.compose(acc)
        return acc - Poly([0, 1])
    fn = f.iterate(n)
    return fn.numerator - Poly([0, 1]) * fn.denominator


def polynomial_iterate(f: RationalMapSpec, n: int) -> Poly:
    p = f.as_poly()
    acc = Poly([0, 1])
    for _ in range(n):
        acc = p.compose(acc)
    return acc


@dataclass
class CriticalData:
    critical_points: list[Fraction]
    f: RationalMapSpec = field(repr=False)
    orbit_cache: dict[int, list[Fraction]] = field(default_factory=dict, repr=False)

    def orbit(self, i: int, depth: int) -> list[Fraction]:
        cached = self.orbit_cache.get(i)
        if cached is None or len(cached) <= depth:
            cached = evaluate_orbit(self.f, self.critical_points[i], depth)
            self.orbit_cache[i] = cached
        return cached[: depth + 1]

    def orbits_disjoint(self, depth: int) -> bool:
        seen: dict[Fraction, int] = {}
        for i in range(len(self.critical_points)):
            for x in self.orbit(i, depth):
                if seen.setdefault(x, i) != i:
                    return False
        return True


def critical_points(f: RationalMapSpec) -> CriticalData:
    """All (necessarily rational) critical points of a polynomial map."""
    p = f.as_poly()
    dp = p.derivative()
    if dp.degree < 1:
        return CriticalData([], f)
    roots = rational_roots(dp)
    # count multiplicities to see whether f' splits over Q
    rest, total = dp, 0
    for r in roots:
        lin = Poly([-r, 1])
        while True:
            q, rem = rest.divmod(lin)
            if rem:
                break
            rest, total = q, total + 1
    if total != dp.degree:
        raise IrrationalCriticalPoint(
            f"f' = {dp} does not split over Q ({dp.degree - total} critical points are irrational)"
        )
    d2 = dp.derivative()
    for c in roots:
        if d2(c) == 0:
            raise DegenerateCriticalPoint(f"f''({c}) = 0")
    return CriticalData(list(roots), f)


@dataclass
class PeriodicPointRecord:
    point: Any
    period: int
    multiplier: Any
    symbol_sequence: Sequence[int] | None = None
