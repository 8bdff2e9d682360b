"""Dense univariate polynomials with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from gmpy2 import mpq

from .errors import DenominatorVanishesAtRoot


def to_fraction(value) -> Fraction:
    """Parse ints, Fractions and strings like ``"-3/4"`` exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


class Poly:
    """Immutable polynomial, coefficients stored low degree first.

    Coefficients are Fractions. ``eval`` is generic and accepts any ring
    element that mixes with Fractions (PadicNumber, FormalSeries, float).
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [to_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def x(cls) -> Poly:
        return cls([0, 1])

    @classmethod
    def const(cls, c) -> Poly:
        return cls([c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly([other])
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __repr__(self):
        return f"Poly({[str(c) for c in self.coeffs]})"

    def __str__(self):
        return self.format("z")

    def format(self, var: str = "z") -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if k == 0:
                body = str(a)
            else:
                mono = var if k == 1 else f"{var}^{k}"
                body = mono if a == 1 else f"{a}*{mono}"
            terms.append((sign, body))
        head_sign, head = terms[0]
        out = ("-" if head_sign == "-" else "") + head
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    # ring operations

    @staticmethod
    def _coerce(other) -> Poly:
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly([other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly([self[k] + other[k] for k in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

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
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative polynomial power")
        result, base = Poly([1]), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def divmod(self, other: Poly) -> tuple[Poly, Poly]:
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        inv_lc = 1 / other.lc
        if len(rem) - 1 < dq:
            return Poly(), self
        quot = [Fraction(0)] * (len(rem) - dq)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k]
            if c == 0:
                continue
            q = c * inv_lc
            quot[k - dq] = q
            for j, oj in enumerate(other.coeffs):
                rem[k - dq + j] -= q * oj
        return Poly(quot), Poly(rem[:dq])

    def __floordiv__(self, other):
        return self.divmod(self._coerce(other))[0]

    def __mod__(self, other):
        return self.divmod(self._coerce(other))[1]

    def monic(self) -> Poly:
        return self * (1 / self.lc) if self else self

    # calculus and evaluation

    def derivative(self) -> Poly:
        return Poly([k * c for k, c in enumerate(self.coeffs)][1:])

    def eval(self, x):
        """Horner evaluation at any ring element ``x``."""
        if not self.coeffs:
            return 0 * x
        acc = self.coeffs[-1] + 0 * x
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    __call__ = eval

    def compose(self, inner: Poly) -> Poly:
        """Return ``self(inner(z))``."""
        acc = Poly()
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return acc

    def taylor_shift(self, center, scale=1) -> list[Fraction]:
        """Coefficients b_k with self(center + scale*t) = sum b_k t^k."""
        center, scale = to_fraction(center), to_fraction(scale)
        b = list(self.coeffs)
        n = len(b)
        # repeated synthetic division by (z - center)
        for i in range(n):
            for k in range(n - 2, i - 1, -1):
                b[k] += center * b[k + 1]
        s = Fraction(1)
        for k in range(n):
            b[k] *= s
            s *= scale
        return b

    def reverse(self) -> Poly:
        return Poly(reversed(self.coeffs))


# Euclid over Q is the hot path of the quotient-algebra traces; it runs on
# gmpy2 rationals and converts back to Fractions at the boundary.


def _to_mpq(p: Poly) -> list:
    return [mpq(c.numerator, c.denominator) for c in p.coeffs]


def _from_mpq(cs: list) -> Poly:
    return Poly([Fraction(int(c.numerator), int(c.denominator)) for c in cs])


def _trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _divmod_q(a: list, b: list) -> tuple[list, list]:
    rem = list(a)
    db = len(b) - 1
    if len(rem) - 1 < db:
        return [], rem
    inv = 1 / b[-1]
    quot = [mpq(0)] * (len(rem) - db)
    for k in range(len(rem) - 1, db - 1, -1):
        c = rem[k]
        if c == 0:
            continue
        t = c * inv
        quot[k - db] = t
        for j, bj in enumerate(b):
            rem[k - db + j] -= t * bj
    return _trim(quot), _trim(rem[:db])


def _mul_q(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [mpq(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


def _sub_q(a: list, b: list) -> list:
    n = max(len(a), len(b))
    return _trim([(a[k] if k < len(a) else 0) - (b[k] if k < len(b) else 0) for k in range(n)])


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd over Q."""
    x, y = _to_mpq(a), _to_mpq(b)
    while y:
        x, y = y, _divmod_q(x, y)[1]
    if not x:
        return Poly()
    lc = x[-1]
    return _from_mpq([c / lc for c in x])


def poly_xgcd(a: Poly, b: Poly) -> tuple[Poly, Poly, Poly]:
    """Return (g, s, t) with s*a + t*b = g, g monic."""
    r0, r1 = _to_mpq(a), _to_mpq(b)
    s0, s1 = [mpq(1)], []
    t0, t1 = [], [mpq(1)]
    while r1:
        q, r = _divmod_q(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _sub_q(s0, _mul_q(q, s1))
        t0, t1 = t1, _sub_q(t0, _mul_q(q, t1))
    if not r0:
        return Poly(), _from_mpq(s0), _from_mpq(t0)
    inv = 1 / r0[-1]
    scale = lambda cs: _from_mpq([c * inv for c in cs])  # noqa: E731
    return scale(r0), scale(s0), scale(t0)


def inverse_mod(a: Poly, g: Poly) -> Poly:
    """Inverse of ``a`` in Q[x]/(g); raises when gcd(a, g) is nontrivial."""
    r0, r1 = _to_mpq(g), _to_mpq(a % g)
    t0, t1 = [], [mpq(1)]
    while r1:
        q, r = _divmod_q(r0, r1)
        r0, r1 = r1, r
        t0, t1 = t1, _sub_q(t0, _mul_q(q, t1))
    if len(r0) != 1:
        raise DenominatorVanishesAtRoot(
            f"gcd with the modulus has degree {len(r0) - 1}: the denominator vanishes at a root"
        )
    inv = 1 / r0[0]
    return _from_mpq([c * inv for c in t0]) % g


def squarefree_part(g: Poly) -> Poly:
    return g // poly_gcd(g, g.derivative())


def rational_roots(g: Poly) -> list[Fraction]:
    """All distinct rational roots (rational root theorem on the primitive form)."""
    if not g:
        raise ValueError("zero polynomial has every number as a root")
    roots = []
    cs = list(g.coeffs)
    lo = 0
    while cs[lo] == 0:
        lo += 1
    if lo:
        roots.append(Fraction(0))
    cs = cs[lo:]
    from math import lcm

    den = lcm(*(c.denominator for c in cs))
    ints = [int(c * den) for c in cs]
    a0, an = abs(ints[0]), abs(ints[-1])
    if len(ints) == 1:
        return roots
    h = Poly(ints)
    for p in _divisors(a0):
        for q in _divisors(an):
            for cand in (Fraction(p, q), Fraction(-p, q)):
                if cand not in roots and h(cand) == 0:
                    roots.append(cand)
    return sorted(roots)


def _divisors(n: int) -> list[int]:
    if n == 0:
        return [0]
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def from_roots(roots: Sequence) -> Poly:
    out = Poly([1])
    for r in roots:
        out = out * Poly([-to_fraction(r), 1])
    return out


_CHECK_PRIMES = (1_000_000_007, 998_244_353, 2_147_483_647)


def _gcd_degree_mod(a: list[int], b: list[int], q: int) -> int:
    def trim(x):
        while x and x[-1] % q == 0:
            x.pop()
        return [c % q for c in x]

    a, b = trim(list(a)), trim(list(b))
    while b:
        inv = pow(b[-1], -1, q)
        while len(a) >= len(b):
            t = a[-1] * inv % q
            shift = len(a) - len(b)
            for j, bj in enumerate(b):
                a[shift + j] = (a[shift + j] - t * bj) % q
            a = trim(a)
            if not a:
                break
        a, b = b, a
    return len(a) - 1


def is_squarefree(g: Poly) -> bool:
    """gcd(g, g') == 1 over Q; tries a cheap modular certificate first."""
    if g.degree < 2:
        return bool(g)
    for q in _CHECK_PRIMES:
        if any(c.denominator % q == 0 for c in g.coeffs) or g.lc.numerator % q == 0:
            continue
        gi = [c.numerator * pow(c.denominator, -1, q) % q for c in g.coeffs]
        dgi = [k * c % q for k, c in enumerate(gi)][1:]
        if _gcd_degree_mod(gi, dgi, q) == 0:
            return True
    return poly_gcd(g, g.derivative()).degree == 0
