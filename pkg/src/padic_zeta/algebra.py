"""Truncated power series, series-matrix determinants and quotient-algebra traces.

Coefficients are either exact Fractions (``ctx is None``) or PadicNumbers
over a fixed context.  Everything here is exact or precision-tracked.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import NotSquarefree, PrecisionExhausted
from .padic import INFINITE, PadicContext, PadicNumber, padic_from_rational
from .poly import Poly, inverse_mod, is_squarefree, to_fraction


class FormalSeries:
    """Power series c_0 + c_1 z + ... + c_N z^N + O(z^(N+1))."""

    __slots__ = ("coeffs", "order", "ctx")

    def __init__(self, coeffs: Sequence, order: int, ctx: PadicContext | None = None):
        if order < 0:
            raise ValueError("truncation order must be non-negative")
        self.ctx = ctx
        self.order = order
        cs = [self._lift(c) for c in list(coeffs)[: order + 1]]
        cs.extend(self._zero() for _ in range(order + 1 - len(cs)))
        self.coeffs = cs

    # construction helpers

    def _zero(self):
        return Fraction(0) if self.ctx is None else self.ctx.zero()

    def _lift(self, c):
        if self.ctx is None:
            if isinstance(c, PadicNumber):
                raise TypeError("p-adic coefficient in a rational series")
            return to_fraction(c)
        if isinstance(c, PadicNumber):
            return c
        return padic_from_rational(c, self.ctx)

    @classmethod
    def one(cls, order: int, ctx: PadicContext | None = None) -> FormalSeries:
        return cls([1], order, ctx)

    @classmethod
    def zero(cls, order: int, ctx: PadicContext | None = None) -> FormalSeries:
        return cls([], order, ctx)

    @classmethod
    def variable(cls, order: int, ctx: PadicContext | None = None) -> FormalSeries:
        return cls([0, 1], order, ctx)

    @property
    def field(self) -> str:
        return "RATIONAL" if self.ctx is None else f"PADIC({self.ctx.prime})"

    def __getitem__(self, k: int):
        return self.coeffs[k] if 0 <= k <= self.order else self._zero()

    def __len__(self):
        return self.order + 1

    def __iter__(self):
        return iter(self.coeffs)

    def __repr__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if isinstance(c, PadicNumber) and c.is_exact_zero() or c == 0 and self.ctx is None:
                continue
            terms.append(f"({c!r})*z^{k}" if k else f"({c!r})")
        body = " + ".join(terms) if terms else "0"
        return f"{body} + O(z^{self.order + 1})"

    def truncate(self, order: int) -> FormalSeries:
        return FormalSeries(self.coeffs, min(order, self.order), self.ctx)

    def _check(self, other: FormalSeries):
        if (self.ctx is None) != (other.ctx is None) or (
            self.ctx is not None and self.ctx.prime != other.ctx.prime
        ):
            raise TypeError("series over different coefficient fields")

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, FormalSeries):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, PadicNumber)):
            return FormalSeries([other], self.order, self.ctx)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = min(self.order, other.order)
        return FormalSeries([self.coeffs[k] + other.coeffs[k] for k in range(n + 1)], n, self.ctx)

    __radd__ = __add__

    def __neg__(self):
        return FormalSeries([-c for c in self.coeffs], self.order, self.ctx)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> FormalSeries:
        return FormalSeries([c * a for a in self.coeffs], self.order, self.ctx)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, PadicNumber)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = []
        for k in range(n + 1):
            acc = self._zero()
            for i in range(k + 1):
                acc = acc + a[i] * b[k - i]
            out.append(acc)
        return FormalSeries(out, n, self.ctx)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = FormalSeries.one(self.order, self.ctx)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> FormalSeries:
        a = self.coeffs
        inv0 = 1 / a[0]
        out = [inv0]
        for k in range(1, self.order + 1):
            acc = self._zero()
            for i in range(1, k + 1):
                acc = acc + a[i] * out[k - i]
            out.append(-acc * inv0)
        return FormalSeries(out, self.order, self.ctx)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, PadicNumber)):
            return self.scale(1 / self._lift(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __eq__(self, other):
        """Coefficient-wise equality up to the common order (and p-adic precision)."""
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = min(self.order, other.order)
        return all(self.coeffs[k] == other.coeffs[k] for k in range(n + 1))

    __hash__ = None

    def min_abs_precision(self):
        if self.ctx is None:
            return INFINITE
        return min(c.abs_precision for c in self.coeffs)

    def to_json(self):
        if self.ctx is None:
            return [str(c) for c in self.coeffs]
        return [c.to_json() for c in self.coeffs]


def _is_zero(c) -> bool:
    return c.is_zero() if isinstance(c, PadicNumber) else c == 0


def _is_one(c) -> bool:
    return (c - 1).is_zero() if isinstance(c, PadicNumber) else c == 1


def series_exp(s: FormalSeries) -> FormalSeries:
    """exp(s) for s with vanishing constant term.

    Uses n e_n = sum_k k s_k e_{n-k}; over Q_p each division by n costs
    v_p(n) digits, which the PadicNumber arithmetic records.
    """
    if not _is_zero(s[0]):
        raise ValueError("series_exp needs a vanishing constant term")
    e = [s._lift(1)]
    for n in range(1, s.order + 1):
        acc = s._zero()
        for k in range(1, n + 1):
            acc = acc + k * s[k] * e[n - k]
        e.append(acc / n)
    return FormalSeries(e, s.order, s.ctx)


def series_log(a: FormalSeries) -> FormalSeries:
    """log(a) for a with constant term 1."""
    if not _is_one(a[0]):
        raise ValueError("series_log needs constant term 1")
    ell = [a._zero()]
    for n in range(1, a.order + 1):
        acc = n * a[n]
        for k in range(1, n):
            acc = acc - k * ell[k] * a[n - k]
        ell.append(acc / n)
    return FormalSeries(ell, a.order, a.ctx)


# ---------------------------------------------------------------------------
# determinants


def berkowitz(A: Sequence[Sequence], one=1, zero=0) -> list:
    """Division-free characteristic polynomial.

    Returns [q_0 = 1, q_1, ..., q_n] with det(x I - A) = sum q_k x^(n-k),
    equivalently det(I - z A) = sum q_k z^k.  Works over any commutative
    ring whose elements support + and *.
    """
    n = len(A)
    if n == 0:
        return [one]
    vect = [one, zero - A[0][0]]
    for r in range(1, n):
        R = A[r][:r]
        C = [A[i][r] for i in range(r)]
        a = A[r][r]
        # first column of the Toeplitz factor: 1, -a, -R C, -R S C, ..., -R S^(r-1) C
        col = [one, zero - a]
        v = C
        for _ in range(r):
            acc = zero
            for i in range(r):
                acc = acc + R[i] * v[i]
            col.append(zero - acc)
            v = [_dot(A[i][:r], v, zero) for i in range(r)]
        new = []
        for i in range(r + 2):
            acc = zero
            for j in range(min(i, r) + 1):
                acc = acc + col[i - j] * vect[j]
            new.append(acc)
        vect = new
    return vect


def _dot(row, v, zero):
    acc = zero
    for a, b in zip(row, v):
        acc = acc + a * b
    return acc


def _berkowitz_mod(B: list[list[int]], mod: int) -> list[int]:
    """Berkowitz over Z/mod with plain ints."""
    n = len(B)
    if n == 0:
        return [1]
    vect = [1, (-B[0][0]) % mod]
    for r in range(1, n):
        R = B[r][:r]
        v = [B[i][r] for i in range(r)]
        col = [1, (-B[r][r]) % mod]
        S = [row[:r] for row in B[:r]]
        for _ in range(r):
            col.append((-sum(x * y for x, y in zip(R, v))) % mod)
            v = [sum(x * y for x, y in zip(row, v)) % mod for row in S]
        vect = [sum(col[i - j] * vect[j] for j in range(min(i, r) + 1)) % mod
                for i in range(r + 2)]
    return vect


class SeriesMatrix:
    """Square matrix of FormalSeries with common field and truncation order."""

    def __init__(self, entries: Sequence[Sequence[FormalSeries]]):
        rows = [list(r) for r in entries]
        k = len(rows)
        if any(len(r) != k for r in rows):
            raise ValueError("series matrix must be square")
        if k:
            first = rows[0][0]
            for r in rows:
                for e in r:
                    if e.order != first.order or (e.ctx is None) != (first.ctx is None):
                        raise ValueError("series matrix entries must share field and order")
        self.entries = rows

    @property
    def dimension(self) -> int:
        return len(self.entries)

    @property
    def order(self) -> int:
        return self.entries[0][0].order

    @property
    def ctx(self):
        return self.entries[0][0].ctx

    def identity_minus(self) -> SeriesMatrix:
        k = self.dimension
        one = FormalSeries.one(self.order, self.ctx)
        return SeriesMatrix([[(one if i == j else 0) - self.entries[i][j] for j in range(k)]
                             for i in range(k)])


def series_det(M: SeriesMatrix) -> FormalSeries:
    """Exact determinant in the truncated series ring (division-free)."""
    k = M.dimension
    if k == 0:
        raise ValueError("empty series matrix")
    zero = FormalSeries.zero(M.order, M.ctx)
    one = FormalSeries.one(M.order, M.ctx)
    q = berkowitz(M.entries, one, zero)
    return q[k] if k % 2 == 0 else -q[k]


def padic_integral_form(A: Sequence[Sequence[PadicNumber]], ctx: PadicContext):
    """Write A = p^shift * B with B integral, known modulo p^K.

    Returns ``(shift, K, B)`` with B an int matrix; exact zeros stay 0.
    """
    vals = [x.valuation for row in A for x in row if not x.is_zero()]
    shift = int(min(vals)) if vals else 0
    precs = [x.abs_precision - shift for row in A for x in row if x.abs_precision != INFINITE]
    K = int(min(precs)) if precs else ctx.precision
    if K <= 0:
        raise PrecisionExhausted("matrix entries carry no precision after scaling")
    p = ctx.prime
    mod = p**K
    B = [[0 if x.is_zero() else x.unit * p ** int(x.valuation - shift) % mod for x in row]
         for row in A]
    return shift, K, B


def char_det_poly(A: Sequence[Sequence], ctx: PadicContext | None = None,
                  order: int | None = None) -> FormalSeries:
    """det(I - z A) as a polynomial in z (degree <= dim A).

    Rational matrices go through exact Berkowitz.  p-adic matrices are
    scaled to an integral matrix known modulo p^K and handled with machine
    integers; coefficient k then carries absolute precision K + k*shift.
    """
    n = len(A)
    order = n if order is None else order
    if ctx is None:
        rows = [[to_fraction(x) for x in row] for row in A]
        q = berkowitz(rows, Fraction(1), Fraction(0))
        return FormalSeries(q, order)
    rows = [[x if isinstance(x, PadicNumber) else padic_from_rational(x, ctx) for x in row]
            for row in A]
    if n == 0:
        return FormalSeries.one(order, ctx)
    shift, K, B = padic_integral_form(rows, ctx)
    p = ctx.prime
    q = _berkowitz_mod(B, p**K)
    coeffs = []
    for k, c in enumerate(q):
        if k == 0:
            coeffs.append(ctx.one())
            continue
        scale = Fraction(p) ** (k * shift)
        coeffs.append(PadicNumber._normalize(ctx, c * scale, K + k * shift))
    return FormalSeries(coeffs, order, ctx)


def matrix_power_trace(A: Sequence[Sequence], n: int, ctx: PadicContext | None = None):
    """trace(A^n), exact for rationals, precision-tracked over Q_p."""
    if n < 1:
        raise ValueError("power must be positive")
    if ctx is None:
        P = [[to_fraction(x) for x in row] for row in A]
        M = P
        for _ in range(n - 1):
            M = _matmul(M, P)
        return sum((M[i][i] for i in range(len(M))), Fraction(0))
    rows = [[x if isinstance(x, PadicNumber) else padic_from_rational(x, ctx) for x in row]
            for row in A]
    if not rows:
        return ctx.zero()
    shift, K, B = padic_integral_form(rows, ctx)
    mod = ctx.prime**K
    M = B
    for _ in range(n - 1):
        M = _matmul(M, B, mod)
    tr = sum(M[i][i] for i in range(len(M))) % mod
    return PadicNumber._normalize(ctx, tr * Fraction(ctx.prime) ** (n * shift), K + n * shift)


def _matmul(X, Y, mod=None):
    cols = list(zip(*Y))
    if mod is None:
        return [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in X]
    return [[sum(a * b for a, b in zip(row, col)) % mod for col in cols] for row in X]


# ---------------------------------------------------------------------------
# traces in Q[x]/(g)


def power_sums(g: Poly, count: int) -> list[Fraction]:
    """p_0..p_{count-1}, power sums of the roots of g, by Newton's identities."""
    d = g.degree
    a = [c / g.lc for c in g.coeffs]  # monic: a[d] = 1
    ps = [Fraction(d)]
    for k in range(1, count):
        acc = Fraction(0)
        for i in range(1, min(k, d) + 1):
            acc += a[d - i] * (ps[k - i] if k - i > 0 else 0)
        if k <= d:
            acc += k * a[d - k]
        ps.append(-acc)
    return ps


class QuotientAlgebraElement:
    """Residue class of a polynomial in Q[x]/(modulus)."""

    def __init__(self, modulus: Poly, representative: Poly):
        if modulus.degree < 1:
            raise ValueError("modulus must have positive degree")
        self.modulus = modulus
        self.representative = representative % modulus

    def __mul__(self, other: QuotientAlgebraElement) -> QuotientAlgebraElement:
        return QuotientAlgebraElement(self.modulus, self.representative * other.representative)

    def __add__(self, other: QuotientAlgebraElement) -> QuotientAlgebraElement:
        return QuotientAlgebraElement(self.modulus, self.representative + other.representative)

    def inverse(self) -> QuotientAlgebraElement:
        return QuotientAlgebraElement(self.modulus, inverse_mod(self.representative, self.modulus))

    def trace(self) -> Fraction:
        """Trace of multiplication-by-self: sum of the representative over the roots."""
        rep = self.representative
        ps = power_sums(self.modulus, self.modulus.degree)
        return sum((c * ps[k] for k, c in enumerate(rep.coeffs)), Fraction(0))


def trace_mod_poly(numer: Poly, denom: Poly, g: Poly, *, check_squarefree: bool = True) -> Fraction:
    """Sum of numer(x)/denom(x) over the roots of the squarefree polynomial g."""
    if check_squarefree and not is_squarefree(g):
        raise NotSquarefree("modulus has a repeated root")
    elem = QuotientAlgebraElement(g, numer) * QuotientAlgebraElement(g, denom).inverse()
    return elem.trace()
