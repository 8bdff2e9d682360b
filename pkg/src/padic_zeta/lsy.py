"""Exact verification of the Levin-Sodin-Yuditski identity for polynomial maps.

Left side:  exp(-sum_n z^n/n * S_n),  S_n = sum over Fix(f^n) of 1/(lam (lam - 1)),
            lam = (f^n)'(x), computed as a trace in Q[x]/(f^n(x) - x).
Right side: det(I - M(z)),  M_ij(z) = sum_n z^n / ((f^n)''(c_i) (f^n(c_i) - c_j)).

Which sign convention actually holds is not assumed.  ``lsy_verify`` fixes
it at orders 1-2 against a floating-point root-finding oracle and then
checks exact rational equality at all requested orders.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import FormalSeries, SeriesMatrix, series_det, series_exp, trace_mod_poly
from .dynamics import (
    RationalMapSpec,
    critical_points,
    derivatives_along_orbit,
    evaluate_orbit,
    fixed_point_polynomial,
    polynomial_iterate,
)
from .errors import (
    ConventionUnresolved,
    DenominatorVanishesAtRoot,
    HypothesisViolation,
    NotSquarefree,
)
from .poly import Poly

# Candidate readings of the identity, tried in this order.  Each maps
# (exp(-Sigma), exp(+Sigma), det(I - M), det(I + M)) to the pair of series
# that must agree.  "reciprocal" is algebraically the same condition as
# "exp_plus"; it is kept as a separate label because it is a separate reading.
CONVENTIONS = ("printed", "exp_plus", "reciprocal", "matrix_sign_flipped")
UNRESOLVED = "UNRESOLVED"
ORACLE_TOL = 1e-9
DEFAULT_MAX_ORDER_QUADRATIC = 6


def _pair(convention, lhs_minus, lhs_plus, det_minus, det_plus, one):
    if convention == "printed":
        return lhs_minus, det_minus
    if convention == "exp_plus":
        return lhs_plus, det_minus
    if convention == "reciprocal":
        return lhs_minus * det_minus, one
    if convention == "matrix_sign_flipped":
        return lhs_minus, det_plus
    raise ValueError(convention)


def fixed_point_sums(f: RationalMapSpec, order: int) -> list[Fraction]:
    """[S_1, ..., S_order], exact."""
    if not f.is_polynomial:
        raise HypothesisViolation("the identity is stated for polynomial maps")
    sums = []
    for n in range(1, order + 1):
        g = fixed_point_polynomial(f, n)
        D = polynomial_iterate(f, n).derivative()
        try:
            sums.append(trace_mod_poly(Poly([1]), D * (D - 1), g))
        except DenominatorVanishesAtRoot as exc:
            raise HypothesisViolation(
                f"n={n}: some point of Fix(f^n) has multiplier 0 or 1"
            ) from exc
        except NotSquarefree as exc:
            raise HypothesisViolation(f"n={n}: f^n(x) - x has a repeated root") from exc
    return sums


def _sigma(sums, order, sign=1) -> FormalSeries:
    return FormalSeries([0] + [sign * s / n for n, s in enumerate(sums, 1)], order)


def lsy_lhs(f: RationalMapSpec, order: int, sums: list[Fraction] | None = None) -> FormalSeries:
    """The left side as printed: exp(-sum_n S_n z^n / n)."""
    if sums is None:
        sums = fixed_point_sums(f, order)
    return series_exp(_sigma(sums[:order], order, -1))


def lsy_matrix(f: RationalMapSpec, order: int) -> SeriesMatrix:
    """M_ij = sum_{n=1}^{order} z^n / ((f^n)''(c_i) (f^n(c_i) - c_j))."""
    crit = critical_points(f)
    cs = crit.critical_points
    if not cs:
        raise HypothesisViolation("map has no critical points")
    rows = []
    for i, ci in enumerate(cs):
        orbit = evaluate_orbit(f, ci, order)
        second = [derivatives_along_orbit(f, ci, n)[1] for n in range(order + 1)]
        row = []
        for j, cj in enumerate(cs):
            coeffs = [Fraction(0)]
            for n in range(1, order + 1):
                if second[n] == 0:
                    raise HypothesisViolation(f"(f^{n})''(c_{i}) = 0 at n={n}, i={i}")
                if orbit[n] == cj:
                    raise HypothesisViolation(
                        f"critical orbit collision: f^{n}(c_{i}) = c_{j} (n={n}, i={i}, j={j})"
                    )
                coeffs.append(1 / (second[n] * (orbit[n] - cj)))
            row.append(FormalSeries(coeffs, order))
        rows.append(row)
    return SeriesMatrix(rows)


def lsy_rhs(f: RationalMapSpec, order: int) -> FormalSeries:
    """The right side as printed: det(I - M)."""
    return series_det(lsy_matrix(f, order).identity_minus())


def _det_plus(M: SeriesMatrix) -> FormalSeries:
    neg = SeriesMatrix([[-e for e in row] for row in M.entries])
    return series_det(neg.identity_minus())


# ---------------------------------------------------------------------------
# floating-point oracle


def oracle_fixed_point_sums(f: RationalMapSpec, order: int) -> list[complex]:
    """S_n by numerically locating every root of f^n(x) - x (companion matrix)."""
    out = []
    for n in range(1, order + 1):
        g = fixed_point_polynomial(f, n)
        roots = np.roots([float(c) for c in reversed(g.coeffs)])
        fp = f.as_poly().derivative()
        fp_c = [complex(c) for c in fp.coeffs]
        f_c = [complex(c) for c in f.as_poly().coeffs]
        total = 0j
        for x in roots:
            lam, y = 1 + 0j, complex(x)
            for _ in range(n):
                lam *= _horner(fp_c, y)
                y = _horner(f_c, y)
            total += 1 / (lam * (lam - 1))
        out.append(total)
    return out


def _horner(cs, x):
    acc = 0j
    for c in reversed(cs):
        acc = acc * x + c
    return acc


def _float_exp(sig: list[complex]) -> list[complex]:
    e = [1 + 0j]
    for n in range(1, len(sig)):
        e.append(sum(k * sig[k] * e[n - k] for k in range(1, n + 1)) / n)
    return e


def _float_mul(a, b):
    n = min(len(a), len(b))
    return [sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(n)]


@dataclass
class LsyReport:
    map: RationalMapSpec
    order: int
    lhs: FormalSeries
    rhs: FormalSeries
    convention: str
    max_matching_order: int
    deltas: list[Fraction]
    fixed_point_sums: list[Fraction] = field(default_factory=list)
    oracle_sums: list[complex] = field(default_factory=list)
    oracle_matches: dict[str, bool] = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.convention != UNRESOLVED and self.max_matching_order == self.order

    def to_json(self) -> dict:
        return {
            "map": self.map.to_json(),
            "order": self.order,
            "convention": self.convention,
            "max_matching_order": self.max_matching_order,
            "verified": self.verified,
            "lhs": self.lhs.to_json(),
            "rhs": self.rhs.to_json(),
            "deltas": [str(d) for d in self.deltas],
            "fixed_point_sums": [str(s) for s in self.fixed_point_sums],
            "oracle": {
                "sums": [[s.real, s.imag] for s in self.oracle_sums],
                "tolerance": ORACLE_TOL,
                "candidate_matches": self.oracle_matches,
            },
        }


def resolve_convention(f: RationalMapSpec, check_order: int = 2):
    """Pick the first candidate reading that the float oracle confirms at orders 1..check_order."""
    oracle = oracle_fixed_point_sums(f, check_order)
    sig = [0j] + [s / n for n, s in enumerate(oracle, 1)]
    lhs_minus = _float_exp([-s for s in sig])
    lhs_plus = _float_exp(sig)
    M = lsy_matrix(f, check_order)
    det_minus = [complex(c) for c in series_det(M.identity_minus()).coeffs]
    det_plus = [complex(c) for c in _det_plus(M).coeffs]
    one = [1 + 0j] + [0j] * check_order
    matches = {}
    for conv in CONVENTIONS:
        if conv == "reciprocal":
            left, right = _float_mul(lhs_minus, det_minus), one
        else:
            left, right = _pair(conv, lhs_minus, lhs_plus, det_minus, det_plus, one)
        matches[conv] = all(
            abs(left[k] - right[k]) <= ORACLE_TOL * max(1.0, abs(right[k]))
            for k in range(check_order + 1)
        )
    chosen = next((c for c in CONVENTIONS if matches[c]), UNRESOLVED)
    return chosen, matches, oracle


def lsy_verify(f: RationalMapSpec, order: int, *, max_order: int | None = None) -> LsyReport:
    """Resolve the sign convention, then compare both series exactly up to ``order``."""
    if max_order is None and f.degree == 2:
        max_order = DEFAULT_MAX_ORDER_QUADRATIC
    if max_order is not None and order > max_order:
        raise ValueError(f"order {order} exceeds the configured guard {max_order}")
    work = max(order, 2)
    M = lsy_matrix(f, work)  # raises on critical-orbit collisions
    convention, matches, oracle = resolve_convention(f)
    if convention == UNRESOLVED:
        raise ConventionUnresolved(f"no candidate convention matches the oracle: {matches}")
    sums = fixed_point_sums(f, order)
    lhs_minus = lsy_lhs(f, order, sums)
    lhs_plus = series_exp(_sigma(sums, order, +1))
    det_minus = series_det(M.identity_minus()).truncate(order)
    det_plus = _det_plus(M).truncate(order)
    one = FormalSeries.one(order)
    left, right = _pair(convention, lhs_minus, lhs_plus, det_minus, det_plus, one)
    deltas = [left[k] - right[k] for k in range(order + 1)]
    matching = -1
    for k, d in enumerate(deltas):
        if d != 0:
            break
        matching = k
    return LsyReport(
        map=f,
        order=order,
        lhs=left,
        rhs=right,
        convention=convention,
        max_matching_order=matching,
        deltas=deltas,
        fixed_point_sums=sums,
        oracle_sums=oracle,
        oracle_matches=matches,
    )


__all__ = [
    "CONVENTIONS",
    "LsyReport",
    "fixed_point_sums",
    "lsy_lhs",
    "lsy_matrix",
    "lsy_rhs",
    "lsy_verify",
    "oracle_fixed_point_sums",
    "resolve_convention",
]
