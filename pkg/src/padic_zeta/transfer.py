"""Finite-rank truncations of the p-adic transfer operator, its traces,
Fredholm determinant and dynamical zeta series, and the subhyperbolic
correction factor.

The operator acts on tuples of analytic functions, one per Markov block
D_j, expanded in the basis e_{j,m}(z) = ((z - x_j) / p^{r_j})^m.  On block
D_i it sums, over the blocks D_j with f(D_j) containing D_i, the weight
times phi pulled back along the inverse branch h_ji : D_i -> D_j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import FormalSeries, char_det_poly, matrix_power_trace, series_exp
from .dynamics import RationalMapSpec, derivatives_along_orbit, evaluate_orbit, fixed_point_polynomial
from .errors import (
    BranchInversionFailure,
    HypothesisViolation,
    HyperbolicityViolation,
    NonRepellingMultiplier,
    PrecisionExhausted,
    SimpleRootViolation,
    WeightVanishes,
)
from .markov import MarkovPartition, SubhyperbolicChartData
from .padic import INFINITE, PadicContext, PadicDisc, PadicNumber, hensel_lift_roots, padic_from_rational
from .poly import Poly, rational_roots, to_fraction

WEIGHT_KINDS = ("CONSTANT_ONE", "POLYNOMIAL_PER_BLOCK", "LOCALLY_CONSTANT")
DEFAULT_J = 16


@dataclass
class WeightSpec:
    """psi (per block) times (f')^(-beta).

    ``data[j]`` is a coefficient list for POLYNOMIAL_PER_BLOCK and a single
    rational for LOCALLY_CONSTANT; CONSTANT_ONE ignores it.
    """

    kind: str = "CONSTANT_ONE"
    data: list = field(default_factory=list)
    beta: int = 0

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if not isinstance(self.beta, int) or isinstance(self.beta, bool) or self.beta < 0:
            raise HypothesisViolation("beta must be a non-negative integer over Q_p")

    def psi(self, j: int) -> Poly:
        if self.kind == "CONSTANT_ONE":
            return Poly([1])
        if self.kind == "LOCALLY_CONSTANT":
            return Poly([to_fraction(self.data[j])])
        return Poly([to_fraction(c) for c in self.data[j]])

    def check_nonvanishing(self, partition: MarkovPartition):
        if self.kind == "CONSTANT_ONE":
            return
        if len(self.data) != partition.size:
            raise ValueError(f"weight has {len(self.data)} blocks, partition has {partition.size}")
        for j, blk in enumerate(partition.blocks):
            psi = self.psi(j)
            if not psi:
                raise WeightVanishes(f"weight is identically zero on block {j}")
            if psi.degree >= 1 and hensel_lift_roots(psi, partition.ctx, blk):
                raise WeightVanishes(f"weight has a zero in block {j}")

    def to_json(self) -> dict:
        return {"kind": self.kind, "data": _jsonable(self.data), "beta": self.beta}


def _jsonable(data):
    if isinstance(data, list):
        return [_jsonable(d) for d in data]
    return str(data)


@dataclass
class TruncatedOperator:
    partition: MarkovPartition
    taylor_degree: int
    matrix: list[list[PadicNumber]]
    centers: list[Fraction]
    radius_valuations: list[int]
    weight: WeightSpec

    @property
    def ctx(self) -> PadicContext:
        return self.partition.ctx

    @property
    def dimension(self) -> int:
        return len(self.matrix)

    def index(self, block: int, degree: int) -> int:
        return block * (self.taylor_degree + 1) + degree

    def to_json(self) -> dict:
        return {
            "taylor_degree": self.taylor_degree,
            "centers": [str(c) for c in self.centers],
            "radius_valuations": self.radius_valuations,
            "weight": self.weight.to_json(),
            "matrix": [[x.to_json() for x in row] for row in self.matrix],
        }


# ---------------------------------------------------------------------------
# inverse branches


def _shifted(poly: Poly, center, scale) -> Poly:
    return Poly(poly.taylor_shift(center, scale))


def inverse_branch_series(f: RationalMapSpec, ctx: PadicContext, source: PadicDisc, target: PadicDisc,
                          x_src, x_tgt, M: int) -> FormalSeries:
    """u(w) with f(x_src + p^{r_src} u(w)) = x_tgt + p^{r_tgt} w and x_src + p^{r_src} u(0) in ``source``.

    The constant term comes from a constrained Hensel lift, the higher
    coefficients from Newton iteration in the truncated series ring.
    """
    p = ctx.prime
    rho_s = Fraction(p) ** source.radius_valuation
    rho_t = Fraction(p) ** target.radius_valuation
    N, D = f.numerator, f.denominator
    try:
        roots = hensel_lift_roots(N - x_tgt * D, ctx, source)
    except SimpleRootViolation as exc:
        raise BranchInversionFailure(f"f(y) = {x_tgt} has a multiple root in {source}") from exc
    if len(roots) != 1:
        raise BranchInversionFailure(
            f"f(y) = {x_tgt} has {len(roots)} solutions in {source}; f is not injective there")
    u0 = (roots[0] - x_src) / rho_s

    Nt, Dt = _shifted(N, x_src, rho_s), _shifted(D, x_src, rho_s)
    dNt, dDt = Nt.derivative(), Dt.derivative()
    z = FormalSeries([x_tgt, rho_t], M, ctx)
    u = FormalSeries([u0], M, ctx)
    for _ in range(max(1, math.ceil(math.log2(M + 1))) + 1):
        H = Nt(u) - z * Dt(u)
        dH = dNt(u) - z * dDt(u)
        if dH[0].is_zero():
            raise BranchInversionFailure("branch derivative vanishes")
        u = u - H / dH
    return u


def _branch_weight(f: RationalMapSpec, weight: WeightSpec, j: int, y: FormalSeries) -> FormalSeries:
    w = weight.psi(j)(y)
    if weight.beta:
        w = w * f.derivative(y) ** (-weight.beta)
    return w


def truncate_operator(f: RationalMapSpec, partition: MarkovPartition, weight: WeightSpec | None = None,
                      M: int = 10, centers: list | None = None) -> TruncatedOperator:
    """Matrix of the transfer operator in the basis ((z - x_j)/p^{r_j})^m, m <= M."""
    weight = weight or WeightSpec()
    weight.check_nonvanishing(partition)
    ctx = partition.ctx
    p = ctx.prime
    k = partition.size
    blocks = partition.blocks
    if centers is None:
        centers = [b.center for b in blocks]
    centers = [to_fraction(c) for c in centers]
    for j, c in enumerate(centers):
        if not blocks[j].contains(c):
            raise ValueError(f"basis center {c} is outside block {j}")
    radii = [b.radius_valuation for b in blocks]
    dim = k * (M + 1)
    zero = ctx.zero()
    A = [[zero] * dim for _ in range(dim)]
    for j in range(k):
        for i in range(k):
            if not partition.transition[j][i]:
                continue
            u = inverse_branch_series(f, ctx, blocks[j], blocks[i], centers[j], centers[i], M)
            y = u.scale(padic_from_rational(Fraction(p) ** radii[j], ctx)) + centers[j]
            wt = _branch_weight(f, weight, j, y)
            col = wt
            for m in range(M + 1):
                for kk in range(M + 1):
                    A[i * (M + 1) + kk][j * (M + 1) + m] = col[kk]
                if m < M:
                    col = col * u
    return TruncatedOperator(partition, M, A, centers, radii, weight)


def trace_via_matrix(L: TruncatedOperator, n: int) -> PadicNumber:
    return matrix_power_trace(L.matrix, n, L.ctx)


# ---------------------------------------------------------------------------
# periodic points


@dataclass
class PeriodicTerm:
    loop: tuple[int, ...]
    point: PadicNumber
    multiplier: PadicNumber
    term: PadicNumber


def periodic_points_in_blocks(f: RationalMapSpec, partition: MarkovPartition, n: int) -> list[PeriodicTerm]:
    """The fixed points of f^n in the blocks, matched one-to-one with admissible loops."""
    ctx = partition.ctx
    g = fixed_point_polynomial(f, n)
    loops = set(partition.loops(n))
    found: dict[tuple, PadicNumber] = {}
    for i, blk in enumerate(partition.blocks):
        try:
            roots = hensel_lift_roots(g, ctx, blk)
        except SimpleRootViolation as exc:
            raise HyperbolicityViolation(f"f^{n}(x) = x has a multiple root in block {i}") from exc
        for x in roots:
            orbit = evaluate_orbit(f, x, n)
            itinerary = tuple(partition.block_of(y) for y in orbit)
            if itinerary not in loops:
                raise HyperbolicityViolation(f"periodic point with itinerary {itinerary} is not an admissible loop")
            if itinerary in found:
                raise HyperbolicityViolation(f"two periodic points share the loop {itinerary}")
            found[itinerary] = x
    if len(found) != len(loops):
        missing = sorted(loops - set(found))[:3]
        raise HyperbolicityViolation(f"loops without a periodic point, e.g. {missing}")
    out = []
    for loop in sorted(found):
        x = found[loop]
        lam, _ = derivatives_along_orbit(f, x, n)
        out.append(PeriodicTerm(loop, x, lam, None))
    return out


def _orbit_weight(f, weight: WeightSpec, partition: MarkovPartition, loop, x, n, lam):
    orbit = evaluate_orbit(f, x, n)
    w = 1 + 0 * x
    for step in range(n):
        w = w * weight.psi(loop[step])(orbit[step])
    if weight.beta:
        w = w * lam ** (-weight.beta)
    return w


def trace_via_periodic_points(f: RationalMapSpec, partition: MarkovPartition,
                              weight: WeightSpec | None = None, n: int = 1) -> PadicNumber:
    """Sum over admissible loops of prod psi(f^i x) / (1 - lambda^{-1})."""
    weight = weight or WeightSpec()
    ctx = partition.ctx
    total = ctx.zero()
    for t in periodic_points_in_blocks(f, partition, n):
        if t.multiplier.valuation >= 0:
            raise HyperbolicityViolation(f"periodic point on loop {t.loop} is not repelling")
        w = _orbit_weight(f, weight, partition, t.loop, t.point, n, t.multiplier)
        t.term = w / (1 - 1 / t.multiplier)
        total = total + t.term
    return total


def rational_periodic_trace(f: RationalMapSpec, partition: MarkovPartition,
                            weight: WeightSpec | None = None, n: int = 1) -> Fraction | None:
    """The same sum computed exactly, when every periodic point in the blocks is rational."""
    weight = weight or WeightSpec()
    g = fixed_point_polynomial(f, n)
    pts = [x for x in rational_roots(g) if partition.block_of(x) is not None]
    if len(pts) != partition.loop_count(n):
        return None
    total = Fraction(0)
    for x in pts:
        orbit = evaluate_orbit(f, x, n)
        loop = tuple(partition.block_of(y) for y in orbit)
        if None in loop:
            return None
        lam, _ = derivatives_along_orbit(f, x, n)
        total += _orbit_weight(f, weight, partition, loop, x, n, lam) / (1 - 1 / lam)
    return total


# ---------------------------------------------------------------------------
# zeta and determinant series


def zeta_series(traces: list, N_z: int, ctx: PadicContext | None = None,
                min_precision: int = 1) -> FormalSeries:
    """exp(sum_n tr_n z^n / n); raises when the 1/n losses leave less than ``min_precision`` digits."""
    if len(traces) < N_z:
        raise ValueError(f"need {N_z} traces, got {len(traces)}")
    if ctx is None:
        ctx = next((t.ctx for t in traces if isinstance(t, PadicNumber)), None)
    sigma = FormalSeries([0] + [traces[n - 1] / n if ctx is None else _as_padic(traces[n - 1], ctx) / n
                                for n in range(1, N_z + 1)], N_z, ctx)
    z = series_exp(sigma)
    if ctx is not None:
        worst = z.min_abs_precision()
        if worst < min_precision:
            raise PrecisionExhausted(f"zeta coefficients known only modulo p^{worst}")
    return z


def _as_padic(x, ctx):
    return x if isinstance(x, PadicNumber) else padic_from_rational(x, ctx)


def det_series(L: TruncatedOperator, N_z: int) -> FormalSeries:
    """det(I - z L) truncated at z^{N_z}."""
    if not L.matrix:
        return FormalSeries.one(N_z, L.ctx)
    return char_det_poly(L.matrix, L.ctx, order=N_z)


# ---------------------------------------------------------------------------
# subhyperbolic correction


@dataclass
class CorrectionFactor:
    numerator: FormalSeries
    denominator: FormalSeries
    J: int
    tail_valuation: float

    def __iter__(self):
        yield self.numerator
        yield self.denominator

    def to_json(self) -> dict:
        return {
            "numerator": self.numerator.to_json(),
            "denominator": self.denominator.to_json(),
            "J": self.J,
            "tail_valuation": None if self.tail_valuation == INFINITE else self.tail_valuation,
        }


def correction_factor(charts: SubhyperbolicChartData, beta: int = 0, J: int = DEFAULT_J,
                      N_z: int = 4) -> CorrectionFactor:
    """Truncation at j <= J of prod_j prod_Q (1 - c z^{n_l}) / prod_Q' (1 - c z^{n_a}).

    ``tail_valuation`` bounds from below the valuation of every change the
    dropped factors j > J would make.
    """
    if not isinstance(beta, int) or beta < 0:
        raise HypothesisViolation("beta must be a non-negative integer over Q_p")
    ctx = charts.ctx
    num = FormalSeries.one(N_z, ctx)
    den = FormalSeries.one(N_z, ctx)
    tail = INFINITE
    for group, is_num in ((charts.infinite, True), (charts.exceptional, False)):
        for orb in group:
            mu = orb.scaling()
            if mu.valuation >= 0:
                raise NonRepellingMultiplier(f"multiplier {orb.multiplier} at {orb.center} is not repelling")
            inv = 1 / mu
            c = orb.psi_product * inv ** beta
            for j in range(J + 1):
                if orb.period <= N_z:
                    coeffs = [ctx.zero()] * (N_z + 1)
                    coeffs[0] = ctx.one()
                    coeffs[orb.period] = -c
                    factor = FormalSeries(coeffs, N_z, ctx)
                    if is_num:
                        num = num * factor
                    else:
                        den = den * factor
                c = c * inv
            tail = min(tail, c.valuation)
    return CorrectionFactor(num, den, J, tail)


@dataclass
class SubhyperbolicZetaReport:
    inverse_det: FormalSeries
    numerator: FormalSeries
    denominator: FormalSeries
    assembled: FormalSeries
    direct: FormalSeries | None = None
    deltas: list | None = None

    @property
    def consistent(self) -> bool | None:
        if self.deltas is None:
            return None
        return all(d.is_zero() if isinstance(d, PadicNumber) else d == 0 for d in self.deltas)

    def to_json(self) -> dict:
        out = {
            "inverse_det": self.inverse_det.to_json(),
            "numerator": self.numerator.to_json(),
            "denominator": self.denominator.to_json(),
            "assembled": self.assembled.to_json(),
        }
        if self.deltas is not None:
            out["direct"] = self.direct.to_json()
            out["deltas"] = [d.to_json() for d in self.deltas]
            out["consistent"] = self.consistent
        return out


def subhyperbolic_zeta(det: FormalSeries, correction, direct_traces: list | None = None,
                       N_check: int | None = None) -> SubhyperbolicZetaReport:
    """Assemble (1/det) * numerator / denominator and optionally compare with a direct zeta sum."""
    num, den = correction
    order = min(det.order, num.order, den.order)
    det, num, den = det.truncate(order), num.truncate(order), den.truncate(order)
    inv_det = det.inverse()
    assembled = inv_det * num / den
    report = SubhyperbolicZetaReport(inv_det, num, den, assembled)
    if direct_traces is not None:
        n_check = min(order, N_check if N_check is not None else len(direct_traces), len(direct_traces))
        direct = zeta_series(direct_traces[:n_check], n_check, det.ctx)
        report.direct = direct
        report.deltas = [assembled[k] - direct[k] for k in range(n_check + 1)]
    return report


__all__ = [
    "CorrectionFactor",
    "TruncatedOperator",
    "WeightSpec",
    "correction_factor",
    "det_series",
    "inverse_branch_series",
    "periodic_points_in_blocks",
    "rational_periodic_trace",
    "subhyperbolic_zeta",
    "trace_via_matrix",
    "trace_via_periodic_points",
    "truncate_operator",
    "zeta_series",
]
