from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import reference_map
from oracles import quadratic_branch_matrix, vp
from padic_zeta.algebra import FormalSeries, char_det_poly, series_log
from padic_zeta.errors import HypothesisViolation, NonRepellingMultiplier, WeightVanishes
from padic_zeta.markov import ChartOrbit, MarkovPartition, SubhyperbolicChartData, build_partition
from padic_zeta.padic import PadicContext, PadicDisc
from padic_zeta.transfer import (
    TruncatedOperator,
    WeightSpec,
    correction_factor,
    det_series,
    periodic_points_in_blocks,
    rational_periodic_trace,
    subhyperbolic_zeta,
    trace_via_matrix,
    trace_via_periodic_points,
    truncate_operator,
    zeta_series,
)

TRACE_SLACK = 2


def reference(p=3, K=30, level=1):
    f = reference_map(p)
    ctx = PadicContext(p, K)
    return f, build_partition(f, ctx, level)


def matmul(A, B):
    n = len(A)
    return [[sum((A[i][k] * B[k][j] for k in range(n)), A[0][0] * 0) for j in range(n)] for i in range(n)]


# -- operator ------------------------------------------------------------------


def test_degree_zero_matrix(ref3):
    f, P = ref3
    L = truncate_operator(f, P, M=0)
    assert [[x.to_rational() for x in row] for row in L.matrix] == [[1, 1], [1, 1]]


def test_degree_one_matrix(ref3):
    f, P = ref3
    L = truncate_operator(f, P, M=1)
    assert L.dimension == 4
    for i in range(2):
        for j in range(2):
            assert L.matrix[L.index(i, 1)][L.index(j, 1)].valuation >= 1


@pytest.mark.parametrize("p", [3, 5])
def test_matrix_matches_square_root_expansion(p):
    M = 6
    f, P = reference(p, 30)
    L = truncate_operator(f, P, M=M)
    oracle = quadratic_branch_matrix(p, M)
    for r, row in enumerate(L.matrix):
        for c, x in enumerate(row):
            assert vp(x.to_rational() - oracle[r][c], p) >= x.abs_precision - 1


def test_nuclear_decay(ref3):
    f, P = ref3
    L = truncate_operator(f, P, M=8)
    for i in range(2):
        for j in range(2):
            for m in range(9):
                for kk in range(9):
                    assert L.matrix[L.index(i, kk)][L.index(j, m)].valuation >= kk


def test_empty_transition_gives_zero_matrix(ref3):
    f, P = ref3
    empty = MarkovPartition(P.blocks, [[False, False], [False, False]], P.derivative_valuations, P.ctx)
    L = truncate_operator(f, empty, M=3)
    assert all(x.is_zero() for row in L.matrix for x in row)
    assert trace_via_matrix(L, 1).is_zero()
    assert det_series(L, 4) == FormalSeries.one(4, P.ctx)


def test_block_structure_follows_transitions():
    f, P = reference(3, 30, level=2)
    L = truncate_operator(f, P, M=2)
    for i in range(P.size):
        for j in range(P.size):
            block_zero = all(L.matrix[L.index(i, a)][L.index(j, b)].is_zero()
                             for a in range(3) for b in range(3))
            assert block_zero == (not P.transition[j][i])


# -- traces --------------------------------------------------------------------


def test_periodic_trace_n1(ref3):
    f, P = ref3
    assert rational_periodic_trace(f, P, n=1) == 2
    assert trace_via_periodic_points(f, P, n=1) == P.ctx(2)
    terms = periodic_points_in_blocks(f, P, 1)
    assert [t.point for t in terms] == [P.ctx(0), P.ctx(4)]
    assert [t.multiplier for t in terms] == [P.ctx(Fraction(-1, 3)), P.ctx(Fraction(7, 3))]


def test_periodic_traces_are_powers_of_two(ref3):
    f, P = ref3
    for n in range(1, 4):
        assert trace_via_periodic_points(f, P, n=n) == P.ctx(2**n)


def test_no_self_transitions_gives_zero_trace():
    f, P4 = reference(3, 30, level=2)
    # blocks 1 + 9Z_3 and 6 + 9Z_3 swap
    sub = MarkovPartition([P4.blocks[1], P4.blocks[3]], [[False, True], [True, False]], [-1, -1], P4.ctx)
    assert trace_via_periodic_points(f, sub, n=1).is_zero()
    assert trace_via_matrix(truncate_operator(f, sub, M=4), 1).is_zero()
    assert len(periodic_points_in_blocks(f, sub, 2)) == 2


def test_matrix_trace_is_two(ref3):
    f, P = ref3
    L = truncate_operator(f, P, M=10)
    assert vp(trace_via_matrix(L, 1).to_rational() - 2, 3) >= 10


def test_trace_of_square(ref3):
    f, P = ref3
    L = truncate_operator(f, P, M=4)
    A2 = matmul(L.matrix, L.matrix)
    direct = sum((A2[i][i] for i in range(len(A2))), P.ctx.zero())
    assert trace_via_matrix(L, 2) == direct


@pytest.mark.parametrize("M", [10, 15, 20])
def test_trace_cross_validation(M):
    f, P = reference(3, M + 30)
    L = truncate_operator(f, P, M=M)
    bound = (M + 1) * abs(min(P.derivative_valuations)) - TRACE_SLACK
    for n in range(1, 6):
        delta = trace_via_matrix(L, n) - trace_via_periodic_points(f, P, n=n)
        assert delta.valuation_lower_bound() >= bound, (n, delta)


def test_base_point_independence(ref3):
    f, P = ref3
    a = truncate_operator(f, P, M=12)
    b = truncate_operator(f, P, M=12, centers=[Fraction(3), Fraction(-2)])
    for n in range(1, 4):
        d = trace_via_matrix(a, n) - trace_via_matrix(b, n)
        assert d.valuation_lower_bound() >= 11


def test_centers_must_lie_in_blocks(ref3):
    f, P = ref3
    with pytest.raises(ValueError):
        truncate_operator(f, P, M=2, centers=[Fraction(1), Fraction(0)])


# -- weights -------------------------------------------------------------------


def test_locally_constant_weight(ref3):
    f, P = ref3
    w = WeightSpec("LOCALLY_CONSTANT", ["2", "3"])
    assert rational_periodic_trace(f, P, w, 1) == 2 * Fraction(1, 4) + 3 * Fraction(7, 4)
    L = truncate_operator(f, P, w, M=10)
    for n in range(1, 4):
        d = trace_via_matrix(L, n) - trace_via_periodic_points(f, P, w, n)
        assert d.valuation_lower_bound() >= 9


def test_derivative_weight(ref3):
    f, P = ref3
    w = WeightSpec(beta=1)
    # sum of 1/(lambda - 1) over the fixed points: -3/4 + 3/4
    assert rational_periodic_trace(f, P, w, 1) == 0
    L = truncate_operator(f, P, w, M=10)
    for n in range(1, 4):
        d = trace_via_matrix(L, n) - trace_via_periodic_points(f, P, w, n)
        assert d.valuation_lower_bound() >= 9


def test_polynomial_weight(ref3):
    f, P = ref3
    w = WeightSpec("POLYNOMIAL_PER_BLOCK", [[1, 1], [1, 0, 1]])
    L = truncate_operator(f, P, w, M=10)
    for n in range(1, 4):
        d = trace_via_matrix(L, n) - trace_via_periodic_points(f, P, w, n)
        assert d.valuation_lower_bound() >= 9


def test_weight_vanishing(ref3):
    f, P = ref3
    with pytest.raises(WeightVanishes):
        truncate_operator(f, P, WeightSpec("POLYNOMIAL_PER_BLOCK", [[-3, 1], [1]]), M=2)
    with pytest.raises(WeightVanishes):
        truncate_operator(f, P, WeightSpec("LOCALLY_CONSTANT", ["0", "1"]), M=2)


def test_real_beta_rejected():
    with pytest.raises(HypothesisViolation):
        WeightSpec(beta=Fraction(1, 2))
    with pytest.raises(HypothesisViolation):
        WeightSpec(beta=-1)


# -- zeta and determinant -------------------------------------------------------


def test_zero_operator_series():
    ctx = PadicContext(3, 10)
    assert zeta_series([ctx.zero()] * 4, 4) == FormalSeries.one(4, ctx)


def test_one_by_one():
    a = Fraction(5, 3)
    z = zeta_series([a**n for n in range(1, 6)], 5)
    assert z.coeffs == [a**k for k in range(6)]
    assert char_det_poly([[a]]).coeffs == [1, -a]


def test_reference_duality(ref3):
    f, P = ref3
    L = truncate_operator(f, P, M=12)
    traces = [trace_via_matrix(L, n) for n in range(1, 6)]
    prod = zeta_series(traces, 5) * det_series(L, 5)
    one = FormalSeries.one(5, P.ctx)
    for k in range(6):
        assert (prod[k] - one[k]).valuation_lower_bound() >= 12


def test_reference_determinant_is_one_minus_2z(ref3):
    f, P = ref3
    d = det_series(truncate_operator(f, P, M=15), 10)
    assert d[0] == P.ctx(1)
    assert (d[1] + 2).valuation_lower_bound() >= 15
    for k in range(4, 11):
        assert d[k].valuation_lower_bound() >= k


def test_truncation_stability():
    f, P = reference(3, 60)
    high = det_series(truncate_operator(f, P, M=24), 10)
    for M in (10, 15, 20):
        low = det_series(truncate_operator(f, P, M=M), 10)
        for k in range(11):
            assert (high[k] - low[k]).valuation_lower_bound() >= M + 1, (M, k)


def _dummy_operator(A, ctx):
    k = len(A)
    blocks = [PadicDisc(Fraction(i), 1, ctx.prime) for i in range(k)]
    P = MarkovPartition(blocks, [[True] * k for _ in range(k)], [-1] * k, ctx)
    return TruncatedOperator(P, 0, [[ctx(x) for x in row] for row in A], [b.center for b in blocks],
                             [1] * k, WeightSpec())


@settings(max_examples=100)
@given(st.sampled_from([3, 5, 7]), st.integers(1, 4), st.integers(1, 5), st.data())
def test_duality_random_matrices(p, k, N, data):
    ctx = PadicContext(p, 30)
    A = [[Fraction(data.draw(st.integers(-20, 20)), p ** data.draw(st.integers(0, 1))) for _ in range(k)]
         for _ in range(k)]
    L = _dummy_operator(A, ctx)
    traces = [trace_via_matrix(L, n) for n in range(1, N + 1)]
    prod = zeta_series(traces, N, min_precision=-100) * det_series(L, N)
    one = FormalSeries.one(N, ctx)
    for i in range(N + 1):
        d = prod[i] - one[i]
        assert d.is_zero(), (A, i, d)


# -- correction factor ------------------------------------------------------------


def test_empty_charts():
    ctx = PadicContext(3, 20)
    num, den = correction_factor(SubhyperbolicChartData(ctx), N_z=4)
    assert num == FormalSeries.one(4, ctx) and den == FormalSeries.one(4, ctx)


def single_exceptional(lam=Fraction(1, 3), period=1, psi=1):
    ctx = PadicContext(3, 40)
    orb = ChartOrbit(ctx(0), period, ctx(lam), ctx(psi))
    return ctx, SubhyperbolicChartData(ctx, exceptional=[orb])


def test_single_exceptional_denominator():
    ctx, charts = single_exceptional()
    J, N = 5, 4
    cf = correction_factor(charts, J=J, N_z=N)
    expected = FormalSeries.one(N, ctx)
    lam = Fraction(1, 3)
    for j in range(J + 1):
        expected = expected * FormalSeries([1, -lam ** (-j)], N, ctx)
    assert cf.denominator == expected
    assert cf.numerator == FormalSeries.one(N, ctx)
    assert cf.tail_valuation == J + 1


def test_log_of_factor_matches_power_sums():
    ctx, charts = single_exceptional()
    J, N = 6, 5
    _, den = correction_factor(charts, J=J, N_z=N)
    lam = Fraction(1, 3)
    log_factor = series_log(den.inverse())
    for n in range(1, N + 1):
        expected = sum(lam ** (-n * j) for j in range(J + 1)) / n
        assert log_factor[n] == ctx(expected)


def test_non_repelling_multiplier():
    _, charts = single_exceptional(lam=3)
    with pytest.raises(NonRepellingMultiplier):
        correction_factor(charts)


def test_infinite_block_uses_root():
    ctx = PadicContext(3, 40)
    orb = ChartOrbit(ctx(0), 1, ctx(Fraction(1, 9)), ctx(1), degree=2, root=ctx(Fraction(1, 3)))
    num, _ = correction_factor(SubhyperbolicChartData(ctx, infinite=[orb]), J=2, N_z=2)
    # (1 - z)(1 - 3z)(1 - 9z)
    assert num == FormalSeries([1, -13, 39], 2, ctx)


# -- assembly ------------------------------------------------------------------


def test_trivial_correction_is_hyperbolic_relation(ref3):
    f, P = ref3
    L = truncate_operator(f, P, M=12)
    det = det_series(L, 4)
    traces = [trace_via_periodic_points(f, P, n=n) for n in range(1, 5)]
    rep = subhyperbolic_zeta(det, correction_factor(SubhyperbolicChartData(P.ctx), N_z=4), traces)
    assert rep.assembled == rep.inverse_det
    assert all(d.valuation_lower_bound() >= 12 for d in rep.deltas)
    assert all(s[0] == P.ctx(1) for s in (rep.inverse_det, rep.numerator, rep.denominator, rep.assembled))


def test_artificial_chart_divides_by_denominator(ref3):
    f, P = ref3
    L = truncate_operator(f, P, M=12)
    det = det_series(L, 4)
    orb = ChartOrbit(P.ctx(0), 1, P.ctx(Fraction(-1, 3)), P.ctx(1))
    cf = correction_factor(SubhyperbolicChartData(P.ctx, exceptional=[orb]), J=8, N_z=4)
    rep = subhyperbolic_zeta(det, cf)
    assert rep.assembled * cf.denominator == rep.inverse_det
