import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padic_zeta.errors import HypothesisViolation, NoRootInUnitInterval, Reducible
from padic_zeta.hausdorff import (
    DimensionProblem,
    is_irreducible,
    monotone_on_grid,
    solve_dimension,
    spectral_radius,
    witness_polynomial,
)
from padic_zeta.markov import build_partition
from padic_zeta.padic import PadicContext
from padic_zeta.poly import Poly

from conftest import reference_map


def test_spectral_radius_examples():
    assert spectral_radius([[0.3, 0.3], [0.3, 0.3]]) == pytest.approx(0.6, abs=1e-12)
    assert spectral_radius([[0, 1], [1, 0]]) == pytest.approx(1.0, abs=1e-12)
    assert spectral_radius([[1, 2], [3, 4]]) == pytest.approx((5 + math.sqrt(33)) / 2, abs=1e-12)


def test_spectral_radius_rejects_negative():
    with pytest.raises(ValueError):
        spectral_radius([[1, -1], [0, 1]])


@settings(max_examples=200)
@given(st.integers(1, 5), st.data())
def test_spectral_radius_matches_eigvals(n, data):
    A = np.array([[data.draw(st.floats(0.01, 3.0)) for _ in range(n)] for _ in range(n)])
    expected = max(abs(np.linalg.eigvals(A)))
    assert spectral_radius(A) == pytest.approx(expected, rel=1e-9, abs=1e-10)


def test_reference_partition_dimension():
    P = build_partition(reference_map(3), PadicContext(3, 20), 1)
    prob = DimensionProblem.from_partition(P)
    assert prob.valuation_matrix == [[1, 1], [1, 1]]
    beta, lam, lam_poly = solve_dimension(prob)
    assert abs(beta - math.log(2) / math.log(3)) <= 1e-9
    assert abs(lam - 2) <= 1e-9
    res = solve_dimension(prob)
    assert res.lambda_exact == 2
    assert res.witness == Poly([1, -2])
    assert lam_poly == Poly([-2, 1])
    assert res.witness_residual <= 1e-9


@pytest.mark.parametrize("k,v,p", [(2, 1, 3), (2, 1, 5), (3, 1, 5), (2, 2, 3), (4, 1, 7)])
def test_full_shift_closed_form(k, v, p):
    res = solve_dimension(DimensionProblem.full_shift(k, v, p))
    assert abs(res.beta - math.log(k) / (v * math.log(p))) <= 1e-9
    assert res.witness_residual <= 1e-9


def test_golden_mean_shift():
    prob = DimensionProblem([[1, 1], [1, None]], 3)
    res = solve_dimension(prob)
    phi = (1 + math.sqrt(5)) / 2
    assert abs(res.beta - math.log(phi) / math.log(3)) <= 1e-9
    assert res.lambda_min_poly == Poly([-1, -1, 1])
    assert res.lambda_exact is None


def test_single_cycle_is_dimension_zero():
    res = solve_dimension(DimensionProblem([[1]], 3))
    assert res.beta == 0 and res.lam == pytest.approx(1.0)
    assert res.witness == Poly([1, -1])


def test_reducible_and_empty():
    with pytest.raises(Reducible):
        solve_dimension(DimensionProblem([[1, 1], [None, 1]], 3))
    with pytest.raises(NoRootInUnitInterval):
        solve_dimension(DimensionProblem([[None, None], [None, None]], 3))


def test_expanding_entries_rejected():
    with pytest.raises(HypothesisViolation):
        DimensionProblem([[0]], 3)
    with pytest.raises(HypothesisViolation):
        DimensionProblem([[-1]], 3)


def test_witness_polynomial_by_hand():
    # (1 - t)(1 - t^2) - t * t^3
    prob = DimensionProblem([[1, 1], [3, 2]], 3)
    assert witness_polynomial(prob) == Poly([1, -1, -1, 1]) - Poly([0, 0, 0, 0, 1])


def test_report_orientation():
    js = solve_dimension(DimensionProblem.full_shift(2, 1, 3)).to_json()
    assert js["witness_Q_t"] == [1, -2]
    assert js["lambda_exact"] == "2"
    assert "log(lambda)/log(p)" in js["orientation"]


valuation_matrices = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.one_of(st.none(), st.integers(1, 3)), min_size=n, max_size=n),
                       min_size=n, max_size=n))


@settings(max_examples=100)
@given(valuation_matrices, st.sampled_from([2, 3, 5]))
def test_monotone_and_witnessed(V, p):
    prob = DimensionProblem(V, p)
    if not any(any(row) for row in prob.mask):
        with pytest.raises(NoRootInUnitInterval):
            solve_dimension(prob)
        return
    if not is_irreducible(prob.mask):
        with pytest.raises(Reducible):
            solve_dimension(prob)
        return
    if spectral_radius(prob.matrix(0.0)) > 1 + 1e-9:
        assert monotone_on_grid(prob, [0.25 * i for i in range(10)])
    res = solve_dimension(prob)
    assert res.beta >= 0
    assert res.witness_residual <= 1e-9
    assert all(c.denominator == 1 for c in res.witness.coeffs)
    assert abs(spectral_radius(prob.matrix(res.beta)) - 1) <= 1e-9


def test_nearly_equal_moduli():
    # at large beta all three eigenvalues of A(beta) have almost the same modulus
    prob = DimensionProblem([[1, None, 3], [1, None, 1], [None, 1, None]], 3)
    for beta in (8.0, 16.0, 36.0):
        A = prob.matrix(beta)
        assert spectral_radius(A) == pytest.approx(max(abs(np.linalg.eigvals(A))), rel=1e-6)
    res = solve_dimension(prob)
    assert res.witness_residual <= 1e-9
