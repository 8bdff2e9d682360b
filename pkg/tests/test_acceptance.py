"""Acceptance suite: one PASS/FAIL line per criterion, printed at the end of the run.

Run standalone with ``python tests/test_acceptance.py``.
"""

import math
import time
from fractions import Fraction

import pytest

import test_algebra
import test_padic
from conftest import reference_map
from padic_zeta.algebra import FormalSeries, series_log
from padic_zeta.dynamics import RationalMapSpec, fixed_point_polynomial
from padic_zeta.errors import PadicZetaError
from padic_zeta.hausdorff import DimensionProblem, solve_dimension
from padic_zeta.lsy import lsy_verify
from padic_zeta.markov import ChartOrbit, SubhyperbolicChartData, build_partition
from padic_zeta.padic import PadicContext, hensel_lift_roots
from padic_zeta.poly import Poly
from padic_zeta.transfer import (
    correction_factor,
    det_series,
    rational_periodic_trace,
    trace_via_matrix,
    trace_via_periodic_points,
    truncate_operator,
    zeta_series,
)

LSY_ORDER = 4
LSY_SECONDS = 30.0
TRACE_SECONDS = 10.0
DIM_SECONDS = 1.0
TRACE_AGREEMENT = 12
DUALITY_PRECISION = 10
CORRECTION_PRECISION = 10
DIM_TOL = 1e-9

LSY_MAPS = {
    "z^2+1": RationalMapSpec.polynomial([1, 0, 1]),
    "z^2+2": RationalMapSpec.polynomial([2, 0, 1]),
    "z^2+3": RationalMapSpec.polynomial([3, 0, 1]),
    "z^2-1": RationalMapSpec.polynomial([-1, 0, 1]),
    "z^3-3z": RationalMapSpec.polynomial([0, -3, 0, 1]),
}
LSY_ATTAINABLE = ["z^2+1", "z^2+2", "z^2+3", "z^3-3z"]


def record(log, k, name, ok, detail):
    log.append(f"C{k} {'PASS' if ok else 'FAIL'}  {name}: {detail}")


def lsy_outcome(name):
    start = time.perf_counter()
    try:
        rep = lsy_verify(LSY_MAPS[name], LSY_ORDER)
    except PadicZetaError as exc:
        return False, f"{type(exc).__name__}({exc})"
    elapsed = time.perf_counter() - start
    ok = rep.verified and rep.max_matching_order == LSY_ORDER and all(d == 0 for d in rep.deltas)
    ok = ok and elapsed < LSY_SECONDS and rep.oracle_matches.get(rep.convention, False)
    return ok, f"order {rep.max_matching_order}, {rep.convention}, {elapsed:.2f}s"


@pytest.mark.parametrize("name", LSY_ATTAINABLE)
def test_criterion_1_attainable_maps(name):
    ok, detail = lsy_outcome(name)
    assert ok, detail


@pytest.mark.xfail(strict=True, reason="z^2 - 1 has a periodic critical point (0 -> -1 -> 0); "
                                       "the identity's critical-orbit terms are undefined")
def test_criterion_1_lsy(acceptance_log):
    results = {name: lsy_outcome(name) for name in LSY_MAPS}
    ok = all(r[0] for r in results.values())
    failed = [f"{n}: {d}" for n, (good, d) in results.items() if not good]
    detail = "all maps exact to order 4" if ok else "; ".join(failed)
    record(acceptance_log, 1, "determinant identity", ok, detail)
    assert ok, detail


def test_criterion_2_trace_formula(acceptance_log):
    start = time.perf_counter()
    f = reference_map(3)
    P = build_partition(f, PadicContext(3, 40), 1)
    L = truncate_operator(f, P, M=15)
    worst = math.inf
    for n in range(1, 6):
        d = trace_via_matrix(L, n) - trace_via_periodic_points(f, P, n=n)
        worst = min(worst, d.valuation_lower_bound())
    exact = rational_periodic_trace(f, P, n=1)
    elapsed = time.perf_counter() - start
    ok = worst >= TRACE_AGREEMENT and exact == 2 and elapsed < TRACE_SECONDS
    record(acceptance_log, 2, "trace formula", ok,
           f"min v_3(delta) = {worst} (need {TRACE_AGREEMENT}), n=1 trace {exact}, {elapsed:.2f}s")
    assert ok


def test_criterion_3_duality_and_stability(acceptance_log):
    f = reference_map(3)
    P = build_partition(f, PadicContext(3, 50), 1)
    ops = {M: truncate_operator(f, P, M=M) for M in (10, 15, 20)}
    L = ops[15]
    traces = [trace_via_matrix(L, n) for n in range(1, 6)]
    prod = zeta_series(traces, 5) * det_series(L, 5)
    one = FormalSeries.one(5, P.ctx)
    duality = min((prod[k] - one[k]).valuation_lower_bound() for k in range(6))
    dets = {M: det_series(op, 5) for M, op in ops.items()}
    stable = all((dets[20][k] - dets[M][k]).valuation_lower_bound() >= M + 1
                 for M in (10, 15) for k in range(6))
    ok = duality >= DUALITY_PRECISION and stable
    record(acceptance_log, 3, "determinant-zeta duality", ok,
           f"zeta*det - 1 has valuation >= {duality}; truncation stability {'holds' if stable else 'fails'}")
    assert ok


def test_criterion_4_entirety(acceptance_log):
    f = reference_map(3)
    P = build_partition(f, PadicContext(3, 60), 1)
    oracle = det_series(truncate_operator(f, P, M=24), 10)
    pinned = det_series(truncate_operator(f, P, M=15), 10)
    vals = [oracle[k].valuation_lower_bound() for k in range(4, 11)]
    pinned_vals = [pinned[k].valuation_lower_bound() for k in range(4, 11)]
    ok = all(v >= k for v, k in zip(vals, range(4, 11))) and all(v >= k for v, k in zip(pinned_vals, range(4, 11)))
    record(acceptance_log, 4, "entirety fingerprint", ok,
           f"v_3(c_k) >= {min(pinned_vals)} for 4 <= k <= 10 at M = 15 (M = 24 oracle: >= {min(vals)})")
    assert ok


def test_criterion_5_correction_factor(acceptance_log):
    ctx = PadicContext(3, 60)
    num, den = correction_factor(SubhyperbolicChartData(ctx), N_z=4)
    empty_ok = num == FormalSeries.one(4, ctx) and den == FormalSeries.one(4, ctx)
    lam = Fraction(7, 3)
    orb = ChartOrbit(ctx(4), 1, ctx(lam), ctx(1))
    J = 16
    _, den = correction_factor(SubhyperbolicChartData(ctx, exceptional=[orb]), beta=0, J=J, N_z=4)
    log_factor = -series_log(den)
    worst = math.inf
    for n in range(1, 5):
        display = sum(lam ** (-n * j) for j in range(J + 1)) / n
        worst = min(worst, (log_factor[n] - ctx(display)).valuation_lower_bound())
    ok = empty_ok and worst >= CORRECTION_PRECISION
    record(acceptance_log, 5, "subhyperbolic correction", ok,
           f"empty charts give (1, 1): {empty_ok}; log-factor agreement valuation >= {worst}")
    assert ok


def test_criterion_6_markov(acceptance_log):
    details, ok = [], True
    for p in (3, 5):
        f = reference_map(p)
        ctx = PadicContext(p, 40)
        P = build_partition(f, ctx, 1)
        shape = (P.size == 2 and P.transition == [[True, True], [True, True]]
                 and P.derivative_valuations == [-1, -1])
        counts = []
        for n in range(1, 6):
            roots = [r for r in hensel_lift_roots(fixed_point_polynomial(f, n), ctx) if P.block_of(r) is not None]
            counts.append(len(roots) == P.loop_count(n) == 2**n)
        ok &= shape and all(counts)
        details.append(f"p={p}: full 2-shift {shape}, counts 2^n for n<=5 {all(counts)}")
    record(acceptance_log, 6, "Markov partition", ok, "; ".join(details))
    assert ok


def test_criterion_7_dimension(acceptance_log):
    start = time.perf_counter()
    P = build_partition(reference_map(3), PadicContext(3, 20), 1)
    res = solve_dimension(DimensionProblem.from_partition(P))
    ref_ok = (abs(res.beta - math.log(2) / math.log(3)) <= DIM_TOL and res.lambda_exact == 2
              and res.witness == Poly([1, -2]))
    closed = []
    for k, v, p in [(2, 1, 5), (3, 1, 5)]:
        r = solve_dimension(DimensionProblem.full_shift(k, v, p))
        closed.append(abs(r.beta - math.log(k) / (v * math.log(p))) <= DIM_TOL)
    elapsed = time.perf_counter() - start
    ok = ref_ok and all(closed) and elapsed < DIM_SECONDS
    record(acceptance_log, 7, "Hausdorff dimension", ok,
           f"beta = {res.beta:.12f}, lambda = {res.lambda_exact}, Q = {res.witness.format('t')}, "
           f"closed forms {all(closed)}, {elapsed:.3f}s")
    assert ok


def test_criterion_8_property_suites(acceptance_log):
    failures = []
    suites = test_padic.PROPERTY_SUITE + test_algebra.PROPERTY_SUITE
    for prop in suites:
        try:
            prop()
        except Exception as exc:  # report every failing property, not just the first
            failures.append(f"{prop.__name__}: {type(exc).__name__}")
    ok = not failures and test_padic.CASES == test_algebra.CASES == 1000
    record(acceptance_log, 8, "arithmetic substrate", ok,
           f"{len(suites) - len(failures)}/{len(suites)} property suites at 1000 cases" +
           (f"; failing {failures}" if failures else ""))
    assert ok


if __name__ == "__main__":
    import sys
    from pathlib import Path

    sys.exit(pytest.main([str(Path(__file__)), "-q", "-p", "no:cacheprovider"]))
