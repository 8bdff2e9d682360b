"""Walk through the reference map f(z) = (z^2 - z)/3 over Q_3.

Builds the Markov partition, compares the two trace computations, prints
the Fredholm determinant and zeta series, and solves for the Hausdorff
dimension of the Julia set.
"""

import math
from fractions import Fraction

from padic_zeta.dynamics import RationalMapSpec
from padic_zeta.hausdorff import DimensionProblem, solve_dimension
from padic_zeta.markov import build_partition, verify_markov
from padic_zeta.padic import PadicContext
from padic_zeta.transfer import (
    det_series,
    trace_via_matrix,
    trace_via_periodic_points,
    truncate_operator,
    zeta_series,
)


def balanced(x, k: int) -> int:
    """Representative of a 3-adic integer modulo 3^k in (-3^k/2, 3^k/2]."""
    m = 3**k
    q = x.to_rational()
    r = q.numerator * pow(q.denominator, -1, m) % m
    return r - m if r > m // 2 else r


def main(M: int = 15, N_z: int = 5):
    ctx = PadicContext(3, 40)
    f = RationalMapSpec.polynomial([0, Fraction(-1, 3), Fraction(1, 3)])
    P = build_partition(f, ctx, level=1)
    print("blocks:", [str(b) for b in P.blocks])
    print("transition:", [[int(t) for t in row] for row in P.transition])
    print("v_p(f') per block:", P.derivative_valuations)
    print("partition verifies:", verify_markov(f, P).ok)

    L = truncate_operator(f, P, M=M)
    traces = []
    for n in range(1, N_z + 1):
        a = trace_via_matrix(L, n)
        b = trace_via_periodic_points(f, P, n=n)
        traces.append(a)
        print(f"n={n}: matrix trace {balanced(a, M)} mod 3^{M}, periodic sum {b.to_rational()}, "
              f"v_3(delta) >= {(a - b).valuation_lower_bound()}")

    det = det_series(L, N_z)
    zeta = zeta_series(traces, N_z)
    print(f"det(I - zL) mod 3^{M}:", [balanced(c, M) for c in det.coeffs])
    print(f"zeta mod 3^{M}:", [balanced(c, M) for c in zeta.coeffs])

    res = solve_dimension(DimensionProblem.from_partition(P))
    print(f"Hausdorff dimension {res.beta:.12f} (log 2/log 3 = {math.log(2) / math.log(3):.12f}), "
          f"lambda = {res.lambda_exact}, Q(t) = {res.witness.format('t')}")


if __name__ == "__main__":
    main()
