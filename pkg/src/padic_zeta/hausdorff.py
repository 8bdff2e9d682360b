"""Hausdorff dimension of a hyperbolic Julia set from its Markov data.

The inverse branch for a transition i -> j contracts by p^(-V[i][j]), so
the weight |h'|^beta gives the matrix A(beta)[i][j] = alpha^(beta V[i][j])
with alpha = 1/p.  The dimension is the beta at which the Perron root of
A(beta) equals 1.  The exact witness Q(t) = det(I - A(t)), A(t)[i][j] =
t^V[i][j], is an integer polynomial vanishing at t* = alpha^beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import berkowitz
from .errors import HypothesisViolation, NoRootInUnitInterval, NonConvergence, Reducible
from .markov import MarkovPartition
from .poly import Poly, rational_roots, squarefree_part

TOL = 1e-12
WITNESS_TOL = 1e-9
MAX_ITER = 200_000


@dataclass
class DimensionProblem:
    """``valuation_matrix[i][j]`` is None where the transition is forbidden."""

    valuation_matrix: list[list[int | None]]
    prime: int

    def __post_init__(self):
        for i, row in enumerate(self.valuation_matrix):
            if len(row) != len(self.valuation_matrix):
                raise ValueError("valuation matrix must be square")
            for j, v in enumerate(row):
                if v is not None and (not isinstance(v, int) or v < 1):
                    raise HypothesisViolation(
                        f"V[{i}][{j}] = {v}: inverse branches must contract (integer valuation >= 1)")

    @property
    def alpha(self) -> float:
        return 1.0 / self.prime

    @property
    def size(self) -> int:
        return len(self.valuation_matrix)

    @property
    def mask(self) -> list[list[bool]]:
        return [[v is not None for v in row] for row in self.valuation_matrix]

    def matrix(self, beta: float) -> np.ndarray:
        a = self.alpha
        return np.array([[0.0 if v is None else a ** (beta * v) for v in row]
                         for row in self.valuation_matrix])

    @classmethod
    def from_partition(cls, partition: MarkovPartition) -> DimensionProblem:
        """V[i][j] = -v_i: the branch D_j -> D_i undoes the expansion of f on D_i."""
        V = [[-partition.derivative_valuations[i] if t else None for t in row]
             for i, row in enumerate(partition.transition)]
        return cls(V, partition.ctx.prime)

    @classmethod
    def full_shift(cls, k: int, v: int, prime: int) -> DimensionProblem:
        return cls([[v] * k for _ in range(k)], prime)

    def to_json(self) -> dict:
        return {"prime": self.prime, "valuation_matrix": self.valuation_matrix}


def spectral_radius(A, tol: float = TOL, max_iter: int = MAX_ITER) -> float:
    """Perron root of a nonnegative matrix.

    Power iteration on A + cI, which shares the Perron vector and is
    aperiodic for c > 0.  The Collatz-Wielandt bounds
    min (Ax)_i/x_i <= rho(A) <= max (Ax)_i/x_i hold for every positive x,
    so the shift c can follow the current estimate of rho(A); that keeps
    the convergence rate independent of the scale of A.  The iteration is
    warm-started from the LAPACK eigenvector of the eigenvalue with largest
    real part (the Perron root), which matters when several eigenvalues
    have almost the same modulus; the returned value is still only
    accepted once the bounds certify it.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("square matrix expected")
    if (A < 0).any():
        raise ValueError("matrix must be nonnegative")
    n = A.shape[0]
    if n == 0:
        return 0.0
    c = A.sum(axis=1).max()
    if c == 0:
        return 0.0
    x = _perron_guess(A)
    for _ in range(max_iter):
        ax = A @ x
        ratios = ax / x
        lo, hi = ratios.min(), ratios.max()
        if hi - lo <= tol:
            return float((lo + hi) / 2)
        c = max((lo + hi) / 2, tol)
        y = ax + c * x
        x = y / np.linalg.norm(y)
    raise NonConvergence(f"power iteration did not converge in {max_iter} steps")


def _perron_guess(A: np.ndarray) -> np.ndarray:
    w, vecs = np.linalg.eig(A)
    x = np.abs(vecs[:, int(np.argmax(w.real))].real)
    if not (x > 0).all() or not np.isfinite(x).all():
        return np.ones(A.shape[0])
    return x / np.linalg.norm(x)


def is_irreducible(mask: list[list[bool]]) -> bool:
    n = len(mask)
    if n == 0:
        return False

    def reach(adj):
        seen, stack = {0}, [0]
        while stack:
            i = stack.pop()
            for j in range(n):
                if adj(i, j) and j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == n

    return reach(lambda i, j: mask[i][j]) and reach(lambda i, j: mask[j][i])


def witness_polynomial(prob: DimensionProblem) -> Poly:
    """Q(t) = det(I - A(t)) with A(t)[i][j] = t^V[i][j], exactly."""
    A = [[Poly() if v is None else Poly([0] * v + [1]) for v in row] for row in prob.valuation_matrix]
    q = berkowitz(A, Poly([1]), Poly())
    # det(xI - A) = sum_k q_k x^(n-k); put x = 1
    total = Poly()
    for c in q:
        total = total + c
    return total


def _integral(poly: Poly) -> list[int]:
    den = math.lcm(*(c.denominator for c in poly.coeffs)) if poly.coeffs else 1
    ints = [int(c * den) for c in poly.coeffs]
    g = math.gcd(*ints) or 1
    if ints and ints[-1] < 0:
        g = -g
    return [c // g for c in ints]


def _horner(coeffs, x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + float(c)
    return acc


@dataclass
class DimensionResult:
    beta: float
    lam: float
    t_star: float
    witness: Poly
    lambda_min_poly: Poly
    lambda_exact: Fraction | None
    witness_residual: float
    prime: int
    notes: list[str] = field(default_factory=list)

    def __iter__(self):
        yield self.beta
        yield self.lam
        yield self.lambda_min_poly

    def to_json(self) -> dict:
        return {
            "beta": f"{self.beta:.12f}",
            "lambda": f"{self.lam:.12f}",
            "lambda_exact": None if self.lambda_exact is None else str(self.lambda_exact),
            "t_star": f"{self.t_star:.12f}",
            "witness_Q_t": [int(c) for c in self.witness.coeffs],
            "witness_Q_t_text": self.witness.format("t"),
            "lambda_min_poly": _integral(self.lambda_min_poly),
            "lambda_min_poly_text": self.lambda_min_poly.format("x"),
            "witness_residual": f"{self.witness_residual:.3e}",
            "dimension_log_lambda_over_log_p": f"{self.beta:.12f}",
            "orientation": (
                f"dim = log(lambda)/log(p) with lambda = 1/t*; equivalently "
                f"log(t*)/log(alpha) with alpha = 1/{self.prime}, both equal to beta"
            ),
            "notes": self.notes,
        }


def _lambda_factor(Q: Poly, t_star: float) -> tuple[Poly, Fraction | None]:
    """The squarefree part of Q with rational factors not vanishing at t* removed, in the variable lambda = 1/t."""
    sq = squarefree_part(Q)
    exact_t = None
    for r in rational_roots(sq):
        if abs(float(r) - t_star) <= 1e-9:
            exact_t = r
        else:
            sq = sq // Poly([-r, 1])
    if exact_t is not None:
        sq = Poly([-exact_t, 1])
    lam_poly = sq.reverse()
    lam_exact = None if exact_t is None else 1 / exact_t
    return Poly([Fraction(c) for c in _integral(lam_poly)]), lam_exact


def solve_dimension(prob: DimensionProblem, tol: float = TOL) -> DimensionResult:
    if not any(any(row) for row in prob.mask):
        raise NoRootInUnitInterval("no allowed transitions: the Julia data is empty")
    if not is_irreducible(prob.mask):
        raise Reducible("transition matrix is reducible; solve each irreducible component")
    Q = witness_polynomial(prob)
    rho0 = spectral_radius(prob.matrix(0.0))
    notes = []
    if rho0 <= 1 + tol:
        # a single cycle: finitely many points, dimension zero
        beta = 0.0
        notes.append("rho(A(0)) = 1: the subshift is a single periodic orbit")
    else:
        lo, hi = 0.0, float(prob.size * max(v for row in prob.valuation_matrix for v in row if v is not None))
        while spectral_radius(prob.matrix(hi)) >= 1:
            hi *= 2
        while hi - lo > tol:
            mid = (lo + hi) / 2
            if spectral_radius(prob.matrix(mid)) > 1:
                lo = mid
            else:
                hi = mid
        beta = (lo + hi) / 2
    t_star = prob.alpha ** beta
    residual = abs(_horner(Q.coeffs, t_star))
    if not 0 < t_star <= 1:
        raise NoRootInUnitInterval(f"t* = {t_star} is outside (0, 1]")
    lam_poly, lam_exact = _lambda_factor(Q, t_star)
    return DimensionResult(
        beta=beta,
        lam=1 / t_star,
        t_star=t_star,
        witness=Q,
        lambda_min_poly=lam_poly,
        lambda_exact=lam_exact,
        witness_residual=residual,
        prime=prob.prime,
        notes=notes,
    )


def monotone_on_grid(prob: DimensionProblem, betas) -> bool:
    rhos = [spectral_radius(prob.matrix(b)) for b in betas]
    return all(a > b for a, b in zip(rhos, rhos[1:]))


__all__ = [
    "DimensionProblem",
    "DimensionResult",
    "is_irreducible",
    "monotone_on_grid",
    "solve_dimension",
    "spectral_radius",
    "witness_polynomial",
]
