"""First-order oracles.

Two concrete oracles are provided: the max-plus-quadratic benchmark objective
(exact, so its accuracy parameter is zero) and a Lagrange-dual oracle that
wraps a user-supplied inner solver, returning the negated Lagrangian value,
the negated constraint map as an approximate subgradient, and the inner
minimizer as a payload for later primal recovery.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .numerics import as_vector, cholesky_solve


class InnerSolverFailure(RuntimeError):
    """The inner solver could not certify the requested accuracy."""


class IterationLimit(InnerSolverFailure):
    """Projected-gradient iterations ran out before the gap target was met."""


@dataclass(frozen=True)
class DeltaOracleOutput:
    value: float
    subgradient: np.ndarray
    payload: np.ndarray | None = None


def benchmark_oracle(x, mu: float) -> DeltaOracleOutput:
    """Exact oracle for F(x) = max_i x_i + (mu/2) ||x||^2.

    The subgradient is e_{i*} + mu x with i* the smallest index attaining the
    max, so repeated runs are reproducible.
    """
    x = as_vector(x)
    if mu <= 0:
        raise ValueError("mu must be positive")
    i_star = int(np.argmax(x))
    value = float(x[i_star]) + 0.5 * mu * float(x @ x)
    subgradient = mu * x
    subgradient[i_star] += 1.0
    return DeltaOracleOutput(value=value, subgradient=subgradient)


def make_benchmark_oracle(mu: float) -> Callable[[np.ndarray], DeltaOracleOutput]:
    return lambda x: benchmark_oracle(x, mu)


@dataclass(frozen=True)
class DualProblem:
    """min f(u) s.t. g(u) <= 0, u in U, approached through its Lagrange dual.

    ``inner_solver(x)`` must return a point u_x in U whose Lagrangian value
    phi(u_x, x) = f(u_x) + <x, g(u_x)> exceeds the inner minimum by at most
    ``delta``.  ``p_norm`` and ``bound`` describe the dual domain
    {x >= 0 : ||x||_p <= bound + 1}.
    """

    f: Callable[[np.ndarray], float]
    g: Callable[[np.ndarray], np.ndarray]
    inner_solver: Callable[[np.ndarray], np.ndarray]
    delta: float
    p_norm: float
    bound: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.bound <= 0:
            raise ValueError("the dual norm bound must be positive")


def dual_oracle(problem: DualProblem, x) -> DeltaOracleOutput:
    """Delta-oracle for the dual objective F(x) = -min_u phi(u, x)."""
    x = as_vector(x)
    u_x = as_vector(problem.inner_solver(x))
    g_val = as_vector(problem.g(u_x))
    phi = float(problem.f(u_x)) + float(x @ g_val)
    return DeltaOracleOutput(value=-phi, subgradient=-g_val, payload=u_x)


@dataclass(frozen=True)
class QuadraticInnerProblem:
    """f(u) = 0.5 u^T P u + c^T u + c0,  g(u) = C u - d,  U = [lower, upper].

    ``lower``/``upper`` may be None for an unconstrained inner problem.
    """

    quad: np.ndarray
    lin: np.ndarray
    const: float
    cons_matrix: np.ndarray
    cons_rhs: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def f(self, u) -> float:
        u = as_vector(u)
        return 0.5 * float(u @ self.quad @ u) + float(self.lin @ u) + self.const

    def g(self, u) -> np.ndarray:
        return self.cons_matrix @ as_vector(u) - self.cons_rhs


def reference_inner_solver(problem: QuadraticInnerProblem, x, delta: float,
                           max_iterations: int = 200000) -> np.ndarray:
    """Minimize phi(u, x) over the box to certified accuracy delta.

    Unconstrained problems are solved in closed form.  Box-constrained ones run
    projected gradient with step 1/L and stop once the exact linearization gap
    over the box (a duality-gap surrogate) certifies the target accuracy.
    """
    x = as_vector(x)
    q = problem.lin + problem.cons_matrix.T @ x
    if problem.lower is None or problem.upper is None:
        return cholesky_solve(problem.quad, -q)
    lower = as_vector(problem.lower)
    upper = as_vector(problem.upper, dim=lower.shape[0])
    lipschitz = float(np.max(np.linalg.eigvalsh(problem.quad)))
    if lipschitz <= 0:
        raise InnerSolverFailure("inner quadratic is not convex")

    u = np.clip(-q / np.maximum(np.diag(problem.quad), 1e-12), lower, upper)
    for _ in range(max_iterations):
        grad = problem.quad @ u + q
        gap = float(np.sum(np.where(grad > 0, grad * (u - lower), grad * (u - upper))))
        if gap <= delta:
            return u
        u = np.clip(u - grad / lipschitz, lower, upper)
    raise IterationLimit(f"gap target {delta:.3e} not reached "
                         f"in {max_iterations} iterations")


def quadratic_dual_problem(problem: QuadraticInnerProblem, delta: float,
                           p_norm: float, bound: float) -> DualProblem:
    """Wire a quadratic inner problem into a DualProblem with the reference solver."""
    return DualProblem(f=problem.f,
                       g=problem.g,
                       inner_solver=lambda x: reference_inner_solver(problem, x, delta),
                       delta=delta,
                       p_norm=p_norm,
                       bound=bound)
