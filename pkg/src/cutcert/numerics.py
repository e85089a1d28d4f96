"""Dense linear algebra shared by the engines.

Vectors are 1-D float64 ndarrays, matrices are 2-D.  Problem sizes stay small
(n up to ~100, row counts up to ~10n), so everything is dense and tolerances
are expressed relative to input magnitude.
"""

from __future__ import annotations

import math

import numpy as np

SYMMETRY_RTOL = 1e-12
PIVOT_RTOL = 1e-14


class NotPositiveDefinite(ArithmeticError):
    """A Cholesky pivot fell at or below the positive-definiteness floor."""


def as_vector(x, dim: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {v.shape[0]}")
    return v


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def cholesky_solve(h, rhs) -> np.ndarray:
    """Solve H y = rhs for symmetric positive-definite H.

    Accepts a vector or matrix right-hand side.  One step of iterative
    refinement keeps the residual near machine level even for poorly
    conditioned H.  Raises NotPositiveDefinite when a pivot is at or below
    PIVOT_RTOL times the largest diagonal entry.
    """
    h = as_matrix(h)
    n = h.shape[0]
    if h.shape[1] != n:
        raise ValueError(f"matrix is not square: {h.shape}")
    b = np.asarray(rhs, dtype=float)
    if b.shape[0] != n:
        raise ValueError(f"rhs dimension {b.shape[0]} does not match matrix size {n}")
    scale = np.max(np.abs(h))
    if np.max(np.abs(h - h.T)) > SYMMETRY_RTOL * max(1.0, scale):
        raise ValueError("matrix is not symmetric")

    max_diag = float(np.max(np.diag(h))) if n else 0.0
    try:
        factor = np.linalg.cholesky(h)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    pivots = np.diag(factor) ** 2
    if n and np.min(pivots) <= PIVOT_RTOL * max_diag:
        raise NotPositiveDefinite(
            f"pivot {np.min(pivots):.3e} below floor {PIVOT_RTOL * max_diag:.3e}"
        )

    y = np.linalg.solve(h, b)
    y += np.linalg.solve(h, b - h @ y)
    return y


def norm(v, p) -> float:
    """The p-norm of a vector, exact for p in {1, 2, inf} and valid for p >= 1."""
    v = np.asarray(v, dtype=float)
    if p < 1:
        raise ValueError(f"norm exponent must be >= 1, got {p}")
    if math.isinf(p):
        return float(np.max(np.abs(v))) if v.size else 0.0
    if p == 1:
        return float(np.sum(np.abs(v)))
    if p == 2:
        return float(np.linalg.norm(v))
    peak = float(np.max(np.abs(v))) if v.size else 0.0
    if peak == 0.0:
        return 0.0
    scaled = np.abs(v) / peak
    return peak * float(np.sum(scaled**p)) ** (1.0 / p)


def holder_conjugate(p: float) -> float:
    """The exponent q with 1/p + 1/q = 1 (p=1 and p=inf map to each other)."""
    if p < 1:
        raise ValueError(f"exponent must be >= 1, got {p}")
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)
