"""Solids with the three capabilities the cutting-plane machinery needs.

Every domain answers strict interior membership, produces a separating vector
for outside points, and maximizes linear functions (support function with a
maximizer).  Boundary points count as non-interior, so a separator is returned
for them.  Tie-breaking is always by smallest index to keep runs deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .numerics import as_matrix, as_vector, holder_conjugate, norm


class DimensionMismatch(ValueError):
    """Query point dimension does not match the domain."""


class UnsupportedOperation(NotImplementedError):
    """The domain variant has no implementation for the requested operation."""


@dataclass(frozen=True)
class Separator:
    """A nonzero vector e with <e, y - x'> <= 0 for every y in the domain."""

    direction: np.ndarray


class Support(NamedTuple):
    value: float
    maximizer: np.ndarray


class Domain:
    """Base class; concrete variants fill in the four capabilities."""

    dim: int

    def contains_interior(self, x) -> bool:
        raise NotImplementedError

    def separate(self, x) -> Separator | None:
        raise NotImplementedError

    def support(self, g) -> Support:
        raise NotImplementedError

    def inscribed_radius(self) -> float:
        raise UnsupportedOperation(f"{type(self).__name__} has no inscribed radius")

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Componentwise [lower, upper] hull derived from the support function."""
        lower = np.empty(self.dim)
        upper = np.empty(self.dim)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = 1.0
            upper[i] = self.support(e).value
            lower[i] = -self.support(-e).value
        return lower, upper

    def _check(self, x) -> np.ndarray:
        v = np.asarray(x, dtype=float)
        if v.ndim != 1 or v.shape[0] != self.dim:
            raise DimensionMismatch(
                f"point of shape {v.shape} against domain of dimension {self.dim}"
            )
        return v


class EuclideanBall(Domain):
    def __init__(self, center, radius: float):
        self.center = as_vector(center)
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.dim = self.center.shape[0]

    def contains_interior(self, x) -> bool:
        x = self._check(x)
        return float(np.linalg.norm(x - self.center)) < self.radius

    def separate(self, x) -> Separator | None:
        x = self._check(x)
        if self.contains_interior(x):
            return None
        d = x - self.center
        return Separator(d / np.linalg.norm(d))

    def support(self, g) -> Support:
        g = self._check(g)
        gn = float(np.linalg.norm(g))
        if gn == 0.0:
            return Support(float(g @ self.center), self.center.copy())
        return Support(float(g @ self.center) + self.radius * gn,
                       self.center + self.radius * g / gn)

    def inscribed_radius(self) -> float:
        return self.radius


class Box(Domain):
    def __init__(self, lower, upper):
        self.lower = as_vector(lower)
        self.upper = as_vector(upper, dim=self.lower.shape[0])
        if not np.all(self.lower < self.upper):
            raise ValueError("box requires lower < upper componentwise")
        self.dim = self.lower.shape[0]

    def contains_interior(self, x) -> bool:
        x = self._check(x)
        return bool(np.all(x > self.lower) and np.all(x < self.upper))

    def separate(self, x) -> Separator | None:
        x = self._check(x)
        if self.contains_interior(x):
            return None
        best = -math.inf
        best_dir = None
        for i in range(self.dim):
            for violation, sign in ((x[i] - self.upper[i], 1.0),
                                    (self.lower[i] - x[i], -1.0)):
                if violation > best:
                    best = violation
                    e = np.zeros(self.dim)
                    e[i] = sign
                    best_dir = e
        return Separator(best_dir)

    def support(self, g) -> Support:
        g = self._check(g)
        maximizer = np.where(g > 0, self.upper, self.lower)
        return Support(float(g @ maximizer), maximizer)

    def inscribed_radius(self) -> float:
        return float(np.min(self.upper - self.lower)) / 2.0


class NonnegPCap(Domain):
    """The set {x >= 0 : ||x||_p <= cap}.

    Separation follows the two-case construction: a flipped coordinate vector
    for violated nonnegativity, otherwise the vector that turns Hoelder's
    inequality into an equality.  Both use q = p/(p-1), the conjugate exponent
    with 1/p + 1/q = 1, which is what makes ||a||_q = 1 hold.
    """

    def __init__(self, p: float, cap: float, dim: int):
        if p < 1:
            raise ValueError("p must be >= 1")
        if cap <= 0:
            raise ValueError("cap must be positive")
        self.p = float(p)
        self.q = holder_conjugate(self.p)
        self.cap = float(cap)
        self.dim = int(dim)
        self._inscribed: float | None = None

    def contains_interior(self, x) -> bool:
        x = self._check(x)
        return bool(np.all(x > 0)) and norm(x, self.p) < self.cap

    def separate(self, x) -> Separator | None:
        x = self._check(x)
        if self.contains_interior(x):
            return None
        nonpos = np.nonzero(x <= 0)[0]
        if nonpos.size:
            e = np.zeros(self.dim)
            e[nonpos[0]] = -1.0
            return Separator(e)
        # All coordinates positive, so the p-norm cap is (weakly) violated.
        if self.p == 1:
            return Separator(np.ones(self.dim))
        if math.isinf(self.p):
            e = np.zeros(self.dim)
            e[int(np.argmax(x))] = 1.0
            return Separator(e)
        t = x / norm(x, self.p)
        return Separator(t ** (self.p - 1.0))

    def support(self, g) -> Support:
        g = self._check(g)
        gp = np.maximum(g, 0.0)
        if not np.any(gp > 0):
            return Support(0.0, np.zeros(self.dim))
        value = self.cap * norm(gp, self.q)
        if self.p == 1:
            maximizer = np.zeros(self.dim)
            maximizer[int(np.argmax(gp))] = self.cap
        elif math.isinf(self.p):
            maximizer = np.where(gp > 0, self.cap, 0.0)
        else:
            u = gp / norm(gp, self.q)
            maximizer = self.cap * u ** (self.q - 1.0)
        return Support(value, maximizer)

    def inscribed_radius(self) -> float:
        """Radius of the largest ball centered on the diagonal, by bisection.

        This is a lower bound on the true inscribed radius (the containment
        test bounds the p-norm via the triangle inequality), which keeps every
        bound that grows with the radius on the conservative side.
        """
        if self._inscribed is not None:
            return self._inscribed
        n = self.dim
        if math.isinf(self.p):
            diag_scale = 1.0
            ball_growth = 1.0
        else:
            diag_scale = n ** (1.0 / self.p)
            ball_growth = n ** max(0.0, 1.0 / self.p - 0.5)

        def fits(s: float) -> bool:
            # Ball of radius s centered at t*1 fits iff some t >= s keeps the
            # (triangle-inequality) p-norm bound under the cap.
            t_hi = (self.cap - s * ball_growth) / diag_scale
            return s <= t_hi

        lo, hi = 0.0, self.cap
        while hi - lo > 1e-8:
            mid = (lo + hi) / 2.0
            if fits(mid):
                lo = mid
            else:
                hi = mid
        self._inscribed = lo
        return lo


class Polytope(Domain):
    """Intersection {x : A x <= b}; an interior point is required up front.

    Boundedness is taken on trust from the caller.  The support function runs
    a small LP, so it costs more than the closed-form variants.
    """

    def __init__(self, a, b, interior_point):
        self.a = as_matrix(a)
        self.b = as_vector(b, dim=self.a.shape[0])
        self.dim = self.a.shape[1]
        pt = as_vector(interior_point, dim=self.dim)
        if not np.all(self.a @ pt < self.b):
            raise ValueError("supplied point is not strictly interior")
        self.interior_point = pt

    def contains_interior(self, x) -> bool:
        x = self._check(x)
        return bool(np.all(self.a @ x < self.b))

    def separate(self, x) -> Separator | None:
        x = self._check(x)
        slack = self.b - self.a @ x
        if np.all(slack > 0):
            return None
        worst = int(np.argmin(slack))
        return Separator(self.a[worst].copy())

    def support(self, g) -> Support:
        g = self._check(g)
        from . import lp_solver

        value, point = lp_solver.max_linear_over_polytope(self.a, self.b, g)
        return Support(value, point)
