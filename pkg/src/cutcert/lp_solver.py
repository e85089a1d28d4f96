"""Dense LP solving for certificate problems and small auxiliary maximizations.

The core is a bounded-variable two-phase revised simplex with Dantzig pricing
that falls back to Bland's rule after a degeneracy streak.  Basic values and
duals are recomputed from fresh factorizations every pivot, trading speed for
the near-machine-precision feasibility the certificate checks rely on.  An
optional relative-accuracy stop returns early once a repaired dual point
certifies that the incumbent is within a factor (1 - alpha) of the optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import as_matrix, as_vector

REDUCED_COST_TOL = 1e-9
RATIO_TOL = 1e-10
DEGENERATE_STREAK = 20
FEASIBILITY_TOL = 1e-7

OPTIMAL = "optimal"
ALPHA_APPROXIMATE = "alpha_approximate"
ITERATION_LIMIT = "iteration_limit"


class Unbounded(RuntimeError):
    """The objective is unbounded over the feasible set."""


class Infeasible(RuntimeError):
    """No point satisfies the constraints."""


@dataclass(frozen=True)
class LpInstance:
    """maximize objective @ lam  s.t.  eq_matrix @ lam = eq_rhs,
    interval_lo <= interval_vec @ lam <= interval_hi,  lam >= 0."""

    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    interval_vec: np.ndarray
    interval_lo: float = 0.0
    interval_hi: float = 2.0


@dataclass(frozen=True)
class LpSolution:
    lam: np.ndarray
    value: float
    status: str
    alpha: float = 0.0


class _Simplex:
    """Bounded-variable revised simplex over  A z = b,  lo <= z <= hi."""

    def __init__(self, a, b, lo, hi):
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        self.rows, self.cols = self.a.shape
        # Nonbasic starting values: a finite bound when one exists, else 0.
        self.val = np.where(np.isfinite(self.lo), self.lo,
                            np.where(np.isfinite(self.hi), self.hi, 0.0))
        self.basis: list[int] = []

    def add_artificials(self):
        residual = self.b - self.a @ self.val
        signs = np.where(residual >= 0, 1.0, -1.0)
        self.a = np.hstack([self.a, np.diag(signs)])
        self.lo = np.concatenate([self.lo, np.zeros(self.rows)])
        self.hi = np.concatenate([self.hi, np.full(self.rows, math.inf)])
        self.val = np.concatenate([self.val, np.abs(residual)])
        self.basis = list(range(self.cols, self.cols + self.rows))
        self.n_art = self.rows

    def freeze_artificials(self):
        self.hi[self.cols:] = 0.0

    def _refresh(self, c):
        basis = self.basis
        bmat = self.a[:, basis]
        nb = np.ones(self.a.shape[1], dtype=bool)
        nb[basis] = False
        rhs = self.b - self.a[:, nb] @ self.val[nb]
        try:
            self.val[basis] = np.linalg.solve(bmat, rhs)
            y = np.linalg.solve(bmat.T, c[basis])
        except np.linalg.LinAlgError as exc:
            raise RuntimeError("simplex basis became singular") from exc
        return y

    def run(self, c, pivot_limit, stop_check=None):
        """Maximize c @ z.  Returns (status, pivots_used)."""
        pivots = 0
        streak = 0
        ncols = self.a.shape[1]
        while True:
            y = self._refresh(c)
            reduced = c - self.a.T @ y
            movable = self.hi - self.lo > 0
            basic_mask = np.zeros(ncols, dtype=bool)
            basic_mask[self.basis] = True
            at_lo = ~basic_mask & movable & (self.val <= self.lo + RATIO_TOL)
            at_hi = ~basic_mask & movable & np.isfinite(self.hi) \
                & (self.val >= self.hi - RATIO_TOL)
            free = ~basic_mask & movable & ~at_lo & ~at_hi
            up_ok = (at_lo | free) & (reduced > REDUCED_COST_TOL)
            down_ok = (at_hi | free) & (reduced < -REDUCED_COST_TOL)
            candidates = np.nonzero(up_ok | down_ok)[0]
            if candidates.size == 0:
                return OPTIMAL, pivots
            if stop_check is not None:
                value = float(c @ self.val)
                if stop_check(value, y):
                    return ALPHA_APPROXIMATE, pivots
            if pivots >= pivot_limit:
                return ITERATION_LIMIT, pivots
            if streak < DEGENERATE_STREAK:
                scores = np.abs(reduced[candidates])
                enter = int(candidates[int(np.argmax(scores))])
            else:
                enter = int(candidates[0])  # Bland: smallest index
            sign = 1.0 if up_ok[enter] else -1.0

            direction = np.linalg.solve(self.a[:, self.basis], self.a[:, enter])
            step = self.hi[enter] - self.lo[enter]  # own bound flip distance
            leave_pos = None
            for pos, col in enumerate(self.basis):
                delta = -sign * direction[pos]
                if delta > RATIO_TOL:
                    if not np.isfinite(self.hi[col]):
                        continue
                    room = self.hi[col] - self.val[col]
                elif delta < -RATIO_TOL:
                    if not np.isfinite(self.lo[col]):
                        continue
                    room = self.val[col] - self.lo[col]
                else:
                    continue
                ratio = max(room, 0.0) / abs(delta)
                if ratio < step - RATIO_TOL:
                    step = ratio
                    leave_pos = pos
            if not np.isfinite(step):
                raise Unbounded("improving direction with no blocking bound")

            self.val[enter] += sign * step
            if leave_pos is None:
                pass  # bound flip; basis unchanged
            else:
                leaving = self.basis[leave_pos]
                delta = -sign * direction[leave_pos]
                self.val[leaving] = self.hi[leaving] if delta > 0 else self.lo[leaving]
                self.basis[leave_pos] = enter
            pivots += 1
            streak = streak + 1 if step <= 1e-12 else 0

    def phase_one(self):
        self.add_artificials()
        c1 = np.zeros(self.a.shape[1])
        c1[self.cols:] = -1.0
        limit = 200 + 50 * (self.rows + self.cols)
        status, _ = self.run(c1, limit)
        self._refresh(c1)
        infeas = float(np.sum(self.val[self.cols:]))
        if status != OPTIMAL or infeas > FEASIBILITY_TOL:
            raise Infeasible(f"phase one ended with residual {infeas:.3e}")
        self.freeze_artificials()


def solve(inst: LpInstance, alpha: float = 0.0, pivot_limit: int = 10000) -> LpSolution:
    """Solve a certificate-shaped LP, optionally stopping at relative accuracy alpha.

    The early stop is certified: a dual point repaired from the current basis
    duals provides an upper bound on the optimum, and the solver only returns
    early once the incumbent value reaches (1 - alpha) times that bound.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    c = as_vector(inst.objective)
    eq = as_matrix(inst.eq_matrix)
    rhs = as_vector(inst.eq_rhs, dim=eq.shape[0])
    w = as_vector(inst.interval_vec, dim=c.shape[0])
    m = c.shape[0]
    k = eq.shape[0]
    if eq.shape[1] != m:
        raise ValueError("equality matrix width does not match objective length")
    span = inst.interval_hi - inst.interval_lo
    if span < 0:
        raise ValueError("empty interval")

    # Scale the interval row to O(1) coefficients.  Tight certificates drive
    # the offsets toward zero while the window stays [0, 2], so without this
    # the ratio test on that row degenerates.  Pure row scaling: the feasible
    # lambda set and the returned multipliers are unchanged.
    w_scale = float(np.max(np.abs(w)))
    if w_scale <= 0.0:
        w_scale = 1.0
    w_hat = w / w_scale
    lo_hat = inst.interval_lo / w_scale
    hi_hat = inst.interval_hi / w_scale

    a_core = np.zeros((k + 1, m + 1))
    a_core[:k, :m] = eq
    a_core[k, :m] = w_hat
    a_core[k, m] = 1.0
    b_core = np.concatenate([rhs, [hi_hat]])
    lo = np.zeros(m + 1)
    hi = np.concatenate([np.full(m, math.inf), [hi_hat - lo_hat]])

    stop_check = None
    if alpha > 0.0 and inst.interval_lo >= 0.0:
        def stop_check(value, y):
            bound = _repaired_dual_bound(c, eq, rhs, w_hat, lo_hat,
                                         hi_hat, y[:k])
            return bound is not None and value >= (1.0 - alpha) * bound

    sx = _Simplex(a_core, b_core, lo, hi)
    sx.phase_one()
    c_full = np.zeros(sx.a.shape[1])
    c_full[:m] = c
    status, _ = sx.run(c_full, pivot_limit, stop_check)
    sx._refresh(c_full)
    lam = sx.val[:m].copy()
    return LpSolution(lam=lam, value=float(c @ lam), status=status,
                      alpha=alpha if status == ALPHA_APPROXIMATE else 0.0)


def _repaired_dual_bound(c, eq, rhs, w, lo_int, hi_int, y_eq):
    """Upper bound on the LP optimum from equality duals y_eq.

    Completes y_eq with an interval-row dual beta chosen to make every reduced
    cost nonpositive; the resulting dual objective bounds the maximum.  Returns
    None when no such beta exists for this y_eq.
    """
    g = c - eq.T @ y_eq
    beta_lo, beta_hi = -math.inf, math.inf
    for j in range(c.shape[0]):
        if w[j] > 1e-12:
            beta_lo = max(beta_lo, g[j] / w[j])
        elif w[j] < -1e-12:
            beta_hi = min(beta_hi, g[j] / w[j])
        elif g[j] > 0:
            return None
    if beta_lo > beta_hi:
        return None
    base = float(y_eq @ rhs)
    if beta_lo == -math.inf:
        return base
    return base + (beta_lo * hi_int if beta_lo >= 0 else beta_lo * lo_int)


def max_linear_over_polytope(a, b, g) -> tuple[float, np.ndarray]:
    """maximize g @ x  s.t.  a @ x <= b  for a bounded nonempty polytope."""
    a = as_matrix(a)
    b = as_vector(b, dim=a.shape[0])
    g = as_vector(g, dim=a.shape[1])
    m, n = a.shape
    a_core = np.hstack([a, np.eye(m)])
    lo = np.concatenate([np.full(n, -math.inf), np.zeros(m)])
    hi = np.full(n + m, math.inf)
    sx = _Simplex(a_core, b, lo, hi)
    sx.phase_one()
    c_full = np.zeros(sx.a.shape[1])
    c_full[:n] = g
    status, _ = sx.run(c_full, pivot_limit=10000)
    if status != OPTIMAL:
        raise RuntimeError(f"polytope maximization stopped with status {status}")
    sx._refresh(c_full)
    x = sx.val[:n].copy()
    return float(g @ x), x
