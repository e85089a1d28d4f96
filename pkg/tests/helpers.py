"""Independent reference oracles shared by the test modules.

Everything here is deliberately brute force: vertex enumeration for LPs,
rejection sampling for domains, exhaustive active-set search for the desk QP.
These stay independent of the solver paths they are used to check.
"""

from __future__ import annotations

import math
from itertools import combinations, product

import numpy as np

from cutcert.certificate import PolytopeLocalizer, RowOrigin
from cutcert.geometry import Box, EuclideanBall, NonnegPCap


def enumerate_lp_optimum(inst) -> tuple[float, np.ndarray]:
    """Optimum of an LpInstance by enumerating candidate tight-constraint sets.

    Works for small instances (m <= ~10).  The feasible set
    {lam >= 0, E lam = rhs, lo <= w lam <= hi} is pointed, so the optimum sits
    at a vertex where m independent constraints are tight: the k equalities
    plus m - k picks from the nonnegativity rows and the two interval sides.
    """
    c = np.asarray(inst.objective, dtype=float)
    eq = np.asarray(inst.eq_matrix, dtype=float)
    rhs = np.asarray(inst.eq_rhs, dtype=float)
    w = np.asarray(inst.interval_vec, dtype=float)
    m = c.shape[0]
    k = eq.shape[0]
    simple: list[tuple[str, int | None]] = [("nn", i) for i in range(m)]
    simple += [("lo", None), ("hi", None)]
    need = max(m - k, 0)
    best_value = -math.inf
    best_lam = None
    for subset in combinations(simple, need):
        tags = [tag for tag, _ in subset]
        if tags.count("lo") and tags.count("hi") and inst.interval_lo != inst.interval_hi:
            continue
        rows = [eq]
        sysrhs = [rhs]
        for tag, idx in subset:
            if tag == "nn":
                unit = np.zeros(m)
                unit[idx] = 1.0
                rows.append(unit[None, :])
                sysrhs.append(np.zeros(1))
            else:
                rows.append(w[None, :])
                sysrhs.append(np.array([inst.interval_lo if tag == "lo" else inst.interval_hi]))
        system = np.vstack(rows)
        target = np.concatenate(sysrhs)
        if system.shape[0] != m:
            continue
        try:
            lam = np.linalg.solve(system, target)
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(lam)):
            continue
        if np.min(lam) < -1e-9:
            continue
        if eq.size and np.max(np.abs(eq @ lam - rhs)) > 1e-8:
            continue
        dot = float(w @ lam)
        if dot < inst.interval_lo - 1e-8 or dot > inst.interval_hi + 1e-8:
            continue
        value = float(c @ lam)
        if value > best_value:
            best_value = value
            best_lam = lam
    assert best_lam is not None, "enumeration found no feasible vertex"
    return best_value, best_lam


def enumerate_polytope_max(a, b, g) -> tuple[float, np.ndarray]:
    """max g @ x over {a x <= b} by enumerating vertices (row n-subsets)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    g = np.asarray(g, dtype=float)
    n = a.shape[1]
    best_value = -math.inf
    best_x = None
    for rows in combinations(range(a.shape[0]), n):
        sub = a[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, b[list(rows)])
        if np.all(a @ x <= b + 1e-9):
            value = float(g @ x)
            if value > best_value:
                best_value = value
                best_x = x
    assert best_x is not None, "polytope has no vertex"
    return best_value, best_x


def random_localizer(rng, n: int, extra_rows: int) -> PolytopeLocalizer:
    """A bounded localizer with nonempty interior: unit-box rows plus random
    cuts that all keep a common anchor point strictly feasible."""
    loc = PolytopeLocalizer(n)
    for i in range(n):
        unit = np.zeros(n)
        unit[i] = 1.0
        loc.add_row(unit, 1.0, RowOrigin.INITIAL)
        loc.add_row(-unit, 1.0, RowOrigin.INITIAL)
    anchor = rng.uniform(-0.5, 0.5, size=n)
    step = 1
    for _ in range(extra_rows):
        normal = rng.normal(size=n)
        normal /= np.linalg.norm(normal)
        offset = float(normal @ anchor) + rng.uniform(0.05, 0.5)
        origin = RowOrigin.PRODUCTIVE if rng.random() < 0.6 else RowOrigin.NONPRODUCTIVE
        loc.add_row(normal, offset, origin, step)
        step += 1
    return loc


def sample_domain(domain, rng, count: int) -> np.ndarray:
    """Uniform-ish samples from the closed domain, for soundness spot checks."""
    if isinstance(domain, EuclideanBall):
        directions = rng.normal(size=(count, domain.dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii = domain.radius * rng.random(count) ** (1.0 / domain.dim)
        return domain.center + directions * radii[:, None]
    if isinstance(domain, Box):
        return rng.uniform(domain.lower, domain.upper, size=(count, domain.dim))
    if isinstance(domain, NonnegPCap):
        points = []
        while len(points) < count:
            candidate = rng.uniform(0.0, domain.cap, size=domain.dim)
            if np.sum((candidate / domain.cap) ** domain.p) <= 1.0:
                points.append(candidate)
        return np.array(points)
    raise TypeError(f"no sampler for {type(domain).__name__}")


def box_qp_reference(u0, cons_matrix, cons_rhs, lower, upper) -> tuple[np.ndarray, float, np.ndarray]:
    """Exhaustive active-set solve of  min 0.5||u - u0||^2  s.t.  C u <= d,
    lower <= u <= upper.  Returns (u_opt, f_opt, multipliers for C rows).

    Every candidate active set (constraint subset x box-face pattern) yields an
    equality-constrained projection solved through its KKT system; feasible
    candidates are compared exhaustively, so the result is the global optimum.
    """
    u0 = np.asarray(u0, dtype=float)
    cons_matrix = np.asarray(cons_matrix, dtype=float)
    cons_rhs = np.asarray(cons_rhs, dtype=float)
    dim = u0.shape[0]
    n_cons = cons_rhs.shape[0]
    best = (math.inf, None, None)
    for active in product((False, True), repeat=n_cons):
        for pattern in product((0, 1, 2), repeat=dim):  # 0 free, 1 at lower, 2 at upper
            rows = [cons_matrix[i] for i in range(n_cons) if active[i]]
            rhs = [cons_rhs[i] for i in range(n_cons) if active[i]]
            for j, mode in enumerate(pattern):
                if mode:
                    unit = np.zeros(dim)
                    unit[j] = 1.0
                    rows.append(unit)
                    rhs.append(lower[j] if mode == 1 else upper[j])
            if rows:
                eq = np.vstack(rows)
                target = np.asarray(rhs, dtype=float)
                size = eq.shape[0]
                kkt = np.block([[np.eye(dim), eq.T], [eq, np.zeros((size, size))]])
                full_rhs = np.concatenate([u0, target])
                try:
                    solution = np.linalg.solve(kkt, full_rhs)
                except np.linalg.LinAlgError:
                    continue
                u = solution[:dim]
                duals = solution[dim:]
            else:
                u = u0.copy()
                duals = np.zeros(0)
            if not np.all(np.isfinite(u)):
                continue
            if np.any(cons_matrix @ u > cons_rhs + 1e-9):
                continue
            if np.any(u < lower - 1e-9) or np.any(u > upper + 1e-9):
                continue
            value = 0.5 * float((u - u0) @ (u - u0))
            if value < best[0] - 1e-15:
                multipliers = np.zeros(n_cons)
                position = 0
                for i in range(n_cons):
                    if active[i]:
                        multipliers[i] = duals[position]
                        position += 1
                best = (value, u, multipliers)
    assert best[1] is not None, "active-set enumeration found no feasible point"
    return best[1], best[0], best[2]
