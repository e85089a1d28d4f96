import numpy as np
import pytest

from cutcert.certificate import build_certificate_lp
from cutcert.lp_solver import (
    ALPHA_APPROXIMATE,
    ITERATION_LIMIT,
    OPTIMAL,
    Infeasible,
    LpInstance,
    Unbounded,
    max_linear_over_polytope,
    solve,
)
from helpers import enumerate_lp_optimum, enumerate_polytope_max, random_localizer


def one_dim_instance() -> LpInstance:
    # Rows: (a=1, b=1, initial), (a=-1, b=1, initial), (a=1, b=0, productive).
    return LpInstance(objective=np.array([0.0, 0.0, 1.0]),
                      eq_matrix=np.array([[1.0, -1.0, 1.0]]),
                      eq_rhs=np.zeros(1),
                      interval_vec=np.array([1.0, 1.0, 0.0]))


def test_worked_one_dim_instance():
    solution = solve(one_dim_instance())
    assert solution.status == OPTIMAL
    assert solution.value == pytest.approx(2.0, abs=1e-9)
    assert np.allclose(solution.lam, [0.0, 2.0, 2.0], atol=1e-9)


def test_zero_objective():
    inst = LpInstance(objective=np.zeros(3),
                      eq_matrix=np.array([[1.0, -1.0, 1.0]]),
                      eq_rhs=np.zeros(1),
                      interval_vec=np.array([1.0, 1.0, 0.0]))
    solution = solve(inst)
    assert solution.status == OPTIMAL
    assert solution.value == 0.0


def test_matches_enumeration_on_random_certificate_instances():
    rng = np.random.default_rng(5)
    for _ in range(60):
        n = int(rng.integers(1, 4))
        extra = int(rng.integers(0, 9 - 2 * n)) if 2 * n < 8 else 0
        localizer = random_localizer(rng, n, extra)
        inst = build_certificate_lp(localizer)
        reference, _ = enumerate_lp_optimum(inst)
        solution = solve(inst)
        assert solution.status == OPTIMAL
        assert solution.value == pytest.approx(reference, abs=1e-8)


def test_alpha_early_stop_keeps_half_of_optimum():
    rng = np.random.default_rng(17)
    for _ in range(40):
        n = int(rng.integers(1, 4))
        extra = int(rng.integers(1, 5))
        localizer = random_localizer(rng, n, extra)
        inst = build_certificate_lp(localizer)
        reference, _ = enumerate_lp_optimum(inst)
        solution = solve(inst, alpha=0.5)
        assert solution.status in (OPTIMAL, ALPHA_APPROXIMATE)
        assert solution.value >= 0.5 * reference - 1e-9


def test_iteration_limit_returns_feasible_iterate():
    rng = np.random.default_rng(23)
    localizer = random_localizer(rng, 3, 2)
    inst = build_certificate_lp(localizer)
    solution = solve(inst, pivot_limit=1)
    assert solution.status in (ITERATION_LIMIT, OPTIMAL)
    lam = solution.lam
    assert np.min(lam) >= -1e-10
    assert np.max(np.abs(inst.eq_matrix @ lam)) <= 1e-8 * (1.0 + np.sum(lam))
    assert -1e-8 <= float(inst.interval_vec @ lam) <= 2.0 + 1e-8


def test_unbounded_instance_raises():
    inst = LpInstance(objective=np.array([1.0]),
                      eq_matrix=np.zeros((0, 1)),
                      eq_rhs=np.zeros(0),
                      interval_vec=np.array([0.0]))
    with pytest.raises(Unbounded):
        solve(inst)


def test_infeasible_instance_raises():
    inst = LpInstance(objective=np.array([1.0]),
                      eq_matrix=np.array([[1.0]]),
                      eq_rhs=np.array([-1.0]),
                      interval_vec=np.array([0.0]))
    with pytest.raises(Infeasible):
        solve(inst)


class TestMaxLinearOverPolytope:
    def test_unit_box(self):
        a = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        b = np.array([1.0, 0.0, 1.0, 0.0])
        value, x = max_linear_over_polytope(a, b, np.array([1.0, 1.0]))
        assert value == pytest.approx(2.0)
        assert np.allclose(x, [1.0, 1.0])

    def test_triangle(self):
        a = np.array([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]])
        b = np.array([0.0, 0.0, 1.0])
        value, x = max_linear_over_polytope(a, b, np.array([2.0, 1.0]))
        assert value == pytest.approx(2.0)
        assert np.allclose(x, [1.0, 0.0])

    def test_zero_objective(self):
        a = np.array([[1.0], [-1.0]])
        value, _ = max_linear_over_polytope(a, np.ones(2), np.zeros(1))
        assert value == 0.0

    def test_matches_enumeration_on_random_polytopes(self):
        rng = np.random.default_rng(31)
        for _ in range(30):
            n = int(rng.integers(2, 4))
            m = int(rng.integers(n + 1, n + 5))
            a = rng.normal(size=(m, n))
            b = a @ rng.uniform(-0.3, 0.3, size=n) + rng.uniform(0.2, 1.5, size=m)
            # Always bounded: add box rows.
            box = np.vstack([np.eye(n), -np.eye(n)])
            a = np.vstack([a, box])
            b = np.concatenate([b, np.full(2 * n, 3.0)])
            g = rng.normal(size=n)
            reference, _ = enumerate_polytope_max(a, b, g)
            value, x = max_linear_over_polytope(a, b, g)
            assert value == pytest.approx(reference, abs=1e-8)
            assert np.all(a @ x <= b + 1e-9)

    def test_unbounded(self):
        a = np.array([[1.0, 0.0]])
        with pytest.raises(Unbounded):
            max_linear_over_polytope(a, np.ones(1), np.array([0.0, 1.0]))

    def test_infeasible(self):
        a = np.array([[1.0], [-1.0]])
        b = np.array([0.0, -1.0])  # x <= 0 and x >= 1
        with pytest.raises(Infeasible):
            max_linear_over_polytope(a, b, np.array([1.0]))
