import numpy as np
import pytest
from scipy.optimize import linprog

from app.services.simplex_service import TwoPhaseSimplex, solve_feasibility


def _linprog(c, A, signs, b):
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
    for row, sign, rhs in zip(A, signs, b):
        if sign == "<=":
            ub_rows.append(row)
            ub_rhs.append(rhs)
        elif sign == ">=":
            ub_rows.append(-row)
            ub_rhs.append(-rhs)
        else:
            eq_rows.append(row)
            eq_rhs.append(rhs)
    return linprog(
        c,
        A_ub=np.array(ub_rows) if ub_rows else None,
        b_ub=np.array(ub_rhs) if ub_rhs else None,
        A_eq=np.array(eq_rows) if eq_rows else None,
        b_eq=np.array(eq_rhs) if eq_rhs else None,
        bounds=[(0, None)] * len(c),
        method="highs",
    )


class TestTwoPhaseSimplex:
    def test_textbook_maximum(self):
        result = TwoPhaseSimplex().solve(np.array([-1.0, -1.0]), [[1.0, 2.0], [3.0, 1.0]], ["<=", "<="], [4.0, 6.0])
        assert result.status == "optimal"
        assert result.objective == pytest.approx(-2.8)
        np.testing.assert_allclose(result.x, [1.6, 1.2])

    def test_mixed_signs_match_linprog(self):
        c = np.array([1.0, 2.0, 3.0])
        A = [[1.0, 1.0, 1.0], [1.0, -1.0, 0.0], [0.0, 0.0, 1.0]]
        signs = ["=", ">=", ">="]
        b = [10.0, 2.0, 1.0]
        result = TwoPhaseSimplex().solve(c, A, signs, b)
        oracle = _linprog(c, A, signs, b)
        assert result.status == "optimal"
        assert result.objective == pytest.approx(oracle.fun, abs=1e-9)

    def test_negative_right_hand_side(self):
        # -x1 <= -2 is x1 >= 2
        result = TwoPhaseSimplex().solve(np.array([1.0]), [[-1.0]], ["<="], [-2.0])
        assert result.status == "optimal"
        assert result.x[0] == pytest.approx(2.0)

    @pytest.mark.parametrize("seed", range(10))
    def test_random_bounded_problems_match_linprog(self, seed):
        rng = np.random.default_rng(seed)
        m, n = 6, 4
        A = rng.uniform(-1.0, 2.0, size=(m, n))
        b = rng.uniform(0.5, 3.0, size=m)
        A = np.vstack([A, np.ones(n)])
        b = np.append(b, 10.0)
        c = rng.uniform(-2.0, 1.0, size=n)
        signs = ["<="] * (m + 1)
        result = TwoPhaseSimplex().solve(c, A, signs, b)
        oracle = _linprog(c, A, signs, b)
        assert result.status == "optimal"
        assert result.objective == pytest.approx(oracle.fun, abs=1e-8)
        assert np.all(A @ result.x <= b + 1e-9)

    def test_degenerate_problem_terminates(self):
        # cycles under the largest-coefficient rule
        c = np.array([-0.75, 20.0, -0.5, 6.0])
        A = [[0.25, -8.0, -1.0, 9.0], [0.5, -12.0, -0.5, 3.0], [0.0, 0.0, 1.0, 0.0]]
        result = TwoPhaseSimplex().solve(c, A, ["<=", "<=", "<="], [0.0, 0.0, 1.0])
        assert result.status == "optimal"
        assert result.objective == pytest.approx(-1.25)

    def test_infeasible(self):
        A = [[1.0, 1.0], [1.0, 1.0]]
        result = TwoPhaseSimplex().solve(np.zeros(2), A, ["<=", ">="], [1.0, 3.0])
        assert result.status == "infeasible"
        assert result.x is None

    def test_unbounded(self):
        result = TwoPhaseSimplex().solve(np.array([-1.0, 0.0]), [[1.0, -1.0]], ["<="], [1.0])
        assert result.status == "unbounded"

    def test_redundant_equalities(self):
        A = [[1.0, 1.0], [2.0, 2.0]]
        result = TwoPhaseSimplex().solve(np.array([1.0, 0.0]), A, ["=", "="], [1.0, 2.0])
        assert result.status == "optimal"
        np.testing.assert_allclose(result.x, [0.0, 1.0], atol=1e-12)

    def test_iteration_limit(self):
        result = TwoPhaseSimplex(max_pivots=0).solve(
            np.array([-1.0, -1.0]), [[1.0, 2.0], [3.0, 1.0]], ["<=", "<="], [4.0, 6.0])
        assert result.status == "iteration_limit"


class TestSolveFeasibility:
    def test_small_feasible_system(self):
        G = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
        h = np.array([1.0, 1.0, -3.0])
        point = solve_feasibility(G, h)
        assert point is not None
        assert np.all(G @ point.x >= h - 1e-9)

    def test_free_variables_may_be_negative(self):
        point = solve_feasibility(np.array([[-1.0, 0.0], [0.0, 1.0]]), np.array([2.0, -5.0]))
        assert point is not None
        assert point.x[0] <= -2.0 + 1e-9

    def test_many_sampled_rows_need_exchange(self):
        theta = np.linspace(0.0, 2.0 * np.pi, 2000, endpoint=False)
        # x in the unit disc, x_1 >= 0.5
        G = -np.column_stack([np.cos(theta), np.sin(theta)])
        h = -np.ones_like(theta)
        point = solve_feasibility(G, h, G_fixed=np.array([[1.0, 0.0]]), h_fixed=np.array([0.5]))
        assert point is not None
        assert point.x[0] >= 0.5 - 1e-9
        assert np.linalg.norm(point.x) <= 1.0 + 1e-5
        assert point.active_rows < len(theta)

    def test_infeasible_system(self):
        assert solve_feasibility(np.array([[1.0], [-1.0]]), np.array([1.0, 0.0])) is None

    def test_infeasible_against_fixed_rows(self):
        assert solve_feasibility(np.array([[1.0]]), np.array([1.0]),
                                 G_fixed=np.array([[-1.0]]), h_fixed=np.array([0.0])) is None

    def test_zero_rows(self):
        G = np.array([[0.0, 0.0], [1.0, 0.0]])
        assert solve_feasibility(G, np.array([1.0, 0.0])) is None
        assert solve_feasibility(G, np.array([-1.0, 0.0])) is not None

    def test_duplicate_directions_keep_tightest(self):
        G = np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 1.0]])
        point = solve_feasibility(G, np.array([1.0, 4.0, 0.0]))
        assert point is not None
        assert point.x[0] >= 2.0 - 1e-9

    def test_shift_tightens_rows(self):
        point = solve_feasibility(np.array([[1.0], [-1.0]]), np.array([0.0, -1.0]), shift=0.5)
        assert point is not None
        assert 0.5 - 1e-9 <= point.x[0] <= 0.5 + 1e-9
