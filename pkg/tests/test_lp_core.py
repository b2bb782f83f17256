import numpy as np
import pytest

from dsps.errors import DimensionMismatch
from dsps.lp_core import (
    LpProblem,
    LpRow,
    Relation,
    SolveStatus,
    SolverOptions,
    solve_lp,
)

from oracles import lp_vertex_oracle


def lp(c, rows, lower, upper):
    return LpProblem(np.asarray(c, dtype=float), tuple(rows), lower, upper)


class TestBasics:
    def test_box_only_maximisation(self):
        sol = solve_lp(lp([-1.0], (), 0.0, 1.0))
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.z[0] == 1.0
        assert sol.objective_value == -1.0

    def test_single_le_row(self):
        # min -x - y  s.t.  x + y <= 1.5, box [0,1]^2
        sol = solve_lp(lp([-1.0, -1.0], [LpRow([1.0, 1.0], "<=", 1.5)], 0.0, 1.0))
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(-1.5, abs=1e-9)
        assert sol.max_residual <= 1e-9

    def test_equality_row(self):
        # min x  s.t.  x + y = 1, box [0,1]^2  -> x=0, y=1
        sol = solve_lp(lp([1.0, 0.0], [LpRow([1.0, 1.0], "=", 1.0)], 0.0, 1.0))
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(0.0, abs=1e-9)

    def test_ge_row(self):
        # min x + y  s.t.  x + 2y >= 1, box [0,1]^2 -> y=0.5
        sol = solve_lp(lp([1.0, 1.0], [LpRow([1.0, 2.0], ">=", 1.0)], 0.0, 1.0))
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(0.5, abs=1e-9)

    def test_infeasible_pair(self):
        rows = [LpRow([1.0], "<=", 0.25), LpRow([1.0], ">=", 0.75)]
        sol = solve_lp(lp([1.0], rows, 0.0, 1.0))
        assert sol.status is SolveStatus.INFEASIBLE
        # certificate: can't shrink the gap below 0.5
        assert sol.objective_value == pytest.approx(0.5, abs=1e-6)

    def test_infeasible_equality_out_of_box(self):
        sol = solve_lp(lp([0.0, 0.0], [LpRow([1.0, 1.0], "=", 5.0)], 0.0, 1.0))
        assert sol.status is SolveStatus.INFEASIBLE

    def test_crossed_bounds_infeasible(self):
        sol = solve_lp(lp([1.0], (), 2.0, 1.0))
        assert sol.status is SolveStatus.INFEASIBLE

    def test_unbounded_box_only(self):
        sol = solve_lp(lp([-1.0], (), 0.0, np.inf))
        assert sol.status is SolveStatus.UNBOUNDED

    def test_unbounded_with_row(self):
        # min -x  s.t.  y <= 1 says nothing about x, x unbounded above
        rows = [LpRow([0.0, 1.0], "<=", 1.0)]
        sol = solve_lp(lp([-1.0, 0.0], rows, 0.0, [np.inf, 2.0]))
        assert sol.status is SolveStatus.UNBOUNDED

    def test_unbounded_free_variable(self):
        rows = [LpRow([1.0, 1.0], "<=", 10.0)]
        sol = solve_lp(lp([1.0, 0.0], rows, [-np.inf, 0.0], [np.inf, 1.0]))
        assert sol.status is SolveStatus.UNBOUNDED

    def test_free_variable_optimum(self):
        # min x  s.t.  x >= -3 via row, x otherwise free
        rows = [LpRow([1.0], ">=", -3.0)]
        sol = solve_lp(lp([1.0], rows, -np.inf, np.inf))
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(-3.0, abs=1e-9)

    def test_iteration_limit(self):
        rows = [LpRow([1.0, 1.0, 1.0], "=", 1.5)]
        sol = solve_lp(
            lp([-1.0, -2.0, -3.0], rows, 0.0, 1.0),
            SolverOptions(max_iterations=1),
        )
        assert sol.status is SolveStatus.ITERATION_LIMIT
        assert sol.z is None

    def test_negative_rhs_equality(self):
        sol = solve_lp(lp([0.0], [LpRow([2.0], "=", -1.0)], -2.0, 2.0))
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.z[0] == pytest.approx(-0.5, abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            lp([1.0, 2.0], [LpRow([1.0], "<=", 1.0)], 0.0, 1.0)

    def test_unknown_relation(self):
        with pytest.raises(DimensionMismatch):
            LpRow([1.0], "!=", 1.0)


class TestDeterminism:
    def test_bitwise_repeatability(self):
        rng = np.random.default_rng(5150)
        c = rng.normal(size=40)
        rows = [
            LpRow(rng.normal(size=40), rel, rng.normal())
            for rel in ("<=", ">=", "<=", "=")
        ]
        problem = lp(c, rows, 0.0, 1.0)
        a = solve_lp(problem)
        b = solve_lp(problem)
        assert a.status is b.status
        assert a.objective_value == b.objective_value  # bitwise
        assert a.iterations == b.iterations
        np.testing.assert_array_equal(a.z, b.z)


def random_instance(rng):
    n = int(rng.integers(1, 7))
    m = int(rng.integers(0, 5))
    c = rng.normal(size=n)
    rows = []
    anchor = rng.uniform(0.0, 1.0, size=n)  # in-box point for feasible cases
    make_feasible = rng.random() < 0.5
    for _ in range(m):
        a = rng.normal(size=n)
        rel = ("<=", ">=", "=")[int(rng.integers(0, 3))]
        if make_feasible:
            slack = float(rng.uniform(0.0, 0.5))
            at = float(np.dot(a, anchor))
            b = at + slack if rel == "<=" else at - slack if rel == ">=" else at
        else:
            b = float(rng.normal())
        rows.append(LpRow(a, rel, b))
    return lp(c, rows, 0.0, 1.0), rows


class TestAgainstVertexEnumeration:
    def test_fifty_random_instances(self):
        rng = np.random.default_rng(214365)
        checked_feasible = checked_infeasible = 0
        for i in range(50):
            problem, rows = random_instance(rng)
            oracle_rows = [(r.coeffs, r.relation.value, r.rhs) for r in rows]
            status, best = lp_vertex_oracle(
                problem.objective, oracle_rows, problem.lower, problem.upper
            )
            sol = solve_lp(problem)
            if status == "infeasible":
                assert sol.status is SolveStatus.INFEASIBLE, f"instance {i}"
                checked_infeasible += 1
            else:
                assert sol.status is SolveStatus.OPTIMAL, f"instance {i}"
                assert sol.objective_value == pytest.approx(best, abs=1e-7), f"instance {i}"
                assert sol.max_residual <= 1e-7
                assert np.all(sol.z >= problem.lower - 1e-9)
                assert np.all(sol.z <= problem.upper + 1e-9)
                checked_feasible += 1
        # the generator must exercise both outcomes
        assert checked_feasible >= 15
        assert checked_infeasible >= 5

    def test_degenerate_stacked_rows(self):
        # many tight rows through one vertex force degenerate pivots
        rows = [
            LpRow([1.0, 1.0, 1.0], "<=", 1.0),
            LpRow([1.0, 1.0, 0.0], "<=", 1.0),
            LpRow([1.0, 0.0, 1.0], "<=", 1.0),
            LpRow([0.0, 1.0, 1.0], "<=", 1.0),
        ]
        sol = solve_lp(lp([-1.0, -1.0, -1.0], rows, 0.0, 1.0))
        assert sol.status is SolveStatus.OPTIMAL
        status, best = lp_vertex_oracle(
            np.array([-1.0, -1.0, -1.0]),
            [(r.coeffs, r.relation.value, r.rhs) for r in rows],
            np.zeros(3),
            np.ones(3),
        )
        assert sol.objective_value == pytest.approx(best, abs=1e-9)


class TestScaleAndSlack:
    def test_larger_slack_never_shrinks_pure_max(self):
        # pure maximisation of sum(p): growing the feasible set is monotone
        rng = np.random.default_rng(77)
        n = 12
        x = rng.normal(0.0, 1.0, n)
        row = x - float(np.mean(x))
        for lo, hi in [(0.05, 0.1), (0.1, 0.4), (0.4, 2.0)]:
            small = solve_lp(
                lp([-1.0] * n, [LpRow(row, "<=", lo), LpRow(row, ">=", -lo)], 0.0, 1.0)
            )
            big = solve_lp(
                lp([-1.0] * n, [LpRow(row, "<=", hi), LpRow(row, ">=", -hi)], 0.0, 1.0)
            )
            assert small.status is SolveStatus.OPTIMAL
            assert big.status is SolveStatus.OPTIMAL
            assert -big.objective_value >= -small.objective_value - 1e-9
