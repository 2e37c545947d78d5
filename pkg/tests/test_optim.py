import numpy as np
import pytest

from meanrisk import exprs, optim
from meanrisk.errors import (
    BoxTooLarge,
    ConstraintLimitExceeded,
    DimMismatch,
    InvalidSpec,
)

from oracles import (
    convex_grid_oracle,
    lp_vertex_oracle,
    milp_closed_oracle,
    miqp_closed_oracle,
)


class TestLinearProgram:
    def test_shape_validation(self):
        with pytest.raises(DimMismatch):
            optim.lp([1, 2], [[1, 2, 3]], [1])
        with pytest.raises(InvalidSpec):
            optim.LinearProgram(
                c=[1.0], A=[[1.0]], b=[1.0], senses=(">=",), nonneg=(True,)
            )

    def test_simple(self):
        sol = optim.solve_lp(optim.lp([1, 1], [[1, -1]], [1.5]))
        assert sol.optimal
        assert sol.value == pytest.approx(1.5, abs=1e-9)
        assert np.allclose(sol.point, [1.5, 0], atol=1e-9)

    def test_infeasible(self):
        assert optim.solve_lp(optim.lp([0], [[1]], [-1])).status == "infeasible"

    def test_unbounded(self):
        assert optim.solve_lp(optim.lp([-1], [[0]], [0])).status == "unbounded"

    def test_free_variables(self):
        # min x, x <= 3, -x <= 5  (x free) -> -5
        sol = optim.solve_lp(
            optim.lp([1], [[1], [-1]], [3, 5], senses="<=", nonneg=(False,))
        )
        assert sol.value == pytest.approx(-5.0, abs=1e-9)

    def test_vertex_oracle_random(self):
        rng = np.random.default_rng(61)
        solved = 0
        for _ in range(80):
            n = int(rng.integers(2, 5))
            m = int(rng.integers(1, 4))
            A = rng.integers(-3, 4, size=(m, n)).astype(float)
            x_star = rng.uniform(0, 3, size=n)
            senses = tuple(rng.choice(["==", "<="], size=m))
            slack = np.where([s == "<=" for s in senses], rng.uniform(0, 1, size=m), 0.0)
            b = A @ x_star + slack
            c = rng.uniform(0.05, 2.0, size=n)  # positive costs keep it bounded
            prob = optim.lp(c, A, b, senses)
            sol = optim.solve_lp(prob)
            assert sol.optimal
            expect = lp_vertex_oracle(c, A, b, senses, (True,) * n)
            assert sol.value == pytest.approx(expect, abs=1e-8)
            # feasibility of the returned point
            assert np.all(sol.point >= -1e-9)
            for i, s in enumerate(senses):
                r = A[i] @ sol.point - b[i]
                assert r <= 1e-9 if s == "<=" else abs(r) <= 1e-9
            solved += 1
        assert solved == 80

    def test_tableau_and_scipy_paths_agree(self):
        rng = np.random.default_rng(67)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            m = int(rng.integers(1, 4))
            A = rng.normal(size=(m, n))
            b = A @ rng.uniform(0, 2, size=n)
            c = rng.uniform(0.1, 1, size=n)
            prob = optim.lp(c, A, b)
            t_sol, _ = optim._tableau_solve(prob)
            s_sol = optim._scipy_solve(prob)
            assert t_sol.status == s_sol.status
            if t_sol.optimal:
                assert t_sol.value == pytest.approx(s_sol.value, abs=1e-8)

    def test_determinism(self):
        prob = optim.lp([1, 2, 0.5], [[1, 1, 1], [1, -1, 0]], [3, 0.5], ("==", "<="))
        a = optim.solve_lp(prob)
        b = optim.solve_lp(prob)
        assert a.value == b.value
        assert np.array_equal(a.point, b.point)


class TestDuals:
    def test_complementary_slackness_random(self):
        rng = np.random.default_rng(71)
        for _ in range(40):
            n = int(rng.integers(2, 5))
            m = int(rng.integers(1, 4))
            A = rng.integers(-2, 3, size=(m, n)).astype(float)
            senses = tuple(rng.choice(["==", "<="], size=m))
            slack = np.where([s == "<=" for s in senses], rng.uniform(0, 1, size=m), 0.0)
            b = A @ rng.uniform(0, 2, size=n) + slack
            c = rng.uniform(0.1, 2, size=n)
            prob = optim.lp(c, A, b, senses)
            sol, y, reduced = optim.lp_duals(prob)
            if not sol.optimal:
                continue
            for i, s in enumerate(senses):
                if s == "<=":
                    gap = b[i] - A[i] @ sol.point
                    assert abs(y[i] * gap) <= 1e-8
            for j in range(n):
                assert abs(reduced[j] * sol.point[j]) <= 1e-8
                assert reduced[j] >= -1e-8


class TestMilp:
    def test_ceiling_example(self):
        mip = optim.MixedIntegerProgram(
            optim.lp([0, 1], [[-1, 1]], [1.2]), (1,), ((0, 10),)
        )
        sol = optim.solve_milp(mip)
        assert sol.value == pytest.approx(2.0, abs=1e-9)
        assert abs(sol.point[1] - round(sol.point[1])) <= 1e-9

    def test_negative_rhs(self):
        mip = optim.MixedIntegerProgram(
            optim.lp([0, 1], [[-1, 1]], [-3.0]), (1,), ((0, 10),)
        )
        assert optim.solve_milp(mip).value == pytest.approx(0.0, abs=1e-9)

    def test_no_integers_degenerates_to_lp(self):
        prob = optim.lp([1, 1], [[1, -1]], [1.5])
        mip = optim.MixedIntegerProgram(prob, (), ())
        lp_sol = optim.solve_lp(prob)
        mip_sol = optim.solve_milp(mip)
        assert mip_sol.value == lp_sol.value
        assert np.array_equal(mip_sol.point, lp_sol.point)

    def test_infeasible_lattice(self):
        # x integer in [0,3], 2x == 7 has no solution
        mip = optim.MixedIntegerProgram(optim.lp([1], [[2]], [7]), (0,), ((0, 3),))
        assert optim.solve_milp(mip).status == "infeasible"
        assert optim.enumerate_oracle(mip).status == "infeasible"

    def test_bounds_validation(self):
        with pytest.raises(InvalidSpec):
            optim.MixedIntegerProgram(optim.lp([1], [[1]], [1]), (0,), ((0, np.inf),))

    def test_against_closed_oracle_random(self):
        rng = np.random.default_rng(73)
        for _ in range(60):
            n_int = int(rng.integers(1, 4))
            n_cont = int(rng.integers(0, 2))
            n = n_int + n_cont
            m = int(rng.integers(1, 3))
            A = rng.integers(-3, 4, size=(m, n)).astype(float)
            senses = tuple(rng.choice(["==", "<="], size=m, p=[0.3, 0.7]))
            y_star = np.concatenate(
                [rng.integers(-5, 6, size=n_int), rng.uniform(0, 3, size=n_cont)]
            )
            slack = np.where([s == "<=" for s in senses], rng.uniform(0, 2, size=m), 0.0)
            b = A @ y_star + slack
            c = np.concatenate(
                [rng.uniform(-2, 2, size=n_int), rng.uniform(0.1, 2, size=n_cont)]
            )
            int_idx = tuple(range(n_int))
            cont_idx = list(range(n_int, n))
            nonneg = (False,) * n_int + (True,) * n_cont
            bounds = ((-5, 5),) * n_int
            mip = optim.MixedIntegerProgram(
                optim.lp(c, A, b, senses, nonneg), int_idx, bounds
            )
            sol = optim.solve_milp(mip)
            expect = milp_closed_oracle(c, A, b, senses, list(int_idx), bounds, cont_idx)
            if expect is None:
                assert sol.status == "infeasible"
            else:
                assert sol.optimal
                assert sol.value == pytest.approx(expect, abs=1e-9)
                oracle = optim.enumerate_oracle(mip)
                assert oracle.value == pytest.approx(expect, abs=1e-9)

    def test_determinism_bitwise(self):
        mip = optim.MixedIntegerProgram(
            optim.lp([1, -1.3, 0.2], [[1, 1, 1]], [4.5], "<=", (False, False, True)),
            (0, 1),
            ((-5, 5), (-5, 5)),
        )
        a = optim.solve_milp(mip)
        b = optim.solve_milp(mip)
        assert a.value == b.value and np.array_equal(a.point, b.point)


class TestQp:
    def test_validation(self):
        with pytest.raises(InvalidSpec):
            optim.QuadraticMixedProgram([[1, 0.1], [0, 1]], [0, 0], [], [])
        with pytest.raises(InvalidSpec):
            optim.QuadraticMixedProgram([[0.0]], [0.0], [], [])

    def test_unconstrained_identity(self):
        rng = np.random.default_rng(79)
        for _ in range(20):
            n = int(rng.integers(1, 4))
            R = rng.normal(size=(n, n))
            D = R @ R.T + np.eye(n)
            q = rng.normal(size=n)
            sol = optim.solve_qp_convex(D, q, np.zeros((0, n)), np.zeros(0))
            expect = -0.25 * q @ np.linalg.solve(D, q)
            assert sol.value == pytest.approx(expect, abs=1e-8)

    def test_integer_example(self):
        qmp = optim.QuadraticMixedProgram(
            [[1.0]], [0.0], [[-1.0]], [-1.5], (0,), ((-10, 10),)
        )
        assert optim.solve_miqp(qmp).value == pytest.approx(4.0, abs=1e-9)

    def test_constraint_cap(self):
        n = 2
        A = np.vstack([np.eye(n)] * 11)  # 22 rows
        with pytest.raises(ConstraintLimitExceeded):
            optim.solve_qp_convex(np.eye(n), np.zeros(n), A, np.ones(22))

    def test_infeasible(self):
        qmp = optim.QuadraticMixedProgram(
            [[1.0]], [0.0], [[1.0], [-1.0]], [-1.0, -1.0], (), ()
        )
        assert optim.solve_miqp(qmp).status == "infeasible"

    def test_against_closed_oracle_random(self):
        rng = np.random.default_rng(83)
        for _ in range(50):
            n_int = int(rng.integers(1, 4))
            n_cont = int(rng.integers(0, 2))
            n = n_int + n_cont
            m = int(rng.integers(0, 3))
            R = rng.normal(size=(n, n))
            D = R @ R.T + (0.5 + rng.uniform()) * np.eye(n)
            q = rng.normal(size=n) * 2
            y_star = np.concatenate(
                [rng.integers(-5, 6, size=n_int), rng.uniform(-2, 2, size=n_cont)]
            )
            A = rng.integers(-2, 3, size=(m, n)).astype(float)
            b = A @ y_star + rng.uniform(0, 2, size=m) if m else np.zeros(0)
            int_idx = tuple(range(n_int))
            cont_idx = list(range(n_int, n))
            qmp = optim.QuadraticMixedProgram(D, q, A, b, int_idx, ((-5, 5),) * n_int)
            sol = optim.solve_miqp(qmp)
            expect = miqp_closed_oracle(D, q, A, b, list(int_idx), ((-5, 5),) * n_int, cont_idx)
            assert expect is not None and sol.optimal
            assert sol.value == pytest.approx(expect, abs=1e-7)
            oracle = optim.enumerate_oracle(qmp)
            assert oracle.value == pytest.approx(expect, abs=1e-7)


class TestEnumerateOracle:
    def test_box_cap(self):
        mip = optim.MixedIntegerProgram(
            optim.lp([1, 1, 1], np.zeros((0, 3)), []),
            (0, 1, 2),
            ((-100, 100),) * 3,
        )
        with pytest.raises(BoxTooLarge):
            optim.enumerate_oracle(mip)

    def test_delegates_without_integers(self):
        prob = optim.lp([1, 1], [[1, -1]], [1.5])
        assert optim.enumerate_oracle(
            optim.MixedIntegerProgram(prob, (), ())
        ).value == pytest.approx(1.5, abs=1e-9)

    def test_rejects_unknown_type(self):
        with pytest.raises(InvalidSpec):
            optim.enumerate_oracle("nope")


class TestConvexMip:
    def test_unconstrained_minimum_feasible(self):
        v = exprs.even_power(exprs.var(0), 2)
        g = exprs.vsum(exprs.vabs(exprs.var(0)), exprs.const(-1.0))
        prob = optim.ConvexMixedProgram(v, (g,), [0.5], (), (), (0,), ((-5, 5),))
        assert optim.solve_convex_mip(prob).value == pytest.approx(0.0, abs=1e-5)

    def test_boundary_minimum(self):
        v = exprs.var(0)
        g = exprs.vsum(exprs.vabs(exprs.var(0)), exprs.const(-1.0))
        prob = optim.ConvexMixedProgram(v, (g,), [0.0], (), (), (0,), ((-5, 5),))
        sol = optim.solve_convex_mip(prob)
        expect = convex_grid_oracle(v, (g,), [0.0], -5, 5)
        assert sol.value == pytest.approx(expect, abs=1e-5)
        assert sol.value == pytest.approx(-1.0, abs=1e-5)

    def test_integer_slice(self):
        v = exprs.even_power(exprs.var(0), 2)
        g = exprs.vsum(exprs.vabs(exprs.affine([1.0], -2.5)), exprs.const(-1.0))
        prob = optim.ConvexMixedProgram(v, (g,), [0.0], (0,), ((0, 5),), (), ())
        sol = optim.solve_convex_mip(prob)
        assert sol.value == pytest.approx(4.0, abs=1e-9)
        assert sol.point[0] == pytest.approx(2.0)

    def test_infeasible_everywhere(self):
        g = exprs.vabs(exprs.var(0))
        prob = optim.ConvexMixedProgram(
            exprs.var(0), (g,), [-1.0], (0,), ((-3, 3),), (), ()
        )
        assert optim.solve_convex_mip(prob).status == "infeasible"

    def test_mixed_integer_continuous(self):
        # v = (y0 - 1.5)^2 + (y1 + 0.25)^2 with y1 integer in [-3, 3],
        # constraint |y0| <= 2: optimum y0 = 1.5, y1 = 0
        v = exprs.vsum(
            exprs.even_power(exprs.affine([1.0, 0.0], -1.5), 2),
            exprs.even_power(exprs.affine([0.0, 1.0], 0.25), 2),
        )
        g = exprs.vabs(exprs.var(0))
        prob = optim.ConvexMixedProgram(v, (g,), [2.0], (1,), ((-3, 3),), (0,), ((-4, 4),))
        sol = optim.solve_convex_mip(prob)
        assert sol.value == pytest.approx(0.0625, abs=1e-5)
        assert sol.point[1] == pytest.approx(0.0)


class TestExprGrammar:
    def test_curvature_rules(self):
        a = exprs.affine([1.0, -2.0], 0.5)
        assert a.curvature == exprs.AFFINE
        assert exprs.vabs(a).curvature == exprs.CONVEX
        with pytest.raises(Exception):
            exprs.vabs(exprs.vabs(a))  # abs of convex rejected
        with pytest.raises(Exception):
            exprs.even_power(a, 3)  # odd power rejected
        with pytest.raises(Exception):
            exprs.scale(-1.0, a)  # negative scale rejected

    def test_subgradients_are_valid(self):
        rng = np.random.default_rng(89)
        e = exprs.vmax(
            exprs.vabs(exprs.affine([1.0, -1.0], 0.3)),
            exprs.even_power(exprs.affine([0.5, 0.5], 0.0), 2),
            exprs.norm(exprs.affine([1.0, 0.0], 0.0), exprs.affine([0.0, 2.0], -1.0)),
        )
        for _ in range(100):
            y = rng.normal(size=2) * 2
            d = rng.normal(size=2)
            v, g = e.eval_with_subgradient(y)
            # convexity: e(y + d) >= e(y) + g . d
            assert e.value(y + d) >= v + g @ d - 1e-9

    def test_prefix_round_trip(self):
        e = exprs.vsum(
            exprs.scale(2.0, exprs.vabs(exprs.affine([1.0], -0.5))),
            exprs.even_power(exprs.var(0), 4),
            exprs.const(1.25),
        )
        again = exprs.from_prefix(e.to_prefix())
        rng = np.random.default_rng(97)
        for _ in range(20):
            y = rng.normal(size=1)
            assert e.value(y) == again.value(y)
