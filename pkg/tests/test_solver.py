import numpy as np
import pytest

from conftest import feasible_solution, make_program
from pathcvx import (
    BlockSolution,
    Dataset,
    SolverConfig,
    assemble,
    enumerate_patterns,
    feasibility_violation,
    linearized_predictions,
    objective,
    solve,
    solve_oracle,
)
from pathcvx.errors import DimensionMismatch, DomainError, EmptyPatternSet
from pathcvx.arrangement import PatternSet


def one_d_program(lam=1e-8, lam_tilde=0.0):
    data = Dataset(np.array([[1.0]]), np.array([1.0]))
    ps = enumerate_patterns(data, "exact", 10, 0)
    return assemble(data, ps, lam, lam_tilde), data


class TestAssemble:
    def test_block_bookkeeping(self):
        rng = np.random.default_rng(0)
        data = Dataset(rng.standard_normal((4, 3)), np.zeros(4))
        ps = enumerate_patterns(data, "exact", 100, 0)
        two = PatternSet(ps.patterns[:2], ps.rank_r, "exact", 100, 0)
        prog = assemble(data, two, 0.1)
        assert prog.n_blocks == 4
        assert prog.n_blocks * prog.d == 12
        assert prog.n_blocks * prog.n == 16
        assert list(prog.orientations) == [1.0, 1.0, -1.0, -1.0]

    def test_empty_pattern_set(self):
        data = Dataset(np.array([[1.0]]), np.zeros(1))
        with pytest.raises(EmptyPatternSet):
            assemble(data, PatternSet([], 1, "exact", 10, 0), 0.1)

    def test_cone_rows_arithmetic(self):
        data = Dataset(np.array([[1.0], [2.0]]), np.zeros(2))
        ps = enumerate_patterns(data, "exact", 10, 0)
        prog = assemble(data, ps, 0.0)
        idx = [p.mask_string() for p in ps.patterns].index("11")
        np.testing.assert_allclose(prog.cone_matrix(idx), [[1.0], [2.0]])

    def test_bad_weights(self):
        data = Dataset(np.array([[1.0]]), np.zeros(1))
        ps = enumerate_patterns(data, "exact", 10, 0)
        with pytest.raises(DomainError):
            assemble(data, ps, -0.1)
        with pytest.raises(DomainError):
            assemble(data, ps, 0.1, float("nan"))


class TestObjective:
    def test_zero_solution_is_mean_square_target(self):
        prog, data, _ = make_program(5, 2, 0.3, 0.0, seed=1)
        zero = BlockSolution(np.zeros((prog.n_blocks, prog.d)))
        assert objective(prog, zero) == pytest.approx(float(data.y @ data.y) / data.n)

    def test_one_d_exact_fit(self):
        prog, _ = one_d_program(lam=0.0)
        u = np.zeros((4, 1))
        u[[p.mask_string() for p in enumerate_patterns(
            Dataset(np.array([[1.0]]), np.array([1.0])), "exact", 10, 0).patterns].index("1")] = 1.0
        assert objective(prog, BlockSolution(u)) == pytest.approx(0.0, abs=1e-15)

    def test_one_d_arithmetic(self):
        prog, _ = one_d_program(lam=1.0)
        u = np.zeros((4, 1))
        u[1] = 0.5  # canonical order is ["0", "1"], positive block of "1" is index 1
        assert objective(prog, BlockSolution(u)) == pytest.approx(0.75)

    def test_dimension_mismatch(self):
        prog, _ = one_d_program()
        with pytest.raises(DimensionMismatch):
            objective(prog, BlockSolution(np.zeros((3, 1))))


class TestFeasibilityViolation:
    def test_origin_in_every_cone(self):
        prog, _, _ = make_program(4, 2, 0.1, 0.0, seed=2)
        assert feasibility_violation(prog, BlockSolution(np.zeros((prog.n_blocks, 2)))) == 0.0

    def test_scalar_cone_violation(self):
        prog, _ = one_d_program()
        u = np.zeros((4, 1))
        u[1] = -0.3  # block "1": cone is u >= 0 for X row [1]
        assert feasibility_violation(prog, BlockSolution(u)) == pytest.approx(0.3)

    def test_witness_scaled_into_cone(self):
        prog, _, _ = make_program(6, 2, 0.1, 0.0, seed=3)
        sol = feasible_solution(prog, seed=4, density=1.0)
        assert feasibility_violation(prog, sol) == 0.0


class TestSolve:
    def test_analytic_one_d_instance(self):
        # oracle: minimize (u - 1)^2 + lam*u over u >= 0  ->  u* = 1 - lam/2
        lam = 1e-8
        prog, data = one_d_program(lam=lam)
        sol, diag = solve(prog)
        assert diag.status == "converged"
        u_star = 1.0 - lam / 2.0
        assert abs(sol.u[1, 0] - u_star) <= 1e-4
        others = np.delete(sol.u.ravel(), 1)
        assert np.all(np.abs(others) <= 1e-4)
        resid = linearized_predictions(prog, sol) - data.y
        assert float(resid @ resid) / data.n <= 1e-6

    def test_zero_targets_zero_solution(self):
        rng = np.random.default_rng(5)
        data = Dataset(rng.standard_normal((4, 2)), np.zeros(4))
        ps = enumerate_patterns(data, "exact", 100, 0)
        prog = assemble(data, ps, 0.2)
        sol, diag = solve(prog)
        assert diag.status == "converged"
        assert np.abs(sol.u).max() <= 1e-10
        assert diag.objective == pytest.approx(0.0, abs=1e-12)

    def test_oracle_equivalence_random_instance(self):
        prog, _, _ = make_program(4, 2, 0.1, 1e-10, seed=5)
        sol, _ = solve(prog)
        ora = solve_oracle(prog)
        oa, ob = objective(prog, sol), objective(prog, ora)
        assert abs(oa - ob) <= 1e-5 * (1.0 + abs(oa))

    def test_objective_never_exceeds_zero_solution(self):
        for seed in range(4):
            prog, data, _ = make_program(5, 2, 0.05, 1e-10, seed=seed)
            _, diag = solve(prog)
            assert diag.status == "converged"
            assert diag.objective <= float(data.y @ data.y) / data.n + 1e-12

    def test_cone_feasibility_at_answer(self):
        prog, _, _ = make_program(6, 2, 0.01, 1e-10, seed=8)
        cfg = SolverConfig()
        sol, diag = solve(prog, cfg)
        assert diag.status == "converged"
        assert feasibility_violation(prog, sol) <= cfg.feasibility_tol

    def test_determinism(self):
        prog, _, _ = make_program(5, 2, 0.1, 1e-10, seed=9)
        s1, d1 = solve(prog)
        s2, d2 = solve(prog)
        np.testing.assert_array_equal(s1.u, s2.u)
        assert d1.iterations == d2.iterations

    def test_config_validation(self):
        with pytest.raises(DomainError):
            SolverConfig(max_iters=0)
        with pytest.raises(DomainError):
            SolverConfig(abs_tol=0.0)


class TestSolveOracle:
    def test_matches_analytic_minimizer(self):
        lam = 1e-8
        prog, _ = one_d_program(lam=lam)
        sol = solve_oracle(prog, iters=3000)
        assert abs(sol.u[1, 0] - (1.0 - lam / 2.0)) <= 1e-6

    def test_zero_targets(self):
        rng = np.random.default_rng(6)
        data = Dataset(rng.standard_normal((3, 1)), np.zeros(3))
        ps = enumerate_patterns(data, "exact", 100, 0)
        prog = assemble(data, ps, 0.5)
        sol = solve_oracle(prog, iters=500)
        assert np.abs(sol.u).max() <= 1e-9

    def test_cross_solver_agreement_property(self):
        for seed, lam in [(11, 0.01), (12, 1.0)]:
            prog, _, _ = make_program(3, 2, lam, 1e-10, seed=seed)
            sol, _ = solve(prog)
            ora = solve_oracle(prog)
            oa, ob = objective(prog, sol), objective(prog, ora)
            assert ob >= oa - 1e-5 * (1.0 + abs(oa))
            assert oa >= ob - 1e-5 * (1.0 + abs(ob))


class TestRegularizationPaths:
    def test_elastic_net_l2_mass_nonincreasing(self):
        l2_masses = []
        for lt in (0.0, 1e-3, 1e-1):
            prog, _, _ = make_program(4, 2, 0.05, lt, seed=14)
            sol, diag = solve(prog)
            assert diag.status == "converged"
            l2_masses.append(float((sol.u ** 2).sum()))
        assert l2_masses[0] >= l2_masses[1] - 1e-9
        assert l2_masses[1] >= l2_masses[2] - 1e-9

    def test_large_lambda_kills_solution(self):
        prog, data, ps = make_program(5, 2, 0.0, 0.0, seed=15)
        # zero is optimal once lam covers every block's gradient at the origin
        masks = ps.masks()
        lam_star = max(
            float(np.abs((2.0 / data.n) * data.X.T @ (m * data.y)).max())
            for m in masks
        )
        lam = lam_star * 1.05
        trials = 0
        while trials < 8:
            prog2 = assemble(data, ps, lam, 0.0)
            sol, _ = solve(prog2)
            if np.abs(sol.u).max() <= 1e-8:
                break
            lam *= 2.0
            trials += 1
        assert trials < 8
        assert lam <= lam_star * 2.1  # the threshold estimate is nearly sharp

    def test_convergence_rate_probe(self):
        # strongly convex instance: iterate error collapses between T=50 and T=5000
        prog, _, _ = make_program(3, 2, 0.1, 1e-2, seed=16)
        ref = solve_oracle(prog, iters=40_000, proj_cycles=40).u

        def err_at(T):
            cfg = SolverConfig(max_iters=T, abs_tol=1e-30, rel_tol=1e-30,
                               feasibility_tol=1e-30)
            sol, _ = solve(prog, cfg)
            return float(((sol.u - ref) ** 2).sum())

        e50, e5000 = err_at(50), err_at(5000)
        assert e5000 <= 1e-4 * e50
