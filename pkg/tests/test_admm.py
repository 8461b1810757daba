import numpy as np
import pytest
from dataclasses import replace

from sparsebeam import (
    AdmmConfig,
    AntennaPowerConstraint,
    ArrayGeometry,
    ConfigurationError,
    InfeasibleProblemError,
    PassbandConstraint,
    ProblemInstance,
    ProjectionError,
    StopbandConstraint,
    WeakPenaltyWarning,
    check_penalty_ratio,
    find_feasible_point,
    initialize,
    solve,
    steering_vector,
    update_u,
    update_v,
    update_w,
)
import sparsebeam.admm as admm_module

from helpers import random_stack


def toy_problem(constraints, M, N, eta=0.0):
    return ProblemInstance(constraints=tuple(constraints), eta=eta, M=M, N=N)


class TestUpdateW:
    def test_single_copy(self):
        x = np.array([2.0, 4.0], dtype=complex)
        v = x[np.newaxis, :].copy()
        u = np.zeros_like(v)
        # rho/(2 + rho) with rho = 2 gives x/2
        assert np.allclose(update_w(v, u, 2.0), x / 2.0)

    def test_zero_sum(self):
        v = np.zeros((5, 4), dtype=complex)
        u = np.zeros((5, 4), dtype=complex)
        assert np.all(update_w(v, u, 50.0) == 0)

    def test_paper_scale_factor(self):
        rng = np.random.default_rng(0)
        v = rng.standard_normal((38, 20)) + 1j * rng.standard_normal((38, 20))
        u = rng.standard_normal((38, 20)) + 1j * rng.standard_normal((38, 20))
        w = update_w(v, u, 50.0)
        assert np.allclose(w, (50.0 / 1902.0) * (v + u).sum(axis=0))

    def test_normal_equation(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            L = int(rng.integers(1, 40))
            n = int(rng.integers(1, 12))
            rho = float(rng.uniform(0.1, 80))
            v = rng.standard_normal((L, n)) + 1j * rng.standard_normal((L, n))
            u = rng.standard_normal((L, n)) + 1j * rng.standard_normal((L, n))
            w = update_w(v, u, rho)
            residual = 2.0 * w + rho * (L * w - (v + u).sum(axis=0))
            assert np.linalg.norm(residual) <= 1e-10 * (1 + np.linalg.norm(w))


class TestUpdateU:
    def test_consensus_leaves_duals(self):
        rng = np.random.default_rng(2)
        u = rng.standard_normal((3, 4)) + 0j
        w = rng.standard_normal(4) + 0j
        v = np.tile(w, (3, 1))
        assert np.allclose(update_u(u, v, w), u)

    def test_difference_accumulates(self):
        u = np.zeros((1, 2), dtype=complex)
        v = np.array([[1.0, 2.0]], dtype=complex)
        w = np.array([0.5, 0.5], dtype=complex)
        assert np.allclose(update_u(u, v, w), [[0.5, 1.5]])

    def test_telescoping_sum(self):
        rng = np.random.default_rng(3)
        u = np.zeros((2, 3), dtype=complex)
        total = np.zeros((2, 3), dtype=complex)
        for _ in range(7):
            v = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
            w = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            u = update_u(u, v, w)
            total += v - w[np.newaxis, :]
        assert np.allclose(u, total)


class TestUpdateV:
    def test_zero_center_stays_zero_for_relaxable_constraints(self):
        M, N = 2, 2
        c = StopbandConstraint(30.0, steering_vector(ArrayGeometry(N, 0.5), 30.0), 0.5, M, N)
        problem = toy_problem([c], M, N)
        w = np.array([1.0, 2.0, 3.0, 4.0], dtype=complex)
        u = w[np.newaxis, :].copy()  # c_l = w - u_l = 0
        v = update_v(problem, w, u, eta=0.5, rho=1.0, parallel=1)
        assert np.all(v == 0)

    def test_feasible_shrunk_point_passes_through(self):
        M, N = 2, 3
        c = AntennaPowerConstraint(0, 100.0, M, N)
        problem = toy_problem([c], M, N)
        rng = np.random.default_rng(4)
        w = random_stack(rng, M, N)
        u = np.zeros((1, M * N), dtype=complex)
        v = update_v(problem, w, u, eta=0.0, rho=1.0, parallel=1)
        assert np.array_equal(v[0], w)  # eta=0 shrink is identity, constraint loose

    def test_parallel_matches_serial(self, paper_problem):
        rng = np.random.default_rng(5)
        w = random_stack(rng, paper_problem.M, paper_problem.N)
        u = 0.1 * (
            rng.standard_normal((paper_problem.L, paper_problem.size))
            + 1j * rng.standard_normal((paper_problem.L, paper_problem.size))
        )
        v1 = update_v(paper_problem, w, u, eta=0.1, rho=50.0, parallel=1)
        v8 = update_v(paper_problem, w, u, eta=0.1, rho=50.0, parallel=8)
        assert np.array_equal(v1, v8)


class TestFeasiblePoint:
    def test_paper_scenario(self, paper_problem, paper_scenario):
        w0 = find_feasible_point(paper_problem, seed=paper_scenario.seed)
        assert paper_problem.max_violation(w0) <= 1e-6

    def test_small_loose_problem(self):
        # one user, two antennas, loose thresholds: stages 1-2 suffice
        geom = ArrayGeometry(2, 0.5)
        M, N = 1, 2
        h = steering_vector(geom, 0.0)
        from sparsebeam import SinrConstraint, UserChannel

        constraints = [
            PassbandConstraint(0.0, steering_vector(geom, 0.0), 0.5, M, N),
            StopbandConstraint(60.0, steering_vector(geom, 60.0), 4.0, M, N),
            AntennaPowerConstraint(0, 10.0, M, N),
            AntennaPowerConstraint(1, 10.0, M, N),
            SinrConstraint(0, h, 2.0, 1.0, M, N),
        ]
        problem = ProblemInstance(
            constraints=tuple(constraints),
            eta=0.0,
            M=M,
            N=N,
            channels=(UserChannel(0, h, 1.0, 2.0),),
        )
        w0 = find_feasible_point(problem, seed=0)
        assert problem.max_violation(w0) <= 1e-8

    def test_contradictory_thresholds_reported(self):
        # same steering direction forced above 1.0 and below ~0: no solution
        geom = ArrayGeometry(3, 0.5)
        M, N = 1, 3
        a = steering_vector(geom, 10.0)
        constraints = [
            PassbandConstraint(10.0, a, 1.0, M, N),
            StopbandConstraint(10.0, a.copy(), 1e-12, M, N),
        ]
        problem = toy_problem(constraints, M, N)
        with pytest.raises(InfeasibleProblemError) as err:
            find_feasible_point(problem, seed=0)
        assert err.value.worst_violations
        assert any(v > 0 for _, v in err.value.worst_violations)

    def test_no_constraints_gives_zero(self):
        problem = toy_problem([], 2, 3)
        state = initialize(problem, seed=0)
        assert np.all(state.w == 0)
        assert state.v.shape == (0, 6)


class TestInitialize:
    def test_duals_zero_and_copies_equal(self, paper_problem, paper_scenario):
        state = initialize(paper_problem, seed=paper_scenario.seed)
        assert np.all(state.u == 0)
        assert all(np.array_equal(state.v[l], state.w) for l in range(paper_problem.L))

    def test_infeasible_scenario_raises(self, paper_scenario):
        sc = replace(
            paper_scenario,
            mainlobe_threshold=1e6,
            antenna_power_limit_w=tuple([1e-3] * 10),
        )
        from sparsebeam import assemble

        with pytest.raises(InfeasibleProblemError):
            initialize(assemble(sc), seed=0)


class TestPenaltyRatioWarning:
    def test_warns_when_weak(self):
        cfg = AdmmConfig(eta=1.0, rho=0.1, k_max=1)
        with pytest.warns(WeakPenaltyWarning):
            check_penalty_ratio(cfg, L=10)  # 0.05 < 10*0.1

    def test_paper_values_do_not_warn(self):
        import warnings as w

        cfg = AdmmConfig(eta=0.1, rho=50.0, k_max=100)
        with w.catch_warnings():
            w.simplefilter("error", WeakPenaltyWarning)
            check_penalty_ratio(cfg, L=38)  # 25 >> 0.0263


class TestSolve:
    def test_zero_iterations_returns_initial_state(self, paper_problem, paper_scenario):
        cfg = replace(paper_scenario.admm, k_max=0)
        state = solve(paper_problem, cfg, seed=paper_scenario.seed)
        assert state.k == 0 and state.history == []
        assert paper_problem.max_violation(state.w) <= 1e-6

    def test_inactive_constraint_gives_geometric_decay(self):
        # one never-active power cap: v = c every iteration, duals vanish,
        # and w contracts by exactly rho/(2 + rho) per step
        M, N = 1, 2
        problem = toy_problem([AntennaPowerConstraint(0, 1e12, M, N)], M, N)
        cfg = AdmmConfig(eta=0.0, rho=2.0, k_max=12)
        state = solve(problem, cfg, seed=0)
        # w0 = 0 for this problem (no channels, no passband), so drive it by hand
        w = np.array([1.0, 1.0j], dtype=complex)
        state.v[0] = w
        state.u[0] = 0
        norms = []
        v, u = state.v, state.u
        for _ in range(10):
            w_new = update_w(v, u, 2.0)
            v = update_v(problem, w_new, u, 0.0, 2.0)
            u = update_u(u, v, w_new)
            norms.append(np.linalg.norm(w_new))
        ratios = [norms[i + 1] / norms[i] for i in range(3, 9)]
        assert all(r == pytest.approx(0.5, rel=1e-12) for r in ratios)

    def test_paper_scenario_residual_trend(self, paper_problem, paper_scenario):
        cfg = replace(paper_scenario.admm, k_max=1000)
        state = solve(paper_problem, cfg, seed=paper_scenario.seed)
        h = state.history
        # the consensus-initialized run starts AT consensus, so the primal
        # residual first grows from near zero before decaying; the tenfold
        # drop demanded of the trajectory shows up over the full horizon
        assert h[-1].primal_residual <= 0.1 * h[4].primal_residual
        assert h[-1].dual_residual <= 0.1 * h[0].dual_residual
        assert h[-1].objective < h[0].objective

    def test_parallel_determinism(self, paper_problem, paper_scenario):
        cfg1 = replace(paper_scenario.admm, k_max=12, parallel=1)
        cfg8 = replace(paper_scenario.admm, k_max=12, parallel=8)
        s1 = solve(paper_problem, cfg1, seed=paper_scenario.seed)
        s8 = solve(paper_problem, cfg8, seed=paper_scenario.seed)
        assert np.array_equal(s1.w, s8.w)
        assert s1.history == s8.history

    def test_early_stopping_requires_both_tolerances(self, paper_problem, paper_scenario):
        cfg = replace(paper_scenario.admm, k_max=50, primal_tol=1e3, dual_tol=1e3)
        state = solve(paper_problem, cfg, seed=paper_scenario.seed)
        assert state.k == 1  # both residuals trivially below huge tolerances

    def test_projection_failure_aborts_with_context(self, paper_problem, paper_scenario, monkeypatch):
        w0 = find_feasible_point(paper_problem, seed=paper_scenario.seed)
        monkeypatch.setattr(
            admm_module, "find_feasible_point", lambda problem, seed=0: w0.copy()
        )
        calls = {"n": 0}
        original = admm_module.project

        def flaky(constraint, vbar):
            calls["n"] += 1
            if calls["n"] == 40:  # second iteration, second constraint
                raise ProjectionError("synthetic failure", {"detail": 1})
            return original(constraint, vbar)

        monkeypatch.setattr(admm_module, "project", flaky)
        cfg = replace(paper_scenario.admm, k_max=5)
        with pytest.raises(ProjectionError) as err:
            solve(paper_problem, cfg, seed=paper_scenario.seed)
        assert "iteration 2" in str(err.value)
        assert "l=1" in str(err.value)
        assert err.value.diagnostics.get("iteration") == 2


class TestAdmmConfig:
    def test_validation(self):
        with pytest.raises(ConfigurationError):
            AdmmConfig(eta=-1.0, rho=1.0)
        with pytest.raises(ConfigurationError):
            AdmmConfig(eta=0.0, rho=0.0)
        with pytest.raises(ConfigurationError):
            AdmmConfig(eta=0.0, rho=1.0, k_max=-1)
        with pytest.raises(ConfigurationError):
            AdmmConfig(eta=0.0, rho=1.0, primal_tol=0.0)
        with pytest.raises(ConfigurationError):
            AdmmConfig(eta=0.0, rho=1.0, parallel=0)
