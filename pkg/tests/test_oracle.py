import math

import numpy as np
import pytest

from wpcr.oracle import (
    KktReport,
    ascent_oracle,
    fd_gradient,
    fd_hessian,
    grid_oracle,
    kkt_residuals,
    rate_constraint_hessian,
    rate_gradient,
    rates_batch,
    throughput_hessian,
)
from wpcr.solver import (
    BOUNDARY,
    INTERIOR,
    SolverOutcome,
    max_primary_rate,
    solve,
    solve_unconstrained,
)


def rsum_of(gamma, tau):
    return float(rates_batch(np.asarray(gamma, float), np.asarray(tau, float)[None, :])[0].sum())


def midpoint_floor(gamma, frac=0.5):
    unc = solve_unconstrained(gamma)
    r1_max = max_primary_rate(float(gamma[0]))
    return unc.r1 + frac * (r1_max - unc.r1)


class TestGridOracle:
    def test_single_pair_agrees_with_closed_form(self):
        gamma = np.array([250.0])
        out = solve_unconstrained(gamma)
        tau_g = grid_oracle(gamma, 0.0, resolution=1000)
        assert rsum_of(gamma, tau_g) <= out.r_sum + 1e-12
        assert out.r_sum - rsum_of(gamma, tau_g) <= 1e-4 * out.r_sum
        assert np.max(np.abs(tau_g - out.tau)) <= 1.0 / 1000 + 1e-12

    def test_argmax_lands_in_one_cell_without_floor(self, make_gamma):
        for seed in range(3):
            gamma = make_gamma(200 + seed, n=1)
            out = solve(gamma, 0.0)
            tau_g = grid_oracle(gamma, 0.0, resolution=200)
            assert np.max(np.abs(tau_g - out.tau)) <= 1.0 / 200 + 1e-12

    def test_argmax_stays_near_optimum_with_floor(self, make_gamma):
        # the binding floor warps the lattice feasible set, so allow two cells
        for seed in range(3):
            gamma = make_gamma(200 + seed, n=1)
            delta = midpoint_floor(gamma)
            out = solve(gamma, delta)
            tau_g = grid_oracle(gamma, delta, resolution=200)
            assert np.max(np.abs(tau_g - out.tau)) <= 2.0 / 200

    def test_equal_snrs_tie_within_spacing(self):
        gamma = np.array([40.0, 40.0])
        tau_g = grid_oracle(gamma, 0.0, resolution=250)
        assert abs(tau_g[1] - tau_g[2]) <= 1.0 / 250 + 1e-12

    def test_floor_respected(self, make_gamma):
        gamma = make_gamma(210, n=2)
        delta = midpoint_floor(gamma)
        tau_g = grid_oracle(gamma, delta, resolution=60)
        r1 = float(rates_batch(gamma, tau_g[None, :])[0, 0])
        assert r1 >= delta

    def test_impossible_floor_raises(self):
        gamma = np.array([10.0, 10.0])
        with pytest.raises(ValueError):
            grid_oracle(gamma, 2.0 * max_primary_rate(10.0), resolution=50)

    def test_too_many_pairs_rejected(self):
        with pytest.raises(ValueError):
            grid_oracle(np.ones(4) * 10.0, 0.0)

    def test_coarse_resolution_rejected(self):
        with pytest.raises(ValueError):
            grid_oracle(np.array([10.0]), 0.0, resolution=1)


class TestAscentOracle:
    def test_matches_solver_without_floor(self, make_gamma):
        for seed, n in [(0, 1), (1, 3), (2, 5)]:
            gamma = make_gamma(300 + seed, n=n)
            out = solve(gamma, 0.0)
            tau_a = ascent_oracle(gamma, 0.0)
            assert rsum_of(gamma, tau_a) == pytest.approx(out.r_sum, rel=1e-6)

    def test_matches_solver_with_floor(self, make_gamma):
        for seed, n in [(3, 1), (4, 2), (5, 4)]:
            gamma = make_gamma(300 + seed, n=n)
            delta = midpoint_floor(gamma, 0.4 + 0.1 * seed)
            out = solve(gamma, delta)
            tau_a = ascent_oracle(gamma, delta)
            assert rsum_of(gamma, tau_a) == pytest.approx(out.r_sum, rel=1e-6)
            r1 = float(rates_batch(gamma, tau_a[None, :])[0, 0])
            assert r1 >= delta - 1e-7

    def test_never_beats_solver(self, make_gamma):
        for seed in range(4):
            gamma = make_gamma(320 + seed, n=2)
            delta = 0.0 if seed % 2 == 0 else midpoint_floor(gamma)
            out = solve(gamma, delta)
            tau_a = ascent_oracle(gamma, delta)
            assert rsum_of(gamma, tau_a) <= out.r_sum + 1e-9 * out.r_sum

    def test_history_is_monotone(self, make_gamma):
        gamma = make_gamma(330, n=3)
        tau_a, hist = ascent_oracle(gamma, 0.0, restarts=0, return_history=True)
        assert len(hist) > 3
        assert np.all(np.diff(np.asarray(hist)) >= -1e-13)
        assert hist[-1] == pytest.approx(rsum_of(gamma, tau_a), rel=1e-12)

    def test_seed_determinism(self, make_gamma):
        gamma = make_gamma(331, n=2)
        delta = midpoint_floor(gamma)
        a = ascent_oracle(gamma, delta, seed=7)
        b = ascent_oracle(gamma, delta, seed=7)
        np.testing.assert_array_equal(a, b)

    def test_seed_only_moves_result_within_tolerance(self, make_gamma):
        gamma = make_gamma(332, n=2)
        a = ascent_oracle(gamma, 0.0, seed=1)
        b = ascent_oracle(gamma, 0.0, seed=2)
        assert rsum_of(gamma, a) == pytest.approx(rsum_of(gamma, b), rel=1e-8)

    def test_negative_floor_rejected(self):
        with pytest.raises(ValueError):
            ascent_oracle(np.array([10.0]), -1.0)


class TestKktResiduals:
    def test_interior_point(self, make_gamma):
        gamma = make_gamma(400, n=3)
        out = solve(gamma, 0.0)
        rep = kkt_residuals(out, gamma, 0.0)
        assert isinstance(rep, KktReport)
        assert rep.stationarity_norm <= 1e-9 * max(1.0, out.mu2)
        assert rep.comp_c1 == 0.0
        assert abs(rep.budget_slack) <= 1e-12
        assert rep.c1_slack >= 0.0

    def test_boundary_point(self, make_gamma):
        gamma = make_gamma(401, n=3)
        delta = midpoint_floor(gamma)
        out = solve(gamma, delta)
        rep = kkt_residuals(out, gamma, delta)
        assert rep.stationarity_norm <= 1e-6 * max(1.0, out.mu2)
        assert abs(rep.c1_slack) <= 1e-8
        assert abs(rep.comp_c1) <= 1e-6
        assert abs(rep.budget_slack) <= 1e-9

    def test_perturbed_point_flags_stationarity(self, make_gamma):
        gamma = make_gamma(402, n=2)
        out = solve(gamma, 0.0)
        tau = out.tau.copy()
        shift = 0.5 * min(float(tau[1]), float(tau[-1]))
        tau[1] += shift
        tau[-1] -= shift
        fake = SolverOutcome(kind=out.kind, tau=tau, mu1=out.mu1, mu2=out.mu2,
                             rates=out.rates, r_sum=out.r_sum, r1_max=out.r1_max)
        rep = kkt_residuals(fake, gamma, 0.0)
        assert rep.stationarity_norm > 1e-4

    def test_infeasible_outcome_rejected(self, make_gamma):
        gamma = make_gamma(403, n=1)
        out = solve(gamma, 2.0 * out_r1_max(gamma))
        with pytest.raises(ValueError):
            kkt_residuals(out, gamma, 2.0 * out_r1_max(gamma))


def out_r1_max(gamma):
    return max_primary_rate(float(gamma[0]))


class TestHessians:
    def check_point(self, gamma, tau):
        n = gamma.size
        full = sum(throughput_hessian(gamma, tau, i) for i in range(1, n + 1))

        def f(t):
            return rsum_of(gamma, t)

        fd = fd_hessian(f, tau)
        scale = max(1.0, float(np.max(np.abs(full))))
        assert np.max(np.abs(full - fd)) <= 1e-6 * scale

    def test_matches_finite_differences(self, make_gamma):
        rng = np.random.default_rng(55)
        for seed in range(5):
            n = 1 + seed % 3
            gamma = 10.0 ** rng.uniform(0, 3, n + 1)
            raw = rng.uniform(0.1, 1.0, n + 2)
            tau = raw / raw.sum()
            self.check_point(gamma, tau)

    def test_negative_semidefinite(self, make_gamma):
        gamma = make_gamma(500, n=2)
        tau = np.full(4, 0.25)
        for i in (1, 2, 3):
            h = throughput_hessian(gamma, tau, i)
            assert h[0, 0] < 0.0 and h[i, i] < 0.0
            eig = np.linalg.eigvalsh(h)
            assert np.all(eig <= 1e-10)
            block = h[np.ix_([0, i], [0, i])]
            assert abs(np.linalg.det(block)) <= 1e-12 * max(1.0, h[0, 0] ** 2)

    def test_bad_inputs(self, make_gamma):
        gamma = make_gamma(501, n=1)
        tau = np.array([0.4, 0.3, 0.3])
        with pytest.raises(ValueError):
            throughput_hessian(gamma, tau, 0)
        with pytest.raises(ValueError):
            throughput_hessian(gamma, tau, 3)
        with pytest.raises(ValueError):
            throughput_hessian(gamma, np.array([0.0, 0.5, 0.5]), 1)

    def test_constraint_curvature(self):
        h = rate_constraint_hessian(120.0, 0.3, 0.4)
        assert h[0, 0] > 0.0 and h[1, 1] > 0.0
        assert h[0, 1] == h[1, 0]
        assert abs(np.linalg.det(h)) <= 1e-12 * h[0, 0] * h[1, 1]
        assert np.all(np.linalg.eigvalsh(h) >= -1e-12)

    def test_constraint_matches_finite_differences(self):
        g1, t0, t1 = 75.0, 0.25, 0.35

        def neg_r1(v):
            return -(v[1] * math.log2(1.0 + g1 * v[0] / v[1]))

        fd = fd_hessian(neg_r1, np.array([t0, t1]))
        h = rate_constraint_hessian(g1, t0, t1)
        assert np.max(np.abs(h - fd)) <= 1e-6 * max(1.0, float(np.max(np.abs(h))))

    def test_constraint_bad_inputs(self):
        for args in [(0.0, 0.3, 0.4), (10.0, 0.0, 0.4), (10.0, 0.3, 0.0)]:
            with pytest.raises(ValueError):
                rate_constraint_hessian(*args)


class TestGradients:
    def test_analytic_matches_finite_differences(self):
        rng = np.random.default_rng(66)
        worst = 0.0
        for _ in range(200):
            n = 1 + int(rng.integers(0, 4))
            gamma = 10.0 ** rng.uniform(0, 4, n + 1)
            raw = rng.uniform(0.05, 1.0, n + 2)
            tau = raw / raw.sum()
            g = rate_gradient(gamma, tau)

            def f(t):
                return rsum_of(gamma, t)

            fd = fd_gradient(f, tau)
            worst = max(worst, float(np.max(np.abs(g - fd)) / max(1.0, np.max(np.abs(g)))))
        assert worst <= 1e-6

    def test_fd_hessian_exact_on_quadratics(self):
        a = np.array([[2.0, 0.5, 0.0], [0.5, 3.0, -1.0], [0.0, -1.0, 4.0]])

        def f(x):
            return 0.5 * float(x @ a @ x)

        fd = fd_hessian(f, np.array([0.2, -0.4, 0.9]))
        assert np.max(np.abs(fd - a)) <= 1e-6


class TestCrossChecks:
    def test_grid_never_beats_solver(self, make_gamma):
        for seed in range(3):
            gamma = make_gamma(600 + seed, n=1 + seed % 2)
            out = solve(gamma, 0.0)
            tau_g = grid_oracle(gamma, 0.0, resolution=80)
            assert rsum_of(gamma, tau_g) <= out.r_sum * (1.0 + 1e-12)

    def test_grid_never_beats_solver_with_floor(self, make_gamma):
        gamma = make_gamma(601, n=2)
        delta = midpoint_floor(gamma, 0.3)
        out = solve(gamma, delta)
        tau_g = grid_oracle(gamma, delta, resolution=80)
        assert rsum_of(gamma, tau_g) <= out.r_sum * (1.0 + 1e-12)

    def test_branches_seen(self, make_gamma):
        gamma = make_gamma(610, n=2)
        assert solve(gamma, 0.0).kind == INTERIOR
        assert solve(gamma, midpoint_floor(gamma)).kind == BOUNDARY
