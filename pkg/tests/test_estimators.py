import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from wpcr.estimators import TimeAllocationOptimizer, UniformTimeAllocator
from wpcr.solver import BOUNDARY, INTERIOR, InfeasibleRateError, max_primary_rate, solve


class TestTimeAllocationOptimizer:
    def test_params_round_trip(self):
        est = TimeAllocationOptimizer(delta=2.5, xi=1e-8)
        assert est.get_params() == {"delta": 2.5, "xi": 1e-8}
        est.set_params(delta=1.0)
        assert est.delta == 1.0

    def test_clone_keeps_params_drops_state(self, make_gamma):
        est = TimeAllocationOptimizer(delta=0.0).fit(make_gamma(800, n=2))
        dup = clone(est)
        assert dup.get_params() == est.get_params()
        assert not hasattr(dup, "allocation_")

    def test_fit_exposes_solution(self, make_gamma):
        gamma = make_gamma(801, n=3)
        est = TimeAllocationOptimizer().fit(gamma)
        out = solve(gamma, 0.0)
        np.testing.assert_array_equal(est.allocation_, out.tau)
        assert est.branch_ == INTERIOR
        assert est.mu1_ == 0.0 and est.mu2_ > 0.0
        assert est.r_sum_ == pytest.approx(out.r_sum, rel=1e-15)
        assert est.rates_.shape == (4,)
        assert est.n_pairs_in_ == 4

    def test_floor_branch_and_feasibility(self, make_gamma):
        gamma = make_gamma(802, n=2)
        r1_max = max_primary_rate(float(gamma[0]))
        r1_slack = solve(gamma, 0.0).r1
        delta = r1_slack + 0.6 * (r1_max - r1_slack)
        est = TimeAllocationOptimizer(delta=delta).fit(gamma)
        assert est.branch_ == BOUNDARY
        assert est.rates_[0] >= delta - 1e-9
        assert est.mu1_ >= 0.0

    def test_unreachable_floor_raises(self, make_gamma):
        gamma = make_gamma(803, n=1)
        est = TimeAllocationOptimizer(delta=2.0 * max_primary_rate(float(gamma[0])))
        with pytest.raises(InfeasibleRateError):
            est.fit(gamma)

    def test_score_matches_r_sum_on_fit_vector(self, make_gamma):
        gamma = make_gamma(804, n=2)
        est = TimeAllocationOptimizer().fit(gamma)
        assert est.score(gamma) == pytest.approx(est.r_sum_, rel=1e-12)

    def test_score_under_changed_environment(self, make_gamma):
        gamma = make_gamma(805, n=2)
        est = TimeAllocationOptimizer().fit(gamma)
        richer = gamma * 1.7
        fresh = TimeAllocationOptimizer().fit(richer)
        # stale allocation scored in the new environment cannot beat refitting
        assert est.score(richer) <= fresh.r_sum_ + 1e-12

    def test_score_before_fit_rejected(self, make_gamma):
        with pytest.raises(NotFittedError):
            TimeAllocationOptimizer().score(make_gamma(806, n=1))

    def test_score_size_mismatch_rejected(self, make_gamma):
        est = TimeAllocationOptimizer().fit(make_gamma(807, n=2))
        with pytest.raises(ValueError):
            est.score(make_gamma(807, n=3))


class TestUniformTimeAllocator:
    def test_fit_gives_even_split(self, make_gamma):
        gamma = make_gamma(810, n=3)
        est = UniformTimeAllocator().fit(gamma)
        np.testing.assert_array_equal(est.allocation_, np.full(5, 0.2))
        assert est.r_sum_ > 0.0

    def test_never_beats_optimizer(self, make_gamma):
        gamma = make_gamma(811, n=4)
        uni = UniformTimeAllocator().fit(gamma)
        opt = TimeAllocationOptimizer().fit(gamma)
        assert uni.r_sum_ <= opt.r_sum_

    def test_score_guardrails(self, make_gamma):
        with pytest.raises(NotFittedError):
            UniformTimeAllocator().score(make_gamma(812, n=1))
        est = UniformTimeAllocator().fit(make_gamma(812, n=2))
        with pytest.raises(ValueError):
            est.score(make_gamma(812, n=4))
