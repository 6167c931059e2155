"""Estimator-style wrappers so the solver composes with scikit-learn
tooling: get_params/set_params for grid configuration, fit to compute an
allocation, score to evaluate it under a possibly different environment.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import as_snr_vector
from .model import sum_throughput
from .baselines import uniform_ta
from .solver import GslsConfig, InfeasibleRateError, solve

__all__ = ["TimeAllocationOptimizer", "UniformTimeAllocator"]


class TimeAllocationOptimizer(BaseEstimator):
    """Computes the throughput-optimal slot split for an SNR vector.

    Parameters
    ----------
    delta : float, default 0.0
        Minimum rate the primary pair must reach. Zero disables the floor.
    xi : float, default 1e-9
        Line-search width tolerance used on the floor-tight branch.

    Attributes after fit
    --------------------
    allocation_ : ndarray of durations (charging first), summing to 1
    mu1_, mu2_ : floor and budget multipliers
    branch_ : "interior" or "boundary"
    rates_ : per-pair rates at the optimum
    r_sum_ : their sum
    """

    def __init__(self, delta: float = 0.0, xi: float = 1e-9):
        self.delta = delta
        self.xi = xi

    def fit(self, gamma, y=None):
        """Solve for the given SNR vector; raises InfeasibleRateError when
        the floor exceeds what the primary pair could ever reach."""
        gamma = as_snr_vector(gamma)
        cfg = GslsConfig(xi=self.xi)
        out = solve(gamma, self.delta, cfg)
        if out.tau is None:
            raise InfeasibleRateError(
                f"rate floor {self.delta} exceeds the achievable maximum {out.r1_max:.6g}"
            )
        self.n_pairs_in_ = gamma.size
        self.allocation_ = out.tau
        self.mu1_ = out.mu1
        self.mu2_ = out.mu2
        self.branch_ = out.kind
        self.rates_ = out.rates
        self.r_sum_ = out.r_sum
        self.outcome_ = out
        return self

    def score(self, gamma, y=None) -> float:
        """Sum throughput of the fitted allocation under `gamma`, which may
        differ from the fit-time vector (mismatched-environment scoring)."""
        check_is_fitted(self, "allocation_")
        gamma = as_snr_vector(gamma)
        if gamma.size != self.n_pairs_in_:
            raise ValueError("gamma has a different number of pairs than at fit time")
        return sum_throughput(gamma, self.allocation_)


class UniformTimeAllocator(BaseEstimator):
    """Baseline that splits the slot evenly across all phases."""

    def fit(self, gamma, y=None):
        gamma = as_snr_vector(gamma)
        self.n_pairs_in_ = gamma.size
        self.allocation_ = uniform_ta(gamma.size - 1)
        self.r_sum_ = sum_throughput(gamma, self.allocation_)
        return self

    def score(self, gamma, y=None) -> float:
        check_is_fitted(self, "allocation_")
        gamma = as_snr_vector(gamma)
        if gamma.size != self.n_pairs_in_:
            raise ValueError("gamma has a different number of pairs than at fit time")
        return sum_throughput(gamma, self.allocation_)
