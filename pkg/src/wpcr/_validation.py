"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

__all__ = ["as_snr_vector", "as_allocation", "check_unit_interval"]


def as_snr_vector(gamma) -> np.ndarray:
    """Coerce to a 1-D float64 array of per-link SNR coefficients, one per data phase.

    Entry 0 is the primary pair; entries 1..N the secondary pairs. All entries
    must be finite and strictly positive.
    """
    arr = np.asarray(gamma, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("snr coefficient vector must be 1-D and non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("snr coefficients must be finite")
    if np.any(arr <= 0.0):
        raise ValueError("snr coefficients must be strictly positive")
    return arr


def as_allocation(tau, n_phases: int | None = None, budget_tol: float = 1e-9) -> np.ndarray:
    """Coerce to a 1-D float64 duration vector; entry 0 is the harvest phase.

    Checks 0 <= tau_k <= 1 and sum(tau) <= 1 + budget_tol.
    """
    arr = np.asarray(tau, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("allocation must be a 1-D vector with at least two phases")
    if n_phases is not None and arr.size != n_phases:
        raise ValueError(f"allocation must have {n_phases} phases, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("allocation entries must be finite")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("allocation entries must lie in [0, 1]")
    if arr.sum() > 1.0 + budget_tol:
        raise ValueError("allocation exceeds the unit slot budget")
    return arr


def check_unit_interval(x: float, name: str, *, open_left=False, open_right=False) -> float:
    x = float(x)
    lo_ok = x > 0.0 if open_left else x >= 0.0
    hi_ok = x < 1.0 if open_right else x <= 1.0
    if not (np.isfinite(x) and lo_ok and hi_ok):
        raise ValueError(f"{name} must lie in the unit interval, got {x!r}")
    return x
