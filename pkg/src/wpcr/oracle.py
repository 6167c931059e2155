"""Independent numerical checks of the solver: exhaustive grid search,
projected-gradient ascent, first-order optimality residuals, and curvature.

Nothing in here uses the closed form; agreement between these routes and the
solver is the evidence that the closed form is right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import as_allocation, as_snr_vector
from .solver import LN2, SolverOutcome, marginal_rate

__all__ = [
    "KktReport",
    "grid_oracle",
    "ascent_oracle",
    "kkt_residuals",
    "throughput_hessian",
    "rate_constraint_hessian",
    "fd_gradient",
    "fd_hessian",
    "rate_gradient",
    "rates_batch",
]


def rates_batch(gamma: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Per-pair rates for a batch of allocations, shape (M, N+2) -> (M, N+1)."""
    t0 = tau[:, :1]
    ti = tau[:, 1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = ti * np.log2(1.0 + gamma[None, :] * t0 / np.where(ti > 0.0, ti, 1.0))
    return np.where(ti > 0.0, r, 0.0)


def _compositions(total: int, parts: int):
    """Yield integer composition blocks of `total` into `parts` parts as arrays."""
    if parts == 2:
        i = np.arange(total + 1)
        yield np.stack([i, total - i], axis=1)
        return
    for head in range(total + 1):
        for block in _compositions(total - head, parts - 1):
            yield np.hstack([np.full((block.shape[0], 1), head), block])


def grid_oracle(gamma, delta: float, resolution: int = 200) -> np.ndarray:
    """Exhaustive search over the simplex grid with spacing 1/resolution.

    Enumerates every duration vector whose entries are multiples of
    1/resolution and sum to 1, discards those violating the primary rate
    floor, and returns the best. Intended for up to two secondary pairs.
    """
    gamma = as_snr_vector(gamma)
    delta = float(delta)
    if gamma.size > 3:
        raise ValueError("grid oracle is exhaustive; use it with at most two secondary pairs")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    parts = gamma.size + 1
    best_tau = None
    best_r = -math.inf
    for block in _compositions(resolution, parts):
        tau = block.astype(float) / resolution
        rates = rates_batch(gamma, tau)
        ok = rates[:, 0] >= delta
        if not np.any(ok):
            continue
        rsum = rates.sum(axis=1)
        rsum[~ok] = -math.inf
        i = int(np.argmax(rsum))
        if rsum[i] > best_r:
            best_r = float(rsum[i])
            best_tau = tau[i].copy()
    if best_tau is None:
        raise ValueError("no grid point satisfies the rate floor at this resolution")
    return best_tau


def rate_gradient(gamma: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Analytic gradient of the sum rate in bits: d/dtau_0 and d/dtau_i."""
    g = np.empty_like(tau)
    x = gamma * tau[0] / tau[1:]
    omega = 1.0 + x
    g[0] = float(np.sum(gamma / omega)) / LN2
    g[1:] = marginal_rate(x) / LN2
    return g


def _r1_gradient(gamma1: float, tau: np.ndarray) -> np.ndarray:
    g = np.zeros_like(tau)
    x = gamma1 * tau[0] / tau[1]
    g[0] = gamma1 / (1.0 + x) / LN2
    g[1] = marginal_rate(x) / LN2
    return g


def _project_simplex(v: np.ndarray, total: float, floor: float) -> np.ndarray:
    """Euclidean projection onto {x >= floor, sum x = total} (sort method)."""
    w = v - floor
    z = total - floor * v.size
    u = np.sort(w)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    cond = u + (z - css) / idx > 0.0
    rho = int(np.nonzero(cond)[0][-1])
    lam = (z - css[rho]) / (rho + 1.0)
    return np.maximum(w + lam, 0.0) + floor


def _best_primary_split(gamma1: float) -> np.ndarray:
    """Numerically maximize the primary rate over tau0 with tau1 = 1 - tau0.

    Plain ternary search; keeps this module independent of the closed form.
    """
    lo, hi = 1e-9, 1.0 - 1e-9

    def r1(t0):
        return (1.0 - t0) * math.log2(1.0 + gamma1 * t0 / (1.0 - t0))

    for _ in range(200):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if r1(m1) < r1(m2):
            lo = m1
        else:
            hi = m2
    t0 = 0.5 * (lo + hi)
    return np.array([t0, 1.0 - t0])


def _phi_inv(t: np.ndarray) -> np.ndarray:
    """Vectorized inverse of marginal_rate on x >= 0 (safeguarded Newton).

    Seeds sit above the root for every t, so with the positivity guard the
    iteration is monotone after at most one overshoot; 16 steps reaches
    machine precision with a wide margin.
    """
    t = np.asarray(t, dtype=float)
    x = np.where(t < 1.0, np.sqrt(2.0 * t) + t, np.expm1(np.minimum(t + 1.0, 700.0)))
    x = np.maximum(x, 1e-300)
    for _ in range(16):
        xp1 = 1.0 + x
        fx = np.log1p(x) - x / xp1 - t
        xn = x - fx * xp1 * xp1 / x
        x = np.where(xn > 0.0, xn, x / 2.0)
    return np.where(t > 0.0, x, 0.0)


def _illinois(f, lo: float, hi: float, flo: float, fhi: float,
              iters: int = 80, xtol: float = 4e-16):
    """Bracketed root of a continuous scalar function (Illinois variant).

    Needs flo and fhi of opposite sign; keeps the bracket valid while
    converging far faster than bisection. Returns (root, f(root)).
    """
    a, b, fa, fb = lo, hi, flo, fhi
    side = 0
    c, fc = b, fb
    for _ in range(iters):
        denom = fb - fa
        if denom == 0.0:
            c = 0.5 * (a + b)
        else:
            c = b - fb * (b - a) / denom
            if not (min(a, b) < c < max(a, b)):
                c = 0.5 * (a + b)
        fc = f(c)
        if fc == 0.0:
            return c, 0.0
        if (fc < 0.0) == (fa < 0.0):
            a, fa = c, fc
            if side == -1:
                fb *= 0.5
            side = -1
        else:
            b, fb = c, fc
            if side == 1:
                fa *= 0.5
            side = 1
        if abs(b - a) <= xtol * max(1.0, abs(a), abs(b)):
            break
    return c, fc


def _weighted_split(gamma: np.ndarray, mu: float) -> np.ndarray:
    """Exact maximizer of rsum + mu*r1 on the simplex via nested bisection.

    Stationarity in the data durations gives x_j = phi_inv(lam*ln2/w_j) with
    w_1 = 1+mu and w_j = 1 otherwise; the charge-duration condition
    sum_j w_j*gamma_j/(1+x_j) = lam*ln2 is strictly decreasing in lam, so a
    scalar bisection pins lam and the allocation follows. No Lambert W and no
    golden section anywhere in here.
    """
    w = np.ones(gamma.size)
    w[0] += mu
    wg = w * gamma

    def excess(lam):
        x = _phi_inv(lam * LN2 / w)
        return float(np.sum(wg / (1.0 + x))) - lam * LN2

    hi = 1.0
    fhi = excess(hi)
    for _ in range(400):
        if fhi < 0.0:
            break
        hi *= 2.0
        fhi = excess(hi)
    else:
        raise ValueError("charge-duration stationarity would not bracket")
    lam, _ = _illinois(excess, 0.0, hi, float(np.sum(wg)), fhi)
    x = _phi_inv(lam * LN2 / w)
    ratio = gamma / x
    tau0 = 1.0 / (1.0 + float(np.sum(ratio)))
    tau = np.empty(gamma.size + 1)
    tau[0] = tau0
    tau[1:] = tau0 * ratio
    return tau


def _floor_refine(gamma: np.ndarray, delta: float) -> np.ndarray:
    """Constrained optimum by bisection on the rate-floor multiplier.

    The primary rate of the weighted optimum is nondecreasing in the weight,
    so bisection on mu >= 0 drives it onto the floor. Pure monotone scalar
    bisections throughout; serves as a closed-form-free polish stage.
    """

    def r1_of(tau):
        return float(rates_batch(gamma, tau[None, :])[0, 0])

    tau = _weighted_split(gamma, 0.0)
    gap0 = r1_of(tau) - delta
    if gap0 >= 0.0:
        return tau
    mu_lo, mu_hi = 0.0, 1.0
    tau_hi = _weighted_split(gamma, mu_hi)
    guard = 0
    while r1_of(tau_hi) < delta:
        mu_lo, mu_hi = mu_hi, mu_hi * 4.0
        tau_hi = _weighted_split(gamma, mu_hi)
        guard += 1
        if guard > 400:
            raise ValueError("rate floor not reachable by any multiplier")
    best = [tau_hi]

    def floor_gap(mu):
        cand = _weighted_split(gamma, mu)
        g = r1_of(cand) - delta
        if g >= 0.0:
            best[0] = cand
        return g

    flo = gap0 if mu_lo == 0.0 else r1_of(_weighted_split(gamma, mu_lo)) - delta
    _illinois(floor_gap, mu_lo, mu_hi, flo, r1_of(tau_hi) - delta)
    return best[0]


def ascent_oracle(gamma, delta: float, *, restarts: int = 3, seed: int = 0,
                  max_iters: int = 3000, return_history: bool = False):
    """Projected-gradient ascent on the duration simplex.

    Multistart BB ascent with Armijo backtracking. A rate floor is handled
    by an exact penalty whose weight starts at 1e2 and is multiplied by 10
    until the violation drops below 1e-8, then a final feasibility
    projection toward the all-primary split. Because the penalty surface is
    kinked at the floor, a closed-form-free polish stage (nested monotone
    bisection on the KKT multipliers) is run as an extra candidate and the
    best feasible point wins. Deterministic for a given seed.
    """
    gamma = as_snr_vector(gamma)
    delta = float(delta)
    if delta < 0.0:
        raise ValueError("delta must be nonnegative")
    rng = np.random.default_rng(seed)
    dims = gamma.size + 1
    floor = 1e-12

    def rsum(tau):
        return float(rates_batch(gamma, tau[None, :])[0].sum())

    def r1(tau):
        return float(rates_batch(gamma, tau[None, :])[0, 0])

    def penalized(tau, rho):
        return rsum(tau) - rho * max(0.0, delta - r1(tau))

    def grad(tau, rho):
        g = rate_gradient(gamma, tau)
        if rho > 0.0 and r1(tau) < delta:
            g = g + rho * _r1_gradient(gamma[0], tau)
        return g

    def climb(tau, rho, history, iters):
        f = penalized(tau, rho)
        step = 0.1 / max(1.0, float(np.max(np.abs(grad(tau, rho)))))
        prev_tau = None
        prev_g = None
        stalls = 0
        for _ in range(iters):
            g = grad(tau, rho)
            if prev_tau is not None:
                dx = tau - prev_tau
                dg = g - prev_g
                denom = abs(float(np.dot(dx, dg)))
                if denom > 1e-300:
                    step = min(max(float(np.dot(dx, dx)) / denom, 1e-14), 1e6)
            prev_tau, prev_g = tau, g
            alpha = step
            accepted = False
            for _ in range(60):
                cand = _project_simplex(tau + alpha * g, 1.0, floor)
                fc = penalized(cand, rho)
                gain = float(np.dot(g, cand - tau))
                if fc >= f + 1e-4 * gain and fc >= f:
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                break
            if history is not None:
                history.append(fc)
            move = float(np.max(np.abs(cand - tau)))
            stalls = stalls + 1 if fc - f <= 1e-13 * (1.0 + abs(fc)) else 0
            tau, f = cand, fc
            if move <= 1e-15 or stalls >= 8:
                break
        return tau

    starts = [np.full(dims, 1.0 / dims)]
    starts += [rng.dirichlet(np.ones(dims)) for _ in range(restarts)]

    history = [] if return_history else None
    best = None
    best_r = -math.inf
    for s in starts:
        tau = _project_simplex(np.asarray(s, dtype=float), 1.0, floor)
        if delta == 0.0:
            tau = climb(tau, 0.0, history, max_iters)
        else:
            rho = 1e2
            while True:
                tau = climb(tau, rho, history, min(max_iters, 400))
                if delta - r1(tau) < 1e-8 or rho >= 1e12:
                    break
                rho *= 10.0
            if r1(tau) < delta:
                # Blend toward the all-primary split to clear the residue.
                target = np.zeros(dims)
                target[:2] = _best_primary_split(float(gamma[0]))
                lo_s, hi_s = 0.0, 1.0
                if r1(target) >= delta:
                    for _ in range(100):
                        mid = 0.5 * (lo_s + hi_s)
                        if r1(tau + mid * (target - tau)) >= delta:
                            hi_s = mid
                        else:
                            lo_s = mid
                    tau = tau + hi_s * (target - tau)
        r = rsum(tau)
        if delta > 0.0 and r1(tau) < delta - 1e-7:
            continue
        if r > best_r:
            best_r = r
            best = tau
    # Closed-form-free polish candidate; the simplex stays exactly budgeted
    # by construction, so only the floor needs a feasibility glance.
    try:
        cand = _floor_refine(gamma, delta) if delta > 0.0 else _weighted_split(gamma, 0.0)
        if (delta == 0.0 or r1(cand) >= delta - 1e-9) and rsum(cand) > best_r:
            best_r = rsum(cand)
            best = cand
    except ValueError:
        pass
    if best is None:
        raise ValueError("ascent failed to reach the rate floor from any start")
    if return_history:
        return best, history
    return best


@dataclass(eq=False)
class KktReport:
    """First-order optimality residuals at a solver outcome."""

    stationarity_norm: float
    c1_slack: float        # achieved primary rate minus the floor
    budget_slack: float    # unused slot time
    comp_c1: float         # mu1 * (delta - r1)
    comp_c3: float         # mu2 * (sum tau - 1)


def kkt_residuals(outcome: SolverOutcome, gamma, delta: float) -> KktReport:
    """Stationarity and complementary-slackness residuals, all in bits.

    The Lagrangian gradient entries are d(rsum)/dtau_k + mu1*d(r1)/dtau_k
    - mu2; they must vanish at any optimum with positive durations.
    """
    gamma = as_snr_vector(gamma)
    if outcome.tau is None:
        raise ValueError("infeasible outcome carries no allocation to check")
    tau = as_allocation(outcome.tau, gamma.size + 1)
    x = gamma * tau[0] / tau[1:]
    omega = 1.0 + x
    grad = np.empty(tau.size)
    grad[0] = float(np.sum(gamma / omega)) / LN2 + outcome.mu1 * gamma[0] / omega[0] / LN2 - outcome.mu2
    grad[1] = (1.0 + outcome.mu1) * marginal_rate(float(x[0])) / LN2 - outcome.mu2
    if tau.size > 2:
        grad[2:] = marginal_rate(x[1:]) / LN2 - outcome.mu2
    rates = rates_batch(gamma, tau[None, :])[0]
    r1 = float(rates[0])
    total = float(tau.sum())
    return KktReport(
        stationarity_norm=float(np.max(np.abs(grad))),
        c1_slack=r1 - float(delta),
        budget_slack=1.0 - total,
        comp_c1=outcome.mu1 * (float(delta) - r1),
        comp_c3=outcome.mu2 * (total - 1.0),
    )


def throughput_hessian(gamma, tau, i: int) -> np.ndarray:
    """Hessian of pair i's rate in the full duration vector (bits).

    Only the (0,0), (0,i), (i,i) entries are nonzero:
        d2R/dtau0^2   = -gamma_i^2 / (tau_i * omega^2 * ln 2)
        d2R/dtau0 dtau_i =  gamma_i^2 * tau0 / (tau_i^2 * omega^2 * ln 2)
        d2R/dtau_i^2  = -gamma_i^2 * tau0^2 / (tau_i^3 * omega^2 * ln 2)
    with omega = 1 + gamma_i*tau0/tau_i. Rank <= 2 with determinant zero on
    the active 2x2 block, hence negative semidefinite.
    """
    gamma = as_snr_vector(gamma)
    tau = as_allocation(tau, gamma.size + 1)
    if not 1 <= i <= gamma.size:
        raise ValueError("pair index out of range")
    if tau[0] <= 0.0 or tau[i] <= 0.0:
        raise ValueError("hessian needs strictly positive tau0 and tau_i")
    g = float(gamma[i - 1])
    t0, ti = float(tau[0]), float(tau[i])
    omega = 1.0 + g * t0 / ti
    c = g * g / (omega * omega * LN2)
    h = np.zeros((tau.size, tau.size))
    h[0, 0] = -c / ti
    h[0, i] = h[i, 0] = c * t0 / (ti * ti)
    h[i, i] = -c * t0 * t0 / (ti ** 3)
    return h


def rate_constraint_hessian(gamma1: float, tau0: float, tau1: float) -> np.ndarray:
    """Hessian of (floor - primary rate) in (tau0, tau1): positive semidefinite.

    It is minus the primary-rate Hessian block, so the diagonal is positive
    and the determinant is exactly zero.
    """
    gamma1 = float(gamma1)
    if gamma1 <= 0.0 or tau0 <= 0.0 or tau1 <= 0.0:
        raise ValueError("needs positive gamma1, tau0, tau1")
    omega = 1.0 + gamma1 * tau0 / tau1
    c = gamma1 * gamma1 / (omega * omega * LN2)
    return np.array([
        [c / tau1, -c * tau0 / (tau1 * tau1)],
        [-c * tau0 / (tau1 * tau1), c * tau0 * tau0 / (tau1 ** 3)],
    ])


def fd_gradient(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient with per-coordinate relative steps."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for k in range(x.size):
        hk = h * max(abs(x[k]), 1e-3)
        e = np.zeros_like(x)
        e[k] = hk
        g[k] = (f(x + e) - f(x - e)) / (2.0 * hk)
    return g


def fd_hessian(f, x: np.ndarray, h: float = 5e-4) -> np.ndarray:
    """Central-difference Hessian with Richardson extrapolation.

    Each entry is computed at steps h and h/2 and combined as
    (4*D_{h/2} - D_h)/3, killing the leading O(h^2) truncation term.
    """
    x = np.asarray(x, dtype=float)
    n = x.size

    def second(i, j, hi, hj):
        ei = np.zeros(n)
        ej = np.zeros(n)
        ei[i] = hi
        ej[j] = hj
        if i == j:
            return (f(x + ei) - 2.0 * f(x) + f(x - ei)) / (hi * hi)
        return (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * hi * hj)

    hess = np.empty((n, n))
    for i in range(n):
        hi = h * max(abs(x[i]), 1e-2)
        for j in range(i, n):
            hj = h * max(abs(x[j]), 1e-2)
            d1 = second(i, j, hi, hj)
            d2 = second(i, j, hi / 2.0, hj / 2.0)
            hess[i, j] = hess[j, i] = (4.0 * d2 - d1) / 3.0
    return hess
