"""Globally optimal slot partition: closed form plus a one-dimensional search.

The slot problem maximizes sum throughput subject to a floor on the primary
pair's rate. It is concave over the simplex of durations, so exactly one of
three things happens:

* the rate floor is unattainable even with every second handed to the primary
  pair ("infeasible");
* the floor is slack at the unconstrained optimum, which has a closed form via
  the Lambert W function ("interior");
* the floor binds, which pins the harvest phase to the primary phase through
  the rate equation and leaves a single scalar root problem in the primary
  phase duration, solved by golden-section search plus bisection ("boundary").

At an interior optimum every data phase sees the same local SNR: the common
value of 1 + gamma_k * tau0 / tau_k solves w*ln(w) - w + 1 = total_snr, i.e.
w = (G - 1) / W((G - 1)/e).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import as_snr_vector

__all__ = [
    "LN2",
    "INV_PHI",
    "INFEASIBLE",
    "INTERIOR",
    "BOUNDARY",
    "InfeasibleRateError",
    "GslsConfig",
    "GoldenSectionResult",
    "SolverOutcome",
    "lambert_w0",
    "marginal_rate",
    "optimal_snr_factor",
    "max_primary_rate",
    "wpt_time_for_rate",
    "constrained_stationarity_residual",
    "golden_section_search",
    "golden_section_eval_bound",
    "solve_unconstrained",
    "solve_constrained",
    "solve",
]

LN2 = math.log(2.0)
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_BRANCH_POINT = -math.exp(-1.0)            # lower end of the Lambert W_0 domain
_MAX_EXP = 700.0                           # exp overflow guard

INFEASIBLE = "infeasible"
INTERIOR = "interior"
BOUNDARY = "boundary"


class InfeasibleRateError(RuntimeError):
    """Raised when the primary rate floor exceeds the maximum achievable rate."""


@dataclass(frozen=True)
class GslsConfig:
    """Golden-section search settings: interval tolerance and search domain."""

    xi: float = 1e-9
    bracket_lo: float = 1e-6
    bracket_hi: float = 1.0 - 1e-6
    max_iters: int = 200

    def __post_init__(self):
        if not (0.0 < self.bracket_lo < self.bracket_hi < 1.0):
            raise ValueError("bracket must satisfy 0 < lo < hi < 1")
        if not (0.0 < self.xi < self.bracket_hi - self.bracket_lo):
            raise ValueError("xi must be positive and smaller than the bracket width")
        if self.max_iters < 2:
            raise ValueError("max_iters must allow at least the two seed evaluations")


@dataclass(eq=False)
class GoldenSectionResult:
    x: float
    fx: float
    n_evals: int
    width: float
    history: list  # (x, f(x)) pairs in evaluation order


@dataclass(eq=False)
class SolverOutcome:
    """Solution record: branch label, durations, multipliers, achieved rates.

    `tau` and `rates` are None only for the infeasible branch. `r1_max` is the
    highest primary rate the instance supports (the feasibility gate value).
    """

    kind: str
    tau: np.ndarray | None
    mu1: float
    mu2: float
    rates: np.ndarray | None
    r_sum: float
    r1_max: float
    gsls_evals: int = 0
    bracket: tuple[float, float] | None = None

    @property
    def r1(self) -> float:
        return float(self.rates[0]) if self.rates is not None else math.nan


def lambert_w0(x: float) -> float:
    """Principal real branch of w*exp(w) = x via Halley iteration.

    Valid for x >= -1/e. Seeds: a branch-point square-root series near -1/e,
    the identity value near 0, and log(x) - log(log(x)) for large x.
    """
    x = float(x)
    if math.isnan(x) or x < _BRANCH_POINT:
        raise ValueError(f"lambert_w0 domain is x >= -1/e, got {x!r}")
    if x == 0.0:
        return 0.0

    if x < -0.25:
        p = math.sqrt(2.0 * (math.e * x + 1.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 * p ** 3 / 72.0
    elif x < math.e:
        w = x if x < 1.0 else math.log(x) + 0.5
    else:
        lx = math.log(x)
        w = lx - math.log(lx)

    for _ in range(50):
        ew = math.exp(w)
        r = w * ew - x
        if r == 0.0:
            break
        w1 = w + 1.0
        if w1 == 0.0:
            w1 = 1e-300
        dw = r / (ew * w1 - (w + 2.0) * r / (2.0 * w1))
        w -= dw
        if abs(dw) <= 2e-16 * (2.0 + abs(w)):
            break
    return w


def marginal_rate(x):
    """d/dt of t*ln(1 + c/t) at local SNR x = c/t: ln(1+x) - x/(1+x), in nats.

    Accepts scalars or arrays; requires x >= 0.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("marginal_rate domain is x >= 0")
    out = np.log1p(arr) - arr / (1.0 + arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def optimal_snr_factor(total_snr: float) -> float:
    """Common value of 1 + gamma_k*tau0/tau_k at the interior optimum.

    Solves w*ln(w) - w + 1 = total_snr for w > 1, i.e.
    w = (G-1)/W((G-1)/e), with the analytic limit w = e at G = 1.
    """
    g = float(total_snr)
    if g <= 0.0 or not math.isfinite(g):
        raise ValueError("total_snr must be positive and finite")
    u = g - 1.0
    if u == 0.0:
        return math.e
    return u / lambert_w0(u / math.e)


def max_primary_rate(gamma1: float) -> float:
    """Best achievable primary rate with the whole slot devoted to that pair."""
    gamma1 = float(gamma1)
    if gamma1 <= 0.0 or not math.isfinite(gamma1):
        raise ValueError("gamma1 must be positive and finite")
    w = optimal_snr_factor(gamma1)
    tau1 = gamma1 / (gamma1 + w - 1.0)
    return tau1 * math.log2(w)


def wpt_time_for_rate(tau1: float, delta: float, gamma1: float) -> float:
    """Harvest time that makes the primary rate exactly delta for a given tau1.

    Returns inf when the required local SNR overflows; callers treat that as
    an out-of-budget point.
    """
    tau1 = float(tau1)
    delta = float(delta)
    gamma1 = float(gamma1)
    if tau1 <= 0.0:
        raise ValueError("tau1 must be positive")
    if delta <= 0.0:
        raise ValueError("delta must be positive here; a zero floor never binds")
    if gamma1 <= 0.0:
        raise ValueError("gamma1 must be positive")
    e = delta / tau1 * LN2
    if e > _MAX_EXP:
        return math.inf
    return tau1 * math.expm1(e) / gamma1


def _boundary_point(tau1: float, delta: float, gamma1: float, rest_snr_sum: float):
    """tau0, leftover time, and the leftover local SNR g = K_b*tau0 at a boundary tau1."""
    tau0 = wpt_time_for_rate(tau1, delta, gamma1)
    leftover = 1.0 - tau0 - tau1
    if leftover <= 0.0:
        raise ValueError("tau0(tau1) + tau1 >= 1: tau1 outside the feasible bracket")
    return tau0, leftover, rest_snr_sum * tau0 / leftover


def constrained_stationarity_residual(
    tau1: float, delta: float, gamma1: float, rest_snr_sum: float
) -> float:
    """Scalar root function whose zero is the boundary-branch primary duration.

    Eliminating tau0 through the binding rate floor and equalizing the
    secondary phases leaves one stationarity condition in tau1 alone.
    """
    tau0, _, g = _boundary_point(tau1, delta, gamma1, rest_snr_sum)
    s = gamma1 * tau0 / tau1  # local SNR of the primary data phase
    bracket = 1.0 - gamma1 / ((1.0 + s) * marginal_rate(s))
    return marginal_rate(g) * bracket - rest_snr_sum / (1.0 + g)


def golden_section_search(f, lo: float, hi: float, xi: float, max_iters: int = 200) -> GoldenSectionResult:
    """Minimize f on [lo, hi] by golden-section; stops when the interval <= xi.

    The evaluation count is 2 + ceil(ln(width/xi)/ln(1/invphi)), which stays
    within ceil(2 - 2.08*ln(xi/width)).
    """
    lo = float(lo)
    hi = float(hi)
    if not hi > lo:
        raise ValueError("need hi > lo")
    h = hi - lo
    c = hi - INV_PHI * h
    d = lo + INV_PHI * h
    fc = float(f(c))
    fd = float(f(d))
    if math.isnan(fc) or math.isnan(fd):
        raise ValueError("objective is NaN on the bracket")
    if not (math.isfinite(fc) or math.isfinite(fd)):
        raise ValueError("no finite objective value on the bracket")
    history = [(c, fc), (d, fd)]
    n_evals = 2
    while h > xi and n_evals < max_iters:
        if fc <= fd:
            hi, d, fd = d, c, fc
            h = hi - lo
            c = hi - INV_PHI * h
            fc = float(f(c))
            history.append((c, fc))
        else:
            lo, c, fc = c, d, fd
            h = hi - lo
            d = lo + INV_PHI * h
            fd = float(f(d))
            history.append((d, fd))
        if math.isnan(history[-1][1]):
            raise ValueError("objective is NaN on the bracket")
        n_evals += 1
    x, fx = min(history, key=lambda p: p[1])
    return GoldenSectionResult(x=x, fx=fx, n_evals=n_evals, width=h, history=history)


def golden_section_eval_bound(cfg: GslsConfig) -> int:
    """Guaranteed evaluation bound for the configured bracket and tolerance."""
    return math.ceil(2.0 - 2.08 * math.log(cfg.xi / (cfg.bracket_hi - cfg.bracket_lo)))


def _outcome_from_tau(gamma: np.ndarray, tau: np.ndarray, kind: str, mu1: float, mu2: float,
                      r1_max: float, gsls_evals: int = 0, bracket=None) -> SolverOutcome:
    with np.errstate(divide="ignore", invalid="ignore"):
        snr = np.where(tau[1:] > 0.0, gamma * tau[0] / np.where(tau[1:] > 0.0, tau[1:], 1.0), 0.0)
        rates = np.where(tau[1:] > 0.0, tau[1:] * np.log2(1.0 + snr), 0.0)
    return SolverOutcome(
        kind=kind, tau=tau, mu1=mu1, mu2=mu2, rates=rates, r_sum=float(rates.sum()),
        r1_max=r1_max, gsls_evals=gsls_evals, bracket=bracket,
    )


def solve_unconstrained(gamma) -> SolverOutcome:
    """Closed-form optimum with the rate floor ignored (interior branch).

    tau_0 = (w-1)/(G+w-1) and tau_k = gamma_k/(G+w-1) with w the optimal SNR
    factor of G = sum(gamma); the time budget is met with equality and every
    phase sees local SNR w - 1.
    """
    gamma = as_snr_vector(gamma)
    total = float(gamma.sum())
    w = optimal_snr_factor(total)
    denom = total + (w - 1.0)
    tau = np.empty(gamma.size + 1)
    tau[0] = (w - 1.0) / denom
    tau[1:] = gamma / denom
    mu2 = total / (LN2 * w)
    return _outcome_from_tau(gamma, tau, INTERIOR, 0.0, mu2, max_primary_rate(gamma[0]))


def _feasible_tau1_window(delta, gamma1, lo, hi):
    """Open interval of tau1 where tau0(tau1) + tau1 < 1, by convex minimization.

    q(tau1) = tau0(tau1) + tau1 - 1 is strictly convex with q > 0 at both ends
    of the search domain whenever the floor is demanding, so the window is
    found from q's minimizer and one bisection per side. Returns (lo, hi,
    argmin, qmin).
    """

    def q(t):
        tau0 = wpt_time_for_rate(t, delta, gamma1)
        return tau0 + t - 1.0

    gs = golden_section_search(q, lo, hi, xi=1e-13, max_iters=300)
    tmin, qmin = gs.x, gs.fx
    if qmin >= 0.0:
        return None, None, tmin, qmin

    def bisect_edge(a, b, want_neg_at_b):
        # q(a) and q(b) straddle zero; returns the crossing
        for _ in range(200):
            m = 0.5 * (a + b)
            if m == a or m == b:
                break
            if (q(m) < 0.0) == want_neg_at_b:
                b = m
            else:
                a = m
        return a, b

    if q(lo) >= 0.0:
        a, b = bisect_edge(lo, tmin, want_neg_at_b=True)
        t_lo = b
    else:
        t_lo = lo
    if q(hi) >= 0.0:
        a, b = bisect_edge(tmin, hi, want_neg_at_b=False)
        t_hi = a
    else:
        t_hi = hi
    return t_lo, t_hi, tmin, qmin


def solve_constrained(gamma, delta: float, cfg: GslsConfig | None = None) -> SolverOutcome:
    """Optimum with the primary rate floor binding (boundary branch).

    Requires R_1a <= delta <= r1_max, which `solve` guarantees. The scalar
    stationarity residual is bracketed on the feasible tau1 window, localized
    by golden-section on its absolute value, and polished by bisection on the
    sign change.
    """
    gamma = as_snr_vector(gamma)
    cfg = cfg or GslsConfig()
    delta = float(delta)
    gamma1 = float(gamma[0])
    r1_max = max_primary_rate(gamma1)
    rest = float(gamma[1:].sum())

    if gamma.size == 1:
        # No secondary pairs: the boundary branch collapses to the tie point
        # delta = r1_max, whose solution is the all-primary split.
        w = optimal_snr_factor(gamma1)
        denom = gamma1 + (w - 1.0)
        tau = np.array([(w - 1.0) / denom, gamma1 / denom])
        mu2 = gamma1 / (LN2 * w)
        return _outcome_from_tau(gamma, tau, BOUNDARY, 0.0, mu2, r1_max)

    t_lo, t_hi, tmin, qmin = _feasible_tau1_window(delta, gamma1, cfg.bracket_lo, cfg.bracket_hi)

    def threshold_outcome():
        # Degenerate window (delta at the feasibility edge): all time goes to
        # the primary pair, secondary phases vanish, multipliers blow up.
        tau = np.zeros(gamma.size + 1)
        tau[1] = tmin
        tau[0] = 1.0 - tmin
        return _outcome_from_tau(gamma, tau, BOUNDARY, math.inf, math.inf, r1_max)

    if t_lo is None:
        if qmin > 1e-12:
            raise InfeasibleRateError(
                f"rate floor {delta} leaves no feasible primary duration (max {r1_max})"
            )
        return threshold_outcome()

    span = t_hi - t_lo
    pad = max(1e-15, 1e-12 * span)
    lo, hi = t_lo + pad, t_hi - pad

    def residual(t):
        return constrained_stationarity_residual(t, delta, gamma1, rest)

    def residual_or_nan(t):
        # near-degenerate windows have edge points whose leftover time rounds
        # to zero; treat those as unusable rather than fatal
        try:
            return residual(t)
        except ValueError:
            return math.nan

    # Probe grid first: the sign change localizes the root even if |F| has
    # shallow side lobes; golden-section then runs on |F| over the bracket
    # (its evaluation count is the quantity under test downstream).
    probes = [(t, residual_or_nan(t)) for t in np.linspace(lo, hi, 33)]

    def abs_residual(t):
        r = residual_or_nan(t)
        return math.inf if math.isnan(r) else abs(r)

    try:
        gs = golden_section_search(abs_residual, lo, hi, xi=cfg.xi, max_iters=cfg.max_iters)
    except ValueError:
        return threshold_outcome()
    if not math.isfinite(gs.fx):
        return threshold_outcome()

    # gs.history holds |F|; re-evaluate signed residuals at its abscissae.
    signed = probes + [(x, residual_or_nan(x)) for x, _ in gs.history]
    pts = sorted((x, f) for x, f in signed if math.isfinite(f))
    a = b = None
    for (x0, f0), (x1, f1) in zip(pts, pts[1:]):
        if f0 == 0.0:
            a = b = x0
            break
        if f0 * f1 < 0.0:
            a, b = x0, x1
            break
    if a is None:
        tau1 = gs.x
    elif a == b:
        tau1 = a
    else:
        fa = residual(a)
        for _ in range(200):
            m = 0.5 * (a + b)
            if m == a or m == b:
                break
            fm = residual_or_nan(m)
            if math.isnan(fm):
                break
            if fm == 0.0:
                a = b = m
                break
            if fa * fm < 0.0:
                b = m
            else:
                a, fa = m, fm
        tau1 = 0.5 * (a + b)

    # The polished midpoint was never evaluated; in a razor-thin window it can
    # itself round onto the budget edge. Fall back to evaluated points.
    candidates = [tau1] + ([a, b] if a is not None else []) + [gs.x]
    for cand in dict.fromkeys(candidates):
        try:
            tau0, leftover, g = _boundary_point(cand, delta, gamma1, rest)
            tau1 = cand
            break
        except ValueError:
            continue
    else:
        return threshold_outcome()
    k_b = rest / leftover
    tau = np.empty(gamma.size + 1)
    tau[0] = tau0
    tau[1] = tau1
    tau[2:] = gamma[1:] / k_b
    mu2 = marginal_rate(g) / LN2
    s = gamma1 * tau0 / tau1
    mu1 = max(mu2 * LN2 / marginal_rate(s) - 1.0, 0.0)
    return _outcome_from_tau(gamma, tau, BOUNDARY, mu1, mu2, r1_max,
                             gsls_evals=gs.n_evals, bracket=(lo, hi))


def solve(gamma, delta: float, cfg: GslsConfig | None = None) -> SolverOutcome:
    """Dispatch on the rate floor: infeasible, interior, or boundary.

    delta above the best achievable primary rate is infeasible; delta below
    the primary rate of the unconstrained optimum leaves the floor slack
    (interior); anything between binds it (boundary, ties included).
    """
    gamma = as_snr_vector(gamma)
    delta = float(delta)
    if delta < 0.0 or not math.isfinite(delta):
        raise ValueError("delta must be nonnegative and finite")
    r1_max = max_primary_rate(float(gamma[0]))
    if delta > r1_max:
        return SolverOutcome(kind=INFEASIBLE, tau=None, mu1=math.nan, mu2=math.nan,
                             rates=None, r_sum=math.nan, r1_max=r1_max)
    unc = solve_unconstrained(gamma)
    if delta < unc.r1:
        return unc
    return solve_constrained(gamma, delta, cfg)
