"""Physical layer of the network: geometry, path-loss gains, harvested energy, rates.

One slot of unit length is split into a wireless-power-transfer phase (duration
tau_0) followed by one data phase per transmitter pair: the primary pair first
(tau_1), then the N secondary pairs (tau_2 .. tau_{N+1}). Every transmitter
spends only the energy it can harvest within the slot, so each pair's rate is

    R_i = tau_i * log2(1 + gamma_i * tau_0 / tau_i)

with a duration-free SNR coefficient gamma_i that folds together the harvest
links (dedicated beacon plus ambient recharge from the other transmissions)
and the pair's own data link. Ambient contributions enter as products of two
path gains: the transmitted energy is itself harvested, so each cross term is
attenuated twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_unit_interval

__all__ = [
    "SPEED_OF_LIGHT",
    "SystemParams",
    "Topology",
    "ChannelGains",
    "dbm_to_watts",
    "channel_gain",
    "gains_from_topology",
    "harvested_energy",
    "effective_snr_vector",
    "dedicated_only_snr_vector",
    "throughput",
    "sum_throughput",
]

SPEED_OF_LIGHT = 3.0e8


def dbm_to_watts(dbm: float) -> float:
    """Convert a power level in dBm to watts."""
    return 10.0 ** ((float(dbm) - 30.0) / 10.0)


@dataclass(frozen=True)
class SystemParams:
    """Scenario constants. Defaults are the reference evaluation setting."""

    p0: float = 10.0          # power-station transmit power [W]
    eta: float = 0.5          # RF-to-DC rectification efficiency
    sigma2: float = 1e-13     # receiver noise power [W] (-100 dBm)
    delta: float = 18.0       # minimum primary-pair rate [bit/s/Hz]
    l_field: float = 21.0     # side of the square deployment field [m]
    n_su: int = 4             # number of secondary pairs
    nu: float = 915e6         # carrier frequency [Hz]
    zeta_pl: float = 3.0      # path-loss exponent
    t_slot: float = 1.0       # slot duration, fixed at 1
    d_min: float = 1.0        # minimum separation between any two nodes [m]

    def __post_init__(self):
        if not (self.p0 > 0.0 and math.isfinite(self.p0)):
            raise ValueError("p0 must be positive")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if not (self.sigma2 > 0.0 and math.isfinite(self.sigma2)):
            raise ValueError("sigma2 must be positive")
        if self.delta < 0.0 or not math.isfinite(self.delta):
            raise ValueError("delta must be nonnegative")
        if self.l_field <= 0.0:
            raise ValueError("l_field must be positive")
        if int(self.n_su) != self.n_su or self.n_su < 0:
            raise ValueError("n_su must be a nonnegative integer")
        if self.nu <= 0.0:
            raise ValueError("nu must be positive")
        if self.zeta_pl < 2.0:
            raise ValueError("zeta_pl must be >= 2")
        if self.t_slot != 1.0:
            raise ValueError("t_slot is fixed at 1")
        if self.d_min <= 0.0:
            raise ValueError("d_min must be positive")

    @property
    def alpha(self) -> float:
        """Free-space reference gain at 1 m, (c / (4 pi nu))^2."""
        return (SPEED_OF_LIGHT / (4.0 * math.pi * self.nu)) ** 2


@dataclass(eq=False)
class Topology:
    """Node coordinates in the square field; the power station sits at the center.

    su_tx/su_rx have shape (N, 2). All coordinates are in meters.
    """

    pbs: np.ndarray
    pu_tx: np.ndarray
    pu_rx: np.ndarray
    su_tx: np.ndarray
    su_rx: np.ndarray

    def __post_init__(self):
        self.pbs = np.asarray(self.pbs, dtype=float).reshape(2)
        self.pu_tx = np.asarray(self.pu_tx, dtype=float).reshape(2)
        self.pu_rx = np.asarray(self.pu_rx, dtype=float).reshape(2)
        self.su_tx = np.asarray(self.su_tx, dtype=float).reshape(-1, 2)
        self.su_rx = np.asarray(self.su_rx, dtype=float).reshape(-1, 2)
        if self.su_tx.shape != self.su_rx.shape:
            raise ValueError("su_tx and su_rx must pair up one-to-one")

    @property
    def n_su(self) -> int:
        return self.su_tx.shape[0]

    def nodes(self) -> np.ndarray:
        """All node coordinates stacked, shape (2N+3, 2)."""
        return np.vstack([self.pbs, self.pu_tx, self.pu_rx, self.su_tx, self.su_rx])

    def validate(self, params: SystemParams) -> None:
        pts = self.nodes()
        if self.n_su != params.n_su:
            raise ValueError(f"topology has {self.n_su} secondary pairs, params say {params.n_su}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("coordinates must be finite")
        if np.any(pts < 0.0) or np.any(pts > params.l_field):
            raise ValueError("coordinates must lie inside the deployment field")
        center = np.array([params.l_field / 2.0, params.l_field / 2.0])
        if not np.allclose(self.pbs, center, atol=1e-9):
            raise ValueError("power station must sit at the field center")
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        off = d[np.triu_indices(len(pts), k=1)]
        if np.any(off < params.d_min):
            raise ValueError(f"node separation below d_min={params.d_min}")


@dataclass(eq=False)
class ChannelGains:
    """Per-link power gains. g_ss is (N, N); its diagonal is the secondary data link."""

    g_bp: float
    g_bs: np.ndarray
    g_ps: np.ndarray
    g_ss: np.ndarray

    def __post_init__(self):
        self.g_bp = float(self.g_bp)
        self.g_bs = np.asarray(self.g_bs, dtype=float).reshape(-1)
        self.g_ps = np.asarray(self.g_ps, dtype=float).reshape(-1)
        n = self.g_bs.size
        self.g_ss = np.asarray(self.g_ss, dtype=float).reshape(n, n)
        if self.g_ps.size != n:
            raise ValueError("g_bs and g_ps must have one entry per secondary pair")
        allv = np.concatenate([[self.g_bp], self.g_bs, self.g_ps, self.g_ss.ravel()])
        if not np.all(np.isfinite(allv)) or np.any(allv < 0.0):
            raise ValueError("gains must be finite and nonnegative")
        # Data links carry the rates, so they cannot vanish; ambient cross
        # links may legitimately be zero in synthetic setups.
        dedicated = np.concatenate([[self.g_bp], self.g_bs, np.diag(self.g_ss)])
        if np.any(dedicated <= 0.0):
            raise ValueError("dedicated link gains must be strictly positive")

    @property
    def n_su(self) -> int:
        return self.g_bs.size


def channel_gain(d: float, params: SystemParams) -> float:
    """Distance-law power gain alpha * d^(-zeta_pl); rejects d below d_min."""
    d = float(d)
    if not math.isfinite(d) or d < params.d_min:
        raise ValueError(f"link distance {d!r} below d_min={params.d_min}")
    return params.alpha * d ** (-params.zeta_pl)


def gains_from_topology(topo: Topology, params: SystemParams) -> ChannelGains:
    """Build all link gains from node geometry.

    g_bp uses the PBS <-> PU-receiver distance (one gain serves both the PU
    harvest and the PU data link). g_bs[j] and g_ps[j] use the SU_j receiver
    per the link definitions; off-diagonal g_ss[j][k] uses the transmitter
    <-> transmitter distance, which keeps the matrix symmetric (reciprocity),
    while the diagonal is the pair's own transmitter -> receiver data link.
    """
    topo.validate(params)
    n = topo.n_su

    def gain(a, b):
        return channel_gain(float(np.linalg.norm(a - b)), params)

    g_bp = gain(topo.pbs, topo.pu_rx)
    g_bs = np.array([gain(topo.pbs, topo.su_rx[j]) for j in range(n)])
    g_ps = np.array([gain(topo.pu_tx, topo.su_rx[j]) for j in range(n)])
    g_ss = np.empty((n, n))
    for j in range(n):
        g_ss[j, j] = gain(topo.su_tx[j], topo.su_rx[j])
        for k in range(j + 1, n):
            g = gain(topo.su_tx[j], topo.su_tx[k])
            g_ss[j, k] = g
            g_ss[k, j] = g
    return ChannelGains(g_bp=g_bp, g_bs=g_bs, g_ps=g_ps, g_ss=g_ss)


def harvested_energy(params: SystemParams, g: float, tau0: float) -> float:
    """Energy harvested from the dedicated beacon over the harvest phase."""
    g = float(g)
    if g <= 0.0 or not math.isfinite(g):
        raise ValueError("gain must be positive")
    tau0 = check_unit_interval(tau0, "tau0")
    return params.eta * params.p0 * g * tau0


def effective_snr_vector(gains: ChannelGains, params: SystemParams) -> np.ndarray:
    """Duration-free SNR coefficients, one per data phase (primary first).

    Each coefficient is (eta * P0 / sigma2) * (harvestable energy per unit of
    harvest time) * (data-link gain). The harvest bracket of the primary pair
    is g_bp plus the ambient recharge routed through every secondary pair;
    each secondary pair's bracket adds the beacon leakage through the primary
    transmission and through every other secondary transmission.
    """
    scale = params.eta * params.p0 / params.sigma2
    n = gains.n_su
    gamma = np.empty(n + 1)
    gamma[0] = scale * (gains.g_bp + float(np.dot(gains.g_bs, gains.g_ps))) * gains.g_bp
    for j in range(n):
        cross = float(np.dot(gains.g_bs, gains.g_ss[:, j])) - gains.g_bs[j] * gains.g_ss[j, j]
        bracket = gains.g_bs[j] + gains.g_bp * gains.g_ps[j] + cross
        gamma[j + 1] = scale * bracket * gains.g_ss[j, j]
    return gamma


def dedicated_only_snr_vector(gains: ChannelGains, params: SystemParams) -> np.ndarray:
    """SNR coefficients with only beacon harvesting (ambient recharge dropped)."""
    scale = params.eta * params.p0 / params.sigma2
    n = gains.n_su
    gamma = np.empty(n + 1)
    gamma[0] = scale * gains.g_bp * gains.g_bp
    for j in range(n):
        gamma[j + 1] = scale * gains.g_bs[j] * gains.g_ss[j, j]
    return gamma


def throughput(gamma_i: float, tau0: float, tau_i: float) -> float:
    """Rate of one pair, tau_i * log2(1 + gamma_i * tau0 / tau_i); 0 at tau_i = 0.

    The zero-duration value is the continuous limit: x*log2(1+c/x) -> 0.
    """
    gamma_i = float(gamma_i)
    if gamma_i <= 0.0 or not math.isfinite(gamma_i):
        raise ValueError("gamma_i must be positive and finite")
    tau0 = check_unit_interval(tau0, "tau0")
    tau_i = check_unit_interval(tau_i, "tau_i")
    if tau_i == 0.0:
        return 0.0
    return tau_i * math.log2(1.0 + gamma_i * tau0 / tau_i)


def sum_throughput(gamma, tau) -> float:
    """Slot sum rate over all data phases for allocation tau (harvest phase first)."""
    gamma = np.asarray(gamma, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if tau.size != gamma.size + 1:
        raise ValueError("allocation must have one harvest phase plus one phase per pair")
    return float(sum(throughput(gamma[i], tau[0], tau[i + 1]) for i in range(gamma.size)))
