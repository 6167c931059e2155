import math

import numpy as np
import pytest

from wpcr.model import SystemParams, Topology


@pytest.fixture
def params():
    return SystemParams()


@pytest.fixture
def make_gamma():
    """Factory for random SNR vectors with a wide dynamic range."""

    def factory(seed, n):
        rng = np.random.default_rng(1000 + seed)
        return 10.0 ** rng.uniform(0.5, 5.0, n + 1)

    return factory


def build_near_base_topology(seed: int, n_su: int = 4, l_field: float = 21.0) -> Topology:
    """Deterministic layout with the primary receiver almost touching the
    base station, which is the only geometry where a demanding rate floor
    stays reachable. Secondary pairs fan out at separated angles so every
    pairwise distance clears 1 m by construction.
    """
    rng = np.random.default_rng(90_000 + seed)
    c = l_field / 2.0
    center = np.array([c, c])

    def ring(radius, angle):
        return center + radius * np.array([math.cos(angle), math.sin(angle)])

    theta = rng.uniform(0.0, 2.0 * math.pi)
    pu_rx = ring(rng.uniform(1.0, 1.05), theta)
    pu_tx = ring(rng.uniform(2.5, 3.0), 0.0)
    su_tx = []
    su_rx = []
    for j in range(n_su):
        ang = 2.0 * math.pi * (j + 1) / (n_su + 1) + rng.uniform(-0.2, 0.2)
        radius = rng.uniform(3.5, 7.5)
        tx = ring(radius, ang)
        rx = ring(radius + rng.uniform(1.5, 2.5), ang)
        su_tx.append(tx)
        su_rx.append(rx)
    topo = Topology(
        pbs=center,
        pu_tx=pu_tx,
        pu_rx=pu_rx,
        su_tx=np.array(su_tx),
        su_rx=np.array(su_rx),
    )
    topo.validate(SystemParams(l_field=l_field, n_su=n_su))
    return topo


@pytest.fixture
def near_base_topology():
    return build_near_base_topology
