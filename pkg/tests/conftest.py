import random

import pytest
from hypothesis import strategies as st

from retvis.core import Network
from retvis.genbounds import (
    extremal_network,
    fixture_ext2,
    fixture_net1,
    random_rv_network,
    random_tree,
    sample_displayed_tree,
)


@pytest.fixture
def net1():
    return fixture_net1()


@pytest.fixture
def ext2():
    return fixture_ext2()


@pytest.fixture
def cherry2():
    return Network.from_arcs([("r", "x"), ("r", "y")], {"x": "x", "y": "y"})


@pytest.fixture
def single():
    return Network([[]], {0: "x"})


def suite(count, seed=0, m_range=(2, 8)):
    """Deterministic (network, tree, kind) triples, half displayed, half random."""
    rng = random.Random(seed)
    out = []
    for k in range(count):
        m = rng.randint(*m_range)
        r = rng.randint(0, 3 * m - 3)
        net = random_rv_network(m, r, rng.randrange(2**32))
        if k % 2 == 0:
            tree, kind = sample_displayed_tree(net, rng.randrange(2**32)), "displayed"
        else:
            tree, kind = random_tree(sorted(net.taxa), rng.randrange(2**32)), "random"
        out.append((net, tree, kind))
    return out


@st.composite
def rv_networks(draw, max_m=7):
    m = draw(st.integers(1, max_m))
    r = draw(st.integers(0, 3 * m - 3))
    seed = draw(st.integers(0, 2**31))
    return random_rv_network(m, r, seed)


__all__ = ["suite", "rv_networks", "extremal_network"]
