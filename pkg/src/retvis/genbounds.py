"""Instance generators and the vertex/reticulation bound report."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .analysis import is_reticulation_visible
from .core import Network, validate
from .oracle import resolve

__all__ = [
    "BoundsReport",
    "bounds_report",
    "fixture_net1",
    "fixture_ext2",
    "extremal_network",
    "random_tree",
    "random_rv_network",
    "sample_displayed_tree",
    "RETRY_BUDGET",
]

RETRY_BUDGET = 50

_EXT2_ARCS = [
    ("rho", "h1"), ("rho", "t3"), ("t3", "h1"), ("t3", "h3"), ("h1", "t1"),
    ("t1", "h2"), ("t1", "t2"), ("t2", "h2"), ("t2", "h3"), ("h2", "x"), ("h3", "y"),
]


def fixture_net1() -> Network:
    arcs = [("rho", "s"), ("rho", "t"), ("s", "x"), ("s", "h"), ("t", "h"), ("t", "y"), ("h", "z")]
    return Network.from_arcs(arcs, {"x": "x", "y": "y", "z": "z"})


def fixture_ext2() -> Network:
    return Network.from_arcs(_EXT2_ARCS, {"x": "x", "y": "y"})


def _leaf_depths(net: Network) -> dict[str, int]:
    depth = [0] * net.n
    for v in range(net.n):
        for c in net.children(v):
            depth[c] = max(depth[c], depth[v] + 1)
    return {t: depth[v] for v, t in net.labels.items()}


def extremal_network(m: int) -> Network:
    """Network on ``m`` leaves with exactly ``8m-7`` vertices and ``3m-3`` reticulations.

    Starting from the two-leaf gadget, the deepest leaf is repeatedly
    replaced by a fresh copy of the gadget.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if m == 1:
        return Network([[]], {0: "x"})
    arcs = [(("g1", u), ("g1", v)) for u, v in _EXT2_ARCS]
    labels = {("g1", "x"): "x", ("g1", "y"): "y"}
    for k in range(3, m + 1):
        net = Network.from_arcs(arcs, labels)
        depths = _leaf_depths(net)
        victim = min(depths, key=lambda t: (-depths[t], _taxon_key(t)))
        old = next(v for v, t in labels.items() if t == victim)
        g = f"g{k - 1}"
        arcs = [(u, (g, "rho") if v == old else v) for u, v in arcs]
        arcs += [((g, u), (g, v)) for u, v in _EXT2_ARCS]
        del labels[old]
        labels[(g, "x")] = victim
        labels[(g, "y")] = f"t{k}"
    return Network.from_arcs(arcs, labels)


def _taxon_key(t: str) -> tuple:
    return (len(t), t)


@dataclass(frozen=True)
class BoundsReport:
    m: int
    n: int
    r: int
    n_bound: int
    r_bound: int
    tight_n: bool
    tight_r: bool


def bounds_report(net: Network) -> BoundsReport:
    if validate(net):
        raise ValueError("network is not valid")
    if not is_reticulation_visible(net):
        raise ValueError("bounds are only claimed for reticulation-visible networks")
    m, n, r = len(net.taxa), net.n, net.num_reticulations
    nb, rb = 8 * m - 7, 3 * m - 3
    return BoundsReport(m, n, r, nb, rb, n == nb, r == rb)


def random_tree(taxa, seed) -> Network:
    """Random rooted binary tree, grown by attaching leaves to random edges."""
    rng = random.Random(seed)
    taxa = list(taxa)
    rng.shuffle(taxa)
    if len(taxa) == 1:
        return Network([[]], {0: taxa[0]})
    # vertices 0..: children lists; attach each new leaf by subdividing an edge
    children: list[list[int]] = [[1, 2], [], []]
    labels = {1: taxa[0], 2: taxa[1]}
    for t in taxa[2:]:
        edges = [(u, v) for u in range(len(children)) for v in children[u]]
        u, v = rng.choice(edges)
        mid, leaf = len(children), len(children) + 1
        children.extend([[v, leaf], []])
        children[u][children[u].index(v)] = mid
        if rng.random() < 0.5:
            children[mid].reverse()
        labels[leaf] = t
    return Network(children, labels).compacted()


def _add_reticulation(net: Network, e1: tuple[int, int], e2: tuple[int, int]) -> Network | None:
    """Subdivide e1 by s and e2 by h and add the arc s -> h."""
    (u1, v1), (u2, v2) = e1, e2
    if e1 == e2:
        return None
    arcs = [(u, v) for u, v in net.arcs() if (u, v) not in (e1, e2)]
    s, h = "s", "h"
    arcs += [(u1, s), (s, v1), (u2, h), (h, v2), (s, h)]
    vertices = list(range(net.n)) + [s, h]
    cand = Network.from_arcs(arcs, dict(net.labels), vertices=vertices)
    if validate(cand):
        return None
    return cand


def random_rv_network(m: int, r: int, seed, budget: int = RETRY_BUDGET) -> Network:
    """Random reticulation-visible network on taxa ``t1..tm`` with up to ``r`` reticulations.

    Each reticulation is proposed by joining two random arcs; proposals that
    create a cycle or break visibility are rejected.  After ``budget``
    consecutive rejections the network is returned as is.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if not 0 <= r <= 3 * m - 3:
        raise ValueError(f"r must lie in [0, {3 * m - 3}]")
    rng = random.Random(f"rv:{m}:{r}:{seed}")
    net = random_tree([f"t{i}" for i in range(1, m + 1)], rng.random())
    for _ in range(r):
        for _ in range(budget):
            arcs = list(net.arcs())
            e1, e2 = rng.choice(arcs), rng.choice(arcs)
            cand = _add_reticulation(net, e1, e2)
            if cand is not None and is_reticulation_visible(cand):
                net = cand
                break
        else:
            break
    return net


def sample_displayed_tree(net: Network, seed) -> Network:
    rng = random.Random(seed)
    choice = {h: rng.choice(net.parents(h)) for h in net.reticulations()}
    return resolve(net, choice)
