"""Exponential ground truth for tree containment.

``display_set`` enumerates every resolution.  ``displays_oracle`` answers a
single query with a pruned search over the same resolutions: a resolution
yields the tree exactly when every vertex's resolved leaf set is empty or a
cluster of the tree, so partial choices that already break this are cut.
"""

from __future__ import annotations

from typing import Mapping

from .core import Network, _Draft, _tidy_draft
from .ionet import write_newick

__all__ = [
    "DEFAULT_CAP",
    "CapExceededError",
    "resolve",
    "resolutions",
    "display_set",
    "displays_oracle",
    "canonical",
    "tree_equal",
]

DEFAULT_CAP = 20


class CapExceededError(ValueError):
    pass


def _check_cap(net: Network, cap_r: int) -> None:
    r = net.num_reticulations
    if r > cap_r:
        raise CapExceededError(f"network has {r} reticulations, above the cap of {cap_r}")


def resolve(net: Network, resolution: Mapping[int, int]) -> Network:
    """Tree left after keeping, at each reticulation, the arc from ``resolution[h]``."""
    d = _Draft(net)
    for h in net.reticulations():
        keep = resolution[h]
        if keep not in net.parents(h):
            raise ValueError(f"{keep} is not a parent of reticulation {h}")
        for p in net.parents(h):
            if p != keep:
                d.remove_arc(p, h)
    return _tidy_draft(d)


def resolutions(net: Network):
    """All resolutions, as a binary counter over reticulations in id order."""
    rets = net.reticulations()
    for k in range(1 << len(rets)):
        yield {h: net.parents(h)[(k >> i) & 1] for i, h in enumerate(rets)}


def canonical(tree: Network) -> str:
    return write_newick(tree)


def display_set(net: Network, cap_r: int = DEFAULT_CAP) -> set[str]:
    """Canonical Newick strings of all trees displayed by ``net``."""
    _check_cap(net, cap_r)
    return {canonical(resolve(net, res)) for res in resolutions(net)}


def _clusters(tree: Network) -> set[frozenset[str]]:
    below: list[frozenset[str]] = [frozenset()] * tree.n
    for v in reversed(range(tree.n)):
        if v in tree.labels:
            below[v] = frozenset([tree.labels[v]])
        else:
            below[v] = frozenset().union(*(below[c] for c in tree.children(v)))
    return set(below)


def displays_oracle(net: Network, tree: Network, cap_r: int = DEFAULT_CAP) -> bool:
    if net.taxa != tree.taxa:
        raise ValueError("network and tree have different taxon sets")
    _check_cap(net, cap_r)
    taxa = sorted(net.taxa)
    bit = {t: 1 << i for i, t in enumerate(taxa)}
    allowed = {sum(bit[t] for t in cl) for cl in _clusters(tree)}
    n = net.n
    leafset = [0] * n
    kept: dict[int, int] = {}

    def search(v: int) -> bool:
        # vertices are settled from the highest id down, so children come first
        if v < 0:
            return True
        if v in net.labels:
            leafset[v] = bit[net.labels[v]]
        else:
            s = 0
            for c in net.children(v):
                if not net.is_reticulation(c) or kept[c] == v:
                    s |= leafset[c]
            if s and s not in allowed:
                return False
            leafset[v] = s
        if net.is_reticulation(v):
            ps = net.parents(v)
            options = ps[:1] if leafset[v] == 0 else ps
            for p in options:
                kept[v] = p
                if search(v - 1):
                    return True
            del kept[v]
            return False
        return search(v - 1)

    return search(n - 1)


def tree_equal(t1: Network, t2: Network) -> bool:
    return canonical(t1) == canonical(t2)
