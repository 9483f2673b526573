"""Per-vertex ancestry tables and the key-vertex finders used by tree detection.

All vertex sets are Python ints used as bitsets over vertex ids.  Networks
are compacted, so id order is a topological order: ancestors always have
smaller ids than their descendants.  Two consequences are used throughout:

* among vertices forming an ancestry chain, the smallest id is the one
  closest to the root and the largest id the deepest;
* the strict dominators of a vertex form a chain, so its immediate
  dominator is the highest set bit of its dominator set.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Iterator

from .core import InternalError, Network

__all__ = [
    "Tables",
    "build_tables",
    "is_reticulation_visible",
    "find_v",
    "find_rho",
    "SituationFrame",
    "FrameError",
    "build_situation_frame",
    "find_hat_v_c",
    "RelPosition",
    "classify_position_sc1",
    "classify_type_sc2",
    "bits",
]


def bits(mask: int) -> Iterator[int]:
    """Set bit positions of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Tables:
    net: Network
    anc: tuple[int, ...]
    desc: tuple[int, ...]
    dom: tuple[int, ...]
    verifier_bits: tuple[int, ...]
    treepath: tuple[int, ...]
    depth: tuple[int, ...]
    ret_mask: int
    leaf_mask: int

    @property
    def order(self) -> range:
        return range(self.net.n)

    def verifiers(self, v: int) -> frozenset[str]:
        labels = self.net.labels
        return frozenset(labels[w] for w in bits(self.verifier_bits[v]))

    def is_anc(self, u: int, v: int) -> bool:
        """``u`` is a proper ancestor of ``v``."""
        return (self.desc[u] >> v) & 1 == 1

    def is_anc_eq(self, u: int, v: int) -> bool:
        return u == v or (self.desc[u] >> v) & 1 == 1

    def desc_eq(self, v: int) -> int:
        return self.desc[v] | (1 << v)

    def anc_eq(self, v: int) -> int:
        return self.anc[v] | (1 << v)

    def comparable(self, u: int, v: int) -> bool:
        return self.is_anc_eq(u, v) or self.is_anc(v, u)

    def verified_by(self, v: int, leaf: int) -> bool:
        return (self.verifier_bits[v] >> leaf) & 1 == 1

    def is_ret(self, v: int) -> bool:
        return (self.ret_mask >> v) & 1 == 1


def build_tables(net: Network) -> Tables:
    n = net.n
    order = range(n)
    for u, v in net.arcs():
        if u >= v:
            raise InternalError("network ids are not in topological order")
    anc = [0] * n
    dom = [0] * n
    for v in order:
        ps = net.parents(v)
        a = 0
        d = -1
        for p in ps:
            a |= anc[p] | (1 << p)
            d &= dom[p] | (1 << p)
        anc[v] = a
        dom[v] = d if ps else 0
    desc = [0] * n
    treepath = [0] * n
    verif = [0] * n
    ret_mask = 0
    leaf_mask = 0
    for v in order:
        if net.is_reticulation(v):
            ret_mask |= 1 << v
        if v in net.labels:
            leaf_mask |= 1 << v
    for v in reversed(order):
        dmask = 0
        tmask = 0
        for c in net.children(v):
            dmask |= desc[c] | (1 << c)
            if not (ret_mask >> c) & 1:
                tmask |= treepath[c] | (1 << c)
        desc[v] = dmask
        treepath[v] = tmask
        if (leaf_mask >> v) & 1:
            verif[v] |= 1 << v
        if dom[v]:
            verif[dom[v].bit_length() - 1] |= verif[v]
    depth = [-1] * n
    if n:
        depth[net.root] = 0
        queue = deque([net.root])
        while queue:
            u = queue.popleft()
            for c in net.children(u):
                if depth[c] < 0:
                    depth[c] = depth[u] + 1
                    queue.append(c)
    return Tables(
        net=net,
        anc=tuple(anc),
        desc=tuple(desc),
        dom=tuple(dom),
        verifier_bits=tuple(verif),
        treepath=tuple(treepath),
        depth=tuple(depth),
        ret_mask=ret_mask,
        leaf_mask=leaf_mask,
    )


def is_reticulation_visible(net: Network, tables: Tables | None = None) -> bool:
    t = tables or build_tables(net)
    return all(t.verifier_bits[h] for h in bits(t.ret_mask))


def find_v(net: Network, tables: Tables, taxon: str) -> int:
    """Reticulation closest to the root verified by ``taxon`` alone, else the leaf."""
    leaf = net.leaf(taxon)
    only = 1 << leaf
    for w in bits(tables.dom[leaf] & tables.ret_mask):
        if tables.verifier_bits[w] == only:
            return w
    return leaf


def find_rho(net: Network, tables: Tables, taxon_a: str, taxon_b: str) -> int:
    """Deepest vertex verified by both taxa."""
    la, lb = net.leaf(taxon_a), net.leaf(taxon_b)
    common = tables.dom[la] & tables.dom[lb]
    if not common:
        raise InternalError("no common dominator")
    return common.bit_length() - 1


def _deepest(mask: int) -> int:
    return mask.bit_length() - 1


def _shallowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


class FrameError(InternalError):
    """The situation frame could not be built (an easy case should have applied)."""


@dataclass(frozen=True)
class SituationFrame:
    a: str
    b: str
    v_a: int
    v_b: int
    rho_ab: int
    u: int | None
    p_a: int
    q_a: int
    p_b: int
    q_b: int
    p_ab: int
    q_ab: int
    situation: int


def _parent_below(net: Network, t: Tables, v: int, top: int, avoid: int | None = None) -> int | None:
    """Parent of ``v`` that is ``top`` or below it, preferring one not below ``avoid``."""
    cands = [p for p in net.parents(v) if t.is_anc_eq(top, p)]
    if avoid is not None:
        better = [p for p in cands if not t.is_anc_eq(avoid, p)]
        if better:
            cands = better
    return min(cands) if cands else None


def _other_parent(net: Network, v: int, p: int) -> int:
    ps = net.parents(v)
    if len(ps) != 2:
        raise InternalError(f"vertex {v} is not a reticulation")
    return ps[1] if ps[0] == p else ps[0]


def build_situation_frame(net: Network, t: Tables, a: str, b: str) -> SituationFrame:
    la, lb = net.leaf(a), net.leaf(b)
    v_a, v_b = find_v(net, t, a), find_v(net, t, b)
    if net.parents(la) != (v_a,) or net.parents(lb) != (v_b,) or v_a == v_b:
        raise FrameError(f"v_{a}/v_{b} are not the parents of {a}/{b}")
    rho = find_rho(net, t, a, b)
    if t.is_ret(rho) or len(net.children(rho)) != 2:
        raise FrameError("rho_ab is not a tree vertex")
    below = t.desc[rho]
    above_ab = t.anc[v_a] | t.anc[v_b]
    others = below & above_ab & t.ret_mask & ~((1 << v_a) | (1 << v_b))
    if not others:
        u = None
        p, q = net.children(rho)
        p_a = _parent_below(net, t, v_a, p, avoid=q)
        q_a = _parent_below(net, t, v_a, q, avoid=p)
        p_b = _parent_below(net, t, v_b, p, avoid=q)
        q_b = _parent_below(net, t, v_b, q, avoid=p)
        if None in (p_a, q_a, p_b, q_b) or p_a == q_a or p_b == q_b:
            raise FrameError("situation 1 parents are not separated by rho_ab's children")
    else:
        u = _deepest(others)
        if others & ~t.anc_eq(u):
            raise FrameError("reticulations between rho_ab and the cherry are not a chain")
        p_a = _parent_below(net, t, v_a, u)
        p_b = _parent_below(net, t, v_b, u)
        if p_a is None or p_b is None:
            raise FrameError("u is not above both cherry parents")
        q_a = _other_parent(net, v_a, p_a)
        q_b = _other_parent(net, v_b, p_b)
        if t.is_anc_eq(u, q_a) or t.is_anc_eq(u, q_b):
            raise FrameError("paths from u to the cherry are not unique")
    region = t.desc_eq(rho)
    p_common = region & t.anc_eq(p_a) & t.anc_eq(p_b)
    q_common = region & t.anc_eq(q_a) & t.anc_eq(q_b)
    if u is not None:
        p_common &= t.desc_eq(u)
    if not p_common or not q_common:
        raise FrameError("p_ab or q_ab does not exist")
    p_ab, q_ab = _deepest(p_common), _deepest(q_common)
    if p_common & ~t.anc_eq(p_ab) or q_common & ~t.anc_eq(q_ab):
        raise FrameError("p_ab or q_ab is not unique")
    if u is None:
        situation = 1
    else:
        situation = 3 if t.is_anc_eq(q_ab, u) else 2
    return SituationFrame(a, b, v_a, v_b, rho, u, p_a, q_a, p_b, q_b, p_ab, q_ab, situation)


def find_hat_v_c(net: Network, t: Tables, frame: SituationFrame, c: str) -> int:
    """First reticulation from v_c towards c that is not an ancestor of a or b."""
    lc = net.leaf(c)
    v_c = find_v(net, t, c)
    la, lb = net.leaf(frame.a), net.leaf(frame.b)
    cands = t.desc_eq(v_c) & t.anc[lc] & t.ret_mask & ~(t.anc[la] | t.anc[lb])
    hat = _shallowest(cands) if cands else lc
    if not t.verified_by(hat, lc):
        raise InternalError(f"{c} does not verify its hat vertex")
    return hat


class RelPosition(enum.Enum):
    ON_P12 = "P1|P2"
    ON_P34 = "P3|P4"
    ABOVE_P = ">p_ab"
    ABOVE_Q = ">q_ab"
    TYPE1 = "Type1"
    TYPE2 = "Type2"
    TYPE3 = "Type3"
    TYPE4 = "Type4"


def _regions(frame: SituationFrame, t: Tables, x: int) -> tuple[bool, bool, bool, bool]:
    on_p = t.is_anc_eq(frame.p_ab, x) and (t.is_anc_eq(x, frame.p_a) or t.is_anc_eq(x, frame.p_b))
    on_q = t.is_anc_eq(frame.q_ab, x) and (t.is_anc_eq(x, frame.q_a) or t.is_anc_eq(x, frame.q_b))
    above_p = t.is_anc(x, frame.p_ab)
    above_q = t.is_anc(x, frame.q_ab)
    return on_p, on_q, above_p, above_q


def _above_side(frame: SituationFrame, t: Tables, x: int, above_p: bool, above_q: bool) -> str | None:
    if above_p and above_q:
        return "q"
    if above_p:
        return "p"
    if above_q:
        return "q"
    return None


def classify_position_sc1(frame: SituationFrame, t: Tables, x: int) -> RelPosition:
    on_p, on_q, above_p, above_q = _regions(frame, t, x)
    if on_p:
        return RelPosition.ON_P12
    if on_q:
        return RelPosition.ON_P34
    side = _above_side(frame, t, x, above_p, above_q)
    if side == "p":
        return RelPosition.ABOVE_P
    if side == "q":
        return RelPosition.ABOVE_Q
    raise InternalError(f"vertex {x} has no position relative to the cherry")


def classify_type_sc2(frame: SituationFrame, t: Tables, x: int, is_on_path: bool) -> RelPosition:
    on_p, on_q, above_p, above_q = _regions(frame, t, x)
    # a vertex strictly inside P1..P4 is typed by its path even when it is
    # only the anchor of p_cd / q_cd
    if on_p:
        return RelPosition.TYPE1
    if on_q:
        return RelPosition.TYPE2
    side = _above_side(frame, t, x, above_p, above_q)
    if side == "p":
        return RelPosition.TYPE1 if is_on_path else RelPosition.TYPE3
    if side == "q":
        return RelPosition.TYPE2 if is_on_path else RelPosition.TYPE4
    raise InternalError(f"vertex {x} has no type relative to the cherry")
