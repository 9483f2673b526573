"""Polynomial-time tree containment for reticulation-visible networks.

The driver repeatedly picks a deepest cherry ``{a, b}`` of the tree and
inspects how ``a`` and ``b`` sit in the network.  Each round either answers
No, or deletes one reticulation arc from the network, or deletes one leaf
from both inputs, always preserving whether the tree is displayed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

from .analysis import (
    FrameError,
    RelPosition,
    SituationFrame,
    Tables,
    bits,
    build_situation_frame,
    build_tables,
    classify_position_sc1,
    classify_type_sc2,
    find_hat_v_c,
    find_rho,
    find_v,
    is_reticulation_visible,
)
from .core import (
    InternalError,
    InvalidNetworkError,
    Network,
    Violation,
    delete_arc_tidy,
    delete_leaf_tidy,
    displays_triple,
    validate,
)

__all__ = [
    "DeleteArc",
    "DeleteLeaf",
    "AnswerYes",
    "AnswerNo",
    "CaseDecision",
    "ReductionTrace",
    "TABLE1",
    "TABLE2",
    "select_cherry",
    "detect_easy_case",
    "apply_special_case_single_leaf",
    "apply_special_case_cherry_sibling",
    "decide",
    "tree_containment",
]


@dataclass(frozen=True)
class DeleteArc:
    tail: int
    head: int

    def __str__(self) -> str:
        return f"delete-arc {self.tail}->{self.head}"


@dataclass(frozen=True)
class DeleteLeaf:
    taxon: str

    def __str__(self) -> str:
        return f"delete-leaf {self.taxon}"


@dataclass(frozen=True)
class AnswerYes:
    def __str__(self) -> str:
        return "yes"


@dataclass(frozen=True)
class AnswerNo:
    reason: str

    def __str__(self) -> str:
        return f"no ({self.reason})"


Action = Union[DeleteArc, DeleteLeaf, AnswerYes, AnswerNo]


@dataclass(frozen=True)
class CaseDecision:
    label: str
    action: Action
    witness: Mapping[str, object] = field(default_factory=dict)

    def __str__(self) -> str:
        s = f"{self.label} {self.action}"
        if self.witness.get("swapped"):
            s += " [swapped]"
        return s


ReductionTrace = list  # list[CaseDecision]


# Row key (position of p', position of q') -> action in situations 1, 2, 3.
# Arc names: "pa" = (p_a, v_a), "qa" = (q_a, v_a), "pc"/"qc" = the arcs from
# p_c/q_c into the hat vertex (table 1) or into v_c (table 2); "b" = delete leaf b.
_P12, _P34, _AP, _AQ = RelPosition.ON_P12, RelPosition.ON_P34, RelPosition.ABOVE_P, RelPosition.ABOVE_Q
TABLE1: dict[tuple[RelPosition, RelPosition], tuple[str, str, str]] = {
    (_P12, _P12): ("pa", "pa", "pa"),
    (_P12, _P34): ("pc", "qc", "qc"),
    (_P12, _AP): ("pc", "pc", "pc"),
    (_P12, _AQ): ("pa", "pa", "pa"),
    (_P34, _P12): ("pc", "pc", "pc"),
    (_P34, _P34): ("qa", "qa", "qa"),
    (_P34, _AP): ("qa", "pc", "pc"),
    (_P34, _AQ): ("pc", "pc", "pc"),
    (_AP, _P12): ("qc", "qc", "qc"),
    (_AP, _P34): ("qa", "qc", "qc"),
    (_AP, _AP): ("qa", "qa", "qa"),
    (_AP, _AQ): ("b", "b", "b"),
    (_AQ, _P12): ("pa", "pa", "pa"),
    (_AQ, _P34): ("qc", "qc", "qc"),
    (_AQ, _AP): ("b", "b", "b"),
    (_AQ, _AQ): ("pa", "pa", "pa"),
}

_T1, _T2, _T3, _T4 = RelPosition.TYPE1, RelPosition.TYPE2, RelPosition.TYPE3, RelPosition.TYPE4
TABLE2: dict[tuple[RelPosition, RelPosition], tuple[str, str, str]] = {
    (_T1, _T1): ("pa", "pa", "pa"),
    (_T1, _T2): ("pc", "qc", "qc"),
    (_T1, _T3): ("pc", "pc", "pc"),
    (_T1, _T4): ("pa", "pa", "pa"),
    (_T2, _T1): ("pc", "pc", "pc"),
    (_T2, _T2): ("qa", "qa", "qa"),
    (_T2, _T3): ("qa", "pc", "pc"),
    (_T2, _T4): ("pc", "pc", "pc"),
    (_T3, _T1): ("qc", "qc", "qc"),
    (_T3, _T2): ("qa", "qc", "qc"),
    (_T3, _T3): ("qa", "qa", "qa"),
    (_T3, _T4): ("b", "b", "b"),
    (_T4, _T1): ("pa", "pa", "pa"),
    (_T4, _T2): ("qc", "qc", "qc"),
    (_T4, _T3): ("b", "b", "b"),
    (_T4, _T4): ("pa", "pa", "pa"),
}


# -- tree side ------------------------------------------------------------------


def select_cherry(tree: Network) -> tuple[str, str, tuple[str, ...]]:
    """Deepest cherry ``(a, b)`` of ``tree`` and the sibling of its parent.

    The sibling is returned as ``(c,)`` for a single leaf or ``(c, d)`` for a
    cherry, or ``()`` when the cherry's parent is the root.
    """
    if len(tree.taxa) < 2:
        raise ValueError("tree has fewer than two leaves")
    depth = [0] * tree.n
    for v in range(tree.n):
        for c in tree.children(v):
            depth[c] = depth[v] + 1
    best = None
    for v in range(tree.n):
        cs = tree.children(v)
        if len(cs) == 2 and all(c in tree.labels for c in cs):
            pair = tuple(sorted(tree.labels[c] for c in cs))
            key = (-depth[v], pair)
            if best is None or key < best[0]:
                best = (key, v, pair)
    assert best is not None
    _, v, (a, b) = best
    if not tree.parents(v):
        return a, b, ()
    g = tree.parent(v)
    s = next(c for c in tree.children(g) if c != v)
    if s in tree.labels:
        return a, b, (tree.labels[s],)
    cs = tree.children(s)
    if not all(c in tree.labels for c in cs):
        raise InternalError("sibling of a deepest cherry is not a leaf or a cherry")
    c, d = sorted(tree.labels[c] for c in cs)
    return a, b, (c, d)


def _delete_leaf_tree(tree: Network, taxon: str) -> Network:
    return delete_leaf_tidy(tree, taxon)


# -- helpers ----------------------------------------------------------------------


def _first_ret_up(net: Network, t: Tables, x: int, stop: int | None = None) -> int | None:
    """Walk up from ``x`` through tree vertices to the first reticulation.

    Returns None when ``stop`` (a tree vertex) or the root is met first.
    """
    while not t.is_ret(x):
        if x == stop:
            return None
        ps = net.parents(x)
        if not ps:
            return None
        x = ps[0]
    return x


def _parent_under(net: Network, t: Tables, v: int, top: int, avoid: int | None = None) -> int | None:
    cands = [p for p in net.parents(v) if t.is_anc_eq(top, p)]
    if avoid is not None:
        pref = [p for p in cands if not t.is_anc_eq(avoid, p)]
        if pref:
            cands = pref
    return min(cands) if cands else None


def _other(net: Network, v: int, p: int) -> int:
    ps = net.parents(v)
    return ps[1] if ps[0] == p else ps[0]


def _smallest_label(net: Network, mask: int, exclude: set[str]) -> str | None:
    names = sorted(net.labels[w] for w in bits(mask) if net.labels[w] not in exclude)
    return names[0] if names else None


def _arc(label: str, tail: int, head: int, /, **witness) -> CaseDecision:
    return CaseDecision(label, DeleteArc(tail, head), witness)


# -- easy cases ---------------------------------------------------------------------


def detect_easy_case(net: Network, t: Tables, a: str, b: str, tree: Network) -> CaseDecision | None:
    """First of the seven easy cases that applies to the cherry ``{a, b}``."""
    la, lb = net.leaf(a), net.leaf(b)
    leaf = {a: la, b: lb}
    vv = {a: find_v(net, t, a), b: find_v(net, t, b)}
    pairs = ((a, b), (b, a))

    # EC1: {a, b} is a cherry of the network
    if net.parents(la) == net.parents(lb):
        return CaseDecision("EC1", DeleteLeaf(b))

    # EC2: v_i is the leaf i itself
    for i, j in pairs:
        if vv[i] != leaf[i]:
            continue
        p_i = net.parent(leaf[i])
        region = t.treepath[p_i]
        others = region & t.leaf_mask & ~((1 << la) | (1 << lb))
        if others:
            ell = _smallest_label(net, others, set())
            return CaseDecision("EC2", AnswerNo(f"tree path from parent of {i} reaches {ell}"), {"i": i})
        best = None
        for x in [p_i, *bits(region)]:
            for c in net.children(x):
                if t.is_ret(c):
                    key = (t.depth[x], x, c)
                    if best is None or key < best:
                        best = key
        if best is None:
            raise InternalError("EC2: no tree path to a reticulation parent")
        _, p_u, u = best
        if u != vv[j]:
            return _arc("EC2", p_u, u, i=i)
        return _arc("EC2", _other(net, u, p_u), u, i=i)

    # EC3: v_i is an ancestor of v_j
    for i, j in pairs:
        vi, vj = vv[i], vv[j]
        if not t.is_anc(vi, vj):
            continue
        p_j = min(p for p in net.parents(vj) if t.is_anc_eq(vi, p))
        u = _first_ret_up(net, t, p_j)
        if u is None:
            raise InternalError("EC3: no reticulation above p_j")
        if not t.is_anc(u, leaf[i]):
            return _arc("EC3", p_j, vj, i=i)
        return _arc("EC3", _other(net, vj, p_j), vj, i=i)

    # EC4: an ancestor w of v_i verified by i but not by j
    for i, j in pairs:
        vi, vj = vv[i], vv[j]
        li, lj = leaf[i], leaf[j]
        ws = [w for w in bits(t.anc[vi]) if t.verified_by(w, li) and not t.verified_by(w, lj)]
        if not ws:
            continue
        free = [w for w in ws if not t.is_anc(w, lj)]
        if free:
            w = max(free)
            return _arc("EC4", net.parents(vi)[0], vi, i=i, w=w)
        w = max(ws)
        for p in sorted(net.parents(vj)):
            if not t.is_anc_eq(w, p):
                continue
            r = _first_ret_up(net, t, p, stop=w)
            if r is not None and r != w and t.is_anc(w, r) and not t.is_anc(r, li):
                return _arc("EC4", p, vj, i=i, w=w)
        outside = [p for p in net.parents(vj) if not t.is_anc_eq(w, p)]
        if not outside:
            raise InternalError("EC4: both parents of v_j lie below w")
        return _arc("EC4", min(outside), vj, i=i, w=w)

    # EC5: a reticulation below v_i not verified by i
    for i, j in pairs:
        vi, li = vv[i], leaf[i]
        cands = [u for u in bits(t.desc[vi] & t.ret_mask) if not t.verified_by(u, li)]
        if not cands:
            continue
        u = cands[0]
        p_u = _parent_under(net, t, u, vi)
        return _arc("EC5", p_u, u, i=i)

    # EC6: a reticulation above v_i that is not above j
    for i, j in pairs:
        vi, lj = vv[i], leaf[j]
        cands = [u for u in bits(t.anc[vi] & t.ret_mask) if not t.is_anc(u, lj)]
        if not cands:
            continue
        u = cands[-1]
        p_i = _parent_under(net, t, vi, u)
        return _arc("EC6", p_i, vi, i=i, u=u)

    # EC7: two non-comparable reticulations between rho_ab and v_i
    rho = find_rho(net, t, a, b)
    for i, j in pairs:
        vi = vv[i]
        pool = t.desc[rho] & t.anc[vi] & t.ret_mask
        pair = _incomparable_pair(t, pool)
        if pair is None:
            continue
        return _easy_case_7(net, t, tree, a, b, i, vi, pool, *pair)
    return None


def _incomparable_pair(t: Tables, pool: int) -> tuple[int, int] | None:
    members = list(bits(pool))
    found = None
    for x in members:
        for y in members:
            if x < y and not t.comparable(x, y):
                found = (x, y)
                break
        if found:
            break
    if found is None:
        return None
    u, w = found
    # push both members as deep as possible while staying non-comparable
    changed = True
    while changed:
        changed = False
        for x in reversed(list(bits(pool & t.desc[u]))):
            if not t.comparable(x, w):
                u, changed = x, True
                break
        for y in reversed(list(bits(pool & t.desc[w]))):
            if not t.comparable(u, y):
                w, changed = y, True
                break
    return u, w


def _easy_case_7(net, t, tree, a, b, i, vi, pool, u, w) -> CaseDecision:
    ell_u = _smallest_label(net, t.verifier_bits[u], {a, b})
    ell_w = _smallest_label(net, t.verifier_bits[w], {a, b})
    if ell_u is None or ell_w is None or ell_u == ell_w:
        raise InternalError("EC7: no distinct verifying leaves for u and w")
    for x, y, lx, ly in ((u, w, ell_u, ell_w), (w, u, ell_w, ell_u)):
        below = pool & t.desc[x]
        if not below:
            continue
        x2 = min(bits(below))
        l2 = _smallest_label(net, t.verifier_bits[x2], {lx, ly, a, b})
        if l2 is None:
            raise InternalError("EC7: no fresh leaf verifying the inner reticulation")
        if displays_triple(tree, l2, lx, ly):
            p = _parent_under(net, t, x2, y, avoid=x)
        else:
            p = _parent_under(net, t, x2, x, avoid=y)
        if p is None:
            raise InternalError("EC7: inner reticulation has no parent on the required side")
        return _arc("EC7", p, x2, i=i, u=x, w=y)
    p_i = _parent_under(net, t, vi, u, avoid=w)
    q_i = _other(net, vi, p_i)
    if displays_triple(tree, i, ell_u, ell_w):
        return _arc("EC7", q_i, vi, i=i, u=u, w=w)
    return _arc("EC7", p_i, vi, i=i, u=u, w=w)


# -- special cases --------------------------------------------------------------------


def _table_action(entry: str, frame: SituationFrame, p_c: int, q_c: int, target: int) -> Action:
    if entry == "pa":
        return DeleteArc(frame.p_a, frame.v_a)
    if entry == "qa":
        return DeleteArc(frame.q_a, frame.v_a)
    if entry == "pc":
        return DeleteArc(p_c, target)
    if entry == "qc":
        return DeleteArc(q_c, target)
    return DeleteLeaf(frame.b)


def _outside_ab(t: Tables, frame: SituationFrame, la: int, lb: int) -> int:
    return ~(t.anc[la] | t.anc[lb])


def _lowest_anchor(t: Tables, frame: SituationFrame, x: int, la: int, lb: int) -> int:
    """Deepest vertex below rho_ab that is above-or-at x and above a or b."""
    mask = t.anc_eq(x) & t.desc_eq(frame.rho_ab) & (t.anc[la] | t.anc[lb])
    if not mask:
        raise InternalError(f"vertex {x} has no anchor on the cherry paths")
    return mask.bit_length() - 1


def apply_special_case_single_leaf(
    net: Network, t: Tables, frame: SituationFrame, a: str, b: str, c: str
) -> CaseDecision:
    la, lb, lc = net.leaf(a), net.leaf(b), net.leaf(c)
    rho = frame.rho_ab
    hat = find_hat_v_c(net, t, frame, c)

    if not t.is_anc(rho, lc):
        return _arc("SC1.1", frame.p_a, frame.v_a)

    cands = [u for u in bits(t.desc[hat] & t.ret_mask) if not t.verified_by(u, lc)]
    if cands:
        u = cands[0]
        return _arc("SC1.2", _parent_under(net, t, u, hat), u)

    not_ab = _outside_ab(t, frame, la, lb)
    cands = list(bits(t.anc[hat] & t.ret_mask & not_ab))
    if cands:
        u = cands[-1]
        if not t.is_ret(hat):
            if t.verified_by(u, lc):
                # u carries c and another verifier l, so every embedding shows cl|a
                ell = _smallest_label(net, t.verifier_bits[u], {c})
                return CaseDecision("SC1.3", AnswerNo(f"{c} and {ell} meet below {a}"), {"u": u})
            raise InternalError("SC1.3 with a leaf hat vertex")
        return _arc("SC1.3", _parent_under(net, t, hat, u), hat, u=u)

    if not t.verified_by(rho, lc):
        if not t.is_ret(hat):
            raise InternalError("SC1.4 with a leaf hat vertex")
        ps = sorted(net.parents(hat))
        outside = [p for p in ps if not t.is_anc_eq(rho, p)]
        if not outside:
            outside = [p for p in ps if p != rho and not (t.dom[p] >> rho) & 1]
        if not outside:
            raise InternalError("SC1.4: no parent of the hat vertex avoids rho_ab")
        return _arc("SC1.4", outside[0], hat)

    if t.is_ret(hat):
        p_c, q_c = sorted(net.parents(hat))
    else:
        # c hangs off a tree vertex: one attachment point, so a diagonal row
        p_c = q_c = net.parent(hat)
    anchor_p = _lowest_anchor(t, frame, p_c, la, lb)
    pos_p = classify_position_sc1(frame, t, anchor_p)
    pos_q = classify_position_sc1(frame, t, _lowest_anchor(t, frame, q_c, la, lb))
    if p_c == q_c and pos_p is RelPosition.ABOVE_P and frame.u is not None and t.is_anc_eq(anchor_p, frame.u):
        # a pinned c above u can only join a and b on the shared side
        pos_p = pos_q = RelPosition.ABOVE_Q
    entry = TABLE1[(pos_p, pos_q)][frame.situation - 1]
    action = _table_action(entry, frame, p_c, q_c, hat)
    return CaseDecision("SC1.5", action, {"row": (pos_p.value, pos_q.value), "situation": frame.situation})


def apply_special_case_cherry_sibling(
    net: Network,
    t: Tables,
    frame: SituationFrame,
    frame_cd: SituationFrame,
    swapped: bool = False,
) -> CaseDecision:
    a, b = frame.a, frame.b
    la, lb = net.leaf(a), net.leaf(b)
    rho_ab, rho_cd = frame.rho_ab, frame_cd.rho_ab
    p_c, q_c, v_c = frame_cd.p_a, frame_cd.q_a, frame_cd.v_a
    w = {"swapped": swapped} if swapped else {}

    if not t.comparable(rho_ab, rho_cd):
        return _arc("SC2.1", frame.p_a, frame.v_a, **w)

    on_path = t.is_anc_eq(rho_ab, rho_cd) and (t.is_anc(rho_cd, frame.v_a) or t.is_anc(rho_cd, frame.v_b))
    if not on_path:
        return _arc("SC2.2", p_c, v_c, **w)

    not_ab = _outside_ab(t, frame, la, lb)
    above_p = t.anc_eq(frame_cd.p_ab) & t.ret_mask & not_ab
    above_q = t.anc_eq(frame_cd.q_ab) & t.ret_mask & not_ab
    if above_p:
        return _arc("SC2.3", p_c, v_c, **w)
    if above_q:
        return _arc("SC2.3", q_c, v_c, **w)

    p_prime = _lowest_anchor(t, frame, frame_cd.p_ab, la, lb)
    q_prime = _lowest_anchor(t, frame, frame_cd.q_ab, la, lb)
    type_p = classify_type_sc2(frame, t, p_prime, p_prime == frame_cd.p_ab)
    type_q = classify_type_sc2(frame, t, q_prime, q_prime == frame_cd.q_ab)
    entry = TABLE2[(type_p, type_q)][frame.situation - 1]
    action = _table_action(entry, frame, p_c, q_c, v_c)
    return CaseDecision(
        "SC2.4", action, {**w, "row": (type_p.value, type_q.value), "situation": frame.situation}
    )


# -- driver ------------------------------------------------------------------------------


def decide(net: Network, tree: Network) -> CaseDecision:
    """One round: the case that fires for the current pair and its action."""
    m = len(tree.taxa)
    if m == 1:
        return CaseDecision("TrivialYes", AnswerYes())
    if m == 2:
        return CaseDecision("TwoLeafYes", AnswerYes())
    a, b, sibling = select_cherry(tree)
    t = build_tables(net)
    dec = detect_easy_case(net, t, a, b, tree)
    if dec is not None:
        return dec
    frame = build_situation_frame(net, t, a, b)
    if len(sibling) == 1:
        return apply_special_case_single_leaf(net, t, frame, a, b, sibling[0])
    c, d = sibling
    dec = detect_easy_case(net, t, c, d, tree)
    if dec is not None:
        return dec
    frame_cd = build_situation_frame(net, t, c, d)
    swapped = False
    if t.is_anc(frame_cd.rho_ab, frame.rho_ab):
        frame, frame_cd = frame_cd, frame
        swapped = True
    return apply_special_case_cherry_sibling(net, t, frame, frame_cd, swapped)


def tree_containment(
    net: Network,
    tree: Network,
    *,
    check_steps: bool = False,
) -> tuple[bool, ReductionTrace]:
    """Decide whether ``net`` displays ``tree``; also return the reduction trace.

    ``net`` must be a valid reticulation-visible network on the tree's taxa.
    With ``check_steps`` every intermediate network is re-validated.
    """
    if net.taxa != tree.taxa:
        raise ValueError("network and tree have different taxon sets")
    problems = validate(net)
    if problems:
        raise InvalidNetworkError(problems)
    problems = validate(tree)
    if problems:
        raise InvalidNetworkError(problems, prefix="invalid tree")
    if not tree.is_tree:
        raise ValueError("second input is not a tree")
    if not is_reticulation_visible(net):
        raise InvalidNetworkError(
            [Violation("visibility", (), "network is not reticulation-visible")]
        )
    trace: ReductionTrace = []
    budget = 12 * len(net.taxa) + 1
    while True:
        dec = decide(net, tree)
        trace.append(dec)
        act = dec.action
        if isinstance(act, AnswerYes):
            return True, trace
        if isinstance(act, AnswerNo):
            return False, trace
        if isinstance(act, DeleteArc):
            if not net.is_reticulation(act.head):
                raise InternalError(f"{dec.label} chose a non-reticulation arc {act.tail}->{act.head}")
            net = delete_arc_tidy(net, (act.tail, act.head))
        else:
            net = delete_leaf_tidy(net, act.taxon)
            tree = _delete_leaf_tree(tree, act.taxon)
        if check_steps:
            problems = validate(net)
            if problems:
                raise InternalError(f"invalid intermediate network after {dec}: {problems[0]}")
        if len(trace) > budget:
            raise InternalError("reduction did not terminate within the step budget")
