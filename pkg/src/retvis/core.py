"""Network data model, validation and the edit operations used by the reductions.

A :class:`Network` is an immutable rooted digraph whose vertices are dense
integer ids.  Every network built by this package from an acyclic single-root
graph is *compacted*: ids are renumbered so that id order is a topological
order (a parent always has a smaller id than its child).  The analysis layer
relies on that property for its bitset tables.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

__all__ = [
    "Network",
    "VertexKind",
    "Violation",
    "InvalidNetworkError",
    "InternalError",
    "validate",
    "classify",
    "tidy",
    "delete_arc_tidy",
    "delete_leaf_tidy",
    "reduce_cherry",
    "displays_triple",
    "is_isomorphic",
]

FRESH_PREFIX = "_cherry"
_FRESH_RE = re.compile(r"^_cherry(\d+)$")


class VertexKind(enum.Enum):
    ROOT = "root"
    LEAF = "leaf"
    TREE = "tree"
    RETICULATION = "reticulation"


@dataclass(frozen=True)
class Violation:
    """One broken network invariant."""

    kind: str
    where: tuple
    message: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}: {self.message}"


class InvalidNetworkError(ValueError):
    def __init__(self, violations: Sequence[Violation], prefix: str = "invalid network"):
        self.violations = list(violations)
        detail = "; ".join(str(v) for v in self.violations[:5])
        if len(self.violations) > 5:
            detail += f"; ... ({len(self.violations)} total)"
        super().__init__(f"{prefix}: {detail}")


class InternalError(RuntimeError):
    """An invariant the algorithm relies on did not hold."""


class Network:
    """Rooted digraph with labelled out-degree-0 vertices.

    Instances are never mutated after construction.  Use :meth:`from_arcs`
    to build one from arbitrary vertex names.
    """

    __slots__ = ("_children", "_parents", "_labels", "_leaf_of", "_root")

    def __init__(self, children: Sequence[Sequence[int]], labels: Mapping[int, str]):
        self._children: tuple[tuple[int, ...], ...] = tuple(tuple(cs) for cs in children)
        n = len(self._children)
        parents: list[list[int]] = [[] for _ in range(n)]
        for u, cs in enumerate(self._children):
            for v in cs:
                parents[v].append(u)
        self._parents: tuple[tuple[int, ...], ...] = tuple(tuple(ps) for ps in parents)
        self._labels: dict[int, str] = dict(labels)
        self._leaf_of: dict[str, int] = {t: v for v, t in self._labels.items()}
        roots = [v for v in range(n) if not parents[v]]
        self._root = roots[0] if len(roots) == 1 else None

    # -- construction -----------------------------------------------------

    @classmethod
    def from_arcs(
        cls,
        arcs: Iterable[tuple[Hashable, Hashable]],
        labels: Mapping[Hashable, str],
        vertices: Iterable[Hashable] = (),
    ) -> "Network":
        """Build a network from named arcs; ``labels`` maps vertex name to taxon.

        Parallel arcs and cycles are kept so that :func:`validate` can report
        them; well-formed inputs come back compacted.
        """
        index: dict[Hashable, int] = {}

        def vid(name: Hashable) -> int:
            if name not in index:
                index[name] = len(index)
            return index[name]

        for v in vertices:
            vid(v)
        arc_list = [(vid(u), vid(v)) for u, v in arcs]
        for v in labels:
            vid(v)
        children: list[list[int]] = [[] for _ in range(len(index))]
        for u, v in arc_list:
            children[u].append(v)
        net = cls(children, {index[v]: t for v, t in labels.items()})
        return net.compacted()

    def compacted(self) -> "Network":
        """Renumber vertices into the deterministic topological order.

        The order is the order in which a depth-first traversal from the root
        (children visited in stored order) first reaches each vertex, where a
        vertex is only entered once all of its parents have been entered.
        Graphs without a unique root or with a cycle are returned unchanged.
        """
        order = self._topological_dfs()
        if order is None:
            return self
        if order == list(range(len(order))):
            return self
        new_id = {old: new for new, old in enumerate(order)}
        children = [[new_id[c] for c in self._children[old]] for old in order]
        labels = {new_id[v]: t for v, t in self._labels.items()}
        return Network(children, labels)

    def _topological_dfs(self) -> list[int] | None:
        if self._root is None:
            return None
        remaining = [len(ps) for ps in self._parents]
        order: list[int] = []
        stack = [self._root]
        while stack:
            v = stack.pop()
            order.append(v)
            for c in reversed(self._children[v]):
                remaining[c] -= 1
                if remaining[c] == 0:
                    stack.append(c)
        if len(order) != len(self._children):
            return None
        return order

    # -- queries ----------------------------------------------------------

    def __len__(self) -> int:
        return len(self._children)

    @property
    def n(self) -> int:
        return len(self._children)

    @property
    def root(self) -> int:
        if self._root is None:
            raise InvalidNetworkError([Violation("root", (), "no unique root")])
        return self._root

    @property
    def has_root(self) -> bool:
        return self._root is not None

    def children(self, v: int) -> tuple[int, ...]:
        return self._children[v]

    def parents(self, v: int) -> tuple[int, ...]:
        return self._parents[v]

    def arcs(self) -> Iterator[tuple[int, int]]:
        for u, cs in enumerate(self._children):
            for v in cs:
                yield (u, v)

    @property
    def num_arcs(self) -> int:
        return sum(len(cs) for cs in self._children)

    @property
    def labels(self) -> Mapping[int, str]:
        return self._labels

    @property
    def taxa(self) -> frozenset[str]:
        return frozenset(self._leaf_of)

    def label(self, v: int) -> str | None:
        return self._labels.get(v)

    def leaf(self, taxon: str) -> int:
        try:
            return self._leaf_of[taxon]
        except KeyError:
            raise KeyError(f"unknown taxon {taxon!r}") from None

    def parent(self, v: int) -> int:
        """The parent of a vertex with in-degree one."""
        ps = self._parents[v]
        if len(ps) != 1:
            raise InternalError(f"vertex {v} has {len(ps)} parents")
        return ps[0]

    def is_reticulation(self, v: int) -> bool:
        return len(self._parents[v]) == 2 and len(self._children[v]) == 1

    def reticulations(self) -> list[int]:
        return [v for v in range(self.n) if self.is_reticulation(v)]

    @property
    def num_reticulations(self) -> int:
        return sum(1 for v in range(self.n) if self.is_reticulation(v))

    @property
    def is_tree(self) -> bool:
        return self.num_reticulations == 0

    def leaf_taxa_below(self, v: int) -> list[str]:
        seen = {v}
        stack = [v]
        out = []
        while stack:
            w = stack.pop()
            if w in self._labels:
                out.append(self._labels[w])
            for c in self._children[w]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return self._children == other._children and self._labels == other._labels

    def __hash__(self) -> int:
        return hash((self._children, tuple(sorted(self._labels.items()))))

    def __repr__(self) -> str:
        return f"Network(n={self.n}, arcs={self.num_arcs}, taxa={sorted(self.taxa)})"


def validate(net: Network) -> list[Violation]:
    """Every violated network invariant; an empty list means ``net`` is valid."""
    out: list[Violation] = []
    n = net.n
    if n == 0:
        return [Violation("empty", (), "network has no vertices")]
    labels = net.labels
    if len(set(labels.values())) != len(labels):
        out.append(Violation("labels", (), "taxon labels are not unique"))
    if not labels:
        out.append(Violation("labels", (), "no labelled leaves"))

    for u in range(n):
        cs = net.children(u)
        seen: set[int] = set()
        for v in cs:
            if v in seen:
                out.append(Violation("parallel-arc", (u, v), "parallel arcs"))
            seen.add(v)
            if v == u:
                out.append(Violation("cycle", (u, v), "self loop"))

    roots = [v for v in range(n) if not net.parents(v)]
    if len(roots) != 1:
        out.append(Violation("root", tuple(roots), f"expected one in-degree-0 vertex, found {len(roots)}"))

    indeg = [len(net.parents(v)) for v in range(n)]
    ready = list(roots)
    done = 0
    while ready:
        u = ready.pop()
        done += 1
        for v in net.children(u):
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    if done != n:
        out.append(Violation("cycle", (), "digraph is not acyclic"))

    if len(labels) == 1 and n == 1:
        return out
    if n == 1:
        return out
    if len(labels) == 1:
        out.append(Violation("single-taxon", (), "a network on one taxon must be a single vertex"))

    for v in range(n):
        indeg, outdeg = len(net.parents(v)), len(net.children(v))
        labelled = v in labels
        if outdeg == 0:
            if not labelled:
                out.append(Violation("unlabelled-leaf", (v,), "out-degree-0 vertex without a label"))
            if indeg != 1:
                out.append(Violation("leaf-degree", (v,), f"leaf has in-degree {indeg}"))
            continue
        if labelled:
            out.append(Violation("labelled-internal", (v,), "labelled vertex has children"))
        if indeg == 0:
            if outdeg != 2:
                out.append(Violation("root-degree", (v,), f"root has out-degree {outdeg}"))
        elif not ((indeg == 1 and outdeg == 2) or (indeg == 2 and outdeg == 1)):
            out.append(Violation("degree", (v,), f"in-degree {indeg}, out-degree {outdeg}"))
    return out


def require_valid(net: Network, what: str = "network") -> None:
    problems = validate(net)
    if problems:
        raise InvalidNetworkError(problems, prefix=f"invalid {what}")


def classify(net: Network, v: int) -> VertexKind:
    if not 0 <= v < net.n:
        raise KeyError(f"unknown vertex {v}")
    indeg, outdeg = len(net.parents(v)), len(net.children(v))
    if outdeg == 0:
        return VertexKind.LEAF
    if indeg == 0:
        return VertexKind.ROOT
    if indeg == 2 and outdeg == 1:
        return VertexKind.RETICULATION
    if indeg == 1 and outdeg == 2:
        return VertexKind.TREE
    raise InvalidNetworkError([Violation("degree", (v,), f"in-degree {indeg}, out-degree {outdeg}")])


# -- editing ----------------------------------------------------------------


class _Draft:
    """Mutable adjacency used while a network is temporarily malformed."""

    def __init__(self, net: Network):
        self.children: dict[int, list[int]] = {v: list(net.children(v)) for v in range(net.n)}
        self.parents: dict[int, list[int]] = {v: list(net.parents(v)) for v in range(net.n)}
        self.labels: dict[int, str] = dict(net.labels)

    def remove_arc(self, u: int, v: int) -> None:
        self.children[u].remove(v)
        self.parents[v].remove(u)

    def remove_vertex(self, v: int) -> None:
        for c in self.children.pop(v):
            self.parents[c].remove(v)
        for p in self.parents.pop(v):
            self.children[p].remove(v)
        self.labels.pop(v, None)

    def freeze(self) -> Network:
        ids = sorted(self.children)
        new_id = {old: i for i, old in enumerate(ids)}
        children = [[new_id[c] for c in self.children[old]] for old in ids]
        labels = {new_id[v]: t for v, t in self.labels.items()}
        return Network(children, labels).compacted()


def _tidy_draft(d: _Draft) -> Network:
    limit = max(4, len(d.children) ** 2)
    for _ in range(limit):
        changed = False
        # (1) unlabelled dead ends
        dead = [v for v, cs in d.children.items() if not cs and v not in d.labels]
        while dead:
            v = dead.pop()
            if v not in d.children:
                continue
            ps = list(d.parents[v])
            d.remove_vertex(v)
            changed = True
            for p in ps:
                if p in d.children and not d.children[p] and p not in d.labels:
                    dead.append(p)
        # (2) suppress in-1/out-1 vertices, splicing in place to keep child order
        for v in list(d.children):
            if v not in d.children:
                continue
            if len(d.parents[v]) == 1 and len(d.children[v]) == 1:
                p, c = d.parents[v][0], d.children[v][0]
                pcs = d.children[p]
                pcs[pcs.index(v)] = c
                cps = d.parents[c]
                cps[cps.index(v)] = p
                del d.children[v], d.parents[v]
                d.labels.pop(v, None)
                changed = True
        # (3) root of out-degree one
        roots = [v for v, ps in d.parents.items() if not ps]
        if len(roots) == 1:
            r = roots[0]
            if len(d.children[r]) == 1 and r not in d.labels:
                d.remove_vertex(r)
                changed = True
        # (4) parallel arcs
        for u in list(d.children):
            cs = d.children[u]
            if len(cs) != len(set(cs)):
                seen: set[int] = set()
                for v in list(cs):
                    if v in seen:
                        d.remove_arc(u, v)
                        changed = True
                    seen.add(v)
        if not changed:
            if len(d.labels) == 1 and len(d.children) > 1:
                # (5) one taxon left: the network is that single vertex
                (taxon,) = d.labels.values()
                return Network([[]], {0: taxon})
            return d.freeze()
    raise InternalError("tidy did not reach a fixpoint")


def tidy(net: Network) -> Network:
    """Restore network form after arcs or vertices were removed.

    Each pass deletes unlabelled out-degree-0 vertices, suppresses
    in-1/out-1 vertices, drops a root of out-degree one and collapses
    parallel arcs, repeating until nothing changes.  A result with a
    single taxon is collapsed to that leaf.
    """
    return _tidy_draft(_Draft(net))


def delete_arc_tidy(net: Network, arc: tuple[int, int], *, force: bool = False) -> Network:
    u, v = arc
    if not (0 <= u < net.n) or v not in net.children(u):
        raise KeyError(f"arc {arc} not in network")
    if not force and not net.is_reticulation(v):
        raise ValueError(f"arc {arc} is not a reticulation arc")
    d = _Draft(net)
    d.remove_arc(u, v)
    return _tidy_draft(d)


def delete_leaf_tidy(net: Network, taxon: str) -> Network:
    v = net.leaf(taxon)
    if len(net.taxa) < 2:
        raise ValueError("cannot delete the only leaf")
    d = _Draft(net)
    d.remove_vertex(v)
    return _tidy_draft(d)


def fresh_label(net: Network) -> str:
    used = [int(m.group(1)) for t in net.taxa if (m := _FRESH_RE.match(t))]
    return f"{FRESH_PREFIX}{max(used, default=0) + 1}"


def reduce_cherry(net: Network, x: str, y: str) -> Network:
    vx, vy = net.leaf(x), net.leaf(y)
    if x == y or net.parents(vx) != net.parents(vy) or len(net.parents(vx)) != 1:
        raise ValueError(f"{{{x}, {y}}} is not a cherry")
    p = net.parents(vx)[0]
    label = fresh_label(net)
    d = _Draft(net)
    d.remove_vertex(vx)
    d.remove_vertex(vy)
    d.labels[p] = label
    return d.freeze()


# -- trees --------------------------------------------------------------------


def _lca(tree: Network, u: int, v: int) -> int:
    up = set()
    w: int | None = u
    while w is not None:
        up.add(w)
        ps = tree.parents(w)
        w = ps[0] if ps else None
    w = v
    while w not in up:
        w = tree.parent(w)
    return w


def _is_proper_descendant(tree: Network, v: int, anc: int) -> bool:
    while tree.parents(v):
        v = tree.parents(v)[0]
        if v == anc:
            return True
    return False


def displays_triple(tree: Network, i: str, j: str, k: str) -> bool:
    """Whether ``tree`` displays the rooted triple ``ij|k``."""
    if len({i, j, k}) != 3:
        raise ValueError("triple needs three distinct taxa")
    vi, vj, vk = tree.leaf(i), tree.leaf(j), tree.leaf(k)
    return _is_proper_descendant(tree, _lca(tree, vi, vj), _lca(tree, vi, vk))


# -- isomorphism ----------------------------------------------------------------


def _signatures(net: Network, table: dict) -> list[int]:
    # shared intern table so equal shapes get equal ids across both networks
    sig: list[int] = [0] * net.n
    for v in net._topological_dfs()[::-1]:
        if v in net.labels:
            key: tuple = ("L", net.labels[v])
        else:
            key = tuple(sorted(sig[c] for c in net.children(v)))
        sig[v] = table.setdefault(key, len(table))
    return sig


def is_isomorphic(n1: Network, n2: Network) -> bool:
    """Label-respecting digraph isomorphism for valid networks.

    Candidate vertex pairings come from bottom-up subtree signatures and
    are then matched by backtracking on parent sets.
    """
    if n1.n != n2.n or n1.num_arcs != n2.num_arcs or n1.taxa != n2.taxa:
        return False
    if not n1.has_root or not n2.has_root:
        return n1 == n2
    table: dict = {}
    s1, s2 = _signatures(n1, table), _signatures(n2, table)
    if sorted(s1) != sorted(s2):
        return False
    by_sig: dict[int, list[int]] = {}
    for v, s in enumerate(s2):
        by_sig.setdefault(s, []).append(v)
    mapping: dict[int, int] = {}
    used: set[int] = set()
    order = list(range(n1.n))

    def consistent(v: int, w: int) -> bool:
        for p in n1.parents(v):
            if p in mapping and mapping[p] not in n2.parents(w):
                return False
        if len(n1.parents(v)) != len(n2.parents(w)):
            return False
        for c in n1.children(v):
            if c in mapping and mapping[c] not in n2.children(w):
                return False
        return True

    def extend(k: int) -> bool:
        if k == len(order):
            return True
        v = order[k]
        for w in by_sig[s1[v]]:
            if w in used or not consistent(v, w):
                continue
            mapping[v] = w
            used.add(w)
            if extend(k + 1):
                return True
            del mapping[v]
            used.discard(w)
        return False

    return extend(0)
