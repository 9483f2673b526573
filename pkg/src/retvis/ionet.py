"""Readers and writers for extended Newick, plain Newick and arc lists.

Extended Newick dialect: a reticulation is written once with its subtree,
``(z)#H1``, and once as a bare reference, ``#H1``.  Internal node names are
accepted and ignored; branch lengths are not supported.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import InvalidNetworkError, Network, validate

__all__ = [
    "ParseError",
    "parse_enewick",
    "write_enewick",
    "parse_newick",
    "write_newick",
    "parse_arclist",
    "write_arclist",
    "parse_network",
]

LABEL_RE = re.compile(r"[A-Za-z0-9_.|\-]+")
_TAG_RE = re.compile(r"#[A-Za-z]*\d+")


class ParseError(ValueError):
    def __init__(self, message: str, position: int | None = None, line: int | None = None):
        self.position = position
        self.line = line
        where = ""
        if line is not None:
            where = f"line {line}: "
        elif position is not None:
            where = f"position {position}: "
        super().__init__(where + message)


@dataclass
class _Node:
    children: list["_Node"] = field(default_factory=list)
    name: str | None = None
    tag: str | None = None
    has_subtree: bool = False
    pos: int = 0


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.i = 0

    def skip(self) -> None:
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.i] if self.i < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            found = self.peek() or "end of input"
            raise ParseError(f"expected {ch!r}, found {found!r}", self.i)
        self.i += 1

    def node(self) -> _Node:
        start = self.i
        nd = _Node(pos=start)
        if self.peek() == "(":
            self.i += 1
            nd.has_subtree = True
            nd.children.append(self.node())
            while self.peek() == ",":
                self.i += 1
                nd.children.append(self.node())
            self.expect(")")
        self.skip()
        m = LABEL_RE.match(self.text, self.i)
        if m:
            nd.name = m.group(0)
            self.i = m.end()
        if self.peek() == "#":
            self.skip()
            m = _TAG_RE.match(self.text, self.i)
            if not m:
                raise ParseError("malformed hybrid tag", self.i)
            nd.tag = m.group(0)
            self.i = m.end()
        nxt = self.peek()
        if nxt == ":":
            raise ParseError("branch lengths are not supported", self.i)
        if not nd.has_subtree and nd.name is None and nd.tag is None:
            raise ParseError(f"unexpected {nxt or 'end of input'!r}", self.i)
        return nd

    def document(self) -> _Node:
        root = self.node()
        self.expect(";")
        if self.peek():
            raise ParseError("trailing characters after ';'", self.i)
        return root


def _build(root: _Node) -> tuple[Network, int]:
    arcs: list[tuple[int, int]] = []
    labels: dict[int, str] = {}
    tag_vertex: dict[str, int] = {}
    tag_count: dict[str, int] = {}
    tag_subtree: dict[str, _Node] = {}
    counter = 0

    def new_vertex() -> int:
        nonlocal counter
        counter += 1
        return counter - 1

    def visit(nd: _Node) -> int:
        if nd.tag is not None:
            tag_count[nd.tag] = tag_count.get(nd.tag, 0) + 1
            if nd.tag in tag_vertex:
                v = tag_vertex[nd.tag]
            else:
                v = tag_vertex[nd.tag] = new_vertex()
            if nd.has_subtree:
                if nd.tag in tag_subtree:
                    raise ParseError(f"hybrid {nd.tag} has two subtrees", nd.pos)
                tag_subtree[nd.tag] = nd
        else:
            v = new_vertex()
        if not nd.has_subtree and nd.name is not None:
            if nd.name.startswith("_"):
                raise ParseError(f"leaf label {nd.name!r} uses the reserved '_' prefix", nd.pos)
            if v in labels and labels[v] != nd.name:
                raise ParseError(f"hybrid {nd.tag} carries two labels", nd.pos)
            labels[v] = nd.name
        for ch in nd.children:
            arcs.append((v, visit(ch)))
        return v

    visit(root)
    for tag, k in tag_count.items():
        if k != 2:
            raise ParseError(f"hybrid tag {tag} appears {k} times (expected 2)")
    return Network.from_arcs(arcs, labels, vertices=range(counter)), len(tag_count)


def parse_enewick(text: str) -> Network:
    root = _Parser(text).document()
    net, _ = _build(root)
    problems = validate(net)
    if problems:
        raise InvalidNetworkError(problems, prefix="invalid network")
    return net


def parse_newick(text: str) -> Network:
    root = _Parser(text).document()
    net, ntags = _build(root)
    if ntags:
        raise ParseError("tree expected, found hybrid tags")
    problems = validate(net)
    if problems:
        raise InvalidNetworkError(problems, prefix="invalid tree")
    return net


def _min_taxon(net: Network) -> list[str]:
    low: list[str] = [""] * net.n
    for v in reversed(range(net.n)):
        if v in net.labels:
            low[v] = net.labels[v]
        else:
            low[v] = min(low[c] for c in net.children(v))
    return low


def write_enewick(net: Network) -> str:
    """Canonical extended Newick text.

    Children are ordered by their smallest descendant taxon and hybrid tags
    are numbered in order of discovery.
    """
    low = _min_taxon(net)
    tags: dict[int, int] = {}
    parts: list[str] = []

    def emit(v: int) -> None:
        if net.is_reticulation(v):
            if v in tags:
                parts.append(f"#H{tags[v]}")
                return
            tags[v] = len(tags) + 1
            parts.append("(")
            emit(net.children(v)[0])
            parts.append(f")#H{tags[v]}")
            return
        if v in net.labels:
            parts.append(net.labels[v])
            return
        parts.append("(")
        for k, c in enumerate(sorted(net.children(v), key=lambda c: (low[c], c))):
            if k:
                parts.append(",")
            emit(c)
        parts.append(")")

    emit(net.root)
    return "".join(parts) + ";"


def write_newick(tree: Network) -> str:
    if not tree.is_tree:
        raise ValueError("tree expected, network has reticulations")
    return write_enewick(tree)


def parse_arclist(text: str) -> Network:
    """Parse the ``# taxa: ...`` header plus one ``u -> v`` line per arc."""
    taxa: list[str] | None = None
    arcs: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("taxa:"):
                if taxa is not None:
                    raise ParseError("duplicate taxa header", line=lineno)
                taxa = [t.strip() for t in body[len("taxa:"):].split(",") if t.strip()]
                for t in taxa:
                    if not LABEL_RE.fullmatch(t) or t.startswith("_"):
                        raise ParseError(f"bad taxon name {t!r}", line=lineno)
            continue
        if "->" not in line:
            raise ParseError(f"expected 'u -> v', got {line!r}", line=lineno)
        u, v = (s.strip() for s in line.split("->", 1))
        if not u or not v:
            raise ParseError("empty vertex name", line=lineno)
        if (u, v) in seen:
            raise ParseError(f"duplicate arc {u} -> {v}", line=lineno)
        seen.add((u, v))
        arcs.append((u, v))
    if taxa is None:
        raise ParseError("missing '# taxa:' header")
    if len(set(taxa)) != len(taxa):
        raise ParseError("duplicate taxon in header")
    names = {u for u, _ in arcs} | {v for _, v in arcs}
    if arcs:
        for t in taxa:
            if t not in names:
                raise ParseError(f"unknown taxon {t!r} in header")
    vertices: list[str] = []
    for u, v in arcs:
        vertices.extend((u, v))
    net = Network.from_arcs(arcs, {t: t for t in taxa}, vertices=vertices)
    problems = validate(net)
    if problems:
        raise InvalidNetworkError(problems, prefix="invalid network")
    return net


def write_arclist(net: Network) -> str:
    def name(v: int) -> str:
        return net.labels.get(v, f"_{v}")

    lines = ["# taxa: " + ",".join(sorted(net.taxa))]
    lines.extend(f"{name(u)} -> {name(v)}" for u, v in net.arcs())
    return "\n".join(lines) + "\n"


def parse_network(text: str) -> Network:
    """Dispatch on content: arc lists start with a ``# taxa:`` header."""
    stripped = text.lstrip()
    if stripped.startswith("#") and re.match(r"#\s*taxa:", stripped):
        return parse_arclist(text)
    return parse_enewick(text)
