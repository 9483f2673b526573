"""Command-line front end.

Exit status: 0 success, 1 answer "no" (only with --status-by-answer),
2 input error, 3 internal invariant failure.
"""

from __future__ import annotations

import random
import sys
import time

import click

from .analysis import is_reticulation_visible
from .core import InternalError, InvalidNetworkError
from .genbounds import extremal_network, random_rv_network, random_tree, sample_displayed_tree
from .ionet import ParseError, parse_network, parse_newick, write_enewick
from .oracle import DEFAULT_CAP, CapExceededError, display_set, displays_oracle
from .treedetect import tree_containment

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


def _fail(message: str, code: int = EXIT_INPUT):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        _fail(f"{path}: {exc.strerror}")


def _load_network(path: str):
    try:
        return parse_network(_read(path))
    except (ParseError, InvalidNetworkError) as exc:
        _fail(f"{path}: {exc}")


def _load_tree(path: str):
    try:
        return parse_newick(_read(path))
    except (ParseError, InvalidNetworkError) as exc:
        _fail(f"{path}: {exc}")


def _bool(x: bool) -> str:
    return "true" if x else "false"


@click.group()
def main() -> None:
    """Tree containment for reticulation-visible networks."""


@main.command()
@click.argument("path")
def validate(path: str) -> None:
    """Report size, visibility and vertex/reticulation bounds of a network."""
    net = _load_network(path)
    m = len(net.taxa)
    click.echo(
        f"m={m} n={net.n} r={net.num_reticulations} visible={_bool(is_reticulation_visible(net))} "
        f"n_bound={8 * m - 7} r_bound={3 * m - 3}"
    )


@main.command()
@click.argument("net_path")
@click.argument("tree_path")
@click.option("--trace", is_flag=True, help="Print one line per reduction to stderr.")
@click.option("--oracle-verify", is_flag=True, help="Cross-check with the brute-force oracle.")
@click.option("--status-by-answer", is_flag=True, help="Exit 1 when the answer is no.")
def check(net_path: str, tree_path: str, trace: bool, oracle_verify: bool, status_by_answer: bool) -> None:
    """Decide whether the network displays the tree."""
    net, tree = _load_network(net_path), _load_tree(tree_path)
    if net.taxa != tree.taxa:
        _fail("network and tree have different taxon sets")
    if not is_reticulation_visible(net):
        _fail("network is not reticulation-visible")
    if oracle_verify and net.num_reticulations > DEFAULT_CAP:
        _fail(f"--oracle-verify needs at most {DEFAULT_CAP} reticulations")
    try:
        answer, steps = tree_containment(net, tree)
    except InternalError as exc:
        _fail(f"internal: {exc}", EXIT_INTERNAL)
    if trace:
        for step in steps:
            click.echo(str(step), err=True)
    click.echo("yes" if answer else "no")
    if oracle_verify and displays_oracle(net, tree) != answer:
        _fail("oracle disagrees with the reduction", EXIT_INTERNAL)
    if status_by_answer and not answer:
        sys.exit(EXIT_NO)


@main.command()
@click.argument("net_path")
@click.argument("tree_path", required=False)
@click.option("--display-set", "show_set", is_flag=True, help="List every displayed tree.")
@click.option("--max-ret", default=DEFAULT_CAP, show_default=True, help="Reticulation cap.")
def oracle(net_path: str, tree_path: str | None, show_set: bool, max_ret: int) -> None:
    """Brute-force containment or display-set listing."""
    net = _load_network(net_path)
    if show_set == (tree_path is not None):
        _fail("give either a tree file or --display-set")
    try:
        if show_set:
            for line in sorted(display_set(net, max_ret)):
                click.echo(line)
            return
        tree = _load_tree(tree_path)
        if net.taxa != tree.taxa:
            _fail("network and tree have different taxon sets")
        click.echo("yes" if displays_oracle(net, tree, max_ret) else "no")
    except CapExceededError as exc:
        _fail(str(exc))


@main.group()
def gen() -> None:
    """Generate networks."""


@gen.command("extremal")
@click.option("--leaves", "m", type=int, required=True)
def gen_extremal(m: int) -> None:
    if m < 1:
        _fail("--leaves must be at least 1")
    click.echo(write_enewick(extremal_network(m)))


@gen.command("random")
@click.option("--leaves", "m", type=int, required=True)
@click.option("--rets", "r", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
def gen_random(m: int, r: int, seed: int) -> None:
    try:
        net = random_rv_network(m, r, seed)
    except ValueError as exc:
        _fail(str(exc))
    if net.num_reticulations < r:
        click.echo(f"note: reached {net.num_reticulations} of {r} reticulations", err=True)
    click.echo(write_enewick(net))


@main.command()
@click.option("--max-leaves", "max_m", type=int, default=8, show_default=True)
@click.option("--samples", "k", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def bench(max_m: int, k: int, seed: int) -> None:
    """Time tree containment on random instances; CSV on stdout."""
    click.echo("m,n,r,trial,answer,micros")
    for m in range(1, max_m + 1):
        rng = random.Random(f"bench:{seed}:{m}")
        for trial in range(k):
            net = random_rv_network(m, rng.randint(0, 3 * m - 3), rng.randrange(2**32))
            trees = (
                sample_displayed_tree(net, rng.randrange(2**32)),
                random_tree(sorted(net.taxa), rng.randrange(2**32)),
            )
            for tree in trees:
                start = time.perf_counter()
                answer, _ = tree_containment(net, tree)
                micros = int((time.perf_counter() - start) * 1e6)
                click.echo(
                    f"{m},{net.n},{net.num_reticulations},{trial},{'yes' if answer else 'no'},{micros}"
                )


if __name__ == "__main__":
    main()
