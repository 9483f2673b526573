"""Tree containment for reticulation-visible phylogenetic networks."""

from .analysis import build_tables, find_rho, find_v, is_reticulation_visible
from .core import (
    InternalError,
    InvalidNetworkError,
    Network,
    delete_arc_tidy,
    delete_leaf_tidy,
    displays_triple,
    is_isomorphic,
    reduce_cherry,
    tidy,
    validate,
)
from .genbounds import bounds_report, extremal_network, random_rv_network, sample_displayed_tree
from .ionet import ParseError, parse_enewick, parse_network, parse_newick, write_enewick, write_newick
from .oracle import display_set, displays_oracle, tree_equal
from .treedetect import tree_containment

__version__ = "0.1.0"
