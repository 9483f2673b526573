from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rv_networks, suite
from retvis.analysis import RelPosition, build_tables
from retvis.core import InvalidNetworkError, Network, delete_arc_tidy, delete_leaf_tidy, validate
from retvis.genbounds import random_tree, sample_displayed_tree
from retvis.ionet import parse_enewick, parse_newick
from retvis.oracle import displays_oracle
from retvis.treedetect import (
    TABLE1,
    TABLE2,
    AnswerNo,
    AnswerYes,
    DeleteArc,
    DeleteLeaf,
    decide,
    detect_easy_case,
    select_cherry,
    tree_containment,
)

DATA = Path(__file__).parent / "data"
KEYS = {
    "P12": RelPosition.ON_P12, "P34": RelPosition.ON_P34,
    ">p": RelPosition.ABOVE_P, ">q": RelPosition.ABOVE_Q,
    "T1": RelPosition.TYPE1, "T2": RelPosition.TYPE2,
    "T3": RelPosition.TYPE3, "T4": RelPosition.TYPE4,
}


def load_table(name):
    rows = {}
    for line in (DATA / name).read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        p, q, *acts = line.split("\t")
        rows[KEYS[p], KEYS[q]] = tuple(acts)
    return rows


def apply(net, tree, dec):
    act = dec.action
    if isinstance(act, DeleteArc):
        return delete_arc_tidy(net, (act.tail, act.head)), tree
    return delete_leaf_tidy(net, act.taxon), delete_leaf_tidy(tree, act.taxon)


class TestTables:
    def test_table1_matches_transcription(self):
        assert load_table("table1.txt") == TABLE1
        assert len(TABLE1) == 16

    def test_table2_matches_transcription(self):
        assert load_table("table2.txt") == TABLE2
        assert len(TABLE2) == 16

    def test_spot_entries(self):
        assert TABLE1[RelPosition.ON_P12, RelPosition.ON_P34][0] == "pc"
        assert TABLE1[RelPosition.ABOVE_P, RelPosition.ABOVE_Q] == ("b", "b", "b")
        assert TABLE2[RelPosition.TYPE1, RelPosition.TYPE2][1] == "qc"
        assert TABLE2[RelPosition.TYPE3, RelPosition.TYPE4] == ("b", "b", "b")


class TestSelectCherry:
    def test_leaf_sibling(self):
        assert select_cherry(parse_newick("((x,y),z);")) == ("x", "y", ("z",))

    def test_tie_goes_to_smallest_label(self):
        assert select_cherry(parse_newick("((x,y),(z,w));")) == ("w", "z", ("x", "y"))

    def test_deepest(self):
        assert select_cherry(parse_newick("(((x,y),z),o);")) == ("x", "y", ("z",))
        assert select_cherry(parse_newick("((a,b),((c,d),e));")) == ("c", "d", ("e",))

    def test_root_cherry(self):
        assert select_cherry(parse_newick("(x,y);")) == ("x", "y", ())

    def test_too_small(self):
        with pytest.raises(ValueError):
            select_cherry(parse_newick("x;"))


class TestEasyCases:
    def test_net1_xz(self, net1):
        tree = parse_newick("((x,z),y);")
        dec = detect_easy_case(net1, build_tables(net1), "x", "z", tree)
        # rho=0 s=1 t=3 h=4: h's other incoming arc (t,h) goes
        assert dec.label == "EC2" and dec.action == DeleteArc(3, 4)

    def test_net1_xy(self, net1):
        tree = parse_newick("((x,y),z);")
        dec = detect_easy_case(net1, build_tables(net1), "x", "y", tree)
        assert dec.label == "EC2" and dec.action == DeleteArc(1, 4)
        after = delete_arc_tidy(net1, (1, 4))
        nxt = decide(after, tree)
        assert nxt.label == "EC2" and isinstance(nxt.action, AnswerNo)

    def test_ext2(self, ext2):
        dec = detect_easy_case(ext2, build_tables(ext2), "x", "y", parse_newick("(x,y);"))
        assert dec.label == "EC3"
        assert dec.action == DeleteArc(1, 7)


class TestAnswers:
    @pytest.mark.parametrize(
        "newick, want", [("((x,z),y);", True), ("(x,(y,z));", True), ("((x,y),z);", False)]
    )
    def test_net1(self, net1, newick, want):
        answer, trace = tree_containment(net1, parse_newick(newick))
        assert answer is want
        assert displays_oracle(net1, parse_newick(newick)) is want
        assert trace[0].label == "EC2"

    def test_net1_trace(self, net1):
        _, trace = tree_containment(net1, parse_newick("((x,z),y);"))
        assert [str(s) for s in trace] == ["EC2 delete-arc 3->4", "EC1 delete-leaf z", "TwoLeafYes yes"]

    def test_single(self, single):
        answer, trace = tree_containment(single, parse_newick("x;"))
        assert answer and [s.label for s in trace] == ["TrivialYes"]

    def test_ext2(self, ext2):
        answer, trace = tree_containment(ext2, parse_newick("(x,y);"))
        assert answer and [s.label for s in trace] == ["TwoLeafYes"]

    def test_situation_1_outgroup(self):
        arcs = [
            ("R", "rho"), ("R", "c"), ("rho", "p"), ("rho", "q"), ("p", "va"), ("p", "vb"),
            ("q", "va"), ("q", "vb"), ("va", "a"), ("vb", "b"),
        ]
        net = Network.from_arcs(arcs, {x: x for x in "abc"})
        dec = decide(net, parse_newick("((a,b),c);"))
        # c lies outside rho_ab's subtree, so (p_a, v_a) goes
        assert dec.label == "SC1.1" and dec.action == DeleteArc(2, 4)


class TestEntry:
    def test_taxa_mismatch(self, net1):
        with pytest.raises(ValueError):
            tree_containment(net1, parse_newick("((x,y),w);"))

    def test_invisible(self):
        arcs = [
            ("rho", "u1"), ("rho", "u2"), ("u1", "h1"), ("u1", "h2"), ("u2", "h2"),
            ("u2", "h3"), ("h2", "u3"), ("u3", "h1"), ("u3", "h3"), ("h1", "x"), ("h3", "y"),
        ]
        net = Network.from_arcs(arcs, {"x": "x", "y": "y"})
        with pytest.raises(InvalidNetworkError, match="visible"):
            tree_containment(net, parse_newick("(x,y);"))

    def test_invalid_network(self):
        bad = Network.from_arcs([("r", "x"), ("r", "u"), ("u", "y")], {"x": "x", "y": "y"})
        with pytest.raises(InvalidNetworkError):
            tree_containment(bad, parse_newick("(x,y);"))

    def test_tree_must_be_tree(self, net1):
        with pytest.raises(ValueError):
            tree_containment(net1, net1)


# Smallest instance found for each case label (and table row), frozen with the
# oracle's verdict on the whole instance.
CASES = [
    ('((t1,t3),t2);',
     '((t1,t3),t2);', 'EC1 delete-leaf t3', None, True),
    ('((t1,t2),t3);',
     '(t1,(t2,t3));', 'EC2 no (tree path from parent of t2 reaches t1)', None, False),
    ('((((t1)#H1,t3),#H1),t2);',
     '((t1,t3),t2);', 'EC2 delete-arc 1->3', None, True),
    ('((((t1)#H1,t3),((#H1,t2))#H2),#H2);',
     '((t1,t2),t3);', 'EC3 delete-arc 2->6', None, True),
    ('((((t1)#H1,(t2)#H2),#H1),(#H2,t3));',
     '((t1,t2),t3);', 'EC4 delete-arc 5->6', None, True),
    ('((((t1)#H1,((t2,(t3)#H3))#H2),(#H1,#H2)),#H3);',
     '((t1,t2),t3);', 'EC5 delete-arc 7->9', None, True),
    ('(((((t1,(t3)#H2))#H1,(t2)#H3),#H2),(#H1,#H3));',
     '(t1,(t2,t3));', 'EC6 delete-arc 5->7', None, True),
    ('(((((((t1)#H2,((t3)#H3,(t4)#H4)),#H2))#H1,(((((t2)#H6,(t5)#H7),(#H3,#H4)),#H7))#H5),#H6),(#H1,#H5));',
     '((t1,((t3,t4),t5)),t2);', 'EC7 delete-arc 9->19', None, True),
    ('((((t1)#H1,(t3)#H2),(#H1,#H2)),t2);',
     '((t1,t3),t2);', 'SC1.1 delete-arc 2->4', None, True),
    ('((((t1)#H1,(((t2,(t4)#H3))#H2,(t3)#H4)),(#H1,#H4)),(#H2,#H3));',
     '(((t1,t3),t2),t4);', 'SC1.2 delete-arc 11->13', None, True),
    ('((((t1,t6))#H1,((t2)#H2,(t3)#H3)),((#H1,((t4,t5))#H4),((#H2,#H3),#H4)));',
     '((t1,(t4,t6)),((t2,t3),t5));', 'SC1.3 no (t5 and t4 meet below t2)', None, False),
    ('(((((t1)#H1,(t4)#H2),(#H1,((((t2)#H4,t3))#H3,#H2))),#H3),#H4);',
     '(((t1,t4),t2),t3);', 'SC1.3 delete-arc 9->10', None, False),
    ('(((((t1)#H1,(t3)#H2),(t2)#H3),(#H1,#H3)),#H2);',
     '((t1,t2),t3);', 'SC1.4 delete-arc 0->4', None, True),
    ('((((t1)#H1,(t3)#H2),t2),(#H1,#H2));',
     '((t1,t3),t2);', 'SC1.5 delete-arc 4->5', ('>p_ab', '>p_ab'), True),
    ('(((t1)#H1,((t2)#H2,(t3)#H3)),(#H1,(#H2,#H3)));',
     '(t1,(t2,t3));', 'SC1.5 delete-leaf t3', ('>p_ab', '>q_ab'), True),
    ('(((((t1)#H1,(t2)#H2),(t3)#H3),#H2),(#H1,#H3));',
     '((t1,t3),t2);', 'SC1.5 delete-arc 3->4', ('>p_ab', 'P1|P2'), True),
    ('((((t1)#H1,(t3)#H2),(t2)#H3),((#H1,#H3),#H2));',
     '((t1,t3),t2);', 'SC1.5 delete-arc 4->5', ('>p_ab', 'P3|P4'), True),
    ('((((((((t1,(t4)#H2),(t2)#H3))#H1,(t3)#H4),#H2),#H3),#H4),#H1);',
     '(t1,((t2,t4),t3));', 'SC1.5 delete-leaf t4', ('>q_ab', '>p_ab'), True),
    ('((t1,((t2)#H1,(t3)#H2)),(#H1,#H2));',
     '(t1,(t2,t3));', 'SC1.5 delete-arc 4->5', ('>p_ab', '>p_ab'), True),
    ('(((((t1)#H1,(t4)#H2),(t3)#H3),(((#H1,(t2)#H5),((#H5,#H3),#H2)))#H4),#H4);',
     '(((t1,t4),t3),t2);', 'SC1.5 delete-arc 6->7', ('>q_ab', 'P1|P2'), True),
    ('(((t1)#H1,(t3)#H2),((#H1,((t2)#H3,#H2)),#H3));',
     '((t1,t3),t2);', 'SC1.5 delete-arc 6->7', ('>q_ab', 'P3|P4'), True),
    ('((((((t1)#H1,(t4)#H2),(t2)#H3),(t3)#H4),(#H1,#H3)),(#H4,#H2));',
     '(t1,(t2,(t3,t4)));', 'SC1.5 delete-arc 3->8', ('P1|P2', '>p_ab'), False),
    ('(((t1)#H1,((t2)#H2,(t3)#H3)),((#H1,#H3),#H2));',
     '((t1,t3),t2);', 'SC1.5 delete-arc 1->5', ('P1|P2', '>q_ab'), True),
    ('((((t1)#H1,t3),(t2)#H2),(#H1,#H2));',
     '((t1,t2),t3);', 'SC1.5 delete-arc 2->5', ('P1|P2', 'P1|P2'), True),
    ('((((t1)#H1,(t3)#H2),(t2)#H3),((#H1,#H3),#H2));',
     '(t1,(t2,t3));', 'SC1.5 delete-arc 2->5', ('P1|P2', 'P3|P4'), True),
    ('(((((((((t1)#H2,(t3)#H3),(t4)#H4),(t2)#H5),#H2))#H1,#H3),(#H5,#H4)),#H1);',
     '(t1,(t2,(t3,t4)));', 'SC1.5 delete-arc 12->13', ('>p_ab', 'P3|P4'), True),
    ('(((((t1)#H1,(t3)#H2),(t2)#H3),(t4)#H4),(((((#H1,(t6)#H5),(#H4,(t5)#H6)),#H2),(#H3,#H5)),#H6));',
     '((((t1,t4),t6),t5),(t2,t3));', 'SC1.5 delete-arc 8->21', ('P3|P4', '>q_ab'), True),
    ('((((t1)#H1,((t2)#H2,(t3)#H3)),(((((((#H1,#H2),#H3),(t5)#H5),#H5),(t4)#H6),#H6))#H4),#H4);',
     '(((t1,t3),t2),(t4,t5));', 'SC1.5 delete-arc 3->13', ('P3|P4', 'P1|P2'), False),
    ('(((t1,(t3)#H1),(t2)#H2),(#H2,#H1));',
     '(t1,(t2,t3));', 'SC1.5 delete-arc 1->5', ('P1|P2', 'P1|P2'), True),
    ('((((t1)#H1,(t3)#H2),(((t2)#H3,(t4)#H4),(#H3,#H4))),(#H1,#H2));',
     '((t1,t3),(t2,t4));', 'SC2.2 delete-arc 4->6', None, True),
    ('(((t1)#H1,((((((t2)#H3,(t4)#H4),(t5)#H5),#H3))#H2,(t3)#H6)),(((#H1,#H4),(#H6,#H5)),#H2));',
     '(((t1,t3),(t4,t5)),t2);', 'SC2.3 delete-arc 14->17', None, False),
    ('((((((t1)#H1,(t3)#H2),(t4)#H3),(#H2,#H3)),(t2)#H4),(#H1,#H4));',
     '((t1,t2),(t3,t4));', 'SC2.4 delete-arc 4->11', ('Type1', 'Type1'), True),
    ('((((t1)#H1,(t3)#H2),((t2)#H3,(t4)#H4)),(((#H1,#H3),#H2),#H4));',
     '((t1,t2),(t3,t4));', 'SC2.4 delete-arc 2->11', ('Type1', 'Type2'), True),
    ('(((((t1)#H1,(t3)#H2),((t2)#H3,(t4)#H4)),(#H1,#H3)),(#H2,#H4));',
     '((t1,t2),(t3,t4));', 'SC2.4 delete-arc 3->6 [swapped]', ('Type1', 'Type3'), True),
    ('(((t1)#H1,((t2)#H2,((t3)#H3,(t4)#H4))),((#H1,#H3),(#H2,#H4)));',
     '((t1,t3),(t2,t4));', 'SC2.4 delete-arc 1->6', ('Type1', 'Type4'), True),
    ('(((((t1)#H1,(t2)#H2),(t4)#H3),(#H1,(#H2,(t3)#H4))),(#H4,#H3));',
     '((t1,t2),(t3,t4));', 'SC2.4 delete-arc 7->11 [swapped]', ('Type1', 'Type1'), True),
    ('(((((t1)#H1,(t4)#H2),((t2)#H3,(t3)#H4)),(#H1,#H3)),(#H4,#H2));',
     '((t1,t2),(t3,t4));', 'SC2.4 delete-arc 3->6 [swapped]', ('Type1', 'Type3'), True),
    ('(((((t1)#H1,(t2)#H2),((t3)#H3,(t4)#H4)),(#H2,#H4)),(#H1,#H3));',
     '((t1,t3),(t2,t4));', 'SC2.4 delete-arc 3->6', ('Type1', 'Type3'), True),
    ('((((t1)#H1,(t4)#H2),((t2)#H3,(t3)#H4)),((#H1,#H3),(#H4,#H2)));',
     '((t1,t4),(t2,t3));', 'SC2.4 delete-arc 5->6', ('Type3', 'Type2'), True),
    ('((((t1)#H1,(t2)#H2),((t3)#H3,(t4)#H4)),((#H1,#H2),(#H3,#H4)));',
     '((t1,t2),(t3,t4));', 'SC2.4 delete-leaf t2', ('Type3', 'Type4'), True),
    ('((((t1)#H1,(t4)#H2),(((#H1,(t2)#H3),(t3)#H4),#H2)),(#H3,#H4));',
     '((t1,t4),(t2,t3));', 'SC2.4 delete-arc 5->6 [swapped]', ('Type3', 'Type1'), True),
    ('(((t1)#H1,(t2)#H2),(((#H1,#H2),((t3)#H3,(t4)#H4)),(#H3,#H4)));',
     '((t1,t2),(t3,t4));', 'SC2.4 delete-arc 1->5', ('Type4', 'Type4'), True),
]


@pytest.mark.parametrize("enewick, newick, first, row, want", CASES)
def test_case_catalogue(enewick, newick, first, row, want):
    net, tree = parse_enewick(enewick), parse_newick(newick)
    dec = decide(net, tree)
    assert str(dec) == first
    assert dec.witness.get("row") == row
    assert displays_oracle(net, tree) is want
    if not isinstance(dec.action, (AnswerYes, AnswerNo)):
        assert displays_oracle(*apply(net, tree, dec)) is want
    assert tree_containment(net, tree, check_steps=True)[0] is want


def test_random_suite_agrees_with_oracle():
    for net, tree, kind in suite(150, seed=11):
        answer, trace = tree_containment(net, tree, check_steps=True)
        assert answer == displays_oracle(net, tree)
        if kind == "displayed":
            assert answer


@settings(max_examples=60, deadline=None)
@given(rv_networks(max_m=7), st.integers(0, 2**31), st.booleans())
def test_every_step_preserves_the_answer(net, seed, displayed):
    tree = sample_displayed_tree(net, seed) if displayed else random_tree(sorted(net.taxa), seed)
    want = displays_oracle(net, tree)
    m0 = len(net.taxa)
    steps = 0
    while True:
        dec = decide(net, tree)
        steps += 1
        if isinstance(dec.action, AnswerYes):
            assert want
            break
        if isinstance(dec.action, AnswerNo):
            assert not want
            break
        if isinstance(dec.action, DeleteArc):
            assert net.is_reticulation(dec.action.head)
        before = net.num_arcs + len(net.taxa)
        net, tree = apply(net, tree, dec)
        assert validate(net) == []
        assert net.num_arcs + len(net.taxa) < before
        assert displays_oracle(net, tree) is want
    assert steps <= 12 * m0


def test_deterministic():
    for net, tree, _ in suite(20, seed=3):
        first = [str(s) for s in tree_containment(net, tree)[1]]
        assert first == [str(s) for s in tree_containment(net, tree)[1]]
