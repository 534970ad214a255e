from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laffab.model import (EDGE, Annotation, EdgeRecord, FeatureKey, NodeRecord, PrimaryData,
                          Region, validate)
from laffab.synth import random_graph


def test_toy_is_valid(toy):
    assert validate(toy) == []


def test_primary_length():
    assert PrimaryData("the cat sat").length == 11
    assert PrimaryData("שמים").length == 4


def test_region_past_end(toy):
    # the fixture text has 11 characters, so that is the length reported
    g = replace(toy, regions=toy.regions + (Region("r9", 0, 99),))
    assert validate(g) == ["region r9 anchor 99 exceeds primary length 11"]


def test_dangling_edge(toy):
    g = replace(toy, edges=toy.edges + (EdgeRecord("e9", "n1", "nX"),))
    problems = validate(g)
    assert len(problems) == 1 and "nX" in problems[0]


def test_self_loop_allowed(toy):
    assert validate(replace(toy, edges=toy.edges + (EdgeRecord("e9", "n1", "n1"),))) == []


def test_nested_feature_reported(toy):
    bad = Annotation("a9", "toy", "word", "n1", features={"pos": {"x": "y"}})
    assert any("a9" in p for p in validate(replace(toy, annotations=toy.annotations + (bad,))))


@pytest.mark.parametrize("change, needle", [
    (lambda g: replace(g, nodes=g.nodes + (NodeRecord("n1", ()),)), "duplicate"),
    (lambda g: replace(g, nodes=g.nodes + (NodeRecord("n9", ("r0", "r0")),)), "r0"),
    (lambda g: replace(g, nodes=g.nodes + (NodeRecord("n9", ("rX",)),)), "rX"),
    (lambda g: replace(g, regions=g.regions + (Region("r9", 5, 2),)), "r9"),
    (lambda g: replace(g, annotations=g.annotations + (Annotation("a9", "toy", "w", "zz"),)), "zz"),
    (lambda g: replace(g, annotations=g.annotations + (Annotation("a9", "", "w", "n1"),)), "a9"),
])
def test_each_violation_kind(toy, change, needle):
    problems = validate(change(toy))
    assert problems and any(needle in p for p in problems)


def test_key_on_both_kinds(toy):
    # a dense per-kind table cannot hold one key for both nodes and edges
    bad = Annotation("a9", "toy", "rel", "n1", features={"kind": "x"})
    assert validate(replace(toy, annotations=toy.annotations + (bad,)))


def test_edge_annotation_target_kind(toy):
    wrong = Annotation("a9", "toy", "rel2", "n1", EDGE, {"kind": "x"})
    assert validate(replace(toy, annotations=toy.annotations + (wrong,)))


def test_feature_key_text_form():
    k = FeatureKey.parse("syn:clause.tense")
    assert k == FeatureKey("syn", "clause", "tense")
    assert str(k) == "syn:clause.tense"
    assert FeatureKey.parse("s:a.b.c") == FeatureKey("s", "a.b", "c")
    with pytest.raises(ValueError):
        FeatureKey.parse("nocolon")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_validate_pure_and_random_graphs_valid(seed):
    g = random_graph(seed, max_nodes=60, max_features=200)
    assert validate(g) == validate(g) == []
