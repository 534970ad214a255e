import importlib.util
import xml.etree.ElementTree as ET
from dataclasses import replace
from collections import Counter
from decimal import Decimal
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from laffab.analysis import (ARROW, Pattern, count_patterns, cooccurrence, freq_table,
                             percentage)
from laffab.compiler import compile_graph

from fixtures import DOC_A, DOC_B, clause_corpus, two_documents

TOP_TEN = [1250, 1247, 1067, 726, 714, 693, 605, 591, 536, 325]
TOP_TEN_PCT = ["11.25", "11.22", "9.60", "6.53", "6.43", "6.24", "5.45", "5.32", "4.82", "2.93"]


def test_half_up_rounding():
    assert percentage(1, 8) == Decimal("12.50")
    assert percentage(1, 800) == Decimal("0.13")  # 0.125 rounds up
    assert percentage(3, 0) == Decimal("0.00")


def test_top_ten_totals_column():
    counts = {f"p{i}": {"all": n} for i, n in enumerate(TOP_TEN)}
    t = freq_table(counts, top=10, grand_totals={"all": 11111})
    assert [str(r.percentages["all"]) for r in t.rows] == TOP_TEN_PCT
    assert (t.totals.total, str(t.totals.percentages["all"])) == (7754, "69.79")


def test_top_cut_keeps_grand_total():
    counts = {"a": {"g": 3}, "b": {"g": 1}}
    t = freq_table(counts, top=1)
    assert [r.pattern for r in t.rows] == ["a"]
    assert str(t.rows[0].percentages["g"]) == "75.00" and t.grand_totals == {"g": 4}


def test_single_and_empty():
    assert str(freq_table({"x": {"g": 5}}).rows[0].percentages["g"]) == "100.00"
    empty = freq_table({})
    assert empty.rows == [] and empty.grand_total == 0
    assert empty.to_tsv() == "pattern\tTotals\t%\nTotals\t0\t0.00\n"


def test_tsv_layout():
    t = freq_table({"a⟿b": {"prose": 2, "poetry": 1}}, groups=["prose", "poetry"])
    assert t.to_tsv().splitlines() == [
        "pattern\tprose\t%\tpoetry\t%\tTotals\t%",
        "a⟿b\t2\t100.00\t1\t100.00\t3\t100.00",
        "Totals\t2\t100.00\t1\t100.00\t3\t100.00",
    ]


@given(st.lists(st.integers(1, 5000), min_size=1, max_size=10), st.integers(0, 50000))
def test_listed_percentages_add_up(counts, extra):
    grand = sum(counts) + extra
    t = freq_table({f"p{i}": {"g": n} for i, n in enumerate(counts)}, grand_totals={"g": grand})
    listed = sum(r.percentages["g"] for r in t.rows)
    assert abs(listed - t.totals.percentages["g"]) <= Decimal("0.05")


def test_ratio_consistency_prose_column():
    # 429 and 1901 with percentages 14.64 and 64.86 in the same group
    ratio_counts, ratio_pct = 429 / 1901, 14.64 / 64.86
    assert abs(ratio_counts - ratio_pct) < 1e-3
    grand = round(1901 * 100 / 64.86)
    assert str(percentage(429, grand)) == "14.64" and str(percentage(1901, grand)) == "64.86"


def test_pattern_parse():
    p = Pattern.parse("^syn:clause.tense,syn:clause.tense", ["syn:clause.rela=2*"],
                      mother_direction="out")
    assert [m for _, m in p.terms] == [True, False]
    assert len(p.keys) == 2
    with pytest.raises(ValueError):
        Pattern.parse("a:b.c", ["novalue"])


def test_clause_patterns_by_genre():
    c = compile_graph(clause_corpus())
    p = Pattern.parse("^syn:clause.tense,syn:clause.tense", ["syn:clause.rela=2*"],
                      mother_direction="out")
    counts, groups = count_patterns(c, p, "syn:book.genre")
    assert groups == ["prose", "poetry"]
    assert counts == {
        f"perfect{ARROW}imperfect": Counter(prose=1),
        f"perfect{ARROW}perfect": Counter(prose=1),
        f"nominal{ARROW}nominal": Counter(prose=1, poetry=2),
        f"imperfect{ARROW}imperfect": Counter(poetry=1),
    }
    t = freq_table(counts, groups)
    assert t.rows[0].pattern == f"nominal{ARROW}nominal" and t.rows[0].total == 3
    assert str(t.rows[0].percentages["poetry"]) == "66.67"


def test_single_feature_without_groups():
    c = compile_graph(clause_corpus())
    counts, groups = count_patterns(c, Pattern.parse("syn:book.genre"))
    assert groups == ["all"] and counts == {"prose": Counter(all=1), "poetry": Counter(all=1)}


def test_cooccurrence_two_documents():
    m = cooccurrence(compile_graph(two_documents()), "lex:word.lexeme", "doc:book.name")
    assert m.documents == ["Alpha", "Beta"]
    # direct scan of the source word lists
    want = {w.upper(): [w in DOC_A, w in DOC_B] for w in set(DOC_A + DOC_B)}
    assert {i: row.tolist() for i, row in zip(m.items, m.presence)} == want
    sim = m.similarity()
    assert sim[0, 1] == sim[1, 0] == 3 and np.all(np.diag(sim) == 0)
    g = ET.fromstring(m.to_gexf())
    ns = {"g": "http://www.gexf.net/1.2draft"}
    assert g.get("version") == "1.2"
    assert g.find("g:graph", ns).get("defaultedgetype") == "undirected"
    (edge,) = g.findall(".//g:edge", ns)
    assert edge.get("weight") == "3" and edge.get("source") != edge.get("target")
    assert m.to_csv().splitlines()[0] == "item,Alpha,Beta"


def test_disjoint_documents_have_no_edges():
    g = two_documents()
    anns = tuple(replace(a, features={"lexeme": f"{a.features['lexeme']}{a.id}"})
                 if a.label == "word" else a for a in g.annotations)
    m = cooccurrence(compile_graph(replace(g, annotations=anns)), "lex:word.lexeme",
                     "doc:book.name")
    g2 = ET.fromstring(m.to_gexf())
    assert len(g2.findall(".//{http://www.gexf.net/1.2draft}node")) == 2
    assert g2.findall(".//{http://www.gexf.net/1.2draft}edge") == []


CLAUSE_TABLE = {  # pattern -> per-genre percentages and total percentage
    "nominal⟿nominal": ("14.64", "12.07", "8.01", "11.25"),
    "imperfect⟿imperfect": ("12.66", "13.32", "8.11", "11.22"),
    "perfect⟿perfect": ("4.09", "9.60", "13.55", "9.60"),
    "nominal⟿imperfect": ("7.92", "6.12", "5.96", "6.53"),
    "perfect⟿nominal": ("5.49", "5.21", "8.30", "6.43"),
    "imperfect⟿nominal": ("3.96", "8.03", "6.08", "6.24"),
    "perfect⟿imperfect": ("4.95", "4.58", "6.67", "5.45"),
    "nominal⟿perfect": ("4.95", "4.99", "5.91", "5.32"),
    "imperative⟿nominal": ("1.84", "6.61", "5.18", "4.82"),
    "nominal⟿imperative": ("4.37", "3.01", "1.81", "2.93"),
    "Totals": ("64.86", "73.54", "69.57", "69.79"),
}


def test_clause_pattern_table():
    path = Path(__file__).parents[1] / "scripts" / "clause_patterns.py"
    spec = importlib.util.spec_from_file_location("clause_patterns", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    t = mod.table()
    assert t.grand_total == 11111
    got = {r.pattern: (*(str(r.percentages[g]) for g in mod.GENRES), str(r.total_percentage))
           for r in t.rows + [t.totals]}
    assert got == CLAUSE_TABLE
    assert [t.totals.counts[g] for g in mod.GENRES] == [1901, 3004, 2849]
