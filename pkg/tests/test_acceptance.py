"""The eight acceptance criteria, one test each, each printing a PASS/FAIL line."""
import functools
import random
import re
import statistics
import time
from contextlib import contextmanager

import pytest

from laffab.analysis import cooccurrence, freq_table
from laffab.compiler import ALL, compile_graph, decompile, load, save
from laffab.fabric import RankTable, cmp_nodes, order_key, sorted_nodes
from laffab.fragments import common_fragments, extract_corpus, render
from laffab.graf import parse_resource, write_resource
from laffab.synth import (TREE_PHRASE, TREE_POS, TREE_SENTENCE, bulk_graph, random_graph,
                          random_tree, tree_graph)
from laffab.treebank import (TreeConfig, build_trees, check_tree, from_discbracket, score,
                             to_discbracket)

from fixtures import DOC_A, DOC_B, two_documents
from oracles import maximal_common


@pytest.fixture
def report(capsys):
    @contextmanager
    def criterion(number, title):
        start = time.perf_counter()
        notes: list[str] = []
        try:
            yield notes
        except BaseException:
            with capsys.disabled():
                print(f"\nFAIL criterion {number}: {title}", *notes, sep="\n  ")
            raise
        with capsys.disabled():
            print(f"\nPASS criterion {number}: {title} ({time.perf_counter() - start:.1f} s)",
                  *notes, sep="\n  ")
    return criterion


def test_1_frequency_table_arithmetic(report):
    with report(1, "frequency table percentages and totals"):
        start = time.perf_counter()
        counts = [1250, 1247, 1067, 726, 714, 693, 605, 591, 536, 325]
        t = freq_table({f"p{i:02}": {"all": n} for i, n in enumerate(counts)}, top=10,
                       grand_totals={"all": 11111})
        assert [str(r.percentages["all"]) for r in t.rows] == [
            "11.25", "11.22", "9.60", "6.53", "6.43", "6.24", "5.45", "5.32", "4.82", "2.93"]
        assert t.totals.total == 7754 and str(t.totals.percentages["all"]) == "69.79"
        assert t.to_tsv().splitlines()[-1] == "Totals\t7754\t69.79\t7754\t69.79"
        assert time.perf_counter() - start < 1.0


def test_2_round_trip(report, tmp_path):
    with report(2, "100 random graphs parse, compile, save, load and decompile losslessly"):
        start = time.perf_counter()
        for seed in range(100):
            g = random_graph(seed, max_nodes=1000, max_features=5000)
            assert len(g.nodes) <= 1000
            assert sum(len(a.features) for a in g.annotations) <= 5000
            src = tmp_path / f"src{seed}"
            write_resource(g, src)
            c = compile_graph(parse_resource(src / "header.xml"))
            save(c, tmp_path / f"b{seed}")
            assert load(tmp_path / f"b{seed}", ALL) == c
            assert decompile(c) == g
        assert time.perf_counter() - start < 60.0


@pytest.mark.slow
def test_3_load_speed(report, tmp_path):
    with report(3, "bundle load at most a tenth of parse plus compile (100K nodes, 1M tuples)"
                ) as notes:
        g = bulk_graph(100_000, 1_000_000)
        assert len(g.nodes) == 100_000 and sum(len(a.features) for a in g.annotations) == 1_000_000
        write_resource(g, tmp_path / "src")
        del g
        build, fetch = [], []
        for run in range(5):
            t0 = time.perf_counter()
            c = compile_graph(parse_resource(tmp_path / "src" / "header.xml"))
            build.append(time.perf_counter() - t0)
            if run == 0:
                save(c, tmp_path / "b")
            del c
            t0 = time.perf_counter()
            load(tmp_path / "b", ALL)
            fetch.append(time.perf_counter() - t0)
        b, f = statistics.median(build), statistics.median(fetch)
        notes.append(f"parse+compile median {b:.2f} s, load median {f:.3f} s, ratio {b / f:.0f}x")
        assert f <= b / 10


def test_4_ordering(report):
    with report(4, "node order is a total order matching the key oracle"):
        big = compile_graph(random_graph(4, n_nodes=10_000, max_features=100))
        rng = random.Random(0)
        nodes = list(range(big.n_nodes))
        assert len(nodes) == 10_000
        rank = RankTable("s1", {"phrase": 0, "word": 1})
        for r in (None, rank):
            by_cmp = sorted(nodes, key=functools.cmp_to_key(lambda a, b: cmp_nodes(big, a, b, r)))
            by_key = sorted(nodes, key=lambda n: order_key(big, n, r).sort_tuple(r is not None))
            assert by_cmp == by_key
            pos = {n: i for i, n in enumerate(sorted_nodes(big, r).tolist())}
            assert by_cmp == sorted(nodes, key=pos.__getitem__)
            for _ in range(2000):
                a, b, c = rng.sample(nodes, 3)
                assert cmp_nodes(big, a, b, r) == -cmp_nodes(big, b, a, r) != 0
                if cmp_nodes(big, a, b, r) < 0 and cmp_nodes(big, b, c, r) < 0:
                    assert cmp_nodes(big, a, c, r) < 0

        for seed in range(50):
            c = compile_graph(random_graph(1000 + seed, max_nodes=60, max_features=150))
            for r in (None, rank):
                keys = [order_key(c, n, r).sort_tuple(r is not None) for n in range(c.n_nodes)]
                for a in range(c.n_nodes):
                    for b in range(c.n_nodes):
                        want = (keys[a] > keys[b]) - (keys[a] < keys[b])
                        assert cmp_nodes(c, a, b, r) == want


def test_5_fragment_oracle(report):
    with report(5, "common fragments equal the brute-force oracle; counts at least two"):
        start = time.perf_counter()
        small = dict(labels=("S", "A"), tags=("n", "v"), forms=("a", "b"))
        rng = random.Random(5)
        for _ in range(200):
            t1, t2 = random_tree(rng, 8, **small), random_tree(rng, 8, **small)
            assert max(len(list(t.root.subtrees())) for t in (t1, t2)) <= 8
            assert {render(f) for f in common_fragments(t1, t2)} == maximal_common(t1, t2)
        for _ in range(50):
            trees = [random_tree(rng, 10) for _ in range(rng.randint(2, 12))]
            assert all(n >= 2 for _, n in extract_corpus(trees).items())
        assert time.perf_counter() - start < 120.0


def test_6_scorer(report):
    with report(6, "scorer identity, half match and harmonic mean"):
        rng = random.Random(6)
        trees = [random_tree(rng, 12, sentence_id=str(i)) for i in range(50)]
        ident = score(trees, trees)
        assert (ident.precision, ident.recall, ident.f1, ident.exact_match) == (100.0,) * 4
        gold = from_discbracket("(S (VP (n 1=x) (vb 2=y)) (dt 0=z))")
        pred = from_discbracket("(S (NP (n 1=x) (vb 2=y)) (dt 0=z))")
        half = score([gold], [pred])
        assert (half.precision, half.recall, half.f1, half.exact_match) == (50.0, 50.0, 50.0, 0.0)
        line = re.compile(r"precision \d+\.\d recall \d+\.\d f1 \d+\.\d exact-match \d+\.\d")
        assert line.fullmatch(half.line())
        for _ in range(300):
            n = rng.randint(1, 5)
            g = random_tree(rng, 10)
            p = random_tree(rng, 10)
            if len(g.words) != len(p.words):
                continue
            s = score([g] * n, [type(p)(g.sentence_id, g.words, p.root)] * n)
            if s.precision + s.recall:
                hm = 2 * s.precision * s.recall / (s.precision + s.recall)
                assert abs(s.f1 - hm) <= 0.05


def test_7_treebank_round_trip(report):
    with report(7, "discbracket round trip and yield partition of built trees"):
        rng = random.Random(7)
        discontinuous = 0
        for _ in range(500):
            t = random_tree(rng, rng.randint(1, 14))
            assert from_discbracket(to_discbracket(t)) == t
            discontinuous += any(max(n.leaves) - min(n.leaves) + 1 != len(n.leaves)
                                 for n in t.root.subtrees())
        assert discontinuous >= 25
        cfg = TreeConfig(TREE_SENTENCE, (TREE_PHRASE,), TREE_POS)
        for k in range(40):
            source = [random_tree(rng, 12, sentence_id=str(i)) for i in range(rng.randint(1, 8))]
            built = build_trees(compile_graph(tree_graph(source)), cfg)
            assert len(built) == len(source)
            for t in built:
                check_tree(t)
                leaves = sorted(i for n in t.root.subtrees() for i in n.children
                                if isinstance(i, int))
                assert leaves == list(range(len(t.words)))


def test_8_cooccurrence(report):
    with report(8, "two-document presence matrix and GEXF weight"):
        m = cooccurrence(compile_graph(two_documents()), "lex:word.lexeme", "doc:book.name")
        scan = {w.upper(): [w in DOC_A, w in DOC_B] for w in set(DOC_A + DOC_B)}
        assert {i: r.tolist() for i, r in zip(m.items, m.presence)} == scan
        shared = len(set(DOC_A) & set(DOC_B))
        assert shared == 3
        edges = re.findall(r'<edge [^>]*weight="(\d+)"', m.to_gexf())
        assert edges == [str(shared)]
