"""Fixtures and synthetic corpora for tests, benchmarks and demos."""
from __future__ import annotations

import random

from .model import (EDGE, NODE, Annotation, EdgeRecord, FeatureKey, Graph, NodeRecord,
                    PrimaryData, Region)


def toy_graph() -> Graph:
    """'the cat sat': three words, a VP over 'cat sat', a sentence over all."""
    text = "the cat sat"
    regions = (Region("r0", 0, 3), Region("r1", 4, 7), Region("r2", 8, 11))
    nodes = (NodeRecord("n1", ("r0",)), NodeRecord("n2", ("r1",)), NodeRecord("n3", ("r2",)),
             NodeRecord("n4", ("r1", "r2")), NodeRecord("n5", ("r0", "r1", "r2")))
    edges = (EdgeRecord("e1", "n5", "n4"), EdgeRecord("e2", "n4", "n2"),
             EdgeRecord("e3", "n4", "n3"), EdgeRecord("e4", "n5", "n1"))
    annotations = (
        Annotation("a1", "toy", "word", "n1", NODE, {"pos": "dt", "lexeme": "THE"}),
        Annotation("a2", "toy", "word", "n2", NODE, {"pos": "n", "lexeme": "CAT"}),
        Annotation("a3", "toy", "word", "n3", NODE, {"pos": "vb", "lexeme": "SAT"}),
        Annotation("a4", "toy", "phrase", "n4", NODE, {"typ": "VP"}),
        Annotation("a5", "toy", "sentence", "n5", NODE, {"typ": "S"}),
        Annotation("a6", "toy", "rel", "e1", EDGE, {"kind": "child"}),
    )
    return Graph(PrimaryData(text), regions, nodes, edges, annotations)


TOY_POS = FeatureKey("toy", "word", "pos")
TOY_LEXEME = FeatureKey("toy", "word", "lexeme")
TOY_PHRASE = FeatureKey("toy", "phrase", "typ")
TOY_SENTENCE = FeatureKey("toy", "sentence", "typ")
TOY_REL = FeatureKey("toy", "rel", "kind")

_WORDS = ["bara", "elohim", "et", "ha", "shamayim", "we", "arets", "cat", "<&>", "q\"t",
          "naïve", "שמים", ""]
_VALUES = ["n", "vb", "dt", "aj", "x y", "", "'\"", "a&b", "ü", "1", "2", "3"]


def random_graph(seed: int | random.Random, max_nodes: int = 1000,
                 max_features: int = 5000, n_nodes: int | None = None) -> Graph:
    """A valid Graph with words, spans, region-less nodes, edges and features.

    The node count is drawn up to `max_nodes` unless `n_nodes` fixes it.
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    if n_nodes is not None:
        max_nodes = n_nodes
    n_words = rng.randint(0, max(0, max_nodes // 2))
    words = [rng.choice(_WORDS[:-1]) for _ in range(n_words)]
    text = " ".join(words)
    regions, pos = [], 0
    for i, w in enumerate(words):
        regions.append(Region(f"w{i}", pos, pos + len(w)))
        pos += len(w) + 1
    for i in range(rng.randint(0, n_words // 4 + 1)):
        a = rng.randint(0, len(text))
        regions.append(Region(f"r.{i}", a, rng.randint(a, len(text))))

    nodes = []
    region_ids = [r.id for r in regions]
    if n_nodes is None:
        n_nodes = rng.randint(0, max_nodes) if max_nodes else 0
    for i in range(n_nodes):
        k = rng.choice([0, 1, 1, 1, 2, 3]) if region_ids else 0
        nodes.append(NodeRecord(f"n{i}", tuple(rng.sample(region_ids, min(k, len(region_ids))))))
    edges = []
    if nodes:
        for i in range(rng.randint(0, 2 * len(nodes))):
            edges.append(EdgeRecord(f"e{i}", rng.choice(nodes).id, rng.choice(nodes).id))

    annotations = []
    used = set()
    budget = rng.randint(0, max_features)
    node_labels = [("s1", "word"), ("s1", "phrase"), ("s2", "word"), ("s2", "ñ.x")]
    names = ["pos", "lex", "gloss", "typ"]
    i = 0
    while budget > 0 and (nodes or edges) and i < 4 * max_features:
        i += 1
        if edges and (not nodes or rng.random() < 0.2):
            kind, target, (space, label) = EDGE, rng.choice(edges).id, ("s1", "rel")
        else:
            kind, target, (space, label) = NODE, rng.choice(nodes).id, rng.choice(node_labels)
        feats = {}
        for name in rng.sample(names, rng.randint(0, min(len(names), budget))):
            slot = (space, label, name, kind, target)
            if slot in used:
                continue
            used.add(slot)
            feats[name] = rng.choice(_VALUES)
        budget -= len(feats)
        annotations.append(Annotation(f"a{len(annotations)}", space, label, target, kind, feats))
    return Graph(PrimaryData(text), tuple(regions), tuple(nodes), tuple(edges), tuple(annotations))


def bulk_graph(n_nodes: int = 100_000, n_features: int = 1_000_000, seed: int = 0) -> Graph:
    """A large, regular corpus: words, phrases over word pairs, one annotation per node."""
    rng = random.Random(seed)
    n_words = n_nodes * 2 // 3
    vocab = [f"w{i}" for i in range(500)]
    words = [rng.choice(vocab) for _ in range(n_words)]
    regions, pos = [], 0
    for i, w in enumerate(words):
        regions.append(Region(f"r{i}", pos, pos + len(w)))
        pos += len(w) + 1
    text = " ".join(words)
    nodes = [NodeRecord(f"n{i}", (f"r{i}",)) for i in range(n_words)]
    for j in range(n_nodes - n_words):
        a = rng.randrange(max(1, n_words - 1))
        nodes.append(NodeRecord(f"p{j}", (f"r{a}", f"r{a + 1}") if n_words > 1 else ()))
    edges = [EdgeRecord(f"e{j}", nodes[n_words + j].id, nodes[rng.randrange(n_words)].id)
             for j in range(n_nodes - n_words)]
    per_node, extra = divmod(n_features, n_nodes)
    names = [f"f{k}" for k in range(per_node + 1)]
    tags = ["n", "vb", "dt", "aj", "pp", "cj"]
    annotations = []
    for i, node in enumerate(nodes):
        k = per_node + (1 if i < extra else 0)
        label = "word" if i < n_words else "phrase"
        feats = {name: (rng.choice(tags) if name == "f0" else f"v{rng.randrange(1000)}")
                 for name in names[:k]}
        annotations.append(Annotation(f"a{i}", "bulk", label, node.id, NODE, feats))
    return Graph(PrimaryData(text), tuple(regions), tuple(nodes), tuple(edges), tuple(annotations))


def random_tree(seed: int | random.Random, max_nodes: int = 8, *,
                labels=("S", "NP", "VP"), tags=("n", "vb", "dt"), forms=("a", "b", "c"),
                discontinuous: float = 0.5, sentence_id: str = "1"):
    """A valid Tree with at most `max_nodes` nodes, preterminals included.

    With probability `discontinuous` the word order is shuffled before
    constituents are cut, giving non-contiguous yields.
    """
    from .treebank import Tree, TreeNode, Word, canonical

    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    n_words = rng.randint(1, max(1, (max_nodes - 1) // (2 if rng.random() < 0.7 else 1)))
    seq = list(range(n_words))
    if rng.random() < discontinuous:
        rng.shuffle(seq)
    words = tuple(Word(i, rng.choice(forms), rng.choice(tags)) for i in range(n_words))
    remaining = max_nodes - n_words

    def pre(p):
        return TreeNode(words[p].pos_tag, (p,))

    def internal(group):
        nonlocal remaining
        remaining -= 1
        k = rng.randint(1, len(group))
        cuts = sorted(rng.sample(range(1, len(group)), k - 1)) if k > 1 else []
        kids = []
        for a, b in zip([0] + cuts, cuts + [len(group)]):
            part = group[a:b]
            if len(part) == 1 and (remaining == 0 or rng.random() < 0.7):
                kids.append(pre(part[0]))
            elif remaining > 0:
                kids.append(internal(part))
            else:
                kids.extend(pre(p) for p in part)
        return TreeNode(rng.choice(labels), tuple(kids))

    root = internal(seq) if remaining > 0 else pre(seq[0])
    return Tree(sentence_id, words, canonical(root))


TREE_SENTENCE = FeatureKey("syn", "sentence", "cat")
TREE_PHRASE = FeatureKey("syn", "phrase", "cat")
TREE_POS = FeatureKey("syn", "word", "pos")


def tree_graph(trees) -> Graph:
    """A corpus whose sentences, phrases and words reproduce `trees`.

    Phrases link the word regions of their yield (so discontinuous phrases
    have gapped regions); nodes are declared parent first.
    """
    regions, nodes, annotations, words = [], [], [], []
    pos = 0
    for k, t in enumerate(trees):
        wr = []
        for w in t.words:
            rid = f"s{k}.r{w.position}"
            regions.append(Region(rid, pos, pos + len(w.form)))
            words.append(w.form)
            pos += len(w.form) + 1
            wr.append(rid)
        j = 0
        for node in t.root.subtrees():
            if node.is_preterminal:
                continue
            nid = f"s{k}.p{j}"
            j += 1
            nodes.append(NodeRecord(nid, tuple(wr[i] for i in sorted(node.leaves))))
            key = TREE_SENTENCE if node is t.root else TREE_PHRASE
            annotations.append(Annotation(f"a.{nid}", key.space, key.label, nid, NODE,
                                          {key.name: node.label}))
        for w in t.words:
            nid = f"s{k}.w{w.position}"
            nodes.append(NodeRecord(nid, (wr[w.position],)))
            annotations.append(Annotation(f"a.{nid}", "syn", "word", nid, NODE,
                                          {"pos": w.pos_tag}))
    return Graph(PrimaryData(" ".join(words)), tuple(regions), tuple(nodes), (),
                 tuple(annotations))
