"""Hand-built corpora shared by several test modules."""
from laffab.model import NODE, Annotation, EdgeRecord, Graph, NodeRecord, PrimaryData, Region


def _words(tokens):
    regions, pos = [], 0
    for i, w in enumerate(tokens):
        regions.append(Region(f"r{i}", pos, pos + len(w)))
        pos += len(w) + 1
    return " ".join(tokens), regions


DOC_A = ["alpha", "beta", "gamma", "delta", "alpha"]
DOC_B = ["beta", "gamma", "epsilon", "alpha"]


def two_documents() -> Graph:
    """Two books over five lexemes; they share alpha, beta and gamma."""
    text, regions = _words(DOC_A + DOC_B)
    nodes = [NodeRecord(f"w{i}", (r.id,)) for i, r in enumerate(regions)]
    nodes.append(NodeRecord("bookA", tuple(r.id for r in regions[:len(DOC_A)])))
    nodes.append(NodeRecord("bookB", tuple(r.id for r in regions[len(DOC_A):])))
    anns = [Annotation(f"a{i}", "lex", "word", f"w{i}", NODE, {"lexeme": w.upper()})
            for i, w in enumerate(DOC_A + DOC_B)]
    anns += [Annotation("dA", "doc", "book", "bookA", NODE, {"name": "Alpha"}),
             Annotation("dB", "doc", "book", "bookB", NODE, {"name": "Beta"})]
    return Graph(PrimaryData(text), tuple(regions), tuple(nodes), (), tuple(anns))


# (book, genre, [(mother tense, daughter tense, relation code)])
CLAUSES = [
    ("B1", "prose", [("perfect", "imperfect", "200"), ("perfect", "perfect", "201"),
                      ("nominal", "nominal", "200"), ("perfect", "imperfect", "999")]),
    ("B2", "poetry", [("imperfect", "imperfect", "210"), ("nominal", "nominal", "200"),
                      ("nominal", "nominal", "200")]),
]


def clause_corpus() -> Graph:
    """Books of mother/daughter clause pairs joined by edges daughter -> mother.

    Relation codes starting with 2 stand for asyndetic connections.
    """
    tokens = []
    for _, _, pairs in CLAUSES:
        for m, d, _ in pairs:
            tokens += [m, d]
    text, regions = _words(tokens)
    nodes, edges, anns = [], [], []
    i = 0
    for b, (book, genre, pairs) in enumerate(CLAUSES):
        first = i
        for k, (m, d, code) in enumerate(pairs):
            mid, did = f"c{i}", f"c{i + 1}"
            nodes += [NodeRecord(mid, (f"r{i}",)), NodeRecord(did, (f"r{i + 1}",))]
            anns += [Annotation(f"a{mid}", "syn", "clause", mid, NODE, {"tense": m}),
                     Annotation(f"a{did}", "syn", "clause", did, NODE,
                                {"tense": d, "rela": code})]
            edges.append(EdgeRecord(f"e{i}", did, mid))
            i += 2
        nodes.append(NodeRecord(f"book{b}", tuple(f"r{j}" for j in range(first, i))))
        anns.append(Annotation(f"ab{b}", "syn", "book", f"book{b}", NODE,
                               {"name": book, "genre": genre}))
    return Graph(PrimaryData(text), tuple(regions), tuple(nodes), tuple(edges), tuple(anns))
