"""Syntactic trees with discontinuous constituents.

Trees are built from an annotation graph by yield containment, written as
discbracket (``(S (dt 0=the) (VP (n 1=cat) (vb 2=sat)))``) or Negra export
blocks, and scored with labelled bracketing precision/recall.

A leaf is a bare int, the 0-based word position.  Preterminals are nodes
whose only child is a leaf; their label is the word's POS tag.
"""
from __future__ import annotations

import json
import logging
import re
from bisect import bisect_left, bisect_right
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Union

from .compiler import CompiledCorpus
from .errors import AlignmentError, InconsistentHierarchy, TooManyNodes, TreeError
from .fabric import Features, feature_value, sorted_nodes, text_of
from .model import EDGE, FeatureKey

log = logging.getLogger(__name__)

CATEGORIES = frozenset({"S", "C", "CP", "VP", "SU", "NP", "PrNP", "PP", "Attr"})
POS_TAGS = frozenset({"cj", "vb", "aj", "n", "pp", "dt"})


@dataclass(frozen=True)
class TreeNode:
    label: str
    children: tuple[Union["TreeNode", int], ...]

    @cached_property
    def leaves(self) -> frozenset[int]:
        out = set()
        for child in self.children:
            if isinstance(child, int):
                out.add(child)
            else:
                out |= child.leaves
        return frozenset(out)

    @property
    def is_preterminal(self) -> bool:
        return len(self.children) == 1 and isinstance(self.children[0], int)

    def subtrees(self):
        """Pre-order over internal nodes."""
        yield self
        for child in self.children:
            if isinstance(child, TreeNode):
                yield from child.subtrees()


@dataclass(frozen=True)
class Word:
    position: int
    form: str
    pos_tag: str


@dataclass(frozen=True)
class Tree:
    sentence_id: str
    words: tuple[Word, ...]
    root: TreeNode

    @property
    def forms(self) -> list[str]:
        return [w.form for w in self.words]


def _min_leaf(child) -> int:
    return child if isinstance(child, int) else min(child.leaves)


def canonical(node: TreeNode) -> TreeNode:
    """Same tree with children ordered by their smallest leaf."""
    kids = [c if isinstance(c, int) else canonical(c) for c in node.children]
    return TreeNode(node.label, tuple(sorted(kids, key=_min_leaf)))


def check_tree(t: Tree) -> None:
    """Raise TreeError unless `t` satisfies the Tree invariants."""
    n = len(t.words)
    if [w.position for w in t.words] != list(range(n)):
        raise TreeError(f"{t.sentence_id}: word positions must be 0..{n - 1}")
    seen: list[int] = []
    for node in t.root.subtrees():
        if not node.children:
            raise TreeError(f"{t.sentence_id}: node {node.label} has no children")
        mins = [_min_leaf(c) for c in node.children]
        if mins != sorted(mins):
            raise TreeError(f"{t.sentence_id}: children of {node.label} not in yield order")
        for c in node.children:
            if isinstance(c, int):
                seen.append(c)
                if not 0 <= c < n:
                    raise TreeError(f"{t.sentence_id}: leaf {c} has no word")
                if not node.is_preterminal or t.words[c].pos_tag != node.label:
                    raise TreeError(f"{t.sentence_id}: leaf {c} needs a preterminal "
                                    f"labelled with its POS tag")
    if sorted(seen) != list(range(n)):
        raise TreeError(f"{t.sentence_id}: leaves do not partition positions 0..{n - 1}")


# discbracket --------------------------------------------------------------

_ESCAPES = {"(": "-LRB-", ")": "-RRB-"}
_UNESCAPES = {v: k for k, v in _ESCAPES.items()}
_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _esc(form: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in form)


def _unesc(form: str) -> str:
    return re.sub(r"-LRB-|-RRB-", lambda m: _UNESCAPES[m.group()], form)


def _bracket(node: TreeNode, words) -> str:
    parts = [node.label]
    for c in node.children:
        parts.append(f"{c}={_esc(words[c].form)}" if isinstance(c, int) else _bracket(c, words))
    return "(" + " ".join(parts) + ")"


def to_discbracket(t: Tree) -> str:
    return _bracket(t.root, t.words)


def from_discbracket(line: str, sentence_id: str = "1") -> Tree:
    tokens = _TOKEN.findall(line)
    pos = 0
    forms: dict[int, str] = {}
    tags: dict[int, str] = {}

    def parse() -> TreeNode:
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != "(":
            raise TreeError(f"expected '(' in {line!r}")
        pos += 1
        if pos >= len(tokens) or tokens[pos] in "()":
            raise TreeError(f"missing label in {line!r}")
        label = tokens[pos]
        pos += 1
        kids: list = []
        while pos < len(tokens) and tokens[pos] != ")":
            tok = tokens[pos]
            if tok == "(":
                kids.append(parse())
                continue
            index, eq, form = tok.partition("=")
            if not eq or not index.isdigit():
                raise TreeError(f"bad leaf {tok!r} in {line!r}")
            leaf = int(index)
            if leaf in forms:
                raise TreeError(f"leaf {leaf} occurs twice in {line!r}")
            forms[leaf], tags[leaf] = _unesc(form), label
            kids.append(leaf)
            pos += 1
        if pos >= len(tokens):
            raise TreeError(f"unbalanced brackets in {line!r}")
        pos += 1
        return TreeNode(label, tuple(kids))

    root = parse()
    if pos != len(tokens):
        raise TreeError(f"trailing material in {line!r}")
    words = tuple(Word(i, forms[i], tags[i]) for i in sorted(forms))
    t = Tree(sentence_id, words, canonical(root))
    check_tree(t)
    return t


# Negra export -------------------------------------------------------------

MAX_EXPORT_NODES = 499


def to_export(t: Tree) -> str:
    """One ``#BOS``..``#EOS`` block; phrasal nodes numbered bottom-up from 500."""
    numbers: dict[int, int] = {}
    order: list[TreeNode] = []

    def number(node: TreeNode):
        for c in node.children:
            if isinstance(c, TreeNode) and not c.is_preterminal:
                number(c)
        if not node.is_preterminal:
            numbers[id(node)] = 500 + len(order)
            order.append(node)

    number(t.root)
    if len(order) > MAX_EXPORT_NODES:
        raise TooManyNodes(f"{t.sentence_id}: {len(order)} phrasal nodes, "
                           f"export allows {MAX_EXPORT_NODES}")
    word_parent = {}
    node_parent = {id(t.root): 0}
    for node in t.root.subtrees():
        owner = numbers.get(id(node), 0)
        for c in node.children:
            if isinstance(c, int):
                if node is t.root:
                    word_parent[c] = 0
            elif c.is_preterminal:
                word_parent[c.children[0]] = owner
            else:
                node_parent[id(c)] = owner
    lines = [f"#BOS {t.sentence_id}"]
    lines += [f"{w.form}\t{w.pos_tag}\t--\t--\t{word_parent[w.position]}" for w in t.words]
    lines += [f"#{numbers[id(n)]}\t{n.label}\t--\t--\t{node_parent[id(n)]}" for n in order]
    lines.append(f"#EOS {t.sentence_id}")
    return "\n".join(lines) + "\n"


def write_export(trees: Iterable[Tree]) -> str:
    return "".join(to_export(t) for t in trees)


def _from_export_block(sentence_id: str, rows: list[list[str]]) -> Tree:
    words, word_parent = [], []
    labels: dict[int, str] = {}
    parents: dict[int, int] = {}
    for row in rows:
        if len(row) < 5:
            raise TreeError(f"sentence {sentence_id}: export line needs 5 fields: {row}")
        if row[0].startswith("#") and row[0][1:].isdigit() and int(row[0][1:]) >= 500:
            num = int(row[0][1:])
            labels[num], parents[num] = row[1], int(row[4])
        else:
            words.append(Word(len(words), row[0], row[1]))
            word_parent.append(int(row[4]))
    kids: dict[int, list] = {num: [] for num in [0, *labels]}
    for w, p in zip(words, word_parent):
        if p not in kids:
            raise TreeError(f"sentence {sentence_id}: word {w.position} has unknown parent {p}")
        kids[p].append(TreeNode(w.pos_tag, (w.position,)))
    for num, p in parents.items():
        if p not in kids:
            raise TreeError(f"sentence {sentence_id}: node #{num} has unknown parent {p}")
        kids[p].append(num)

    def build(num, trail=()):
        if num in trail:
            raise TreeError(f"sentence {sentence_id}: cycle through node #{num}")
        out = [k if isinstance(k, TreeNode) else build(k, trail + (num,)) for k in kids[num]]
        return TreeNode(labels[num], tuple(out))

    top = kids[0]
    if len(top) != 1:
        raise TreeError(f"sentence {sentence_id}: expected one root, found {len(top)}")
    root = top[0] if isinstance(top[0], TreeNode) else build(top[0])
    t = Tree(sentence_id, tuple(words), canonical(root))
    check_tree(t)
    return t


def from_export(text: str) -> list[Tree]:
    trees, rows, current = [], [], None
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#BOS"):
            current, rows = line.split(None, 1)[1].strip() if " " in line else "", []
        elif line.startswith("#EOS"):
            if current is None:
                raise TreeError("#EOS without matching #BOS")
            trees.append(_from_export_block(current, rows))
            current = None
        elif current is not None:
            rows.append(line.split("\t") if "\t" in line else line.split())
    if current is not None:
        raise TreeError(f"sentence {current}: missing #EOS")
    return trees


def read_trees(path) -> list[Tree]:
    """Read discbracket (ids are line numbers) or export files (detected by #BOS)."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("#BOS"):
        return from_export(text)
    return [from_discbracket(line, str(i)) for i, line in enumerate(text.splitlines(), 1)
            if line.strip()]


def write_discbracket(trees: Iterable[Tree]) -> str:
    return "".join(to_discbracket(t) + "\n" for t in trees)


# building from a corpus ---------------------------------------------------

@dataclass
class TreeConfig:
    """Which features turn corpus nodes into trees.

    sentence: key carried by sentence nodes; its value is the root label.
    constituents: keys carried by phrasal nodes; the first present gives the label.
    pos: key carried by word nodes; its value is the POS tag.
    form: key giving word forms; None takes the word's text.
    parent_edge: edges carrying this key (with parent_edge_value, if set) point from
        parent to child and override containment where present.
    strict: raise InconsistentHierarchy instead of skipping the sentence.
    """

    sentence: FeatureKey
    constituents: tuple[FeatureKey, ...] = ()
    pos: FeatureKey | None = None
    form: FeatureKey | None = None
    parent_edge: FeatureKey | None = None
    parent_edge_value: str | None = None
    strict: bool = False

    def __post_init__(self):
        self.sentence = FeatureKey.parse(self.sentence)
        self.constituents = tuple(FeatureKey.parse(k) for k in self.constituents)
        if self.pos is None:
            raise ValueError("tree config needs a pos key")
        self.pos = FeatureKey.parse(self.pos)
        self.form = FeatureKey.parse(self.form) if self.form else None
        self.parent_edge = FeatureKey.parse(self.parent_edge) if self.parent_edge else None

    @classmethod
    def from_dict(cls, d: dict) -> TreeConfig:
        known = {"sentence", "constituents", "pos", "form", "parent_edge",
                 "parent_edge_value", "strict"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown tree config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> TreeConfig:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @property
    def keys(self) -> list[FeatureKey]:
        out = [self.sentence, *self.constituents, self.pos]
        if self.form:
            out.append(self.form)
        if self.parent_edge:
            out.append(self.parent_edge)
        return out


def _merge(spans):
    out = []
    for a, b in sorted(spans):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return out


def _inside(spans, cover) -> bool:
    """Every (a, b) in spans lies within one merged cover interval."""
    starts = [c[0] for c in cover]
    for a, b in spans:
        i = bisect_right(starts, a) - 1
        if i < 0 or b > cover[i][1]:
            return False
    return True


class _Builder:
    def __init__(self, c: CompiledCorpus, cfg: TreeConfig):
        self.c, self.cfg = c, cfg
        # a constituent key the corpus never uses just contributes no constituents
        self.constituent_keys = [k for k in cfg.constituents if k in c.known_keys]
        self.order = sorted_nodes(c).tolist()
        self.rank = c.rank_of
        lo, hi, has = c.spans
        self.lo, self.hi = lo, hi
        f = Features
        is_word = [n for n in self.order if has[n] and f(c, n).has(cfg.pos)]
        self.word_set = set(is_word)
        self.words_by_lo = sorted(is_word, key=lambda n: (int(lo[n]), self.rank[n]))
        self.words_lo = [int(lo[n]) for n in self.words_by_lo]
        phrasal = []
        for n in self.order:
            if not has[n] or n in self.word_set:
                continue
            label = self._label(n)
            if label is not None:
                phrasal.append((n, label))
        self.phrasal_by_lo = sorted(phrasal, key=lambda p: (int(lo[p[0]]), self.rank[p[0]]))
        self.phrasal_lo = [int(lo[p[0]]) for p in self.phrasal_by_lo]
        self.edge_parent = self._edge_parents() if cfg.parent_edge else {}
        self._spans: dict[int, list] = {}

    def _label(self, n):
        f = Features(self.c, n)
        for key in self.constituent_keys:
            v = f.get(key)
            if v is not None:
                return v
        return f.get(self.cfg.sentence)

    def _edge_parents(self) -> dict[int, list[int]]:
        table = self.c.feature(self.cfg.parent_edge)
        out: dict[int, list[int]] = {}
        if table.kind != EDGE:
            return out
        want = self.cfg.parent_edge_value
        for e, v in table.items():
            if want is None or v == want:
                out.setdefault(int(self.c.edge_target[e]), []).append(int(self.c.edge_source[e]))
        return out

    def spans(self, n):
        s = self._spans.get(n)
        if s is None:
            regs = self.c.node_regions(n)
            s = self._spans[n] = [tuple(x) for x in self.c.region_anchors[regs].tolist()]
        return s

    def _within(self, by_lo, los, s):
        lo, hi = int(self.lo[s]), int(self.hi[s])
        i, j = bisect_left(los, lo), bisect_right(los, hi)
        return [x for x in by_lo[i:j] if int(self.hi[x if isinstance(x, int) else x[0]]) <= hi]

    def _form(self, w):
        if self.cfg.form is not None:
            v = feature_value(self.c, self.cfg.form, w)
            if v is not None:
                return v
        return text_of(self.c, w)

    def build(self, s) -> Tree:
        c, cfg = self.c, self.cfg
        sid = c.node_id(s)
        cover = _merge(self.spans(s))
        words = [w for w in self._within(self.words_by_lo, self.words_lo, s)
                 if _inside(self.spans(w), cover)]
        words.sort(key=lambda w: self.rank[w])
        if not words:
            raise InconsistentHierarchy(sid, [sid], "sentence without words")
        position = {w: i for i, w in enumerate(words)}

        constituents = {}
        for n, label in self._within(self.phrasal_by_lo, self.phrasal_lo, s):
            if n == s:
                continue
            ncover = _merge(self.spans(n))
            inner = [w for w in self._within(self.words_by_lo, self.words_lo, n)
                     if _inside(self.spans(w), ncover)]
            if inner and all(w in position for w in inner):
                constituents[n] = (label, frozenset(position[w] for w in inner))
        root_label = feature_value(c, cfg.sentence, s) or self._label(s)
        everything = frozenset(range(len(words)))
        yields = {s: everything}
        yields.update({n: y for n, (_, y) in constituents.items()})
        members = set(yields)

        explicit = {}
        for n in list(constituents) + words:
            ps = [p for p in self.edge_parent.get(n, ()) if p in members and p != n]
            if ps:
                explicit[n] = min(ps, key=lambda p: self.rank[p])

        ranked = sorted(constituents, key=lambda n: (-len(yields[n]), self.rank[n]))
        for i, a in enumerate(ranked):
            ya = yields[a]
            for b in ranked[i + 1:]:
                yb = yields[b]
                shared = ya & yb
                if shared and not (yb <= ya or ya <= yb):
                    # settled when either phrase, or every shared word, has a parent edge
                    if (a not in explicit and b not in explicit
                            and not all(words[i] in explicit for i in shared)):
                        raise InconsistentHierarchy(sid, [c.node_id(a), c.node_id(b)])

        def container(y, exclude, before=None):
            """Smallest constituent (deepest on ties) whose yield contains y."""
            best, best_size = s, len(everything)
            for n in ranked[:before]:
                if n != exclude and y <= yields[n] and len(yields[n]) <= best_size:
                    best, best_size = n, len(yields[n])
            return best

        parent = {}
        for i, n in enumerate(ranked):
            parent[n] = explicit[n] if n in explicit else container(yields[n], n, i)
        for w in words:
            parent[w] = (explicit[w] if w in explicit
                         else container(frozenset([position[w]]), None))

        kids: dict[int, list[int]] = {}
        for n, p in parent.items():
            kids.setdefault(p, []).append(n)

        def make(n, trail):
            if n in trail:
                raise InconsistentHierarchy(sid, [c.node_id(x) for x in trail], "parent edges form a cycle")
            out = []
            for k in kids.get(n, ()):
                if k in position:
                    out.append(TreeNode(feature_value(c, cfg.pos, k), (position[k],)))
                else:
                    sub = make(k, trail + (n,))
                    if sub is not None:
                        out.append(sub)
            if not out:
                return None
            label = root_label if n == s else constituents[n][0]
            return TreeNode(label, tuple(sorted(out, key=_min_leaf)))

        root = make(s, ())
        tree_words = tuple(Word(i, self._form(w), feature_value(c, cfg.pos, w))
                           for i, w in enumerate(words))
        t = Tree(sid, tree_words, root)
        try:
            check_tree(t)
        except TreeError as exc:
            raise InconsistentHierarchy(sid, [sid], str(exc)) from None
        return t


def build_trees(c: CompiledCorpus, cfg: TreeConfig,
                errors: list | None = None) -> list[Tree]:
    """One tree per sentence node, in walk order.

    Sentences with an inconsistent hierarchy raise when `cfg.strict`, else are
    skipped (and appended to `errors` if given).
    """
    b = _Builder(c, cfg)
    trees = []
    for s in b.order:
        if feature_value(c, cfg.sentence, s) is None:
            continue
        try:
            trees.append(b.build(s))
        except InconsistentHierarchy as exc:
            if cfg.strict:
                raise
            log.warning("skipping %s", exc)
            if errors is not None:
                errors.append(exc)
    return trees


# scoring ------------------------------------------------------------------

@dataclass(frozen=True)
class Scores:
    precision: float
    recall: float
    f1: float
    exact_match: float
    n_sentences: int
    matched: int = field(default=0, compare=False)
    gold_total: int = field(default=0, compare=False)
    pred_total: int = field(default=0, compare=False)

    def line(self) -> str:
        return (f"precision {self.precision:.1f} recall {self.recall:.1f} "
                f"f1 {self.f1:.1f} exact-match {self.exact_match:.1f}")


def constituents(t: Tree, include_preterminals: bool = False,
                 include_root: bool = True) -> Counter:
    """Multiset of (label, yield) brackets."""
    out = Counter()
    for node in t.root.subtrees():
        if node is t.root and not include_root:
            continue
        if node.is_preterminal and not include_preterminals:
            continue
        out[node.label, node.leaves] += 1
    return out


def _pct(num, den, empty=100.0):
    return 100.0 * num / den if den else empty


def score(gold: list[Tree], pred: list[Tree], include_preterminals: bool = False,
          include_root: bool = True) -> Scores:
    if len(gold) != len(pred):
        raise AlignmentError(f"{len(gold)} gold trees but {len(pred)} predicted")
    matched = gold_total = pred_total = exact = 0
    for g, p in zip(gold, pred):
        if g.sentence_id != p.sentence_id:
            raise AlignmentError(f"sentence ids differ: {g.sentence_id} vs {p.sentence_id}")
        if g.forms != p.forms:
            raise AlignmentError(f"sentence {g.sentence_id}: word sequences differ")
        gc = constituents(g, include_preterminals, include_root)
        pc = constituents(p, include_preterminals, include_root)
        matched += sum((gc & pc).values())
        gold_total += sum(gc.values())
        pred_total += sum(pc.values())
        exact += gc == pc
    precision = _pct(matched, pred_total, 100.0 if not gold_total else 0.0)
    recall = _pct(matched, gold_total, 100.0 if not pred_total else 0.0)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Scores(precision, recall, f1, _pct(exact, len(gold)), len(gold),
                  matched, gold_total, pred_total)
