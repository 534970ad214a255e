"""Maximal common tree fragments between pairs of trees.

A fragment is written like a tree without positions: ``(S (NP ) (VP =b))``.
``(NP )`` is a frontier (label only, children cut off); ``=b`` is a word.
Every expanded node carries the complete child list of the tree node it
matched, so the smallest fragment is a single production.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, Optional, Union

from .errors import InsufficientTrees, TreeError, TreeTooLarge
from .treebank import Tree, TreeNode

# (label, None) is a frontier; (label, children) is expanded; str children are words
Frag = tuple[str, Optional[tuple[Union["Frag", str], ...]]]

BRUTE_FORCE_LIMIT = 12


def _esc(form: str) -> str:
    return form.replace("(", "-LRB-").replace(")", "-RRB-")


def render(f: Frag) -> str:
    label, kids = f
    if kids is None:
        return f"({label} )"
    parts = [("=" + _esc(k)) if isinstance(k, str) else render(k) for k in kids]
    return f"({label} {' '.join(parts)})"


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse_fragment(text: str) -> Frag:
    tokens = _TOKEN.findall(text)
    pos = 0

    def node() -> Frag:
        nonlocal pos
        if tokens[pos] != "(":
            raise TreeError(f"bad fragment {text!r}")
        label = tokens[pos + 1]
        pos += 2
        kids: list = []
        while tokens[pos] != ")":
            if tokens[pos] == "(":
                kids.append(node())
            elif tokens[pos].startswith("="):
                kids.append(tokens[pos][1:].replace("-LRB-", "(").replace("-RRB-", ")"))
                pos += 1
            else:
                raise TreeError(f"bad fragment token {tokens[pos]!r} in {text!r}")
        pos += 1
        return (label, tuple(kids) if kids else None)

    try:
        out = node()
    except IndexError:
        raise TreeError(f"unbalanced fragment {text!r}") from None
    if pos != len(tokens):
        raise TreeError(f"trailing material in fragment {text!r}")
    return out


def fragment_size(f: Frag) -> int:
    label, kids = f
    return 1 + sum(fragment_size(k) for k in kids or () if not isinstance(k, str))


class _Indexed:
    """Flat view of a tree: labels, child lists and production signatures."""

    def __init__(self, t: Tree, lexical: bool = True):
        self.tree = t
        self.nodes: list[TreeNode] = list(t.root.subtrees())
        index = {id(n): i for i, n in enumerate(self.nodes)}
        forms = t.forms
        self.labels = [n.label for n in self.nodes]
        self.kids: list[list] = []
        self.prods: list[tuple | None] = []
        for n in self.nodes:
            kids, prod = [], []
            for c in n.children:
                if isinstance(c, int):
                    kids.append(forms[c])
                    prod.append(("=", forms[c]))
                else:
                    kids.append(index[id(c)])
                    prod.append((c.label,))
            self.kids.append(kids)
            has_word = any(isinstance(k, str) for k in kids)
            self.prods.append(None if has_word and not lexical else (n.label, tuple(prod)))
        self.by_prod: dict[tuple, list[int]] = {}
        for i, p in enumerate(self.prods):
            if p is not None:
                self.by_prod.setdefault(p, []).append(i)


def _greedy(x: _Indexed, y: _Indexed, i: int, j: int, memo: dict) -> Frag | None:
    """Largest fragment rooted at node pair (i, j), or None if productions differ."""
    key = (i, j)
    if key in memo:
        return memo[key]
    if x.prods[i] is None or x.prods[i] != y.prods[j]:
        memo[key] = None
        return None
    kids = []
    for a, b in zip(x.kids[i], y.kids[j]):
        if isinstance(a, str):
            kids.append(a)
        else:
            sub = _greedy(x, y, a, b, memo)
            kids.append(sub if sub is not None else (x.labels[a], None))
    memo[key] = out = (x.labels[i], tuple(kids))
    return out


def _rooted_sub(f: Frag, g: Frag) -> bool:
    """f matches g at g's root, g possibly larger."""
    if f[0] != g[0]:
        return False
    if f[1] is None:
        return True
    if g[1] is None or len(f[1]) != len(g[1]):
        return False
    for a, b in zip(f[1], g[1]):
        if isinstance(a, str) or isinstance(b, str):
            if a != b:
                return False
        elif not _rooted_sub(a, b):
            return False
    return True


def _nodes(f: Frag):
    yield f
    for k in f[1] or ():
        if not isinstance(k, str):
            yield from _nodes(k)


def is_subfragment(f: Frag, g: Frag) -> bool:
    return any(_rooted_sub(f, h) for h in _nodes(g))


def _maximal(frags: Iterable[Frag]) -> set[Frag]:
    pool = sorted(set(frags), key=fragment_size, reverse=True)
    keep: list[Frag] = []
    for f in pool:
        if not any(is_subfragment(f, g) for g in keep):
            keep.append(f)
    return set(keep)


def _pair(x: _Indexed, y: _Indexed) -> set[Frag]:
    memo: dict = {}
    found = []
    for prod, rows in x.by_prod.items():
        cols = y.by_prod.get(prod)
        if cols:
            for i in rows:
                for j in cols:
                    found.append(_greedy(x, y, i, j, memo))
    return _maximal(found)


def common_fragments(t1: Tree, t2: Tree, lexical: bool = True) -> set[Frag]:
    """Maximal fragments occurring in both trees.

    For each node pair with equal productions the largest shared fragment
    rooted there is taken; any that is contained in another is dropped.
    With `lexical` False, words never match.
    """
    return _pair(_Indexed(t1, lexical), _Indexed(t2, lexical))


def _matches_at(f: Frag, x: _Indexed, i: int) -> bool:
    if f[0] != x.labels[i]:
        return False
    if f[1] is None:
        return True
    kids = x.kids[i]
    if len(kids) != len(f[1]):
        return False
    for a, b in zip(f[1], kids):
        if isinstance(a, str) or isinstance(b, str):
            if a != b:
                return False
        elif not _matches_at(a, x, b):
            return False
    return True


def occurrences(f: Frag, t: Tree) -> int:
    """Number of nodes of `t` at which `f` matches."""
    x = _Indexed(t)
    return sum(_matches_at(f, x, i) for i in range(len(x.nodes)))


@dataclass
class FragmentTable:
    entries: dict[str, int] = field(default_factory=dict)

    def items(self) -> list[tuple[str, int]]:
        return sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0]))

    def to_tsv(self) -> str:
        return "".join(f"{n}\t{s}\n" for s, n in self.items())


def extract_corpus(trees: list[Tree], lexical: bool = True) -> FragmentTable:
    """Fragments shared by any pair of trees, counted over all occurrence sites."""
    if len(trees) < 2:
        raise InsufficientTrees(f"need at least two trees, got {len(trees)}")
    indexed = [_Indexed(t, lexical) for t in trees]
    found: set[Frag] = set()
    for x, y in combinations(indexed, 2):
        found |= _pair(x, y)
    by_label: dict[str, list[tuple[_Indexed, int]]] = {}
    for x in indexed:
        for i, label in enumerate(x.labels):
            by_label.setdefault(label, []).append((x, i))
    counts = Counter()
    for f in found:
        counts[render(f)] = sum(_matches_at(f, x, i) for x, i in by_label.get(f[0], ()))
    return FragmentTable(dict(counts))


def brute_force_fragments(t: Tree, max_nodes: int) -> set[str]:
    """Every fragment of `t` with at most `max_nodes` labelled nodes, rendered."""
    nodes = list(t.root.subtrees())
    if len(nodes) > BRUTE_FORCE_LIMIT:
        raise TreeTooLarge(f"{len(nodes)} nodes; brute force allows {BRUTE_FORCE_LIMIT}")
    forms = t.forms

    def expansions(node: TreeNode) -> list[tuple[Frag, int]]:
        choices = []
        for c in node.children:
            if isinstance(c, int):
                choices.append([(forms[c], 0)])
            else:
                choices.append([((c.label, None), 1)] + expansions(c))
        out = []
        for combo in product(*choices):
            size = 1 + sum(s for _, s in combo)
            if size <= max_nodes:
                out.append(((node.label, tuple(f for f, _ in combo)), size))
        return out

    if max_nodes < 1:
        return set()
    return {render(f) for n in nodes for f, _ in expansions(n)}
