"""Ordered walks, neighbourhoods and feature lookup over a CompiledCorpus.

Nodes are addressed by dense index; ``c.node("n1")`` maps an id to its index.

Default node order: ascending smallest start anchor, then descending largest
end anchor (embedders before what they embed), then index.  Nodes without
regions come last, by index.  A RankTable inserts an object-type rank right
after the start anchor.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping

import numpy as np

from .compiler import CompiledCorpus
from .errors import FeatureNotLoaded, UnknownFeatureKey
from .model import EDGE, NODE, FeatureKey

OUT, IN = "out", "in"


@dataclass(frozen=True)
class RankTable:
    """Ranks nodes by object type.

    `feature` is either a FeatureKey, whose value is the type, or the name of
    an annotation space, in which case the label of the node's first
    annotation in that space is the type.  Unmapped types get rank 0.
    """

    feature: FeatureKey | str
    ranking: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.ranking.values())) != len(self.ranking):
            raise ValueError("ranks must be distinct per object type")

    def ranks(self, c: CompiledCorpus) -> np.ndarray:
        cache = c.__dict__.setdefault("_rank_cache", {})
        ident = (self.feature, tuple(sorted(self.ranking.items())))
        if ident in cache:
            return cache[ident]
        out = np.zeros(c.n_nodes, np.int64)
        if isinstance(self.feature, str) and ":" not in self.feature:
            space = self.feature
            if space in c.strings.lookup:
                sym = c.strings.index(space)
                seen = np.zeros(c.n_nodes, bool)
                for a in np.flatnonzero((c.ann_space == sym) & (c.ann_kind == 0)).tolist():
                    n = int(c.ann_target[a])
                    if not seen[n]:
                        seen[n] = True
                        out[n] = self.ranking.get(c.strings[int(c.ann_label[a])], 0)
        else:
            table = c.feature(self.feature)
            if table.kind != NODE:
                raise ValueError(f"rank feature {self.feature} does not annotate nodes")
            by_symbol = {c.strings.index(v): r for v, r in self.ranking.items()
                         if v in c.strings.lookup}
            for n in np.flatnonzero(table.values >= 0).tolist():
                out[n] = by_symbol.get(int(table.values[n]), 0)
        out.setflags(write=False)
        cache[ident] = out
        return out


@dataclass(frozen=True, order=True)
class NodeOrderKey:
    min_anchor: float
    max_anchor: float
    rank: int
    node_index: int

    def sort_tuple(self, ranked: bool = False) -> tuple:
        if self.min_anchor == float("inf"):
            return (1, self.node_index)
        if ranked:
            return (0, self.min_anchor, self.rank, -self.max_anchor, self.node_index)
        return (0, self.min_anchor, -self.max_anchor, self.node_index)


def order_key(c: CompiledCorpus, n: int, rank: RankTable | None = None) -> NodeOrderKey:
    lo, hi, has = c.spans
    r = int(rank.ranks(c)[n]) if rank is not None else 0
    if not has[n]:
        return NodeOrderKey(float("inf"), float("-inf"), r, n)
    return NodeOrderKey(int(lo[n]), int(hi[n]), r, n)


def cmp_nodes(c: CompiledCorpus, a: int, b: int, rank: RankTable | None = None) -> int:
    """-1 if `a` comes before `b`, 1 if after, 0 only when a == b."""
    if a == b:
        return 0
    lo, hi, has = c.spans
    if has[a] != has[b]:
        return -1 if has[a] else 1
    if has[a]:
        if lo[a] != lo[b]:
            return -1 if lo[a] < lo[b] else 1
        if rank is not None:
            ranks = rank.ranks(c)
            if ranks[a] != ranks[b]:
                return -1 if ranks[a] < ranks[b] else 1
        if hi[a] != hi[b]:
            return -1 if hi[a] > hi[b] else 1
    return -1 if a < b else 1


def sorted_nodes(c: CompiledCorpus, rank: RankTable | None = None) -> np.ndarray:
    """All node indices in order."""
    if rank is None:
        return c.order
    cache = c.__dict__.setdefault("_order_cache", {})
    ident = (rank.feature, tuple(sorted(rank.ranking.items())))
    if ident not in cache:
        lo, hi, has = c.spans
        ranks = rank.ranks(c)
        idx = np.arange(c.n_nodes)
        cache[ident] = np.lexsort((idx, np.where(has, -hi, 0), np.where(has, ranks, 0),
                                   np.where(has, lo, 0), ~has))
    return cache[ident]


class Features:
    """Feature access for one target, handed to walk filters."""

    __slots__ = ("c", "target", "kind")

    def __init__(self, c: CompiledCorpus, target: int, kind: str = NODE):
        self.c, self.target, self.kind = c, target, kind

    def get(self, key) -> str | None:
        table = self.c.feature(key)
        if table.kind != self.kind:
            return None
        return table.get(self.target)

    def __getitem__(self, key) -> str | None:
        return self.get(key)

    def has(self, key) -> bool:
        return self.get(key) is not None


def walk(c: CompiledCorpus, filter: Callable[[int, Features], bool] | None = None,
         rank: RankTable | None = None) -> Iterator[int]:
    for n in sorted_nodes(c, rank).tolist():
        if filter is None or filter(n, Features(c, n)):
            yield n


def having(key, value: str | None = None) -> Callable[[int, Features], bool]:
    """Filter for walk: nodes carrying `key` (with `value`, if given)."""
    key = FeatureKey.parse(key)

    def pred(n, f):
        v = f.get(key)
        return v is not None and (value is None or v == value)
    return pred


def neighbourhood(c: CompiledCorpus, n: int, direction: str = OUT,
                  edge_filter: tuple | None = None) -> list[tuple[int, int]]:
    """Incident (edge, neighbour) pairs, by neighbour order then edge index.

    `edge_filter` is ``(key, value)``; value None means "carries the key".
    """
    if direction == OUT:
        offsets, pairs = c.out_offsets, c.out_pairs
    elif direction == IN:
        offsets, pairs = c.in_offsets, c.in_pairs
    else:
        raise ValueError(f"direction must be 'out' or 'in', got {direction!r}")
    rows = pairs[offsets[n]:offsets[n + 1]].tolist()
    if edge_filter is not None:
        key, value = edge_filter
        table = c.feature(key)
        if table.kind != EDGE:
            return []
        rows = [(e, m) for e, m in rows
                if (v := table.get(e)) is not None and (value is None or v == value)]
    return [(e, m) for e, m in rows]


def feature_value(c: CompiledCorpus, key, target: int, kind: str = NODE) -> str | None:
    table = c.feature(key)
    if table.kind != kind:
        return None
    return table.get(target)


def text_of(c: CompiledCorpus, n: int, separator: str = "") -> str:
    regions = c.node_regions(n)
    if not len(regions):
        return ""
    text = c.primary.text
    spans = sorted(map(tuple, c.region_anchors[regions].tolist()))
    return separator.join(text[a:b] for a, b in spans)


__all__ = ["RankTable", "NodeOrderKey", "Features", "order_key", "cmp_nodes", "sorted_nodes",
           "walk", "having", "neighbourhood", "feature_value", "text_of", "OUT", "IN",
           "FeatureNotLoaded", "UnknownFeatureKey"]
