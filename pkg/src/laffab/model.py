"""In-memory annotation graph: primary text, regions, nodes, edges, annotations.

Feature structures are flat maps from feature name to string value.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

NODE = "node"
EDGE = "edge"
TARGET_KINDS = (NODE, EDGE)


@dataclass(frozen=True)
class PrimaryData:
    text: str = ""

    @property
    def length(self) -> int:
        return len(self.text)


@dataclass(frozen=True)
class Region:
    id: str
    start: int
    end: int


@dataclass(frozen=True)
class NodeRecord:
    id: str
    regions: tuple[str, ...] = ()


@dataclass(frozen=True)
class EdgeRecord:
    id: str
    source: str
    target: str


@dataclass(frozen=True, order=True)
class FeatureKey:
    """Address of a feature: annotation space, annotation label, feature name.

    Written on the command line as ``space:label.name``.
    """

    space: str
    label: str
    name: str

    @classmethod
    def parse(cls, text: str | FeatureKey) -> FeatureKey:
        if isinstance(text, FeatureKey):
            return text
        space, sep, rest = text.partition(":")
        label, dot, name = rest.rpartition(".")
        if not (sep and dot and space and label and name):
            raise ValueError(f"feature key must look like space:label.name, got {text!r}")
        return cls(space, label, name)

    def __str__(self) -> str:
        return f"{self.space}:{self.label}.{self.name}"


@dataclass(frozen=True)
class Annotation:
    id: str
    space: str
    label: str
    target: str
    target_kind: str = NODE
    features: Mapping[str, str] = field(default_factory=dict)

    def keys(self):
        for name in self.features:
            yield FeatureKey(self.space, self.label, name)


@dataclass(frozen=True)
class Graph:
    primary: PrimaryData = PrimaryData()
    regions: tuple[Region, ...] = ()
    nodes: tuple[NodeRecord, ...] = ()
    edges: tuple[EdgeRecord, ...] = ()
    annotations: tuple[Annotation, ...] = ()

    @cached_property
    def region_by_id(self) -> dict[str, Region]:
        return {r.id: r for r in self.regions}

    @cached_property
    def node_by_id(self) -> dict[str, NodeRecord]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def edge_by_id(self) -> dict[str, EdgeRecord]:
        return {e.id: e for e in self.edges}

    @cached_property
    def annotation_by_id(self) -> dict[str, Annotation]:
        return {a.id: a for a in self.annotations}

    @property
    def feature_count(self) -> int:
        return sum(len(a.features) for a in self.annotations)


def _duplicates(ids):
    return [i for i, n in Counter(ids).items() if n > 1]


def validate(g: Graph) -> list[str]:
    """Return a description of every invariant violation in `g`; empty if valid."""
    out: list[str] = []
    length = g.primary.length
    for kind, items in (("region", g.regions), ("node", g.nodes),
                        ("edge", g.edges), ("annotation", g.annotations)):
        out.extend(f"duplicate {kind} id {i}" for i in _duplicates(x.id for x in items))

    for r in g.regions:
        for anchor in (r.start, r.end):
            if anchor < 0:
                out.append(f"region {r.id} anchor {anchor} is negative")
            elif anchor > length:
                out.append(f"region {r.id} anchor {anchor} exceeds primary length {length}")
        if r.start > r.end:
            out.append(f"region {r.id} starts at {r.start} after its end {r.end}")

    regions = g.region_by_id
    for n in g.nodes:
        for rid in n.regions:
            if rid not in regions:
                out.append(f"node {n.id} links to missing region {rid}")
        out.extend(f"node {n.id} links region {rid} twice" for rid in _duplicates(n.regions))

    nodes, edges = g.node_by_id, g.edge_by_id
    for e in g.edges:
        for end in (e.source, e.target):
            if end not in nodes:
                out.append(f"edge {e.id} references missing node {end}")
    out.extend(f"id {i} names both a node and an edge" for i in nodes.keys() & edges.keys())

    seen: dict[tuple, str] = {}
    key_kind: dict[FeatureKey, str] = {}
    for a in g.annotations:
        if not a.space:
            out.append(f"annotation {a.id} has an empty annotation space")
        if not a.label:
            out.append(f"annotation {a.id} has an empty label")
        if a.target_kind not in TARGET_KINDS:
            out.append(f"annotation {a.id} has unknown target kind {a.target_kind!r}")
        elif a.target not in (nodes if a.target_kind == NODE else edges):
            out.append(f"annotation {a.id} targets missing {a.target_kind} {a.target}")
        for name, value in a.features.items():
            if not name:
                out.append(f"annotation {a.id} has a feature with an empty name")
            if not isinstance(value, str):
                out.append(f"annotation {a.id} feature {name} is a nested feature structure")
            key = FeatureKey(a.space, a.label, name)
            if key_kind.setdefault(key, a.target_kind) != a.target_kind:
                out.append(f"feature {key} targets both nodes and edges (annotation {a.id})")
            slot = (a.space, a.label, name, a.target_kind, a.target)
            if slot in seen:
                out.append(f"feature {key} on {a.target_kind} {a.target} "
                           f"set by both {seen[slot]} and {a.id}")
            else:
                seen[slot] = a.id
    return out
