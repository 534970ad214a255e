"""Compile an annotation graph into a columnar index and persist it as a bundle.

A bundle is a directory holding a line-oriented ``manifest`` and one binary
file per section.  All integers are little-endian 32-bit.  Each feature key
lives in its own section, so loading a handful of features never touches the
others.
"""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable
from urllib.parse import quote

import numpy as np

from .errors import (BundleError, ChecksumMismatch, FeatureNotLoaded, InvalidGraph, IoError,
                     UnknownFeatureKey, VersionMismatch)
from .model import (EDGE, NODE, Annotation, EdgeRecord, FeatureKey, Graph, NodeRecord,
                    PrimaryData, Region, validate)

FORMAT_LINE = "laffab-bundle v1"
CHECKSUM_NAME = "blake2b-64"
KINDS = ("region", "node", "edge", "annotation")
_KIND_CODE = {NODE: 0, EDGE: 1}
_CODE_KIND = {0: NODE, 1: EDGE}
I32 = np.dtype("<i4")
U32 = np.dtype("<u4")

ALL = "ALL"


class StringTable:
    """Append-only interned strings with dense ids from 0."""

    def __init__(self, symbols: Iterable[str] = ()):
        self.symbols: list[str] = list(symbols)
        self._lookup: dict[str, int] | None = None

    @property
    def lookup(self) -> dict[str, int]:
        if self._lookup is None:
            self._lookup = {s: i for i, s in enumerate(self.symbols)}
        return self._lookup

    def intern(self, s: str) -> int:
        lookup = self.lookup
        i = lookup.get(s)
        if i is None:
            i = lookup[s] = len(self.symbols)
            self.symbols.append(s)
        return i

    def index(self, s: str) -> int:
        return self.lookup[s]

    def __getitem__(self, i: int) -> str:
        return self.symbols[i]

    def __len__(self) -> int:
        return len(self.symbols)

    def __eq__(self, other) -> bool:
        return isinstance(other, StringTable) and self.symbols == other.symbols

    # XML text cannot contain NUL, so it is a safe separator.
    def to_bytes(self) -> bytes:
        blob = "\0".join(self.symbols).encode("utf-8")
        return np.array([len(self.symbols)], U32).tobytes() + blob

    @classmethod
    def from_bytes(cls, data: bytes) -> StringTable:
        count = int(np.frombuffer(data, U32, 1)[0])
        if count == 0:
            return cls()
        symbols = data[4:].decode("utf-8").split("\0")
        if len(symbols) != count:
            raise BundleError(f"string table holds {len(symbols)} strings, header says {count}")
        return cls(symbols)


def feature_section(key: FeatureKey) -> str:
    def part(s):
        return quote(s, safe="").replace(".", "%2E")
    return f"feat.{part(key.space)}.{part(key.label)}.{part(key.name)}"


@dataclass(eq=False)
class FeatureTable:
    """Values of one feature key, densely indexed by target index (-1 = absent)."""

    kind: str
    values: np.ndarray
    strings: StringTable

    def get(self, target: int) -> str | None:
        v = int(self.values[target])
        return None if v < 0 else self.strings[v]

    def __len__(self) -> int:
        return int(np.count_nonzero(self.values >= 0))

    def items(self):
        for t in np.flatnonzero(self.values >= 0):
            yield int(t), self.strings[int(self.values[t])]


def _csr(groups: np.ndarray, n: int) -> np.ndarray:
    offsets = np.zeros(n + 1, I32)
    np.cumsum(np.bincount(groups, minlength=n), out=offsets[1:])
    return offsets


def node_spans(offsets: np.ndarray, links: np.ndarray, anchors: np.ndarray):
    """Per-node (min start, max end, has-regions) over linked regions."""
    n = len(offsets) - 1
    counts = np.diff(offsets)
    has = counts > 0
    lo = np.full(n, np.iinfo(np.int64).max, np.int64)
    hi = np.full(n, np.iinfo(np.int64).min, np.int64)
    if len(links):
        starts = anchors[links, 0].astype(np.int64)
        ends = anchors[links, 1].astype(np.int64)
        seg = offsets[:-1][has]
        lo[has] = np.minimum.reduceat(starts, seg)
        hi[has] = np.maximum.reduceat(ends, seg)
    return lo, hi, has


def default_order(lo, hi, has) -> np.ndarray:
    idx = np.arange(len(lo))
    # anchored first; min anchor asc; max anchor desc; index asc
    lo_key = np.where(has, lo, 0)
    hi_key = np.where(has, -hi, 0)
    return np.lexsort((idx, hi_key, lo_key, ~has)).astype(I32)


class CompiledCorpus:
    """Columnar, read-only index over a whole annotation graph."""

    def __init__(self, *, primary, strings, anchors, node_offsets, node_links,
                 edge_source, edge_target, order, ids, ann_space, ann_label, ann_kind,
                 ann_target, ann_feat_offsets, ann_feat_keys, key_list, feature_tables,
                 out_offsets=None, out_pairs=None, in_offsets=None, in_pairs=None):
        self.primary: PrimaryData = primary
        self.strings: StringTable = strings
        self.region_anchors = anchors
        self.node_offsets = node_offsets
        self.node_links = node_links
        self.edge_source = edge_source
        self.edge_target = edge_target
        self.order = order
        self.ids: dict[str, np.ndarray] = ids
        self.ann_space, self.ann_label = ann_space, ann_label
        self.ann_kind, self.ann_target = ann_kind, ann_target
        self.ann_feat_offsets, self.ann_feat_keys = ann_feat_offsets, ann_feat_keys
        # every key present in the bundle, with its target kind, in first-use order
        self.key_list: list[tuple[FeatureKey, str]] = key_list
        self.feature_tables: dict[FeatureKey, FeatureTable] = feature_tables
        if out_offsets is None:
            out_offsets, out_pairs, in_offsets, in_pairs = self._adjacency()
        self.out_offsets, self.out_pairs = out_offsets, out_pairs
        self.in_offsets, self.in_pairs = in_offsets, in_pairs

    # sizes -----------------------------------------------------------------
    @property
    def n_regions(self) -> int:
        return len(self.region_anchors)

    @property
    def n_nodes(self) -> int:
        return len(self.node_offsets) - 1

    @property
    def n_edges(self) -> int:
        return len(self.edge_source)

    @property
    def n_annotations(self) -> int:
        return len(self.ann_space)

    @property
    def n_features(self) -> int:
        return len(self.ann_feat_keys)

    # ids -------------------------------------------------------------------
    @cached_property
    def _index_maps(self) -> dict[str, dict[str, int]]:
        return {}

    def index_of(self, kind: str, ident: str) -> int:
        maps = self._index_maps
        if kind not in maps:
            syms = self.strings.symbols
            maps[kind] = {syms[s]: i for i, s in enumerate(self.ids[kind].tolist())}
        return maps[kind][ident]

    def id_of(self, kind: str, index: int) -> str:
        return self.strings[int(self.ids[kind][index])]

    def node(self, ident: str) -> int:
        return self.index_of("node", ident)

    def edge(self, ident: str) -> int:
        return self.index_of("edge", ident)

    def node_id(self, index: int) -> str:
        return self.id_of("node", index)

    def edge_id(self, index: int) -> str:
        return self.id_of("edge", index)

    # structure -------------------------------------------------------------
    @cached_property
    def spans(self):
        return node_spans(self.node_offsets, self.node_links, self.region_anchors)

    @cached_property
    def rank_of(self) -> np.ndarray:
        """Position of each node in the default order."""
        pos = np.empty(self.n_nodes, I32)
        pos[self.order] = np.arange(self.n_nodes, dtype=I32)
        return pos

    def node_regions(self, n: int) -> np.ndarray:
        return self.node_links[self.node_offsets[n]:self.node_offsets[n + 1]]

    def _adjacency(self):
        n, m = self.n_nodes, self.n_edges
        eidx = np.arange(m, dtype=I32)
        rank = self.rank_of
        out = []
        for here, there in ((self.edge_source, self.edge_target),
                            (self.edge_target, self.edge_source)):
            perm = np.lexsort((eidx, rank[there] if m else eidx, here))
            pairs = np.stack([eidx[perm], there[perm]], axis=1).astype(I32).reshape(m, 2)
            out += [_csr(here, n), pairs]
        return tuple(out)

    # features --------------------------------------------------------------
    @cached_property
    def known_keys(self) -> dict[FeatureKey, str]:
        return dict(self.key_list)

    def feature(self, key) -> FeatureTable:
        key = FeatureKey.parse(key)
        table = self.feature_tables.get(key)
        if table is None:
            if key in self.known_keys:
                raise FeatureNotLoaded(str(key))
            raise UnknownFeatureKey(str(key))
        return table

    @property
    def loaded_keys(self) -> list[FeatureKey]:
        return list(self.feature_tables)

    def annotation_features(self, a: int) -> list[FeatureKey]:
        lo, hi = self.ann_feat_offsets[a], self.ann_feat_offsets[a + 1]
        return [self.key_list[k][0] for k in self.ann_feat_keys[lo:hi]]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CompiledCorpus):
            return NotImplemented
        if (self.primary != other.primary or self.strings != other.strings
                or self.key_list != other.key_list
                or self.feature_tables.keys() != other.feature_tables.keys()):
            return False
        arrays = ("region_anchors", "node_offsets", "node_links", "edge_source", "edge_target",
                  "order", "ann_space", "ann_label", "ann_kind", "ann_target",
                  "ann_feat_offsets", "ann_feat_keys", "out_offsets", "out_pairs",
                  "in_offsets", "in_pairs")
        if not all(np.array_equal(getattr(self, a), getattr(other, a)) for a in arrays):
            return False
        if any(not np.array_equal(self.ids[k], other.ids[k]) for k in KINDS):
            return False
        for key, table in self.feature_tables.items():
            theirs = other.feature_tables[key]
            if table.kind != theirs.kind or not np.array_equal(table.values, theirs.values):
                return False
        return True

    __hash__ = None


def compile_graph(g: Graph) -> CompiledCorpus:
    problems = validate(g)
    if problems:
        raise InvalidGraph(problems)
    strings = StringTable()
    intern = strings.intern

    region_index = {r.id: i for i, r in enumerate(g.regions)}
    anchors = np.array([(r.start, r.end) for r in g.regions], I32).reshape(-1, 2)

    node_index = {n.id: i for i, n in enumerate(g.nodes)}
    node_offsets = np.zeros(len(g.nodes) + 1, I32)
    node_offsets[1:] = np.cumsum([len(n.regions) for n in g.nodes], dtype=np.int64)
    node_links = np.array([region_index[r] for n in g.nodes for r in n.regions], I32)

    edge_index = {e.id: i for i, e in enumerate(g.edges)}
    edge_source = np.array([node_index[e.source] for e in g.edges], I32)
    edge_target = np.array([node_index[e.target] for e in g.edges], I32)

    ids = {
        "region": np.array([intern(r.id) for r in g.regions], I32),
        "node": np.array([intern(n.id) for n in g.nodes], I32),
        "edge": np.array([intern(e.id) for e in g.edges], I32),
        "annotation": np.array([intern(a.id) for a in g.annotations], I32),
    }

    key_pos: dict[FeatureKey, int] = {}
    key_list: list[tuple[FeatureKey, str]] = []
    columns: list[tuple[list[int], list[int]]] = []
    ann_space, ann_label, ann_kind, ann_target = [], [], [], []
    feat_counts, feat_keys = [], []
    for a in g.annotations:
        target = node_index[a.target] if a.target_kind == NODE else edge_index[a.target]
        ann_space.append(intern(a.space))
        ann_label.append(intern(a.label))
        ann_kind.append(_KIND_CODE[a.target_kind])
        ann_target.append(target)
        feat_counts.append(len(a.features))
        for name, value in a.features.items():
            key = FeatureKey(a.space, a.label, name)
            k = key_pos.get(key)
            if k is None:
                k = key_pos[key] = len(key_list)
                intern(name)
                key_list.append((key, a.target_kind))
                columns.append(([], []))
            feat_keys.append(k)
            columns[k][0].append(target)
            columns[k][1].append(intern(value))

    domain = {NODE: len(g.nodes), EDGE: len(g.edges)}
    tables = {}
    for (key, kind), (targets, values) in zip(key_list, columns):
        dense = np.full(domain[kind], -1, I32)
        dense[np.array(targets, np.int64)] = values
        tables[key] = FeatureTable(kind, dense, strings)

    lo, hi, has = node_spans(node_offsets, node_links, anchors)
    ann_feat_offsets = np.zeros(len(g.annotations) + 1, I32)
    ann_feat_offsets[1:] = np.cumsum(feat_counts, dtype=np.int64)
    return CompiledCorpus(
        primary=g.primary, strings=strings, anchors=anchors, node_offsets=node_offsets,
        node_links=node_links, edge_source=edge_source, edge_target=edge_target,
        order=default_order(lo, hi, has), ids=ids,
        ann_space=np.array(ann_space, I32), ann_label=np.array(ann_label, I32),
        ann_kind=np.array(ann_kind, I32), ann_target=np.array(ann_target, I32),
        ann_feat_offsets=ann_feat_offsets, ann_feat_keys=np.array(feat_keys, I32),
        key_list=key_list, feature_tables=tables)


def decompile(c: CompiledCorpus) -> Graph:
    """Rebuild the source Graph; every feature must be loaded."""
    missing = [str(k) for k, _ in c.key_list if k not in c.feature_tables]
    if missing:
        raise FeatureNotLoaded(", ".join(missing))
    s = c.strings
    region_ids = [s[i] for i in c.ids["region"].tolist()]
    node_ids = [s[i] for i in c.ids["node"].tolist()]
    edge_ids = [s[i] for i in c.ids["edge"].tolist()]
    regions = tuple(Region(rid, int(a), int(b))
                    for rid, (a, b) in zip(region_ids, c.region_anchors.tolist()))
    links = c.node_links.tolist()
    offs = c.node_offsets.tolist()
    nodes = tuple(NodeRecord(nid, tuple(region_ids[r] for r in links[offs[i]:offs[i + 1]]))
                  for i, nid in enumerate(node_ids))
    edges = tuple(EdgeRecord(eid, node_ids[a], node_ids[b])
                  for eid, a, b in zip(edge_ids, c.edge_source.tolist(), c.edge_target.tolist()))
    annotations = []
    for i, sym in enumerate(c.ids["annotation"].tolist()):
        kind = _CODE_KIND[int(c.ann_kind[i])]
        target = int(c.ann_target[i])
        feats = {key.name: c.feature_tables[key].get(target) for key in c.annotation_features(i)}
        annotations.append(Annotation(s[sym], s[int(c.ann_space[i])], s[int(c.ann_label[i])],
                                      (node_ids if kind == NODE else edge_ids)[target],
                                      kind, feats))
    return Graph(c.primary, regions, nodes, edges, tuple(annotations))


# bundle I/O ------------------------------------------------------------------

def _u32(*values) -> bytes:
    return np.array(values, U32).tobytes()


def _arr(a) -> bytes:
    return np.ascontiguousarray(a, I32).tobytes()


def _sections(c: CompiledCorpus) -> dict[str, bytes]:
    out = {
        "primary": c.primary.text.encode("utf-8"),
        "strings": c.strings.to_bytes(),
        "anchors": _u32(c.n_regions) + _arr(c.region_anchors),
        "node_regions": _u32(c.n_nodes, len(c.node_links)) + _arr(c.node_offsets)
        + _arr(c.node_links),
        "edges": _u32(c.n_nodes, c.n_edges) + b"".join(_arr(a) for a in (
            c.edge_source, c.edge_target, c.out_offsets, c.out_pairs, c.in_offsets,
            c.in_pairs)),
        "order": _u32(c.n_nodes) + _arr(c.order),
    }
    for kind in KINDS:
        out[f"ids.{kind}"] = _u32(len(c.ids[kind])) + _arr(c.ids[kind])
    keys = np.array([(c.strings.index(k.space), c.strings.index(k.label),
                      c.strings.index(k.name), _KIND_CODE[kind]) for k, kind in c.key_list],
                    I32).reshape(-1, 4)
    out["annotations"] = _u32(c.n_annotations, len(c.key_list), c.n_features) + b"".join(
        _arr(a) for a in (keys, c.ann_space, c.ann_label, c.ann_kind, c.ann_target,
                          c.ann_feat_offsets, c.ann_feat_keys))
    for key, kind in c.key_list:
        table = c.feature(key)
        targets = np.flatnonzero(table.values >= 0)
        out[feature_section(key)] = (_u32(_KIND_CODE[kind], len(table.values), len(targets))
                                     + _arr(targets) + _arr(table.values[targets]))
    return out


def _checksum(data: bytes) -> str:
    return hashlib.blake2b(data, digest_size=8).hexdigest()


@dataclass
class Manifest:
    version: str
    checksum: str
    counts: dict[str, int]
    sections: dict[str, tuple[int, str]]  # name -> (bytes, checksum)

    def render(self) -> str:
        lines = [self.version, f"checksum {self.checksum}"]
        lines += [f"{k} {v}" for k, v in self.counts.items()]
        lines += [f"section {name} bytes {n} checksum {h}"
                  for name, (n, h) in self.sections.items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def read(cls, directory) -> Manifest:
        path = Path(directory) / "manifest"
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except FileNotFoundError:
            raise IoError(path, "bundle manifest not found") from None
        if not lines or not lines[0].startswith("laffab-bundle "):
            raise BundleError(f"{path}: not a laffab bundle manifest")
        if lines[0] != FORMAT_LINE:
            raise VersionMismatch(f"{path}: bundle format {lines[0]!r}, supported {FORMAT_LINE!r}")
        checksum, counts, sections = None, {}, {}
        for line in lines[1:]:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "section" and len(parts) == 6:
                sections[parts[1]] = (int(parts[3]), parts[5])
            elif parts[0] == "checksum" and len(parts) == 2:
                checksum = parts[1]
            elif len(parts) == 2:
                counts[parts[0]] = int(parts[1])
            else:
                raise BundleError(f"{path}: bad manifest line {line!r}")
        if checksum != CHECKSUM_NAME:
            raise BundleError(f"{path}: unsupported checksum algorithm {checksum!r}")
        return cls(lines[0], checksum, counts, sections)


def save(c: CompiledCorpus, directory) -> Manifest:
    if len(c.feature_tables) != len(c.key_list):
        raise FeatureNotLoaded("cannot save a partially loaded corpus")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sections = _sections(c)
    for name, data in sections.items():
        (directory / name).write_bytes(data)
    manifest = Manifest(FORMAT_LINE, CHECKSUM_NAME,
                        {"nodes": c.n_nodes, "edges": c.n_edges, "regions": c.n_regions,
                         "features": c.n_features},
                        {name: (len(data), _checksum(data)) for name, data in sections.items()})
    (directory / "manifest").write_text(manifest.render(), encoding="utf-8")
    return manifest


class _Cursor:
    def __init__(self, data: bytes):
        self.data, self.pos = data, 0

    def ints(self, count: int, dtype=I32) -> np.ndarray:
        a = np.frombuffer(self.data, dtype, count, self.pos)
        self.pos += 4 * count
        return a

    def header(self, count: int) -> list[int]:
        return self.ints(count, U32).tolist()


def _read_section(directory: Path, manifest: Manifest, name: str) -> bytes:
    if name not in manifest.sections:
        raise BundleError(f"{directory}: manifest lacks section {name!r}")
    size, digest = manifest.sections[name]
    try:
        data = (directory / name).read_bytes()
    except FileNotFoundError:
        raise IoError(directory / name, "bundle section missing") from None
    if len(data) != size or _checksum(data) != digest:
        raise ChecksumMismatch(name)
    return data


def load(directory, sel=ALL, optional=()) -> CompiledCorpus:
    """Load a bundle; structure always, feature tables only for `sel` (or ALL).

    Keys in `optional` are loaded when the bundle has them and skipped otherwise.
    """
    directory = Path(directory)
    manifest = Manifest.read(directory)

    def read(name):
        return _Cursor(_read_section(directory, manifest, name))

    primary = PrimaryData(read("primary").data.decode("utf-8"))
    strings = StringTable.from_bytes(read("strings").data)
    cur = read("anchors")
    (n_regions,) = cur.header(1)
    anchors = cur.ints(2 * n_regions).reshape(n_regions, 2)
    cur = read("node_regions")
    n_nodes, n_links = cur.header(2)
    node_offsets, node_links = cur.ints(n_nodes + 1), cur.ints(n_links)
    cur = read("edges")
    _, m = cur.header(2)
    edge_source, edge_target = cur.ints(m), cur.ints(m)
    out_offsets, out_pairs = cur.ints(n_nodes + 1), cur.ints(2 * m).reshape(m, 2)
    in_offsets, in_pairs = cur.ints(n_nodes + 1), cur.ints(2 * m).reshape(m, 2)
    cur = read("order")
    order = cur.ints(cur.header(1)[0])
    ids = {}
    for kind in KINDS:
        cur = read(f"ids.{kind}")
        ids[kind] = cur.ints(cur.header(1)[0])
    cur = read("annotations")
    n_ann, n_keys, n_feat = cur.header(3)
    raw_keys = cur.ints(4 * n_keys).reshape(n_keys, 4).tolist()
    key_list = [(FeatureKey(strings[a], strings[b], strings[c]), _CODE_KIND[k])
                for a, b, c, k in raw_keys]
    ann = [cur.ints(n_ann) for _ in range(4)]
    ann_feat_offsets, ann_feat_keys = cur.ints(n_ann + 1), cur.ints(n_feat)

    known = dict(key_list)
    if sel == ALL or sel is None:
        wanted = [k for k, _ in key_list]
    else:
        wanted = list(dict.fromkeys(FeatureKey.parse(k) for k in sel))
        for key in wanted:
            if key not in known:
                raise UnknownFeatureKey(str(key))
        extra = (FeatureKey.parse(k) for k in optional)
        wanted = list(dict.fromkeys(wanted + [k for k in extra if k in known]))
    tables = {}
    for key in wanted:
        cur = read(feature_section(key))
        kind, domain, count = cur.header(3)
        targets, values = cur.ints(count), cur.ints(count)
        dense = np.full(domain, -1, I32)
        dense[targets] = values
        tables[key] = FeatureTable(_CODE_KIND[kind], dense, strings)

    return CompiledCorpus(
        primary=primary, strings=strings, anchors=anchors, node_offsets=node_offsets,
        node_links=node_links, edge_source=edge_source, edge_target=edge_target, order=order,
        ids=ids, ann_space=ann[0], ann_label=ann[1], ann_kind=ann[2], ann_target=ann[3],
        ann_feat_offsets=ann_feat_offsets, ann_feat_keys=ann_feat_keys, key_list=key_list,
        feature_tables=tables, out_offsets=out_offsets, out_pairs=out_pairs,
        in_offsets=in_offsets, in_pairs=in_pairs)


def resolve_bundle(path) -> Path:
    """Relative bundle paths resolve under $LAFFAB_CACHE when it is set."""
    path = Path(path)
    cache = os.environ.get("LAFFAB_CACHE")
    if cache and not path.is_absolute():
        return Path(cache) / path
    return path
