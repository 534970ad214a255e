"""Read and write GrAF-style stand-off resources.

A resource is a header XML file naming one UTF-8 primary text file and one or
more annotation XML files.  The supported annotation vocabulary is::

    <graph>
      <region xml:id="r0" anchors="0 3"/>
      <node xml:id="n1"><link targets="r0"/></node>
      <edge xml:id="e1" from="n5" to="n4"/>
      <a xml:id="a1" label="word" ref="n1" as="toy">
        <fs><f name="pos" value="dt"/></fs>
      </a>
    </graph>

Element names may carry any namespace.  Annotation files are read with an
event parser; no document tree is kept in memory.
"""
from __future__ import annotations

import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

from .errors import (AnchorOutOfBounds, DanglingReference, DuplicateId, GrafFormatError,
                     InvalidGraph, IoError, MalformedXml, MissingAnnotationFiles,
                     MissingPrimaryData, NestedFeatureStructure)
from .model import (EDGE, NODE, Annotation, EdgeRecord, Graph, NodeRecord, PrimaryData,
                    Region, validate)

XML_ID = "{http://www.w3.org/XML/1998/namespace}id"
GRAF_NS = "http://www.xces.org/ns/GrAF/1.0/"


def _local(tag: str) -> str:
    return tag.rpartition("}")[2]


def _xml_id(elem) -> str | None:
    return elem.get(XML_ID) or elem.get("id")


@dataclass
class ResourceHeader:
    primary_data_path: str
    annotation_files: list[str]
    annotation_spaces: list[str] = field(default_factory=list)
    base_dir: Path = Path(".")

    def resolve(self, relative: str) -> Path:
        return self.base_dir / relative


def _iterparse(path: Path, events=("start", "end")):
    try:
        for event, elem in ET.iterparse(str(path), events=events):
            yield event, elem
    except ET.ParseError as exc:
        line, column = exc.position
        msg = str(exc).split(":")[0]
        raise MalformedXml(path, line, column, msg) from None
    except FileNotFoundError:
        raise IoError(path) from None
    except OSError as exc:
        raise IoError(path, exc.strerror or str(exc)) from None


def parse_header(path) -> ResourceHeader:
    path = Path(path)
    if not path.is_file():
        raise IoError(path)
    primary = None
    files: list[str] = []
    spaces: list[str] = []
    for event, elem in _iterparse(path, events=("end",)):
        tag = _local(elem.tag)
        if tag == "primaryData":
            primary = elem.get("loc")
        elif tag == "annotation" and elem.get("loc"):
            files.append(elem.get("loc"))
        elif tag == "annotationSpace":
            name = elem.get("as.id") or elem.get("name")
            if name:
                spaces.append(name)
    if not primary:
        raise MissingPrimaryData(f"{path}: header declares no primaryData loc")
    if not files:
        raise MissingAnnotationFiles(f"{path}: header declares no annotation files")
    header = ResourceHeader(primary, files, spaces, path.parent)
    if not header.resolve(primary).is_file():
        raise IoError(header.resolve(primary), "primary data file not found")
    return header


class _FileReader:
    """Accumulates the objects of one annotation file from parse events."""

    def __init__(self, path: Path, text_length: int):
        self.path = path
        self.length = text_length
        self.regions: list[Region] = []
        self.nodes: list[NodeRecord] = []
        self.edges: list[EdgeRecord] = []
        self.annotations: list[tuple] = []  # (id, space, label, ref, features)

    def read(self):
        root = None
        depth = 0
        node = links = None
        ann = None
        fs_depth = 0
        f_open = None
        for event, elem in _iterparse(self.path):
            tag = _local(elem.tag)
            if event == "start":
                depth += 1
                if root is None:
                    root = elem
                if ann is not None:
                    if tag == "fs":
                        if fs_depth or f_open is not None:
                            raise NestedFeatureStructure(
                                f"{self.path}: annotation {ann[0]} has a nested feature structure")
                        fs_depth += 1
                    elif tag == "f":
                        if not fs_depth or f_open is not None:
                            raise NestedFeatureStructure(
                                f"{self.path}: annotation {ann[0]} has a nested feature structure")
                        f_open = elem
                    elif fs_depth:
                        raise GrafFormatError(
                            f"{self.path}: unsupported element <{tag}> in feature structure "
                            f"of annotation {ann[0]}")
                elif tag == "node":
                    node, links = elem, []
                elif tag == "a":
                    ann = (self._need_id(elem, "a"), elem.get("as"), elem.get("label"),
                           elem.get("ref"), {})
                continue

            depth -= 1
            if tag == "region":
                self._region(elem)
            elif tag == "link" and node is not None:
                links.extend((elem.get("targets") or "").split())
            elif tag == "node" and node is not None:
                self.nodes.append(NodeRecord(self._need_id(elem, "node"), tuple(links)))
                node = links = None
            elif tag == "edge":
                src, dst = elem.get("from"), elem.get("to")
                eid = self._need_id(elem, "edge")
                if not src or not dst:
                    raise GrafFormatError(f"{self.path}: edge {eid} needs from and to")
                self.edges.append(EdgeRecord(eid, src, dst))
            elif tag == "f" and ann is not None:
                name = elem.get("name")
                if not name:
                    raise GrafFormatError(f"{self.path}: annotation {ann[0]} has a nameless feature")
                if name in ann[4]:
                    raise GrafFormatError(
                        f"{self.path}: annotation {ann[0]} repeats feature {name}")
                value = elem.get("value")
                ann[4][name] = value if value is not None else (elem.text or "").strip()
                f_open = None
            elif tag == "fs" and ann is not None:
                fs_depth -= 1
            elif tag == "a" and ann is not None:
                aid, space, label, ref, _ = ann
                for attr, val in (("as", space), ("label", label), ("ref", ref)):
                    if not val:
                        raise GrafFormatError(f"{self.path}: annotation {aid} lacks {attr}")
                self.annotations.append(ann)
                ann = None
            if depth == 1 and root is not None:
                root.clear()
        return self

    def _need_id(self, elem, what):
        ident = _xml_id(elem)
        if not ident:
            raise GrafFormatError(f"{self.path}: <{what}> without xml:id")
        return ident

    def _region(self, elem):
        rid = self._need_id(elem, "region")
        parts = (elem.get("anchors") or "").split()
        try:
            start, end = (int(p) for p in parts)
        except ValueError:
            raise GrafFormatError(
                f"{self.path}: region {rid} needs two integer anchors, got {parts}") from None
        if not 0 <= start <= end <= self.length:
            raise AnchorOutOfBounds(
                f"{self.path}: region {rid} anchors {start} {end} outside primary "
                f"length {self.length}")
        self.regions.append(Region(rid, start, end))


def read_primary(path) -> str:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except FileNotFoundError:
        raise IoError(path) from None


def parse_resource(header: ResourceHeader | str | os.PathLike) -> Graph:
    if not isinstance(header, ResourceHeader):
        header = parse_header(header)
    text = read_primary(header.resolve(header.primary_data_path))
    readers = [_FileReader(header.resolve(f), len(text)).read() for f in header.annotation_files]

    owner: dict[str, Path] = {}

    def claim(ident, path):
        if ident in owner:
            raise DuplicateId(f"{path}: id {ident} already declared in {owner[ident]}")
        owner[ident] = path

    regions, nodes, edges, raw = [], [], [], []
    for r in readers:
        for group, items in ((regions, r.regions), (nodes, r.nodes), (edges, r.edges)):
            for item in items:
                claim(item.id, r.path)
            group.extend(items)
        for item in r.annotations:
            claim(item[0], r.path)
        raw.extend((r.path, item) for item in r.annotations)

    region_ids = {x.id for x in regions}
    node_ids = {x.id for x in nodes}
    edge_ids = {x.id for x in edges}
    for n in nodes:
        for rid in n.regions:
            if rid not in region_ids:
                raise DanglingReference(f"node {n.id} links to unknown region {rid}")
    for e in edges:
        for end in (e.source, e.target):
            if end not in node_ids:
                raise DanglingReference(f"edge {e.id} references unknown node {end}")
    annotations = []
    for path, (aid, space, label, ref, feats) in raw:
        if ref in node_ids:
            kind = NODE
        elif ref in edge_ids:
            kind = EDGE
        else:
            raise DanglingReference(f"{path}: annotation {aid} targets unknown id {ref}")
        annotations.append(Annotation(aid, space, label, ref, kind, feats))

    g = Graph(PrimaryData(text), tuple(regions), tuple(nodes), tuple(edges), tuple(annotations))
    problems = validate(g)
    if problems:
        raise InvalidGraph(problems)
    return g


_ATTR_ENTITIES = {'"': "&quot;", "\n": "&#10;", "\r": "&#13;", "\t": "&#9;"}


def _q(value: str) -> str:
    return '"' + escape(value, _ATTR_ENTITIES) + '"'


def _graph_lines(regions=(), nodes=(), edges=(), annotations=()):
    yield '<?xml version="1.0" encoding="UTF-8"?>\n'
    yield f'<graph xmlns="{GRAF_NS}">\n'
    for r in regions:
        yield f'  <region xml:id={_q(r.id)} anchors="{r.start} {r.end}"/>\n'
    for n in nodes:
        if n.regions:
            yield f'  <node xml:id={_q(n.id)}><link targets={_q(" ".join(n.regions))}/></node>\n'
        else:
            yield f'  <node xml:id={_q(n.id)}/>\n'
    for e in edges:
        yield f'  <edge xml:id={_q(e.id)} from={_q(e.source)} to={_q(e.target)}/>\n'
    for a in annotations:
        yield (f'  <a xml:id={_q(a.id)} label={_q(a.label)} ref={_q(a.target)} '
               f'as={_q(a.space)}><fs>')
        for name, value in a.features.items():
            yield f'<f name={_q(name)} value={_q(value)}/>'
        yield '</fs></a>\n'
    yield '</graph>\n'


def write_resource(g: Graph, directory, *, split_spaces: bool = False,
                   header_name: str = "header.xml") -> Path:
    """Serialize `g` as a GrAF resource in `directory`; return the header path.

    With `split_spaces`, regions/nodes/edges go to ``graph.xml`` and the
    annotations of each space to ``<space>.xml``, referencing across files.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "primary.txt", "w", encoding="utf-8", newline="") as fh:
        fh.write(g.primary.text)

    spaces = list(dict.fromkeys(a.space for a in g.annotations))
    if split_spaces:
        parts = {"graph.xml": (g.regions, g.nodes, g.edges, ())}
        for space in spaces:
            parts[f"{space}.xml"] = ((), (), (), [a for a in g.annotations if a.space == space])
    else:
        parts = {"graph.xml": (g.regions, g.nodes, g.edges, g.annotations)}
    for name, content in parts.items():
        with open(directory / name, "w", encoding="utf-8") as fh:
            fh.writelines(_graph_lines(*content))

    lines = ['<?xml version="1.0" encoding="UTF-8"?>\n',
             f'<documentHeader xmlns="{GRAF_NS}">\n',
             '  <primaryData loc="primary.txt"/>\n',
             '  <annotationSpaces>\n']
    lines += [f'    <annotationSpace as.id={_q(s)}/>\n' for s in spaces]
    lines += ['  </annotationSpaces>\n', '  <annotations>\n']
    lines += [f'    <annotation loc={_q(name)}/>\n' for name in parts]
    lines += ['  </annotations>\n', '</documentHeader>\n']
    header = directory / header_name
    header.write_text("".join(lines), encoding="utf-8")
    return header
