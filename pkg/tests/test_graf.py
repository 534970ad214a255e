from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laffab.errors import (AnchorOutOfBounds, DanglingReference, DuplicateId, GrafFormatError,
                           IoError, MalformedXml, MissingAnnotationFiles, NestedFeatureStructure)
from laffab.graf import parse_header, parse_resource, write_resource
from laffab.model import validate
from laffab.synth import random_graph

NS = 'xmlns="http://www.xces.org/ns/GrAF/1.0/"'


def header(*files, primary="primary.txt", spaces=("toy",)):
    sp = "".join(f'<annotationSpace as.id="{s}"/>' for s in spaces)
    an = "".join(f'<annotation loc="{f}"/>' for f in files)
    return (f'<documentHeader {NS}><primaryData loc="{primary}"/>'
            f"<annotationSpaces>{sp}</annotationSpaces><annotations>{an}</annotations>"
            "</documentHeader>")


def resource(tmp_path: Path, text: str, files: dict[str, str]) -> Path:
    (tmp_path / "primary.txt").write_text(text, encoding="utf-8")
    for name, body in files.items():
        (tmp_path / name).write_text(f"<graph {NS}>{body}</graph>", encoding="utf-8")
    h = tmp_path / "header.xml"
    h.write_text(header(*files), encoding="utf-8")
    return h


def test_header_fields(toy_dir):
    h = parse_header(toy_dir / "header.xml")
    assert h.primary_data_path == "primary.txt"
    assert h.annotation_files == ["graph.xml"]
    assert h.annotation_spaces == ["toy"]


def test_header_without_annotation_files(tmp_path):
    (tmp_path / "primary.txt").write_text("x")
    (tmp_path / "h.xml").write_text(header())
    with pytest.raises(MissingAnnotationFiles):
        parse_header(tmp_path / "h.xml")


def test_header_missing_primary(tmp_path):
    (tmp_path / "h.xml").write_text(header("a.xml"))
    with pytest.raises(IoError, match="primary.txt"):
        parse_header(tmp_path / "h.xml")


def test_missing_header(tmp_path):
    with pytest.raises(IoError):
        parse_header(tmp_path / "nope.xml")


def test_malformed_reports_position(tmp_path):
    h = resource(tmp_path, "ab", {})
    (tmp_path / "bad.xml").write_text("<graph>\n  <region xml:id='r0' anchors='0 1'\n</graph>")
    h.write_text(header("bad.xml"))
    with pytest.raises(MalformedXml) as info:
        parse_resource(h)
    assert info.value.line == 3 and str(info.value).startswith(str(tmp_path / "bad.xml") + ":3:")


def test_toy_round_trip(toy_dir, toy):
    g = parse_resource(toy_dir / "header.xml")
    assert g == toy


def test_nested_fs_names_annotation(tmp_path):
    body = ('<region xml:id="r0" anchors="0 1"/><node xml:id="n1"><link targets="r0"/></node>'
            '<a xml:id="a7" label="w" ref="n1" as="toy"><fs><f name="x">'
            '<fs><f name="y" value="1"/></fs></f></fs></a>')
    with pytest.raises(NestedFeatureStructure, match="a7"):
        parse_resource(resource(tmp_path, "ab", {"t.xml": body}))


def test_unknown_element_in_fs_rejected(tmp_path):
    body = ('<node xml:id="n1"/><a xml:id="a1" label="w" ref="n1" as="toy">'
            '<fs><g name="x"/></fs></a>')
    with pytest.raises(GrafFormatError, match="<g>"):
        parse_resource(resource(tmp_path, "ab", {"t.xml": body}))


def test_unknown_attributes_ignored(tmp_path):
    body = ('<region xml:id="r0" anchors="0 1" colour="red"/>'
            '<node xml:id="n1" weight="3"><link targets="r0"/></node>')
    g = parse_resource(resource(tmp_path, "ab", {"t.xml": body}))
    assert [r.id for r in g.regions] == ["r0"] and len(g.nodes) == 1


def test_two_files_merge(tmp_path):
    base = ('<region xml:id="r0" anchors="0 2"/><node xml:id="n1"><link targets="r0"/></node>'
            '<a xml:id="a1" label="w" ref="n1" as="toy"><fs><f name="pos" value="n"/></fs></a>')
    addon = '<a xml:id="b1" label="w" ref="n1" as="extra"><fs><f name="gloss" value="g"/></fs></a>'
    g = parse_resource(resource(tmp_path, "ab", {"base.xml": base, "addon.xml": addon}))
    assert len(g.nodes) == 1 and len(g.annotations) == 2
    assert g.annotations[1].target == "n1"


def test_cross_file_redeclaration_is_error(tmp_path):
    one = '<node xml:id="n1"/>'
    with pytest.raises(DuplicateId, match="n1"):
        parse_resource(resource(tmp_path, "ab", {"one.xml": one, "two.xml": one}))


def test_dangling_annotation(tmp_path):
    body = '<a xml:id="a1" label="w" ref="ghost" as="toy"><fs><f name="x" value="1"/></fs></a>'
    with pytest.raises(DanglingReference, match="ghost"):
        parse_resource(resource(tmp_path, "ab", {"t.xml": body}))


def test_anchor_out_of_bounds(tmp_path):
    with pytest.raises(AnchorOutOfBounds, match="r0"):
        parse_resource(resource(tmp_path, "ab", {"t.xml": '<region xml:id="r0" anchors="0 9"/>'}))


def test_anchors_are_characters(tmp_path):
    body = '<region xml:id="r0" anchors="0 4"/>'
    g = parse_resource(resource(tmp_path, "שמים", {"t.xml": body}))
    assert g.regions[0].end == 4


@pytest.mark.parametrize("split", [False, True])
def test_parse_is_deterministic(tmp_path, toy, split):
    write_resource(toy, tmp_path / "r", split_spaces=split)
    a = parse_resource(tmp_path / "r" / "header.xml")
    b = parse_resource(tmp_path / "r" / "header.xml")
    assert a == b and validate(a) == []


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_write_then_parse_random(tmp_path_factory, seed):
    g = random_graph(seed, max_nodes=80, max_features=300)
    d = tmp_path_factory.mktemp("r")
    write_resource(g, d)
    assert parse_resource(d / "header.xml") == g
