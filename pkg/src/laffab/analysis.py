"""Frequency tables of feature patterns and presence/absence cooccurrence."""
from __future__ import annotations

import csv
import io
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

import numpy as np

from .compiler import CompiledCorpus
from .fabric import Features, neighbourhood, sorted_nodes
from .model import FeatureKey

ARROW = "⟿"
_CENT = Decimal("0.01")


def percentage(count: int, total: int) -> Decimal:
    """100 * count / total rounded half-up to two decimals."""
    if total == 0:
        return Decimal("0.00")
    return (Decimal(100 * count) / Decimal(total)).quantize(_CENT, rounding=ROUND_HALF_UP)


@dataclass
class FreqRow:
    pattern: str
    counts: dict[str, int]
    percentages: dict[str, Decimal]
    total: int
    total_percentage: Decimal


@dataclass
class FreqTable:
    groups: list[str]
    rows: list[FreqRow]
    totals: FreqRow
    grand_totals: dict[str, int]
    grand_total: int

    def to_tsv(self) -> str:
        header = ["pattern"]
        for g in self.groups:
            header += [g, "%"]
        header += ["Totals", "%"]
        lines = ["\t".join(header)]
        for row in self.rows + [self.totals]:
            cells = [row.pattern]
            for g in self.groups:
                cells += [str(row.counts.get(g, 0)), f"{row.percentages.get(g, _ZERO)}"]
            cells += [str(row.total), f"{row.total_percentage}"]
            lines.append("\t".join(cells))
        return "\n".join(lines) + "\n"


_ZERO = Decimal("0.00")


def freq_table(counts: Mapping[str, Mapping[str, int]], groups: Sequence[str] | None = None,
               top: int | None = None,
               grand_totals: Mapping[str, int] | None = None) -> FreqTable:
    """Tabulate pattern counts per group.

    Percentages are relative to each group's grand total, taken over every
    pattern in `counts` (or from `grand_totals` when the full distribution
    is not at hand), so a `top` cut does not renormalise.
    """
    if groups is None:
        groups = list(dict.fromkeys(g for per in counts.values() for g in per))
    groups = list(groups)
    grand = {g: sum(per.get(g, 0) for per in counts.values()) for g in groups}
    if grand_totals is not None:
        grand.update(grand_totals)
    overall = sum(grand[g] for g in groups)

    def row(pattern, per):
        per = {g: per.get(g, 0) for g in groups}
        total = sum(per.values())
        return FreqRow(pattern, per, {g: percentage(per[g], grand[g]) for g in groups},
                       total, percentage(total, overall))

    rows = [row(p, per) for p, per in counts.items()]
    rows.sort(key=lambda r: (-r.total, r.pattern))
    if top is not None:
        rows = rows[:top]
    sums = {g: sum(r.counts[g] for r in rows) for g in groups}
    return FreqTable(groups, rows, row("Totals", sums), grand, overall)


@dataclass
class Pattern:
    """What to count: feature values of a unit, some read off its mother.

    terms: (key, from_mother) pairs; the row key joins their values with ⟿.
    where: (key, value) filters on the unit; a value ending in * is a prefix.
    mother_edge: mother = first neighbour along edges carrying this key
        (any edge when None).
    mother_direction: "in" when edges point from mother to daughter, "out"
        when they point from daughter to mother.
    """

    terms: list[tuple[FeatureKey, bool]]
    where: list[tuple[FeatureKey, str]] = field(default_factory=list)
    mother_edge: FeatureKey | None = None
    mother_direction: str = "in"

    @classmethod
    def parse(cls, spec: str, where: Sequence[str] = (), mother_edge: str | None = None,
              mother_direction: str = "in"):
        """``^space:clause.tense,space:clause.tense`` - a leading ^ reads the mother."""
        terms = []
        for part in spec.split(","):
            part = part.strip()
            mother = part.startswith("^")
            terms.append((FeatureKey.parse(part.lstrip("^")), mother))
        conds = []
        for w in where:
            key, eq, value = w.partition("=")
            if not eq:
                raise ValueError(f"filter must look like key=value, got {w!r}")
            conds.append((FeatureKey.parse(key), value))
        if mother_direction not in ("in", "out"):
            raise ValueError(f"mother direction must be in or out, got {mother_direction!r}")
        return cls(terms, conds, FeatureKey.parse(mother_edge) if mother_edge else None,
                   mother_direction)

    @property
    def keys(self) -> list[FeatureKey]:
        out = [k for k, _ in self.terms] + [k for k, _ in self.where]
        if self.mother_edge:
            out.append(self.mother_edge)
        return list(dict.fromkeys(out))


def _accepts(value: str | None, want: str) -> bool:
    if value is None:
        return False
    if want.endswith("*"):
        return value.startswith(want[:-1])
    return value == want


class _Grouper:
    """Assigns a node to the innermost node carrying the group key that spans it."""

    def __init__(self, c: CompiledCorpus, key):
        self.c, self.key = c, FeatureKey.parse(key)
        table = c.feature(self.key)
        lo, hi, has = c.spans
        docs = [n for n in sorted_nodes(c).tolist() if has[n] and table.get(n) is not None]
        self.table = table
        self.lo = lo[docs]
        self.hi = hi[docs]
        self.values = [table.get(n) for n in docs]

    def __call__(self, n: int) -> str | None:
        own = self.table.get(n)
        if own is not None:
            return own
        lo, hi, has = self.c.spans
        if not has[n] or not len(self.values):
            return None
        inside = np.flatnonzero((self.lo <= lo[n]) & (self.hi >= hi[n]))
        if not len(inside):
            return None
        best = inside[np.argmin(self.hi[inside] - self.lo[inside])]
        return self.values[int(best)]


def count_patterns(c: CompiledCorpus, pattern: Pattern,
                   group_by=None) -> tuple[dict[str, Counter], list[str]]:
    """Counts per pattern key and group, plus groups in order of appearance."""
    grouper = _Grouper(c, group_by) if group_by is not None else None
    edge_filter = (pattern.mother_edge, None) if pattern.mother_edge else None
    own_terms = [k for k, m in pattern.terms if not m]
    needs_mother = any(m for _, m in pattern.terms)
    counts: dict[str, Counter] = {}
    groups: list[str] = []
    for key in pattern.keys:
        c.feature(key)
    for n in sorted_nodes(c).tolist():
        f = Features(c, n)
        if own_terms and f.get(own_terms[0]) is None:
            continue
        if not all(_accepts(f.get(k), v) for k, v in pattern.where):
            continue
        mother = None
        if needs_mother:
            nbrs = neighbourhood(c, n, pattern.mother_direction, edge_filter)
            if not nbrs:
                continue
            mother = Features(c, nbrs[0][1])
        values = [(mother if m else f).get(k) for k, m in pattern.terms]
        if any(v is None for v in values):
            continue
        group = grouper(n) if grouper else "all"
        if group is None:
            continue
        if group not in groups:
            groups.append(group)
        counts.setdefault(ARROW.join(values), Counter())[group] += 1
    return counts, groups


@dataclass
class CooccurrenceMatrix:
    items: list[str]
    documents: list[str]
    presence: np.ndarray  # bool, items x documents

    def similarity(self) -> np.ndarray:
        """Shared present items per document pair; zero diagonal."""
        p = self.presence.astype(np.int64)
        sim = p.T @ p
        np.fill_diagonal(sim, 0)
        return sim

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["item", *self.documents])
        for item, row in zip(self.items, self.presence.astype(int).tolist()):
            w.writerow([item, *row])
        return buf.getvalue()

    def to_gexf(self) -> str:
        """Undirected GEXF 1.2 graph over documents; weight = shared items."""
        gexf = ET.Element("gexf", {"xmlns": "http://www.gexf.net/1.2draft", "version": "1.2"})
        graph = ET.SubElement(gexf, "graph", {"mode": "static",
                                              "defaultedgetype": "undirected"})
        nodes = ET.SubElement(graph, "nodes")
        for i, doc in enumerate(self.documents):
            ET.SubElement(nodes, "node", {"id": str(i), "label": doc})
        edges = ET.SubElement(graph, "edges")
        sim = self.similarity()
        k = 0
        for i in range(len(self.documents)):
            for j in range(i + 1, len(self.documents)):
                if sim[i, j]:
                    ET.SubElement(edges, "edge", {"id": str(k), "source": str(i),
                                                  "target": str(j), "weight": str(sim[i, j])})
                    k += 1
        ET.indent(gexf)
        return ('<?xml version="1.0" encoding="UTF-8"?>\n'
                + ET.tostring(gexf, encoding="unicode") + "\n")


def cooccurrence(c: CompiledCorpus, item_key, doc_key) -> CooccurrenceMatrix:
    """Presence of item values (rows, sorted) in documents (columns, walk order).

    An item node belongs to a document when its anchor span lies within the
    document node's span.  Document nodes sharing a value are merged.
    """
    items_t = c.feature(item_key)
    docs_t = c.feature(doc_key)
    lo, hi, has = c.spans
    order = sorted_nodes(c).tolist()
    documents: list[str] = []
    doc_spans: list[tuple[int, int, int]] = []
    for n in order:
        v = docs_t.get(n)
        if v is not None and has[n]:
            if v not in documents:
                documents.append(v)
            doc_spans.append((int(lo[n]), int(hi[n]), documents.index(v)))
    found: dict[str, set[int]] = {}
    dlo = np.array([d[0] for d in doc_spans], np.int64)
    dhi = np.array([d[1] for d in doc_spans], np.int64)
    dcol = np.array([d[2] for d in doc_spans], np.int64)
    for n in order:
        v = items_t.get(n)
        if v is None or not has[n]:
            continue
        cols = dcol[(dlo <= lo[n]) & (dhi >= hi[n])]
        found.setdefault(v, set()).update(cols.tolist())
    items = sorted(found)
    presence = np.zeros((len(items), len(documents)), bool)
    for i, item in enumerate(items):
        presence[i, sorted(found[item])] = True
    return CooccurrenceMatrix(items, documents, presence)
