"""laffab command line.

Exit status: 0 success, 1 analysis error, 2 input or format error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import analysis, fragments, treebank
from .compiler import Manifest, compile_graph, load, resolve_bundle, save
from .errors import InconsistentHierarchy, InputError, InvalidGraph, LafError
from .graf import parse_resource

log = logging.getLogger("laffab")


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_compile(args) -> int:
    g = parse_resource(args.header)
    c = compile_graph(g)
    out = resolve_bundle(args.out)
    save(c, out)
    print(f"nodes {c.n_nodes}, edges {c.n_edges}, features {c.n_features}")
    log.info("bundle written to %s", out)
    return 0


def cmd_info(args) -> int:
    directory = resolve_bundle(args.bundle)
    m = Manifest.read(directory)
    print(m.version)
    for k, v in m.counts.items():
        print(f"{k} {v}")
    c = load(directory, [])
    for key, kind in c.key_list:
        print(f"feature {key} {kind}")
    return 0


def cmd_freq(args) -> int:
    pattern = analysis.Pattern.parse(args.pattern, args.where, args.mother_edge,
                                     args.mother_dir)
    keys = pattern.keys + ([args.group_by] if args.group_by else [])
    c = load(resolve_bundle(args.bundle), keys)
    counts, groups = analysis.count_patterns(c, pattern, args.group_by)
    table = analysis.freq_table(counts, groups, top=args.top)
    _emit(table.to_tsv(), args.out)
    return 0


def cmd_cooccur(args) -> int:
    c = load(resolve_bundle(args.bundle), [args.items, args.docs])
    m = analysis.cooccurrence(c, args.items, args.docs)
    if args.csv:
        Path(args.csv).write_text(m.to_csv(), encoding="utf-8")
    if args.gexf:
        Path(args.gexf).write_text(m.to_gexf(), encoding="utf-8")
    print(f"items {len(m.items)}, documents {len(m.documents)}, "
          f"edges {int((m.similarity() > 0).sum()) // 2}")
    return 0


def cmd_trees(args) -> int:
    cfg = treebank.TreeConfig.load(args.cfg)
    if args.strict:
        cfg.strict = True
    required = [k for k in cfg.keys if k not in cfg.constituents]
    c = load(resolve_bundle(args.bundle), required, optional=cfg.constituents)
    errors: list = []
    trees = treebank.build_trees(c, cfg, errors)
    for exc in errors:
        print(f"warning: skipped {exc}", file=sys.stderr)
    odd = sorted({n.label for t in trees for n in t.root.subtrees()
                  if n.label not in treebank.CATEGORIES | treebank.POS_TAGS})
    if odd:
        print(f"warning: labels outside the standard inventory: {' '.join(odd)}",
              file=sys.stderr)
    if args.format == "export":
        text = treebank.write_export(trees)
    else:
        text = treebank.write_discbracket(trees)
    _emit(text, args.out)
    return 0


def cmd_fragments(args) -> int:
    trees = treebank.read_trees(args.treefile)
    table = fragments.extract_corpus(trees, lexical=not args.no_lexical)
    _emit(table.to_tsv(), args.out)
    return 0


def cmd_score(args) -> int:
    gold = treebank.read_trees(args.gold)
    pred = treebank.read_trees(args.pred)
    s = treebank.score(gold, pred, include_preterminals=args.include_preterminals,
                       include_root=not args.exclude_root)
    print(s.line())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="laffab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("compile", help="parse a GrAF resource and write a bundle")
    s.add_argument("header")
    s.add_argument("-o", "--out", required=True)
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("info", help="summarise a bundle")
    s.add_argument("bundle")
    s.set_defaults(func=cmd_info)

    s = sub.add_parser("freq", help="frequency table of feature patterns")
    s.add_argument("bundle")
    s.add_argument("--pattern", required=True,
                   help="comma-separated keys space:label.name; prefix ^ reads the mother")
    s.add_argument("--group-by", help="key whose value partitions the corpus")
    s.add_argument("--top", type=int)
    s.add_argument("--where", action="append", default=[],
                   help="key=value filter on counted nodes; value* matches a prefix")
    s.add_argument("--mother-edge", help="only follow edges carrying this key to the mother")
    s.add_argument("--mother-dir", choices=["in", "out"], default="in",
                   help="in: edges run mother to daughter (default); out: the reverse")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_freq)

    s = sub.add_parser("cooccur", help="item presence per document, CSV and GEXF")
    s.add_argument("bundle")
    s.add_argument("--items", required=True)
    s.add_argument("--docs", required=True)
    s.add_argument("--csv")
    s.add_argument("--gexf")
    s.set_defaults(func=cmd_cooccur)

    s = sub.add_parser("trees", help="export syntactic trees")
    s.add_argument("bundle")
    s.add_argument("--cfg", required=True, help="JSON tree config")
    s.add_argument("--format", choices=["discbracket", "export"], default="discbracket")
    s.add_argument("--strict", action="store_true")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_trees)

    s = sub.add_parser("fragments", help="maximal common fragments with counts")
    s.add_argument("treefile")
    s.add_argument("--no-lexical", action="store_true", help="never match word forms")
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_fragments)

    s = sub.add_parser("score", help="labelled bracketing scores")
    s.add_argument("gold")
    s.add_argument("pred")
    s.add_argument("--include-preterminals", action="store_true")
    s.add_argument("--exclude-root", action="store_true")
    s.set_defaults(func=cmd_score)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, InvalidGraph, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InconsistentHierarchy as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except LafError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
