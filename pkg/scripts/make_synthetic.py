"""Write demo GrAF resources: the toy sentence, a random corpus, or a bulk corpus."""
import argparse
import json

from laffab.graf import write_resource
from laffab.synth import TOY_PHRASE, TOY_POS, TOY_SENTENCE, bulk_graph, random_graph, toy_graph


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("kind", choices=["toy", "random", "bulk"])
    ap.add_argument("out")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--nodes", type=int, default=100_000)
    ap.add_argument("--features", type=int, default=1_000_000)
    ap.add_argument("--split-spaces", action="store_true",
                    help="one annotation file per annotation space")
    args = ap.parse_args()

    if args.kind == "toy":
        g = toy_graph()
    elif args.kind == "random":
        g = random_graph(args.seed)
    else:
        g = bulk_graph(args.nodes, args.features, args.seed)
    header = write_resource(g, args.out, split_spaces=args.split_spaces)
    if args.kind == "toy":
        cfg = {"sentence": str(TOY_SENTENCE), "constituents": [str(TOY_PHRASE)],
               "pos": str(TOY_POS)}
        with open(f"{args.out}/trees.json", "w", encoding="utf-8") as fh:
            json.dump(cfg, fh, indent=2)
    print(header)


if __name__ == "__main__":
    main()
