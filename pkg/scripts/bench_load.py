"""Time parse+compile of a synthetic GrAF resource against loading its bundle."""
import argparse
import statistics
import tempfile
import time
from pathlib import Path

from laffab.compiler import compile_graph, load, save
from laffab.graf import parse_resource, write_resource
from laffab.synth import bulk_graph


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=100_000)
    ap.add_argument("--features", type=int, default=1_000_000)
    ap.add_argument("--runs", type=int, default=5)
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        write_resource(bulk_graph(args.nodes, args.features), tmp / "src")
        xml = sum(p.stat().st_size for p in (tmp / "src").iterdir())
        build, fetch = [], []
        for run in range(args.runs):
            t0 = time.perf_counter()
            c = compile_graph(parse_resource(tmp / "src" / "header.xml"))
            build.append(time.perf_counter() - t0)
            if run == 0:
                save(c, tmp / "bundle")
            del c
            t0 = time.perf_counter()
            load(tmp / "bundle")
            fetch.append(time.perf_counter() - t0)
        size = sum(p.stat().st_size for p in (tmp / "bundle").iterdir())
    b, f = statistics.median(build), statistics.median(fetch)
    print(f"source {xml / 1e6:.1f} MB, bundle {size / 1e6:.1f} MB")
    print(f"parse+compile median {b:.2f} s, load median {f:.3f} s, speed-up {b / f:.0f}x")


if __name__ == "__main__":
    main()
