"""Compare classify_raag with the contraction estimate on every cyclically
reduced element of a RAAG up to a given length."""

import argparse
import math

from contractlab import geometry as Geo
from contractlab import groups as G

GRAPHS = {
    "empty": G.RAAG(("a", "b"), ()),
    "square": G.RAAG(("a", "b", "c", "d"), (("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"))),
    "path4": G.RAAG(("a", "b", "c", "d"), (("a", "b"), ("b", "c"), ("c", "d"))),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--graph", choices=sorted(GRAPHS), default="empty")
    ap.add_argument("--length", type=int, default=3)
    ap.add_argument("--radius", type=int, default=4)
    args = ap.parse_args()
    m = G.build_model(GRAPHS[args.graph])
    budget = Geo.Budget(args.radius)
    print("element,classification,estimate")
    tally = {}
    for g in G.ball(m, args.length):
        if not g or len(m.cyclic_reduce(g)[0]) != len(g):
            continue
        cls = G.classify_raag(m, g)
        est = Geo.estimate_contraction_constant(m, Geo.axis_for_radius(m, g, args.radius).base, budget).value
        tally.setdefault(cls, []).append(est)
        print(f"{G.fmt(m, g)},{cls},{est}")
    for cls, vals in sorted(tally.items()):
        finite = sum(math.isfinite(v) for v in vals)
        print(f"# {cls}: {len(vals)} elements, {finite} with a finite estimate")


if __name__ == "__main__":
    main()
