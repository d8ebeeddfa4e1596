"""Projection offsets and quasi-tree checks for families of translates of an
F2 axis, sizes 2..k."""

import argparse
import itertools

from contractlab import bbf
from contractlab import geometry as Geo
from contractlab import groups as G

COSETS = ["", "b", "B", "a.b", "A.B", "b.a.b", "B.a.B"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-size", type=int, default=len(COSETS))
    ap.add_argument("--K", type=float, default=2)
    ap.add_argument("--N", type=float, default=4)
    args = ap.parse_args()
    m = G.build_model(G.FreeGroup(2))
    base = Geo.build_axis(m, G.element(m, "a"), 6).base
    print("size,edges,bottleneck,max_distortion,max_offset")
    for k in range(2, args.max_size + 1):
        fam = bbf.ProjectionFamily(m, [base.translate(m, G.element(m, c)) if c else base for c in COSETS[:k]])
        pk = bbf.build_projection_complex(fam, args.K)
        qts = bbf.build_quasi_tree_of_spaces(fam, args.K, args.N)
        dist = max(bbf.member_distortion(qts, m, i) for i in range(k))
        off = max(bbf.projection_offset(qts, fam, y, z) for y, z in itertools.permutations(range(k), 2))
        print(f"{k},{len(pk.edges)},{bbf.bottleneck_certify(pk, 1).passed},{dist},{off}")


if __name__ == "__main__":
    main()
