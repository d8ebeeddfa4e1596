"""Admissibility, fellow-travel offset and quasi-geodesic constant of the
two-axis family a^D b^D a^D ... in F2 as D grows."""

import argparse

from contractlab import groups as G
from contractlab import paths as P
from contractlab.cli import two_axis_decomposition


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d-max", type=int, default=12)
    ap.add_argument("--tau", type=int, default=2)
    args = ap.parse_args()
    m = G.build_model(G.FreeGroup(2))
    a, b = G.element(m, "a"), G.element(m, "b")
    print("D,admissible,fellow_travel,quasi_geodesic")
    for D in range(1, args.d_max + 1):
        dec = two_axis_decomposition(m, a, b, D, args.tau)
        rep = P.check_admissible(m, dec)
        eps = P.fellow_travel_offset(m, m.normalize(dec.path), dec)
        print(f"{D},{rep.verdict},{eps},{P.quasi_geodesic_constant(m, dec.path)}")


if __name__ == "__main__":
    main()
