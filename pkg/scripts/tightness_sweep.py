"""Barrier-free exponent gap as a function of the barrier word length."""

import argparse

from contractlab import barriers as B
from contractlab import census as Cn
from contractlab import groups as G


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=8)
    ap.add_argument("--max-len", type=int, default=6)
    args = ap.parse_args()
    m = G.build_model(G.FreeProduct(G.FreeGroup(2), G.FreeGroup(2)))
    print("word,length,e_V,e_G,gap")
    for k in range(1, args.max_len + 1):
        word = ".".join(("a", "c")[i % 2] for i in range(k))
        q = B.BarrierQuery(0, 0, G.parse(m, word))
        res = Cn.tightness_gap(m, args.n_max, B.enumerate_V(m, args.n_max, q))
        print(f"{word},{k},{res.e_A.value:.6f},{res.e_G.value:.6f},{res.gap:.3e}")


if __name__ == "__main__":
    main()
