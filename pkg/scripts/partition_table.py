"""Partition functions across beta: closed form, truncated trace and the gap.

    python scripts/partition_table.py --beta 1.5,2,3,5
"""
import argparse
import math

from bostconnes import thermo
from bostconnes.bcdata import Datum
from bostconnes.errors import DivergentParameter
from bostconnes.qsmrep import TruncSpec

CASES = [
    (Datum("qmodz"), TruncSpec(10 ** 5)),
    (Datum("weil", 4), TruncSpec.for_datum(Datum("weil", 4), 200, 60)),
    (Datum("weil", 9), TruncSpec.for_datum(Datum("weil", 9), 200, 60)),
    (Datum("rank_two"), TruncSpec(10 ** 4)),
    (Datum("alg_num_model"), TruncSpec.for_datum(Datum("alg_num_model"), 8, 30, 3)),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--beta", default="1.2,1.6,2,3,5")
    args = ap.parse_args()
    betas = [float(b) for b in args.beta.split(",")]
    print(f"{'datum':28s} {'beta':>5s} {'closed':>20s} {'tail':>9s} {'trace':>20s} {'closed-trace':>12s}")
    for d, tr in CASES:
        R = tr.R if thermo.case_of(d) == "infinite" else None
        for beta in betas:
            try:
                c = thermo.partition_closed(d, beta, R=R)
            except DivergentParameter:
                print(f"{str(d):28s} {beta:5.2f} {'divergent':>20s}")
                continue
            t = thermo.partition_trace(d, tr, beta, closed=c)
            print(f"{str(d):28s} {beta:5.2f} {c.value:20.15f} {c.tail_bound:9.1e} {t.value:20.15f} "
                  f"{c.value - t.value:12.3e}")
    # the two closed forms for the Weil case should agree to within their tails
    for beta in (2, 3, 5):
        a = thermo.partition_closed(Datum("weil", 4), beta)
        b = thermo.partition_closed(Datum("weil", 4), beta, form="polylog")
        print(f"weil q=4 beta={beta}: geometric - polylog = {a.value - b.value:.2e} "
              f"(tails {a.tail_bound:.1e}, {b.tail_bound:.1e})")
    print(f"zeta(2) - pi^2/6 = {thermo.riemann_zeta(2).value - math.pi ** 2 / 6:.1e}")


if __name__ == "__main__":
    main()
