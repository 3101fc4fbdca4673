"""How the trace-based Gibbs state approaches the closed form as n_max grows."""
import cmath
import math
from fractions import Fraction

from bostconnes import qsmrep, thermo
from bostconnes.bcdata import Datum, Embedding, PairElem, QmodZ
from bostconnes.qsmrep import S, TruncSpec, word

iota = Embedding(24)
cases = [
    (Datum("qmodz"), QmodZ(Fraction(1, 3)), 2.0),
    (Datum("qmodz"), QmodZ(Fraction(1, 8)), 1.5),
    (Datum("rank_two"), PairElem(QmodZ(Fraction(1, 3)), QmodZ(Fraction(1, 4))), 1.0),
]

for d, s, beta in cases:
    closed = thermo.gibbs_closed(d, s, beta, iota)
    print(f"{d} s={s} beta={beta}: closed {closed.real:+.12f}{closed.imag:+.12f}i")
    for n_max in (10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5):
        rep = qsmrep.Representation(d, iota, TruncSpec(n_max))
        t = qsmrep.gibbs_trace(rep, word(S(s)), beta)
        print(f"  n_max={n_max:>7d}  |trace - closed| = {abs(t - closed):.3e}")
    print(f"  ground state {thermo.ground_state(d, s, iota):.6f}, "
          f"beta=40 gap {abs(thermo.gibbs_closed(d, s, 40.0, iota) - thermo.ground_state(d, s, iota)):.1e}")
