"""Exact desk-scale models of Bost-Connes data (Sigma, sigma_n).

Every group is written additively: the group law is ``+`` and the
endomorphism sigma_n is multiplication by n.  For the multiplicative
models (roots of unity, Weil numbers) the additive coordinate of a root
of unity zeta = exp(2 pi i x) is x in Q/Z.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigError, KindMismatch, LevelTooSmall, NotInImage

Rat = Fraction


def as_fraction(x) -> Fraction:
    """Parse ints, Fractions and "num/den" strings exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot read {x!r} as an exact rational")


def frac_str(x: Fraction) -> str:
    return str(Fraction(x))


# ---------------------------------------------------------------- elements


@dataclass(frozen=True, order=True)
class QmodZ:
    """num/den in Q/Z, stored reduced in [0, 1)."""

    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_fraction(self.value) % 1)

    @property
    def num(self) -> int:
        return self.value.numerator

    @property
    def den(self) -> int:
        return self.value.denominator

    def __add__(self, other):
        return QmodZ(self.value + other.value)

    def __neg__(self):
        return QmodZ(-self.value)

    def __sub__(self, other):
        return QmodZ(self.value - other.value)

    def scale(self, n: int) -> "QmodZ":
        return QmodZ(self.value * n)

    def __str__(self):
        return frac_str(self.value)


@dataclass(frozen=True, order=True)
class HalfIntQmod2Z:
    """An element of Q/2Z, stored in [0, 2)."""

    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_fraction(self.value) % 2)

    @property
    def num(self) -> int:
        return self.value.numerator

    @property
    def den(self) -> int:
        return self.value.denominator

    def __add__(self, other):
        return HalfIntQmod2Z(self.value + other.value)

    def __neg__(self):
        return HalfIntQmod2Z(-self.value)

    def scale(self, n: int) -> "HalfIntQmod2Z":
        return HalfIntQmod2Z(self.value * n)

    def __str__(self):
        return frac_str(self.value)


@dataclass(frozen=True, order=True)
class WeilCycElem:
    """zeta * q^(m/2): a cyclotomic Weil q-number of weight m."""

    zeta: QmodZ
    weight: int
    q: int

    def __add__(self, other):
        _same_base(self, other)
        return WeilCycElem(self.zeta + other.zeta, self.weight + other.weight, self.q)

    def __neg__(self):
        return WeilCycElem(-self.zeta, -self.weight, self.q)

    def scale(self, n: int) -> "WeilCycElem":
        return WeilCycElem(self.zeta.scale(n), n * self.weight, self.q)

    def __str__(self):
        return f"({self.zeta}, m={self.weight})"


@dataclass(frozen=True, order=True)
class AlgNumModelElem:
    """zeta * prod lambda_r^(e_r) with rational exponents e_r."""

    zeta: QmodZ
    free: tuple

    def __post_init__(self):
        object.__setattr__(self, "free", tuple(as_fraction(e) for e in self.free))

    def __add__(self, other):
        if len(self.free) != len(other.free):
            raise KindMismatch("exponent vectors of different length")
        return AlgNumModelElem(self.zeta + other.zeta,
                               tuple(a + b for a, b in zip(self.free, other.free)))

    def __neg__(self):
        return AlgNumModelElem(-self.zeta, tuple(-e for e in self.free))

    def scale(self, n: int) -> "AlgNumModelElem":
        return AlgNumModelElem(self.zeta.scale(n), tuple(n * e for e in self.free))

    def __str__(self):
        return f"({self.zeta}; {', '.join(frac_str(e) for e in self.free)})"


@dataclass(frozen=True, order=True)
class WeilHatElem:
    zeta: QmodZ
    r: HalfIntQmod2Z
    q: int

    def __add__(self, other):
        _same_base(self, other)
        return WeilHatElem(self.zeta + other.zeta, self.r + other.r, self.q)

    def __neg__(self):
        return WeilHatElem(-self.zeta, -self.r, self.q)

    def scale(self, n: int) -> "WeilHatElem":
        return WeilHatElem(self.zeta.scale(n), self.r.scale(n), self.q)

    def __str__(self):
        return f"({self.zeta}, r={self.r})"


@dataclass(frozen=True, order=True)
class GermElem:
    """An element of (Q, +); sigma_n is the automorphism x -> n x."""

    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_fraction(self.value))

    def __add__(self, other):
        return GermElem(self.value + other.value)

    def __neg__(self):
        return GermElem(-self.value)

    def scale(self, n: int) -> "GermElem":
        return GermElem(self.value * n)

    def __str__(self):
        return frac_str(self.value)


@dataclass(frozen=True, order=True)
class PairElem:
    a: QmodZ
    b: QmodZ

    def __add__(self, other):
        return PairElem(self.a + other.a, self.b + other.b)

    def __neg__(self):
        return PairElem(-self.a, -self.b)

    def scale(self, n: int) -> "PairElem":
        return PairElem(self.a.scale(n), self.b.scale(n))

    def __str__(self):
        return f"({self.a}, {self.b})"


def _same_base(x, y):
    if x.q != y.q:
        raise KindMismatch(f"Weil numbers over different q: {x.q} vs {y.q}")


# ---------------------------------------------------------------- prime powers


def factor(n: int) -> dict:
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def prime_power(q: int) -> tuple:
    """Return (p, r) with q = p^r, or raise ConfigError."""
    if not isinstance(q, int) or q < 2:
        raise ConfigError(f"q={q!r} is not a prime power")
    f = factor(q)
    if len(f) != 1:
        raise ConfigError(f"q={q} is not a prime power")
    (p, r), = f.items()
    return p, r


def is_even_power(q: int) -> bool:
    return prime_power(q)[1] % 2 == 0


def first_primes(k: int) -> list:
    out, c = [], 2
    while len(out) < k:
        if all(c % p for p in out if p * p <= c):
            out.append(c)
        c += 1
    return out


# ---------------------------------------------------------------- datum

KINDS = ("qmodz", "pair_switch", "alg_num_model", "weil_zero", "weil",
         "weil_hat", "germ_alpha_one", "rank_two")

_ALIASES = {
    "qmodz": "qmodz", "bc": "qmodz",
    "pairswitch": "pair_switch",
    "algnummodel": "alg_num_model", "algnum": "alg_num_model",
    "weilzero": "weil_zero",
    "weil": "weil",
    "weilhat": "weil_hat",
    "germalphaone": "germ_alpha_one", "germ": "germ_alpha_one",
    "ranktwo": "rank_two",
}

# alpha(n) = n ** _ALPHA_POWER[kind]
_ALPHA_POWER = {"qmodz": 1, "pair_switch": 2, "alg_num_model": 1, "weil_zero": 1,
                "weil": 1, "weil_hat": 2, "germ_alpha_one": 0, "rank_two": 2}

_ELEM_TYPE = {"qmodz": QmodZ, "weil_zero": QmodZ, "pair_switch": PairElem,
              "rank_two": PairElem, "alg_num_model": AlgNumModelElem,
              "weil": WeilCycElem, "weil_hat": WeilHatElem, "germ_alpha_one": GermElem}


def normalize_kind(kind: str) -> str:
    key = kind.replace("_", "").replace("-", "").lower()
    if key not in _ALIASES:
        raise ConfigError(f"unknown datum kind {kind!r}")
    return _ALIASES[key]


@dataclass(frozen=True)
class Datum:
    kind: str
    q: int | None = None
    galois_level: int = 24
    generators: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        if self.galois_level < 1:
            raise ConfigError("galois_level must be positive")
        if self.kind in ("weil", "weil_hat", "weil_zero"):
            if self.q is None:
                raise ConfigError(f"{self.kind} needs a base q")
            prime_power(self.q)
        gens = tuple(_read_generator(g) for g in self.generators)
        if self.kind == "alg_num_model":
            if not gens:
                gens = tuple(Fraction(p) for p in first_primes(4))
            if any(g <= 1 for g in gens):
                raise ConfigError("progression generators must exceed 1")
        object.__setattr__(self, "generators", gens)

    @property
    def rank(self) -> int:
        """Number of free progression generators."""
        if self.kind == "alg_num_model":
            return len(self.generators)
        return 1 if self.kind == "weil" else 0

    @property
    def concrete(self) -> bool:
        return _ALPHA_POWER[self.kind] > 0

    @property
    def divisible_norms(self) -> bool:
        # N(Sigma) is divisible for the algebraic-number model, so a missing
        # root in a finite exponent lattice is a truncation artifact.
        return self.kind == "alg_num_model"

    @property
    def diagonal_rank_two(self) -> bool:
        return self.kind in ("weil_hat", "pair_switch", "rank_two")

    def __str__(self):
        extra = f", q={self.q}" if self.q is not None else ""
        return f"{self.kind}(N={self.galois_level}{extra})"


def _read_generator(g):
    if isinstance(g, float):
        return g
    return as_fraction(g)


def element_type(datum: Datum):
    return _ELEM_TYPE[datum.kind]


def check_kind(datum: Datum, s) -> None:
    if not isinstance(s, _ELEM_TYPE[datum.kind]):
        raise KindMismatch(f"{type(s).__name__} is not an element of {datum.kind}")
    if datum.kind in ("weil", "weil_hat") and s.q != datum.q:
        raise KindMismatch(f"element over q={s.q} used with datum q={datum.q}")
    if datum.kind == "alg_num_model" and len(s.free) != len(datum.generators):
        raise KindMismatch("exponent vector length does not match generators")


def identity(datum: Datum):
    k = datum.kind
    if k in ("qmodz", "weil_zero"):
        return QmodZ(0)
    if k in ("pair_switch", "rank_two"):
        return PairElem(QmodZ(0), QmodZ(0))
    if k == "alg_num_model":
        return AlgNumModelElem(QmodZ(0), (0,) * len(datum.generators))
    if k == "weil":
        return WeilCycElem(QmodZ(0), 0, datum.q)
    if k == "weil_hat":
        return WeilHatElem(QmodZ(0), HalfIntQmod2Z(0), datum.q)
    return GermElem(0)


def sigma_apply(datum: Datum, n: int, s):
    if n < 1:
        raise ValueError("n must be positive")
    check_kind(datum, s)
    return s.scale(n)


def alpha_of(datum: Datum, n: int) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    return n ** _ALPHA_POWER[datum.kind]


def in_image(datum: Datum, n: int, s) -> bool:
    """Whether s lies in Sigma_n = sigma_n(Sigma)."""
    check_kind(datum, s)
    if datum.kind == "weil":
        return s.weight % n == 0
    return True


def _qz_fiber(n: int, x: QmodZ) -> list:
    return [QmodZ((x.value + j) / n) for j in range(n)]


def rho_fiber(datum: Datum, n: int, s) -> tuple:
    """The preimage of s under sigma_n, in a fixed enumeration order."""
    if n < 1:
        raise ValueError("n must be positive")
    if not in_image(datum, n, s):
        raise NotInImage(f"{s} is not in the image of sigma_{n}", [s])
    k = datum.kind
    if k in ("qmodz", "weil_zero"):
        return tuple(_qz_fiber(n, s))
    if k in ("pair_switch", "rank_two"):
        return tuple(PairElem(a, b) for a in _qz_fiber(n, s.a) for b in _qz_fiber(n, s.b))
    if k == "alg_num_model":
        free = tuple(e / n for e in s.free)
        return tuple(AlgNumModelElem(z, free) for z in _qz_fiber(n, s.zeta))
    if k == "weil":
        return tuple(WeilCycElem(z, s.weight // n, s.q) for z in _qz_fiber(n, s.zeta))
    if k == "weil_hat":
        rs = [HalfIntQmod2Z((s.r.value + 2 * j) / n) for j in range(n)]
        return tuple(WeilHatElem(z, r, s.q) for z in _qz_fiber(n, s.zeta) for r in rs)
    return (GermElem(s.value / n),)


def kernel(datum: Datum, n: int) -> tuple:
    return rho_fiber(datum, n, identity(datum))


# ---------------------------------------------------------------- Galois action


@dataclass(frozen=True)
class GaloisElem:
    """Element of (Z/N)^x times a sign recording the action on sqrt(q)."""

    level: int
    unit: int = 1
    sqrtq_sign: int = 1

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be positive")
        u = self.unit % self.level
        if math.gcd(u, self.level) != 1:
            raise ValueError(f"{self.unit} is not a unit mod {self.level}")
        if self.sqrtq_sign not in (1, -1):
            raise ValueError("sqrtq_sign must be +1 or -1")
        object.__setattr__(self, "unit", u)

    def __mul__(self, other: "GaloisElem") -> "GaloisElem":
        if self.level != other.level:
            raise LevelTooSmall("composing Galois elements of different levels")
        return GaloisElem(self.level, self.unit * other.unit, self.sqrtq_sign * other.sqrtq_sign)

    def inverse(self) -> "GaloisElem":
        return GaloisElem(self.level, pow(self.unit, -1, self.level), self.sqrtq_sign)

    def __str__(self):
        return f"(u={self.unit} mod {self.level}, sign={self.sqrtq_sign:+d})"


def _act_root(g: GaloisElem, x: QmodZ) -> QmodZ:
    if g.level % x.den:
        raise LevelTooSmall(f"denominator {x.den} does not divide level {g.level}")
    return QmodZ(x.value * g.unit)


def sign_twist_active(datum: Datum, g: GaloisElem) -> bool:
    """Whether g moves sqrt(q); never the case when q is an even prime power."""
    return g.sqrtq_sign == -1 and not is_even_power(datum.q)


def galois_apply(datum: Datum, g: GaloisElem, s):
    check_kind(datum, s)
    k = datum.kind
    if k in ("qmodz", "weil_zero"):
        return _act_root(g, s)
    if k == "rank_two":
        return PairElem(_act_root(g, s.a), _act_root(g, s.b))
    if k == "pair_switch":
        a, b = _act_root(g, s.a), _act_root(g, s.b)
        return PairElem(b, a) if g.sqrtq_sign == -1 else PairElem(a, b)
    if k == "alg_num_model":
        return AlgNumModelElem(_act_root(g, s.zeta), s.free)
    if k == "weil":
        z = _act_root(g, s.zeta)
        if sign_twist_active(datum, g) and s.weight % 2:
            # (-1)^m gamma(pi): the sign folds into the root of unity.
            z = _act_root(GaloisElem(g.level), z + QmodZ(Fraction(1, 2)))
        return WeilCycElem(z, s.weight, s.q)
    if k == "weil_hat":
        z = _act_root(g, s.zeta)
        if sign_twist_active(datum, g):
            z = _act_root(GaloisElem(g.level), z + QmodZ(s.r.value / 2))
        return WeilHatElem(z, s.r, s.q)
    return s


def galois_group(datum: Datum, level: int | None = None) -> list:
    """All Galois elements at the given level (signs only where they matter)."""
    N = level or datum.galois_level
    units = [u for u in range(1, N + 1) if math.gcd(u, N) == 1]
    signs = (1, -1) if datum.kind in ("weil", "weil_hat", "pair_switch") else (1,)
    return [GaloisElem(N, u, e) for u in units for e in signs]


# ---------------------------------------------------------------- Weil packing


def weil_pack(zeta: QmodZ, m: int, q: int) -> WeilCycElem:
    prime_power(q)
    return WeilCycElem(QmodZ(zeta.value if isinstance(zeta, QmodZ) else zeta), int(m), q)


def weil_unpack(w: WeilCycElem) -> tuple:
    return w.zeta, w.weight


def weight(s) -> int:
    return s.weight if isinstance(s, WeilCycElem) else 0


# ---------------------------------------------------------------- sampling


def _divisors(n: int) -> list:
    return [d for d in range(1, n + 1) if n % d == 0]


def roots_at_level(N: int) -> list:
    return [QmodZ(Fraction(a, N)) for a in range(N)]


def sample_elements(datum: Datum, count: int, rng: random.Random | None = None,
                    level: int | None = None, max_weight: int = 3) -> list:
    """Random elements whose root-of-unity parts have denominator dividing the level."""
    rng = rng or random.Random(0)
    N = level or datum.galois_level

    def root():
        return QmodZ(Fraction(rng.randrange(N), N))

    out = []
    for _ in range(count):
        k = datum.kind
        if k in ("qmodz", "weil_zero"):
            s = root()
        elif k in ("pair_switch", "rank_two"):
            s = PairElem(root(), root())
        elif k == "alg_num_model":
            s = AlgNumModelElem(root(), tuple(Fraction(rng.randint(-6, 6), rng.choice((1, 1, 2, 3)))
                                              for _ in datum.generators))
        elif k == "weil":
            s = WeilCycElem(root(), rng.randint(-max_weight, max_weight), datum.q)
        elif k == "weil_hat":
            s = WeilHatElem(root(), HalfIntQmod2Z(Fraction(2 * rng.randrange(N), N)), datum.q)
        else:
            s = GermElem(Fraction(rng.randint(-12, 12), rng.randint(1, 12)))
        out.append(s)
    return out


def grid_elements(datum: Datum, max_den: int = 12) -> list:
    """A deterministic finite grid of elements, exhaustive in the root part."""
    N = datum.galois_level
    roots = sorted({QmodZ(Fraction(a, b)) for b in range(1, max_den + 1) if N % b == 0
                    for a in range(b)})
    k = datum.kind
    if k in ("qmodz", "weil_zero"):
        return roots
    small = roots[:8]
    if k in ("pair_switch", "rank_two"):
        return [PairElem(a, b) for a in small for b in small]
    if k == "alg_num_model":
        R = len(datum.generators)
        exps = [tuple(Fraction(v) for v in e) for e in itertools.product((-2, 0, 1), repeat=R)]
        exps.append(tuple(Fraction(1, 2) for _ in range(R)))
        return [AlgNumModelElem(z, e) for z in small for e in exps]
    if k == "weil":
        return [WeilCycElem(z, m, datum.q) for z in roots for m in range(-3, 4)]
    if k == "weil_hat":
        rs = [HalfIntQmod2Z(Fraction(a, b)) for b in (1, 2, 3) if N % b == 0 for a in range(2 * b)]
        return [WeilHatElem(z, r, datum.q) for z in small for r in sorted(set(rs))]
    return [GermElem(Fraction(a, b)) for a in range(-4, 5) for b in (1, 2, 3, 5)]


# ---------------------------------------------------------------- check_datum


@dataclass
class DatumReport:
    datum: str
    n_max: int
    checks: int = 0
    failures: list = field(default_factory=list)
    concrete: bool = True
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"datum": self.datum, "n_max": self.n_max, "checks": self.checks,
                "failures": self.failures, "concrete": self.concrete, "notes": self.notes,
                "ok": self.ok}


def check_datum(datum: Datum, n_max: int, samples: list | None = None) -> DatumReport:
    """Check the datum laws for all n, m <= n_max on a grid of elements."""
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    rep = DatumReport(str(datum), n_max, concrete=datum.concrete)
    if not datum.concrete:
        rep.notes.append("abstract, not concrete: alpha is identically 1")
    elems = samples if samples is not None else grid_elements(datum)

    def fail(law, **kw):
        rep.failures.append({"law": law, **{k: str(v) for k, v in kw.items()}})

    ns = range(1, n_max + 1)
    for n in ns:
        for m in ns:
            rep.checks += 1
            if alpha_of(datum, n * m) != alpha_of(datum, n) * alpha_of(datum, m):
                fail("alpha_multiplicative", n=n, m=m)
    # alpha(n) = |ker sigma_n|, counted from the fiber over the identity
    for n in ns:
        rep.checks += 1
        ker = kernel(datum, n)
        if len(set(ker)) != alpha_of(datum, n) or any(x.scale(n) != identity(datum) for x in ker):
            fail("alpha_is_kernel_size", n=n)
    for s in elems:
        for n in ns:
            sn = sigma_apply(datum, n, s)
            for m in ns:
                rep.checks += 1
                if sigma_apply(datum, n * m, s) != sigma_apply(datum, m, sn):
                    fail("sigma_semigroup", n=n, m=m, s=s)
            if in_image(datum, n, s):
                rep.checks += 1
                fib = rho_fiber(datum, n, s)
                if len(set(fib)) != len(fib) or len(fib) != alpha_of(datum, n) \
                        or any(sigma_apply(datum, n, x) != s for x in fib):
                    fail("rho_fiber", n=n, s=s)
    gal = galois_group(datum)
    for g in gal[:16]:
        for s in elems:
            gs = galois_apply(datum, g, s)
            for n in ns:
                rep.checks += 1
                if galois_apply(datum, g, sigma_apply(datum, n, s)) != sigma_apply(datum, n, gs):
                    fail("galois_equivariance", n=n, s=s, g=g)
    return rep


# ---------------------------------------------------------------- JSON


def datum_to_json(d: Datum) -> dict:
    out = {"kind": d.kind, "galois_level": d.galois_level}
    if d.q is not None:
        out["q"] = d.q
    if d.generators:
        out["generators"] = [g if isinstance(g, float) else frac_str(g) for g in d.generators]
    return out


def datum_from_json(obj: dict) -> Datum:
    try:
        return Datum(kind=obj["kind"], q=obj.get("q"), galois_level=obj.get("galois_level", 24),
                     generators=tuple(obj.get("generators", ())))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad datum: {exc}") from exc


def elem_to_json(s):
    if isinstance(s, QmodZ):
        return frac_str(s.value)
    if isinstance(s, GermElem):
        return frac_str(s.value)
    if isinstance(s, PairElem):
        return [frac_str(s.a.value), frac_str(s.b.value)]
    if isinstance(s, WeilCycElem):
        return {"zeta": frac_str(s.zeta.value), "m": s.weight}
    if isinstance(s, WeilHatElem):
        return {"zeta": frac_str(s.zeta.value), "r": frac_str(s.r.value)}
    if isinstance(s, AlgNumModelElem):
        return {"zeta": frac_str(s.zeta.value), "free": [frac_str(e) for e in s.free]}
    raise KindMismatch(f"cannot serialize {s!r}")


def elem_from_json(datum: Datum, obj):
    k = datum.kind
    try:
        if k in ("qmodz", "weil_zero"):
            return QmodZ(as_fraction(obj))
        if k == "germ_alpha_one":
            return GermElem(as_fraction(obj))
        if k in ("pair_switch", "rank_two"):
            a, b = obj
            return PairElem(QmodZ(as_fraction(a)), QmodZ(as_fraction(b)))
        if k == "weil":
            return WeilCycElem(QmodZ(as_fraction(obj["zeta"])), int(obj["m"]), datum.q)
        if k == "weil_hat":
            return WeilHatElem(QmodZ(as_fraction(obj["zeta"])), HalfIntQmod2Z(as_fraction(obj["r"])), datum.q)
        return AlgNumModelElem(QmodZ(as_fraction(obj["zeta"])), tuple(as_fraction(e) for e in obj["free"]))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad element {obj!r} for {k}: {exc}") from exc


# ---------------------------------------------------------------- embeddings


@dataclass(frozen=True)
class Embedding:
    """An embedding iota of Sigma into the algebraic numbers, at finite level.

    ``unit`` acts on roots of unity, ``sign`` is the image of sqrt(q) over
    its positive root, and ``unit2`` is the second unit of a rank-two pair
    (for the completion it is the odd unit v in r -> exp(pi i v r)).
    """

    level: int
    unit: int = 1
    sign: int = 1
    unit2: int = 1

    def __post_init__(self):
        for u in (self.unit, self.unit2):
            if math.gcd(u % self.level, self.level) != 1:
                raise ValueError(f"{u} is not a unit mod {self.level}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        object.__setattr__(self, "unit", self.unit % self.level)
        object.__setattr__(self, "unit2", self.unit2 % self.level)


def standard_embedding(datum: Datum) -> Embedding:
    return Embedding(datum.galois_level)


def iota_phase(datum: Datum, iota: Embedding, s) -> Fraction:
    """arg(iota(s)) / 2 pi as an exact element of [0, 1)."""
    check_kind(datum, s)
    k = datum.kind
    if k in ("qmodz", "weil_zero"):
        x = iota.unit * s.value
    elif k == "alg_num_model":
        x = iota.unit * s.zeta.value
    elif k == "weil":
        x = iota.unit * s.zeta.value
        if iota.sign == -1 and not is_even_power(datum.q):
            x += Fraction(s.weight, 2)
    elif k == "weil_hat":
        x = iota.unit * s.zeta.value + iota.unit2 * s.r.value / 2
    elif k in ("pair_switch", "rank_two"):
        x = iota.unit * s.a.value + iota.unit2 * s.b.value
    else:
        raise KindMismatch("the germ datum has no embedding into the algebraic numbers")
    return x % 1


def norm_exps(datum: Datum, s) -> tuple:
    """Exponents of N(s) = |iota(s)| over the progression generators.

    For Weil numbers the generator is sqrt(q), so the exponent is the weight.
    """
    check_kind(datum, s)
    if datum.kind == "weil":
        return (Fraction(s.weight),)
    if datum.kind == "alg_num_model":
        return s.free
    return ()


def progression_logs(datum: Datum) -> tuple:
    """log of the progression generators lambda_r."""
    if datum.kind == "weil":
        return (0.5 * math.log(datum.q),)
    if datum.kind == "alg_num_model":
        return tuple(math.log(float(g)) for g in datum.generators)
    return ()


def iota_complex(datum: Datum, iota: Embedding, s) -> complex:
    ph = iota_phase(datum, iota, s)
    mod = math.exp(sum(float(e) * L for e, L in zip(norm_exps(datum, s), progression_logs(datum))))
    return mod * complex(math.cos(2 * math.pi * ph), math.sin(2 * math.pi * ph))


def compose_embedding(datum: Datum, iota: Embedding, g: GaloisElem) -> Embedding:
    """iota o gamma, or NotAdmissible if it leaves the declared family Emb_0."""
    from .errors import NotAdmissible

    if g.level != iota.level:
        raise LevelTooSmall("embedding and Galois element at different levels")
    k = datum.kind
    trivial = g.unit == 1 and (g.sqrtq_sign == 1 or (k == "weil" and is_even_power(datum.q)))
    if k == "alg_num_model" and not trivial:
        raise NotAdmissible("the admissible symmetry group of the algebraic-number datum is trivial")
    if k == "germ_alpha_one":
        raise NotAdmissible("no embedding for the germ datum")
    if k == "weil":
        sign = iota.sign * g.sqrtq_sign if not is_even_power(datum.q) else iota.sign
        return Embedding(iota.level, iota.unit * g.unit, sign, iota.unit2)
    if k == "weil_hat":
        if sign_twist_active(datum, g):
            raise NotAdmissible("a sqrt(q)-twist does not preserve the product form of Emb_0")
        return Embedding(iota.level, iota.unit * g.unit, iota.sign, iota.unit2)
    if k == "pair_switch" and g.sqrtq_sign == -1:
        return Embedding(iota.level, iota.unit2 * g.unit, iota.sign, iota.unit * g.unit)
    if k in ("pair_switch", "rank_two"):
        return Embedding(iota.level, iota.unit * g.unit, iota.sign, iota.unit2 * g.unit)
    return Embedding(iota.level, iota.unit * g.unit, iota.sign, iota.unit2)


def admissible_symmetries(datum: Datum) -> list:
    """Galois elements whose action keeps iota o gamma inside Emb_0."""
    from .errors import NotAdmissible

    out = []
    iota = standard_embedding(datum)
    for g in galois_group(datum):
        try:
            compose_embedding(datum, iota, g)
        except NotAdmissible:
            continue
        out.append(g)
    return out
