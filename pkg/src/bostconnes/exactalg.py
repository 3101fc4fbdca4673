"""Exact cyclotomic arithmetic and the group algebra Q[Sigma]."""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from . import bcdata
from .bcdata import Datum, Embedding, QmodZ, as_fraction, frac_str
from .errors import LevelTooSmall, NotInImage

# ---------------------------------------------------------------- polynomials


def _polydivmod_exact(num: list, den: list) -> list:
    """Quotient of integer polynomials (low degree first), den monic."""
    num = list(num)
    dq = len(den) - 1
    out = [0] * max(len(num) - dq, 1)
    for i in range(len(num) - 1, dq - 1, -1):
        c = num[i]
        if c:
            out[i - dq] = c
            for j, d in enumerate(den):
                num[i - dq + j] -= c * d
    if any(num[:dq]):
        raise ArithmeticError("division is not exact")
    return out


@lru_cache(maxsize=None)
def _cyclotomic(N: int) -> tuple:
    poly = [-1] + [0] * (N - 1) + [1]
    for d in range(1, N):
        if N % d == 0:
            poly = _polydivmod_exact(poly, list(_cyclotomic(d)))
    return tuple(poly)


def cyclotomic_poly(N: int) -> list:
    """Phi_N as integer coefficients, constant term first."""
    if N < 1:
        raise ValueError("N must be positive")
    return list(_cyclotomic(N))


def euler_phi(N: int) -> int:
    return len(_cyclotomic(N)) - 1


@lru_cache(maxsize=None)
def reduction_table(N: int) -> tuple:
    """Row j holds x^j mod Phi_N in the power basis, for j = 0..N-1."""
    phi = cyclotomic_poly(N)
    d = len(phi) - 1
    rows = []
    cur = [0] * d
    cur[0] = 1
    for _ in range(N):
        rows.append(tuple(cur))
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [c - top * p for c, p in zip(cur, phi[:d])]
    return tuple(rows)


# ---------------------------------------------------------------- CycloNumber


class CycloNumber:
    """An element of Q(zeta_N) in the power basis, reduced mod Phi_N.

    Arithmetic between different levels happens at the lcm of the levels.
    """

    __slots__ = ("level", "coeffs")

    def __init__(self, level: int, coeffs=()):
        if level < 1:
            raise ValueError("level must be positive")
        d = euler_phi(level)
        cs = [as_fraction(c) for c in coeffs]
        if len(cs) > d:
            cs = list(self._reduce_terms(level, enumerate(cs)))
        cs += [Fraction(0)] * (d - len(cs))
        self.level = level
        self.coeffs = tuple(cs)

    @staticmethod
    def _reduce_terms(level, terms) -> tuple:
        table = reduction_table(level)
        out = [Fraction(0)] * euler_phi(level)
        for j, c in terms:
            if c:
                for i, t in enumerate(table[j % level]):
                    if t:
                        out[i] += c * t
        return tuple(out)

    @classmethod
    def from_terms(cls, level: int, terms: dict) -> "CycloNumber":
        """sum of c * zeta_level^j over the items (j, c) of terms."""
        obj = cls.__new__(cls)
        obj.level = level
        obj.coeffs = cls._reduce_terms(level, terms.items())
        return obj

    @classmethod
    def root(cls, level: int, z) -> "CycloNumber":
        """zeta_level^(level * z) for z in Q/Z with den(z) | level."""
        z = z if isinstance(z, QmodZ) else QmodZ(as_fraction(z))
        if level % z.den:
            raise LevelTooSmall(f"denominator {z.den} does not divide {level}")
        return cls.from_terms(level, {z.num * (level // z.den): Fraction(1)})

    @classmethod
    def const(cls, c, level: int = 1) -> "CycloNumber":
        return cls.from_terms(level, {0: as_fraction(c)})

    def lift(self, level: int) -> "CycloNumber":
        if level % self.level:
            raise LevelTooSmall(f"cannot lift level {self.level} to {level}")
        if level == self.level:
            return self
        step = level // self.level
        return CycloNumber.from_terms(level, {i * step: c for i, c in enumerate(self.coeffs) if c})

    def _coerce(self, other):
        if isinstance(other, CycloNumber):
            L = math.lcm(self.level, other.level)
            return self.lift(L), other.lift(L)
        if isinstance(other, (int, Fraction)):
            return self, CycloNumber.const(other, self.level)
        return NotImplemented, NotImplemented

    def __add__(self, other):
        a, b = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        obj = CycloNumber.__new__(CycloNumber)
        obj.level, obj.coeffs = a.level, tuple(x + y for x, y in zip(a.coeffs, b.coeffs))
        return obj

    __radd__ = __add__

    def __neg__(self):
        obj = CycloNumber.__new__(CycloNumber)
        obj.level, obj.coeffs = self.level, tuple(-x for x in self.coeffs)
        return obj

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            obj = CycloNumber.__new__(CycloNumber)
            obj.level, obj.coeffs = self.level, tuple(x * other for x in self.coeffs)
            return obj
        a, b = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        terms: dict = {}
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        terms[i + j] = terms.get(i + j, 0) + x * y
        return CycloNumber.from_terms(a.level, terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / other)
        return self * other.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = CycloNumber.const(1, self.level)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def inverse(self) -> "CycloNumber":
        """Solve self * y = 1 by exact Gaussian elimination over Q."""
        N, d = self.level, euler_phi(self.level)
        cols = []
        for j in range(d):
            basis = CycloNumber.from_terms(N, {j: Fraction(1)})
            cols.append((self * basis).coeffs)
        A = [[cols[j][i] for j in range(d)] + [Fraction(int(i == 0))] for i in range(d)]
        for c in range(d):
            piv = next((r for r in range(c, d) if A[r][c]), None)
            if piv is None:
                raise ZeroDivisionError("CycloNumber is zero")
            A[c], A[piv] = A[piv], A[c]
            pv = A[c][c]
            A[c] = [x / pv for x in A[c]]
            for r in range(d):
                if r != c and A[r][c]:
                    f = A[r][c]
                    A[r] = [x - f * y for x, y in zip(A[r], A[c])]
        return CycloNumber(N, [A[i][d] for i in range(d)])

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __eq__(self, other):
        a, b = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        return a.coeffs == b.coeffs

    __hash__ = None

    def __complex__(self):
        return self.to_complex()

    def to_complex(self) -> complex:
        N = self.level
        re = math.fsum(float(c) * math.cos(2 * math.pi * i / N) for i, c in enumerate(self.coeffs))
        im = math.fsum(float(c) * math.sin(2 * math.pi * i / N) for i, c in enumerate(self.coeffs))
        return complex(re, im)

    def to_json(self) -> dict:
        return {"level": self.level, "coeffs": [frac_str(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj) -> "CycloNumber":
        return cls(int(obj["level"]), [as_fraction(c) for c in obj["coeffs"]])

    def __repr__(self):
        return f"CycloNumber({self.level}, [{', '.join(frac_str(c) for c in self.coeffs)}])"


def cyclo_embed_root(level: int, z) -> CycloNumber:
    return CycloNumber.root(level, z)


def cyclo_add(a, b):
    return a + b


def cyclo_mul(a, b):
    return a * b


def cyclo_eq(a, b) -> bool:
    return a == b


def cyclo_pow(a, e):
    return a ** e


# ---------------------------------------------------------------- group algebra


class AlgebraElem:
    """A finite Q-linear combination of group elements."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        acc: dict = {}
        items = terms.items() if isinstance(terms, dict) else (terms or ())
        for s, c in items:
            c = as_fraction(c)
            acc[s] = acc.get(s, Fraction(0)) + c
        self.terms = {s: c for s, c in acc.items() if c}

    @classmethod
    def monomial(cls, s, c=1) -> "AlgebraElem":
        return cls([(s, c)])

    def __add__(self, other):
        return AlgebraElem(list(self.terms.items()) + list(other.terms.items()))

    def __neg__(self):
        return AlgebraElem({s: -c for s, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return AlgebraElem({s: c * other for s, c in self.terms.items()})
        return AlgebraElem([(s + t, a * b) for s, a in self.terms.items()
                            for t, b in other.terms.items()])

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __eq__(self, other):
        return isinstance(other, AlgebraElem) and self.terms == other.terms

    __hash__ = None

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __repr__(self):
        body = " + ".join(f"{frac_str(c)}*[{s}]" for s, c in sorted(self.terms.items()))
        return f"AlgebraElem({body or '0'})"

    def to_json(self) -> list:
        return [{"element": bcdata.elem_to_json(s), "coeff": frac_str(c)}
                for s, c in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, datum: Datum, obj) -> "AlgebraElem":
        return cls([(bcdata.elem_from_json(datum, t["element"]), as_fraction(t["coeff"])) for t in obj])


def sigma_lin(datum: Datum, n: int, a: AlgebraElem) -> AlgebraElem:
    return AlgebraElem([(bcdata.sigma_apply(datum, n, s), c) for s, c in a])


def rho_lin(datum: Datum, n: int, a: AlgebraElem) -> AlgebraElem:
    bad = [s for s, _ in a if not bcdata.in_image(datum, n, s)]
    if bad:
        raise NotInImage(f"{len(bad)} term(s) outside the image of sigma_{n}", bad)
    return AlgebraElem([(x, c) for s, c in a for x in bcdata.rho_fiber(datum, n, s)])


def galois_push(datum: Datum, g, a: AlgebraElem) -> AlgebraElem:
    return AlgebraElem([(bcdata.galois_apply(datum, g, s), c) for s, c in a])


def check_sigma_rho(datum: Datum, n: int, a: AlgebraElem) -> bool:
    """sigma_n(rho_n(a)) == alpha(n) * a, exactly."""
    return sigma_lin(datum, n, rho_lin(datum, n, a)) == a * bcdata.alpha_of(datum, n)


def random_algebra_elem(datum: Datum, rng, max_terms: int = 8, n: int | None = None) -> AlgebraElem:
    """Random element with keys in Sigma_n (when n is given)."""
    k = rng.randint(1, max_terms)
    elems = bcdata.sample_elements(datum, k, rng)
    if n is not None and datum.kind == "weil":
        elems = [bcdata.WeilCycElem(s.zeta, s.weight * n, s.q) for s in elems]
    return AlgebraElem([(s, Fraction(rng.randint(-9, 9) or 1, rng.randint(1, 6))) for s in elems])


# ---------------------------------------------------------------- zero-sum identity


def _iota_power(datum: Datum, iota: Embedding, s, e: int, level: int) -> tuple:
    """iota(s)^e split as (phase in Q(zeta_level), norm exponent vector)."""
    phase = bcdata.iota_phase(datum, iota, s) * e
    return (CycloNumber.root(level, QmodZ(phase)),
            tuple(x * e for x in bcdata.norm_exps(datum, s)))


def phase_exponent(datum: Datum, n: int) -> int:
    """The power of iota(s) seen at label n: alpha(n), or n on a rank-two diagonal."""
    return n if datum.diagonal_rank_two else bcdata.alpha_of(datum, n)


def zero_sum_identity(datum: Datum, iota: Embedding, n: int, m: int, s, level: int | None = None) -> bool:
    """(1/alpha(n)) sum_{s' in rho_n(s)} iota(s')^e(m) against its closed form.

    e = alpha, except on rank-two diagonal data where the pair embedding acts
    on eps_{k,k} by iota(s)^k and e(n) = n.  Phases are compared in
    Q(zeta_N); the norm of iota is carried as an exact exponent vector,
    common to the whole fiber.
    """
    fiber = bcdata.rho_fiber(datum, n, s)
    size = bcdata.alpha_of(datum, n)
    an, am = phase_exponent(datum, n), phase_exponent(datum, m)
    if level is None:
        level = 1
        for x in fiber:
            level = math.lcm(level, (bcdata.iota_phase(datum, iota, x) * am).denominator)
        level = math.lcm(level, (bcdata.iota_phase(datum, iota, s) * Fraction(am, an)).denominator)
    total = CycloNumber.const(0, level)
    norms = set()
    for x in fiber:
        ph, nv = _iota_power(datum, iota, x, am, level)
        total = total + ph
        norms.add(nv)
    if len(norms) > 1:
        return False
    total = total / size
    if am % an:
        return total.is_zero()
    ph, nv = _iota_power(datum, iota, s, am // an, level)
    return total == ph and norms == {nv}
