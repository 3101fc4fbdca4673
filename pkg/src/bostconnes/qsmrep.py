"""Truncated Hilbert-space representations of the algebras B and B'.

All generators act monomially on the basis vectors eps_{alpha(n), eta}: each
basis vector goes to a multiple of at most one basis vector.  A word in the
generators is therefore evaluated on the whole truncated basis at once with
numpy, keeping

* the target index (n, k),
* the root-of-unity part of the coefficient as an integer exponent mod L,
* the positive real part as an integer exponent vector over the
  progression generators lambda_r,

so relation checks compare exact quantities.  Float values are only formed
for time evolution, traces and the SparseOp export.
"""
from __future__ import annotations

import cmath
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import bcdata
from .bcdata import Datum, Embedding
from .exactalg import euler_phi, reduction_table
from .errors import LatticeMismatch, LevelTooSmall
from .ghom import IDENTITY, GHom

# ---------------------------------------------------------------- letters


@dataclass(frozen=True)
class S:
    elem: object

    def __str__(self):
        return f"[{self.elem}]"


@dataclass(frozen=True)
class Mu:
    m: int

    def __str__(self):
        return f"mu{self.m}"


@dataclass(frozen=True)
class MuStar:
    m: int

    def __str__(self):
        return f"mu{self.m}*"


@dataclass(frozen=True)
class W:
    """W(lambda) with lambda = prod lambda_r^exps[r]."""

    exps: tuple

    def __str__(self):
        return f"W{self.exps}"


@dataclass(frozen=True)
class WPow:
    """W(exp(log_base))^power for a complex power (time evolution only)."""

    log_base: float
    power: complex

    def __str__(self):
        return f"W(e^{self.log_base:.4g})^({self.power:.4g})"


@dataclass(frozen=True)
class GenWord:
    letters: tuple = ()
    scalar: complex = 1.0

    def __mul__(self, other: "GenWord") -> "GenWord":
        return GenWord(self.letters + other.letters, self.scalar * other.scalar)

    def __str__(self):
        body = " ".join(str(x) for x in self.letters) or "1"
        return body if self.scalar == 1 else f"({self.scalar:.6g}) {body}"


def word(*letters, scalar=1.0) -> GenWord:
    return GenWord(tuple(letters), scalar)


# ---------------------------------------------------------------- truncation


@dataclass(frozen=True)
class BasisIdx:
    n: int
    k: tuple = ()

    def __str__(self):
        return f"eps(n={self.n}, k={list(self.k)})"


@dataclass(frozen=True)
class TruncSpec:
    n_max: int
    depth: int = 0
    R: int = 0
    generators: tuple = ()
    h_logs: tuple = ()
    primes: tuple = ()

    def __post_init__(self):
        if self.n_max < 1 or self.depth < 0 or self.R < 0:
            raise ValueError("invalid truncation")
        if len(self.h_logs) != self.R:
            raise ValueError("need one h(lambda_r) per progression generator")
        if any(float(g) <= 1 for g in self.generators):
            raise ValueError("progression generators must exceed 1")
        if len(set(self.primes)) != len(self.primes):
            raise ValueError("prime assignment must be injective")

    @classmethod
    def for_datum(cls, datum: Datum, n_max: int, depth: int = 0, R: int | None = None) -> "TruncSpec":
        if datum.kind == "weil":
            return cls(n_max, depth, 1, (math.sqrt(datum.q),), (0.5 * math.log(datum.q),), ())
        if datum.kind == "alg_num_model":
            R = len(datum.generators) if R is None else R
            if R > len(datum.generators):
                raise ValueError(f"datum declares only {len(datum.generators)} generators")
            primes = tuple(bcdata.first_primes(R))
            return cls(n_max, depth, R, tuple(datum.generators[:R]),
                       tuple(math.log(p) for p in primes), primes)
        return cls(n_max, 0, 0)

    @property
    def size(self) -> int:
        return self.n_max * (self.depth + 1) ** self.R


def _lambda_logs(datum: Datum, trunc: TruncSpec) -> np.ndarray:
    return np.array(bcdata.progression_logs(datum)[:trunc.R], dtype=np.float64)


# ---------------------------------------------------------------- word images


@dataclass
class WordImage:
    """A word applied to every basis vector: column j goes to target j."""

    n: np.ndarray
    K: np.ndarray
    alive: np.ndarray
    bnd: np.ndarray
    e: np.ndarray
    mexp: np.ndarray
    cz: np.ndarray | None
    scalar: complex
    level: int


class Representation:
    """R_iota on the truncated basis, for the generic or rank-two diagonal model."""

    def __init__(self, datum: Datum, iota: Embedding | None = None, trunc: TruncSpec | None = None,
                 g: GHom = IDENTITY):
        self.datum = datum
        self.iota = iota or bcdata.standard_embedding(datum)
        self.trunc = trunc or TruncSpec.for_datum(datum, 16)
        self.g = g
        if datum.kind == "germ_alpha_one":
            raise bcdata.KindMismatch("use alpha_one_rep for the germ datum")
        if datum.rank == 0 and self.trunc.R:
            raise LatticeMismatch(f"{datum.kind} has no progression lattice")
        self.level = self.iota.level
        self.apow = bcdata._ALPHA_POWER[datum.kind]
        self.diagonal = datum.diagonal_rank_two
        T = self.trunc
        D = T.depth + 1
        n = np.repeat(np.arange(1, T.n_max + 1, dtype=np.int64), D ** T.R)
        if T.R:
            grid = np.array(list(itertools.product(range(0, -D, -1), repeat=T.R)), dtype=np.int64)
            K = np.tile(grid, (T.n_max, 1))
        else:
            K = np.zeros((T.n_max, 0), dtype=np.int64)
        self.n, self.K = n, K
        self.B = len(n)
        self.lam_logs = _lambda_logs(datum, T)
        self.h_logs = np.array(T.h_logs, dtype=np.float64)
        self.energy_rank = 2 if self.diagonal else 1
        self.log_g = g.log_values(T.n_max)

    # -- basis helpers
    def alpha(self, n):
        return n ** self.apow

    def phase_mult(self, n):
        """Power of iota(s) picked up at label n: alpha(n), or n on the diagonal."""
        return n if self.diagonal else n ** self.apow

    def basis_idx(self, j: int) -> BasisIdx:
        return BasisIdx(int(self.n[j]), tuple(int(x) for x in self.K[j]))

    def flat(self, n: np.ndarray, K: np.ndarray) -> np.ndarray:
        D = self.trunc.depth + 1
        out = (n - 1) * D ** self.trunc.R
        for r in range(self.trunc.R):
            out = out + (-K[:, r]) * D ** (self.trunc.R - 1 - r)
        return out

    def energies(self, n: np.ndarray | None = None, K: np.ndarray | None = None) -> np.ndarray:
        """Diagonal of H: -alpha(n) sum_r k_r log h(lambda_r) + log g(n)."""
        n = self.n if n is None else n
        K = self.K if K is None else K
        if np.any(n > self.trunc.n_max):
            logg = np.log(n.astype(np.float64))
            for p, lam in self.g.prime_values.items():
                for e in range(1, 64):
                    pk = p ** e
                    if pk > n.max():
                        break
                    logg = logg + (n % pk == 0) * (math.log(lam) - math.log(p))
        else:
            logg = self.log_g[n - 1]
        out = self.energy_rank * logg
        if self.trunc.R:
            out = out - self.alpha(n).astype(np.float64) * (K @ self.h_logs)
        return out

    # -- phases and norms of group elements
    def phase_int(self, s, level: int | None = None) -> int:
        L = level or self.level
        ph = bcdata.iota_phase(self.datum, self.iota, s)
        if L % ph.denominator:
            raise LevelTooSmall(f"phase {ph} of {s} needs level divisible by {ph.denominator}")
        return ph.numerator * (L // ph.denominator)

    def norm_shift(self, s):
        """Integer shift of the exponent vector under s, or None if not in the lattice."""
        a = bcdata.norm_exps(self.datum, s)
        R = self.trunc.R
        if any(x != 0 for x in a[R:]):
            return None
        a = a[:R]
        if any(x.denominator != 1 for x in a):
            return None
        return np.array([int(x) for x in a], dtype=np.int64)

    # -- the engine
    def apply(self, w: GenWord, clip: bool = True, cols: np.ndarray | None = None,
              level: int | None = None, want_float: bool = False) -> WordImage:
        idx = np.arange(self.B) if cols is None else cols
        L = level or self.level
        n = self.n[idx].copy()
        K = self.K[idx].copy()
        m = len(idx)
        alive = np.ones(m, dtype=bool)
        bnd = np.zeros(m, dtype=bool)
        e = np.zeros(m, dtype=np.int64)
        mexp = np.zeros((m, self.trunc.R), dtype=np.int64)
        cz = np.ones(m, dtype=np.complex128) if want_float else None
        T = self.trunc
        out_of_lattice = self.datum.divisible_norms
        for letter in reversed(w.letters):
            act = alive & ~bnd
            if isinstance(letter, S):
                ph = self.phase_int(letter.elem, L)
                a = self.norm_shift(letter.elem)
                if a is None:
                    if out_of_lattice or any(x != 0 for x in bcdata.norm_exps(self.datum, letter.elem)[T.R:]):
                        (bnd.__setitem__(act, True) if clip else alive.__setitem__(act, False))
                    else:
                        alive[act] = False
                    continue
                mult = self.phase_mult(n[act])
                e[act] = (e[act] + (ph * (mult % L)) % L) % L
                if T.R:
                    mexp[act] += mult[:, None] * a[None, :]
                    K[act] += a[None, :]
                    if clip:
                        bad = act & np.any((K > 0) | (K < -T.depth), axis=1)
                        bnd |= bad
            elif isinstance(letter, Mu):
                am = self.alpha(letter.m)
                if T.R:
                    div = np.all(K % am == 0, axis=1)
                    nodiv = act & ~div
                    if out_of_lattice and clip:
                        bnd |= nodiv
                    else:
                        alive[nodiv] = False
                    act = act & div
                    K[act] //= am
                n[act] *= letter.m
                if clip:
                    bnd |= act & (n > T.n_max)
            elif isinstance(letter, MuStar):
                div = n % letter.m == 0
                alive[act & ~div] = False
                act = act & div
                n[act] //= letter.m
                if T.R:
                    K[act] *= self.alpha(letter.m)
                    if clip:
                        bnd |= act & np.any(K < -T.depth, axis=1)
            elif isinstance(letter, W):
                if self.diagonal or not T.R:
                    raise LatticeMismatch("weight operators need a progression lattice")
                ex = np.array(letter.exps, dtype=np.int64)
                if ex.shape != (T.R,):
                    raise LatticeMismatch("W exponent vector does not match the lattice rank")
                mexp[act] += self.alpha(n[act])[:, None] * ex[None, :]
            elif isinstance(letter, WPow):
                if cz is None:
                    raise ValueError("complex weight powers need want_float=True")
                cz[act] *= np.exp(letter.power * self.alpha(n[act]).astype(np.float64) * letter.log_base)
            else:
                raise TypeError(f"unknown letter {letter!r}")
        return WordImage(n, K, alive, bnd, e, mexp, cz, w.scalar, L)

    def values(self, img: WordImage, mask: np.ndarray | None = None) -> np.ndarray:
        """Complex coefficients of a word image (zero where killed or masked out)."""
        keep = img.alive if mask is None else img.alive & mask
        v = np.zeros(len(keep), dtype=np.complex128)
        ang = 2 * np.pi * (img.e[keep].astype(np.float64) / img.level)
        vk = np.exp(1j * ang)
        if self.trunc.R:
            vk = vk * np.exp(img.mexp[keep] @ self.lam_logs)
        if img.cz is not None:
            vk = vk * img.cz[keep]
        v[keep] = vk * img.scalar
        return v

    # -- SparseOp export
    def sparse(self, w: GenWord) -> "SparseOp":
        img = self.apply(w, want_float=True)
        vals = self.values(img)
        keep = img.alive & ~img.bnd
        cols = np.nonzero(keep)[0]
        rows = self.flat(img.n[keep], img.K[keep])
        bnd = np.nonzero(img.bnd)[0]
        return SparseOp(self, rows, cols, vals[keep], bnd)


class SparseOp:
    """Triplet form (row, col, value) over the truncated basis."""

    def __init__(self, rep: Representation, rows, cols, values, boundary=()):
        acc: dict = {}
        for r, c, v in zip(np.asarray(rows).tolist(), np.asarray(cols).tolist(), np.asarray(values).tolist()):
            acc[(r, c)] = acc.get((r, c), 0) + v
        self.rep = rep
        self.entries = {k: v for k, v in acc.items() if v != 0}
        self.boundary = frozenset(np.asarray(boundary).tolist())

    def triplets(self):
        for (r, c), v in sorted(self.entries.items()):
            yield self.rep.basis_idx(r), self.rep.basis_idx(c), complex(v)

    def entry(self, row: BasisIdx, col: BasisIdx) -> complex:
        f = self._flat1(row), self._flat1(col)
        return complex(self.entries.get(f, 0))

    def _flat1(self, b: BasisIdx) -> int:
        return int(self.rep.flat(np.array([b.n]), np.array([list(b.k)], dtype=np.int64).reshape(1, -1))[0])

    def image(self, col: BasisIdx) -> dict:
        c = self._flat1(col)
        return {self.rep.basis_idx(r): complex(v) for (r, cc), v in self.entries.items() if cc == c}

    def to_dense(self) -> np.ndarray:
        B = self.rep.B
        if B > 5000:
            raise ValueError("truncation too large for a dense matrix")
        M = np.zeros((B, B), dtype=np.complex128)
        for (r, c), v in self.entries.items():
            M[r, c] = v
        return M

    def __len__(self):
        return len(self.entries)


def op_s(rep: Representation, s) -> SparseOp:
    bcdata.check_kind(rep.datum, s)
    return rep.sparse(word(S(s)))


def op_mu(rep: Representation, m: int) -> SparseOp:
    return rep.sparse(word(Mu(m)))


def op_mu_star(rep: Representation, m: int) -> SparseOp:
    return rep.sparse(word(MuStar(m)))


def op_weight(rep: Representation, lam) -> SparseOp:
    """R(W(lambda)): lambda as an exponent vector over the lattice, or a number."""
    if isinstance(lam, tuple):
        return rep.sparse(word(W(lam)))
    vals = float(lam) ** rep.alpha(rep.n).astype(np.float64)
    idx = np.arange(rep.B)
    return SparseOp(rep, idx, idx, vals)


def hamiltonian(rep: Representation) -> SparseOp:
    idx = np.arange(rep.B)
    return SparseOp(rep, idx, idx, rep.energies())


def hamiltonian_kernel(rep: Representation, tol: float = 1e-12) -> list:
    E = rep.energies()
    return [rep.basis_idx(j) for j in np.nonzero(np.abs(E) <= tol)[0]]


# ---------------------------------------------------------------- relations


@dataclass(frozen=True)
class Relation:
    name: str
    lhs: tuple
    rhs: tuple

    def words(self):
        return [w for _, w in self.lhs] + [w for _, w in self.rhs]

    def __str__(self):
        def side(terms):
            if not terms:
                return "0"
            return " + ".join(f"{c}*{w}" if c != 1 else str(w) for c, w in terms)
        return f"{side(self.lhs)} = {side(self.rhs)}"


@dataclass
class RelationReport:
    relation: str
    interior_count: int = 0
    boundary_count: int = 0
    max_deviation: float = 0.0
    witnesses: list = field(default_factory=list)
    instances: int = 0

    @property
    def ok(self) -> bool:
        return not self.witnesses

    def to_json(self) -> dict:
        return {"relation": self.relation, "interior_count": self.interior_count,
                "boundary_count": self.boundary_count, "max_deviation": self.max_deviation,
                "witnesses": self.witnesses}


def relation_samples(datum: Datum, rng: random.Random | None = None, count: int = 4,
                     R: int | None = None) -> list:
    """Group elements used to instantiate relations: fixed ones plus random ones.

    For the algebraic-number model, exponents beyond the first R generators
    are set to zero so that norms stay in the truncated lattice.
    """
    rng = rng or random.Random(0)
    N = math.gcd(datum.galois_level, 12)
    k = datum.kind
    QZ = bcdata.QmodZ
    fixed = []
    if k in ("qmodz", "weil_zero"):
        fixed = [QZ(0), QZ(Fraction(1, 3)), QZ(Fraction(1, 2)), QZ(Fraction(5, 12))]
    elif k == "weil":
        fixed = [bcdata.WeilCycElem(QZ(Fraction(a)), m, datum.q)
                 for a, m in (("0", 0), ("1/3", -2), ("1/2", 1), ("1/4", -1), ("0", -6))]
    elif k == "weil_hat":
        fixed = [bcdata.WeilHatElem(QZ(Fraction(a)), bcdata.HalfIntQmod2Z(Fraction(r)), datum.q)
                 for a, r in (("0", "0"), ("1/3", "1"), ("1/2", "1/2"), ("1/4", "3/2"))]
    elif k in ("pair_switch", "rank_two"):
        fixed = [bcdata.PairElem(QZ(Fraction(a)), QZ(Fraction(b)))
                 for a, b in (("0", "0"), ("1/3", "1/2"), ("1/4", "0"))]
    elif k == "alg_num_model":
        G = len(datum.generators)
        fixed = [bcdata.AlgNumModelElem(QZ(Fraction(a)), tuple(Fraction(x) for x in (list(v) + [0] * G)[:G]))
                 for a, v in (("0", (0,)), ("1/3", (-2, 0)), ("1/2", (-1, -1)), ("1/6", (0, -4)), ("0", ("1/2",)))]
    extra = bcdata.sample_elements(datum, count, rng, level=N, max_weight=2)
    if k == "alg_num_model":
        extra = [bcdata.AlgNumModelElem(s.zeta, tuple(Fraction(-(abs(x.numerator) % 5)) for x in s.free))
                 for s in extra]
        if R is not None:
            extra = [bcdata.AlgNumModelElem(s.zeta, s.free[:R] + (Fraction(0),) * (len(s.free) - R))
                     for s in extra]
    return fixed + extra


def relation_instances(datum: Datum, samples: list, n_rel: int = 6, with_weights: bool | None = None) -> list:
    """Every defining relation of B (and of B' when weights are present)."""
    al = lambda n: bcdata.alpha_of(datum, n)
    rels = []
    ns = range(1, n_rel + 1)
    one = Fraction(1)
    for n in ns:
        for m in ns:
            rels.append(Relation(f"mu_mult", ((one, word(Mu(n), Mu(m))),), ((one, word(Mu(n * m))),)))
            rels.append(Relation(f"mustar_mult", ((one, word(MuStar(n), MuStar(m))),),
                                 ((one, word(MuStar(n * m))),)))
            if math.gcd(al(n), al(m)) == 1:
                rels.append(Relation("mu_mustar_commute", ((one, word(Mu(n), MuStar(m))),),
                                     ((one, word(MuStar(m), Mu(n))),)))
    for n in ns:
        rels.append(Relation("range_projection_idempotent",
                             ((one, word(Mu(n), MuStar(n), Mu(n), MuStar(n))),),
                             ((one, word(Mu(n), MuStar(n))),)))
        rels.append(Relation("source_projection_idempotent",
                             ((one, word(MuStar(n), Mu(n), MuStar(n), Mu(n))),),
                             ((one, word(MuStar(n), Mu(n))),)))
        for s in samples:
            lhs = ((one, word(Mu(n), S(s), MuStar(n))),)
            if bcdata.in_image(datum, n, s):
                c = Fraction(1, al(n))
                rhs = tuple((c, word(S(x))) for x in bcdata.rho_fiber(datum, n, s))
            else:
                rhs = ()
            rels.append(Relation("mu_s_mustar", lhs, rhs))
    e0 = bcdata.identity(datum)
    rels.append(Relation("unit", ((one, word(S(e0))),), ((one, word()),)))
    for s, t in itertools.product(samples, repeat=2):
        rels.append(Relation("group_law", ((one, word(S(s), S(t))),), ((one, word(S(s + t))),)))
    if with_weights is None:
        with_weights = datum.rank > 0
    if with_weights:
        R = datum.rank
        lams = [tuple(v) for v in itertools.product((-1, 0, 1), repeat=R)][:9]
        for a in lams:
            rels.append(Relation("weight_inverse", ((one, word(W(a), W(tuple(-x for x in a)))),),
                                 ((one, word()),)))
            for b in lams[:3]:
                rels.append(Relation("weight_mult", ((one, word(W(a), W(b))),),
                                     ((one, word(W(tuple(x + y for x, y in zip(a, b))))),)))
            for s in samples:
                rels.append(Relation("weight_s_commute", ((one, word(W(a), S(s))),),
                                     ((one, word(S(s), W(a))),)))
            for n in ns:
                an = al(n)
                rels.append(Relation("weight_mu", ((one, word(W(a), Mu(n))),),
                                     ((one, word(Mu(n), W(tuple(an * x for x in a)))),)))
                rels.append(Relation("mustar_weight", ((one, word(MuStar(n), W(a))),),
                                     ((one, word(W(tuple(an * x for x in a)), MuStar(n))),)))
    return rels


def _restrict_lattice(datum: Datum, rep: Representation, rels: list) -> list:
    """Trim weight exponent vectors to the truncated lattice rank."""
    R = rep.trunc.R
    out = []
    for rel in rels:
        def fix(terms):
            return tuple((c, GenWord(tuple(W(x.exps[:R]) if isinstance(x, W) else x for x in w.letters),
                                     w.scalar)) for c, w in terms)
        out.append(Relation(rel.name, fix(rel.lhs), fix(rel.rhs)))
    return out


def _instance_level(rep: Representation, rel: Relation) -> int:
    L = 1
    for w in rel.words():
        for x in w.letters:
            if isinstance(x, S):
                L = math.lcm(L, bcdata.iota_phase(rep.datum, rep.iota, x.elem).denominator)
    if rep.level % L:
        raise LevelTooSmall(f"relation {rel.name} needs embedding level divisible by {L}")
    return L


def _group_rows(keys: np.ndarray):
    """Unique rows of an integer matrix and the inverse map, via lexsort."""
    order = np.lexsort(keys.T[::-1])
    sk = keys[order]
    new = np.ones(len(sk), dtype=bool)
    new[1:] = np.any(sk[1:] != sk[:-1], axis=1)
    gid = np.cumsum(new) - 1
    inv = np.empty(len(keys), dtype=np.int64)
    inv[order] = gid
    return sk[new], inv


def evaluate_relation(rep: Representation, rel: Relation):
    """Exact comparison of both sides on interior columns.

    Returns (interior mask, failing column indices, deviations of failures).
    """
    L = _instance_level(rep, rel)
    imgs = [(c, +1, rep.apply(w, level=L)) for c, w in rel.lhs] + \
           [(c, -1, rep.apply(w, level=L)) for c, w in rel.rhs]
    bnd = np.zeros(rep.B, dtype=bool)
    for _, _, img in imgs:
        bnd |= img.bnd
    interior = ~bnd
    if not imgs:
        return interior, np.array([], dtype=np.int64), np.array([])
    den = 1
    for c, _, _ in imgs:
        den = math.lcm(den, Fraction(c).denominator)
    keys, weights = [], []
    cols = np.arange(rep.B, dtype=np.int64)
    for c, sign, img in imgs:
        c = Fraction(c)
        wgt = sign * c.numerator * (den // c.denominator)
        sel = interior & img.alive
        if not sel.any():
            continue
        tflat = rep.flat(img.n[sel], img.K[sel])
        cols_sel = cols[sel]
        block = np.column_stack([cols_sel, tflat, img.mexp[sel], img.e[sel]])
        keys.append(block)
        weights.append(np.full(len(cols_sel), wgt, dtype=np.int64))
    if not keys:
        return interior, np.array([], dtype=np.int64), np.array([])
    keys = np.concatenate(keys)
    weights = np.concatenate(weights)
    uk, inv = _group_rows(keys)
    acc = np.zeros(len(uk), dtype=np.int64)
    np.add.at(acc, inv, weights)
    nz = acc != 0
    if not nz.any():
        return interior, np.array([], dtype=np.int64), np.array([])
    # Leftover phases must still cancel in Q(zeta_L): reduce mod Phi_L.
    uk, acc = uk[nz], acc[nz]
    table = np.array(reduction_table(L), dtype=np.int64)
    groups, ginv = _group_rows(uk[:, :-1])
    canon = np.zeros((len(groups), euler_phi(L)), dtype=np.int64)
    np.add.at(canon, ginv, acc[:, None] * table[uk[:, -1] % L])
    bad = np.any(canon != 0, axis=1)
    if not bad.any():
        return interior, np.array([], dtype=np.int64), np.array([])
    bad_groups = groups[bad]
    # magnitude of the discrepancy, for the report
    ang = 2 * np.pi * np.arange(euler_phi(L)) / L
    basis = np.exp(1j * ang)
    dev = np.abs(canon[bad] @ basis) / den
    if rep.trunc.R:
        dev = dev * np.exp(bad_groups[:, 2:2 + rep.trunc.R] @ rep.lam_logs)
    return interior, bad_groups[:, 0], dev


def check_relations(datum: Datum, iota: Embedding | None = None, trunc: TruncSpec | None = None,
                    samples: list | None = None, n_rel: int = 6, rels: list | None = None,
                    max_witnesses: int = 5) -> list:
    """Verify all relations on interior basis vectors, grouped by relation name."""
    rep = Representation(datum, iota, trunc)
    if samples is None:
        samples = relation_samples(datum, R=rep.trunc.R)
    if rels is None:
        rels = relation_instances(datum, samples, n_rel, with_weights=rep.trunc.R > 0)
    rels = _restrict_lattice(datum, rep, rels)
    reports: dict = {}
    for rel in rels:
        rr = reports.setdefault(rel.name, RelationReport(rel.name))
        interior, bad_cols, dev = evaluate_relation(rep, rel)
        rr.instances += 1
        rr.interior_count += int(interior.sum())
        rr.boundary_count += int((~interior).sum())
        if len(bad_cols):
            rr.max_deviation = max(rr.max_deviation, float(dev.max()))
            for c in bad_cols[:max(0, max_witnesses - len(rr.witnesses))]:
                rr.witnesses.append({"basis": str(rep.basis_idx(int(c))), "instance": str(rel)})
    reports["mu_adjoint"] = check_adjoint(rep, n_rel)
    return list(reports.values())


def check_adjoint(rep: Representation, n_rel: int = 6) -> RelationReport:
    """R(mu_m*) is the adjoint of R(mu_m) on the truncation."""
    rr = RelationReport("mu_adjoint")
    for m in range(1, n_rel + 1):
        A = rep.sparse(word(Mu(m)))
        Bs = rep.sparse(word(MuStar(m)))
        rr.instances += 1
        rr.boundary_count += len(A.boundary | Bs.boundary)
        rr.interior_count += rep.B - len(A.boundary | Bs.boundary)
        adj = {(c, r): np.conj(v) for (r, c), v in A.entries.items()}
        for key in sorted(set(adj) | set(Bs.entries)):
            d = abs(adj.get(key, 0) - Bs.entries.get(key, 0))
            if d != 0:
                rr.max_deviation = max(rr.max_deviation, float(d))
                if len(rr.witnesses) < 5:
                    rr.witnesses.append({"basis": str(rep.basis_idx(key[1])),
                                         "instance": f"mu{m}* vs adjoint of mu{m}"})
    return rr


@dataclass
class ProjectionReport:
    relation: str
    interior_count: int
    boundary_count: int
    support_size: int
    predicted_support_size: int
    ok: bool
    witnesses: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"relation": self.relation, "interior_count": self.interior_count,
                "boundary_count": self.boundary_count, "max_deviation": 0.0 if self.ok else 1.0,
                "witnesses": self.witnesses, "support_size": self.support_size,
                "predicted_support_size": self.predicted_support_size}


def check_projections(datum: Datum, trunc: TruncSpec | None = None, m: int = 2,
                      iota: Embedding | None = None) -> list:
    rep = Representation(datum, iota, trunc)
    out = []
    am = rep.alpha(m)
    for name, w, predicted in (
            ("source_projection", word(MuStar(m), Mu(m)),
             np.all(rep.K % am == 0, axis=1) if rep.trunc.R else np.ones(rep.B, dtype=bool)),
            ("range_projection", word(Mu(m), MuStar(m)), rep.n % m == 0)):
        img = rep.apply(w)
        img2 = rep.apply(w * w)
        interior = ~(img.bnd | img2.bnd)
        cols = np.arange(rep.B)
        tflat = rep.flat(img.n, img.K)
        diag01 = np.where(img.alive, (tflat == cols) & (img.e == 0) & np.all(img.mexp == 0, axis=1), True)
        idem = (img.alive == img2.alive)
        bad = interior & ~(diag01 & idem & (img.alive == predicted))
        wit = [str(rep.basis_idx(int(c))) for c in np.nonzero(bad)[0][:5]]
        out.append(ProjectionReport(f"{name}(m={m})", int(interior.sum()), int((~interior).sum()),
                                    int((interior & img.alive).sum()), int((interior & predicted).sum()),
                                    not bad.any(), wit))
    return out


# ---------------------------------------------------------------- time evolution


def _norm_log(rep: Representation, s) -> float:
    a = bcdata.norm_exps(rep.datum, s)
    R = rep.trunc.R
    if any(x != 0 for x in a[R:]):
        raise LatticeMismatch(f"N({s}) leaves the declared progression lattice")
    return float(sum(float(x) * h for x, h in zip(a[:R], rep.h_logs)))


def time_evolve(rep: Representation, w: GenWord, t: float) -> GenWord:
    """sigma_t on a word: s -> W(h(N(s)))^(-it) s, mu_n -> g(n)^(it) mu_n, W fixed."""
    letters = []
    scalar = complex(w.scalar)
    gE = lambda n: rep.energy_rank * math.log(rep.g(n))
    for x in w.letters:
        if isinstance(x, S):
            L = _norm_log(rep, x.elem)
            if L != 0.0 and t != 0:
                letters.append(WPow(L, -1j * t))
            letters.append(x)
        elif isinstance(x, Mu):
            scalar *= cmath.exp(1j * t * gE(x.m))
            letters.append(x)
        elif isinstance(x, MuStar):
            scalar *= cmath.exp(-1j * t * gE(x.m))
            letters.append(x)
        else:
            letters.append(x)
    return GenWord(tuple(letters), scalar)


def normalize_word(w: GenWord) -> GenWord:
    """Merge adjacent weight powers with a common base; drop trivial ones."""
    out = []
    for x in w.letters:
        if isinstance(x, WPow) and out and isinstance(out[-1], WPow) and out[-1].log_base == x.log_base:
            out[-1] = WPow(x.log_base, out[-1].power + x.power)
        else:
            out.append(x)
    out = [x for x in out if not (isinstance(x, WPow) and (x.power == 0 or x.log_base == 0))]
    return GenWord(tuple(out), w.scalar)


def check_covariance(rep: Representation, t: float, w: GenWord) -> float:
    """max over interior of |R(sigma_t(a)) - e^{itH} R(a) e^{-itH}|, relative to |R(a)|."""
    lhs_img = rep.apply(time_evolve(rep, w, t), want_float=True)
    rhs_img = rep.apply(w, want_float=True)
    interior = ~(lhs_img.bnd | rhs_img.bnd) & rhs_img.alive
    if not interior.any():
        return 0.0
    L = rep.values(lhs_img)[interior]
    Rv = rep.values(rhs_img)[interior]
    E_col = rep.energies()[interior]
    E_row = rep.energies(rhs_img.n[interior], rhs_img.K[interior])
    R = np.exp(1j * t * E_row) * Rv * np.exp(-1j * t * E_col)
    same_target = (lhs_img.n[interior] == rhs_img.n[interior]).all()
    if not same_target:
        return math.inf
    return float(np.max(np.abs(L - R) / np.maximum(1.0, np.abs(R))))


def generator_pool(rep: Representation, samples: list, n_gen: int = 6) -> list:
    pool = [word(S(s)) for s in samples]
    pool += [word(Mu(m)) for m in range(1, n_gen + 1)]
    pool += [word(MuStar(m)) for m in range(1, n_gen + 1)]
    if rep.trunc.R and not rep.diagonal:
        R = rep.trunc.R
        pool += [word(W(tuple(int(i == r) * sgn for i in range(R)))) for r in range(R) for sgn in (1, -1)]
    return pool


# ---------------------------------------------------------------- Gibbs traces


def gibbs_trace(rep: Representation, w: GenWord, beta: float) -> complex:
    """Tr(R(w) e^{-beta H}) / Tr(e^{-beta H}) over the truncated basis.

    The word acts on the untruncated space, so the diagonal entries are
    exact; only the trace is cut off.
    """
    img = rep.apply(w, clip=False, want_float=True)
    diag = img.alive & (img.n == rep.n) & np.all(img.K == rep.K, axis=1)
    E = rep.energies()
    E0 = E.min()
    wts = np.exp(-beta * (E - E0))
    Z = math.fsum(wts.tolist())
    v = rep.values(img, diag)[diag] * wts[diag]
    return complex(math.fsum(v.real.tolist()), math.fsum(v.imag.tolist())) / Z


# ---------------------------------------------------------------- symmetries


def symmetry_conjugate(datum: Datum, g: bcdata.GaloisElem, iota: Embedding | None = None,
                       trunc: TruncSpec | None = None, samples: list | None = None, n_gen: int = 6) -> bool:
    """R_iota(tau_gamma(a)) == R_{iota o gamma}(a) for generators a, exactly."""
    iota = iota or bcdata.standard_embedding(datum)
    rep = Representation(datum, iota, trunc)
    rep_g = Representation(datum, bcdata.compose_embedding(datum, iota, g), trunc)
    samples = samples if samples is not None else relation_samples(datum)
    pairs = [(word(S(bcdata.galois_apply(datum, g, s))), word(S(s))) for s in samples]
    pairs += [(word(Mu(m)), word(Mu(m))) for m in range(1, n_gen + 1)]
    pairs += [(word(MuStar(m)), word(MuStar(m))) for m in range(1, n_gen + 1)]
    for wa, wb in pairs:
        a, b = rep.apply(wa), rep_g.apply(wb)
        same = (np.array_equal(a.alive, b.alive) and np.array_equal(a.bnd, b.bnd)
                and np.array_equal(a.n[a.alive], b.n[b.alive]) and np.array_equal(a.K[a.alive], b.K[b.alive])
                and np.array_equal(a.e[a.alive], b.e[b.alive]) and np.array_equal(a.mexp[a.alive], b.mexp[b.alive]))
        if not same:
            return False
    return True


# ---------------------------------------------------------------- alpha = 1 system


def positive_rationals(bound: int) -> list:
    return sorted({Fraction(a, b) for a in range(1, bound + 1) for b in range(1, bound + 1)})


@dataclass
class AlphaOneReport:
    theta: Fraction
    index_size: int
    checks: int = 0
    boundary: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"relation": "alpha_one", "interior_count": self.checks, "boundary_count": self.boundary,
                "max_deviation": 0.0 if self.ok else 1.0, "witnesses": self.failures[:5]}


class AlphaOneRep:
    """The representation of Q[Q] x| Q_+^* on l^2 of truncated positive rationals.

    R(a) eps_r = v(a)^r eps_r with v(a) = exp(2 pi i theta a), and
    R(mu_s) eps_r = eps_{s r}; phases are kept exactly as elements of Q/Z.
    """

    def __init__(self, theta, bound: int = 12):
        self.theta = bcdata.as_fraction(theta.value if isinstance(theta, bcdata.QmodZ) else theta)
        self.bound = bound
        self.index = positive_rationals(bound)
        self._inside = set(self.index)

    def inside(self, r: Fraction) -> bool:
        return r in self._inside

    def apply(self, letters, r: Fraction):
        """Returns (phase in Q/Z, target) or None when leaving the truncation."""
        phase = Fraction(0)
        for x in reversed(letters):
            if isinstance(x, S):
                phase += self.theta * x.elem.value * r
            elif isinstance(x, Mu):
                r = r * x.m
            elif isinstance(x, MuStar):
                r = r / x.m
            else:
                raise TypeError(f"unsupported letter {x!r}")
            if not self.inside(r):
                return None
        return phase % 1, r

    def check(self, elements: list, scalings: list) -> AlphaOneReport:
        rep = AlphaOneReport(self.theta, len(self.index))
        for r in self.index:
            for s in scalings:
                # mu_s are unitaries: mu_s* mu_s = mu_s mu_s* = 1
                for letters in ((MuStar(s), Mu(s)), (Mu(s), MuStar(s))):
                    got = self.apply(letters, r)
                    if got is None:
                        rep.boundary += 1
                        continue
                    rep.checks += 1
                    if got != (Fraction(0), r):
                        rep.failures.append(f"unitarity {letters} at r={r}")
                for a in elements:
                    got = self.apply((Mu(s), S(a), MuStar(s)), r)
                    if got is None:
                        rep.boundary += 1
                        continue
                    rep.checks += 1
                    want = ((self.theta * a.value * r / s) % 1, r)
                    if got != want:
                        rep.failures.append(f"conjugation s={s} a={a} at r={r}")
            for a in elements:
                for b in elements:
                    rep.checks += 1
                    if self.apply((S(a), S(b)), r) != self.apply((S(a + b),), r):
                        rep.failures.append(f"group law {a},{b} at r={r}")
        return rep


def alpha_one_rep(theta, bound: int = 12, elements: list | None = None, scalings=(1, 2, 3, 5)) -> AlphaOneReport:
    rep = AlphaOneRep(theta, bound)
    if elements is None:
        elements = [bcdata.GermElem(Fraction(a, b)) for a, b in ((0, 1), (1, 1), (2, 3), (-5, 4), (7, 6))]
    return rep.check(elements, list(scalings))


# ---------------------------------------------------------------- rank two


@dataclass
class Rank2Report:
    checks: int = 0
    leakage: int = 0
    boundary: int = 0
    switch_failures: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.leakage == 0 and self.switch_failures == 0 and not self.failures

    def to_json(self) -> dict:
        return {"relation": "rank2_diagonal", "interior_count": self.checks, "boundary_count": self.boundary,
                "max_deviation": float(self.leakage + self.switch_failures), "witnesses": self.failures[:5]}


class Rank2Rep:
    """R on l^2(N^2): mu_{n,m} eps_{k,l} = eps_{nk,ml}, (s1,s2) acts by u1(s1)^k u2(s2)^l."""

    def __init__(self, iota: Embedding, bound: int = 24):
        self.iota = iota
        self.bound = bound

    def apply(self, letters, k: int, l: int):
        phase = Fraction(0)
        for x in reversed(letters):
            kind = x[0]
            if kind == "s":
                a, b = x[1]
                phase += self.iota.unit * a.value * k + self.iota.unit2 * b.value * l
            elif kind == "mu":
                k, l = k * x[1], l * x[2]
            elif kind == "mustar":
                if k % x[1] or l % x[2]:
                    return Fraction(0), None
                k, l = k // x[1], l // x[2]
            elif kind == "swap":
                k, l = l, k
            if k > self.bound or l > self.bound:
                return None
        return phase % 1, (k, l)


def rank2_rep(iota: Embedding, bound: int = 24, elements: list | None = None, n_gen: int = 4,
              rng: random.Random | None = None, words: int = 200) -> Rank2Report:
    rng = rng or random.Random(0)
    rep = Rank2Rep(iota, bound)
    QZ = bcdata.QmodZ
    N = iota.level
    if elements is None:
        elements = [bcdata.PairElem(QZ(Fraction(rng.randrange(N), N)), QZ(Fraction(rng.randrange(N), N)))
                    for _ in range(6)]
    gens = [("s", (p.a, p.b)) for p in elements]
    gens += [("mu", n, n) for n in range(1, n_gen + 1)] + [("mustar", n, n) for n in range(1, n_gen + 1)]
    report = Rank2Report()
    letter_words = [(g,) for g in gens]
    letter_words += [tuple(rng.choice(gens) for _ in range(rng.randint(2, 4))) for _ in range(words)]
    for lw in letter_words:
        for k in range(1, bound + 1):
            got = rep.apply(lw, k, k)
            if got is None:
                report.boundary += 1
                continue
            report.checks += 1
            _, tgt = got
            if tgt is not None and tgt[0] != tgt[1]:
                report.leakage += 1
                report.failures.append(f"{lw} leaks eps_{k},{k} to eps_{tgt}")
    # the switch commutes with mu_{n,n} on the diagonal subspace
    for n in range(1, n_gen + 1):
        for k in range(1, bound + 1):
            a = rep.apply((("swap",), ("mu", n, n)), k, k)
            b = rep.apply((("mu", n, n), ("swap",)), k, k)
            if a is None or b is None:
                report.boundary += 1
                continue
            report.checks += 1
            if a != b:
                report.switch_failures += 1
                report.failures.append(f"switch vs mu_{n},{n} at eps_{k},{k}")
    # on the diagonal, (s1,s2) acts by the product phase (u1(s1) u2(s2))^k
    for p in elements:
        for k in range(1, bound + 1):
            ph, _ = rep.apply((("s", (p.a, p.b)),), k, k)
            report.checks += 1
            want = ((iota.unit * p.a.value + iota.unit2 * p.b.value) * k) % 1
            if ph != want:
                report.failures.append(f"diagonal phase of {p} at k={k}")
    return report
