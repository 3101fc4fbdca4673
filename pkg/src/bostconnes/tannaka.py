"""Sigma-graded vector spaces, the functors sigma_n and rho_n, and automorphism pairs.

Only the trivial-Galois-action picture is modeled: a graded space is a
finite map grade -> dimension, and a morphism is one matrix per grade.
Automorphism matrices are exact (entries CycloNumber) whenever every
eigenvalue embeds as a root of unity, and complex numpy arrays otherwise.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import bcdata
from .bcdata import Datum, Embedding
from .errors import BCError, KindMismatch, NotDiagonalizable, NotInImage
from .exactalg import CycloNumber

TOL = 1e-10


# ---------------------------------------------------------------- graded spaces


@dataclass(eq=False)
class GradedSpace:
    datum: Datum
    dims: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for s, d in self.dims.items():
            bcdata.check_kind(self.datum, s)
            if int(d) != d or d < 0:
                raise ValueError(f"dimension {d} at grade {s} is not a non-negative integer")
            if d:
                clean[s] = clean.get(s, 0) + int(d)
        self.dims = clean

    @property
    def total(self) -> int:
        return sum(self.dims.values())

    def __eq__(self, other):
        return isinstance(other, GradedSpace) and self.datum == other.datum and self.dims == other.dims

    def scaled(self, k: int) -> "GradedSpace":
        return GradedSpace(self.datum, {s: k * d for s, d in self.dims.items()})

    def to_json(self) -> list:
        return [{"grade": bcdata.elem_to_json(s), "dim": d} for s, d in sorted(self.dims.items())]

    @classmethod
    def from_json(cls, datum: Datum, obj) -> "GradedSpace":
        if isinstance(obj, dict):
            obj = [{"grade": k, "dim": v} for k, v in obj.items()]
        dims: dict = {}
        for row in obj:
            s = bcdata.elem_from_json(datum, row["grade"])
            dims[s] = dims.get(s, 0) + int(row["dim"])
        return cls(datum, dims)

    def __str__(self):
        body = ", ".join(f"{s}:{d}" for s, d in sorted(self.dims.items()))
        return "{" + body + "}"


def _check(datum: Datum, V: GradedSpace) -> None:
    if V.datum.kind != datum.kind:
        raise KindMismatch(f"space graded by {V.datum.kind}, datum is {datum.kind}")


def functor_sigma_cat(datum: Datum, n: int, V: GradedSpace) -> GradedSpace:
    """sigma_n(V)^s = sum over s' in rho_n(s) of V^{s'}."""
    _check(datum, V)
    out: dict = {}
    for s, d in V.dims.items():
        t = bcdata.sigma_apply(datum, n, s)
        out[t] = out.get(t, 0) + d
    return GradedSpace(datum, out)


def functor_rho_cat(datum: Datum, n: int, V: GradedSpace) -> GradedSpace:
    """rho_n(V) = V^{alpha(n)} with grade s carrying V^{sigma_n(s)}."""
    _check(datum, V)
    bad = [s for s in V.dims if not bcdata.in_image(datum, n, s)]
    if bad:
        raise NotInImage(f"grades outside the image of sigma_{n}", bad)
    out: dict = {}
    for s, d in V.dims.items():
        for t in bcdata.rho_fiber(datum, n, s):
            out[t] = out.get(t, 0) + d
    return GradedSpace(datum, out)


def check_sigma_rho_cat(datum: Datum, n: int, V: GradedSpace) -> bool:
    """sigma_n rho_n V == V^{alpha(n)}, grade by grade."""
    return functor_sigma_cat(datum, n, functor_rho_cat(datum, n, V)) == V.scaled(bcdata.alpha_of(datum, n))


# morphisms: one matrix per grade, shape (dim V'^s, dim V^s)


def sigma_on_morphism(datum: Datum, n: int, f: dict) -> dict:
    """Block-diagonal sum of f_{s'} over the fiber of each grade."""
    groups: dict = {}
    for s in sorted(f):
        groups.setdefault(bcdata.sigma_apply(datum, n, s), []).append(np.asarray(f[s]))
    return {t: _block_diag(blocks) for t, blocks in groups.items()}


def rho_on_morphism(datum: Datum, n: int, f: dict) -> dict:
    """rho_n(f) at grade t is f at sigma_n(t): the block-diagonal reading."""
    out = {}
    for s, m in f.items():
        if not bcdata.in_image(datum, n, s):
            raise NotInImage(f"grade {s} outside the image of sigma_{n}", [s])
        for t in bcdata.rho_fiber(datum, n, s):
            out[t] = np.asarray(m)
    return out


def compose_morphisms(g: dict, f: dict) -> dict:
    return {s: np.asarray(g[s]) @ np.asarray(f[s]) for s in f if s in g}


def _block_diag(blocks: list) -> np.ndarray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), dtype=np.result_type(*blocks))
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r, c = r + b.shape[0], c + b.shape[1]
    return out


# ---------------------------------------------------------------- exact matrices


def _zero():
    return CycloNumber.const(0)


def _one():
    return CycloNumber.const(1)


def mat_identity(d: int, c=None) -> list:
    c = _one() if c is None else c
    return [[c if i == j else _zero() for j in range(d)] for i in range(d)]


def mat_mul(A: list, B: list) -> list:
    n, k, m = len(A), len(B), len(B[0]) if B else 0
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = _zero()
            for t in range(k):
                a, b = A[i][t], B[t][j]
                if not (a.is_zero() or b.is_zero()):
                    acc = acc + a * b
            row.append(acc)
        out.append(row)
    return out


def mat_add(A: list, B: list) -> list:
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_pow(A: list, e: int) -> list:
    out = mat_identity(len(A))
    base = A
    while e:
        if e & 1:
            out = mat_mul(out, base)
        base = mat_mul(base, base)
        e >>= 1
    return out


def mat_is_zero(A: list) -> bool:
    return all(x.is_zero() for row in A for x in row)


def charpoly(A: list) -> list:
    """Coefficients c_0..c_d of det(lambda I - A), exactly (Faddeev-LeVerrier)."""
    d = len(A)
    c = [None] * (d + 1)
    c[d] = _one()
    M = [[_zero()] * d for _ in range(d)]
    for k in range(1, d + 1):
        M = mat_add(mat_mul(A, M), mat_identity(d, c[d - k + 1]))
        AM = mat_mul(A, M)
        tr = _zero()
        for i in range(d):
            tr = tr + AM[i][i]
        c[d - k] = tr * Fraction(-1, k)
    return c


def poly_from_roots(roots: list) -> list:
    """Coefficients of prod (lambda - r), low degree first."""
    out = [_one()]
    for r in roots:
        nxt = [_zero()] * (len(out) + 1)
        for i, a in enumerate(out):
            nxt[i + 1] = nxt[i + 1] + a
            nxt[i] = nxt[i] - a * r
        out = nxt
    return out


def mat_rank(A: list) -> int:
    """Rank over Q(zeta_N) by Gaussian elimination."""
    M = [list(r) for r in A]
    rank, rows = 0, len(M)
    cols = len(M[0]) if M else 0
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if not M[r][c].is_zero()), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = M[rank][c].inverse()
        M[rank] = [x * inv for x in M[rank]]
        for r in range(rows):
            if r != rank and not M[r][c].is_zero():
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[rank])]
        rank += 1
    return rank


# ---------------------------------------------------------------- automorphism pairs


def iota_exact(datum: Datum, iota: Embedding, s) -> CycloNumber | None:
    """iota(s) as a CycloNumber, or None when |iota(s)| != 1."""
    if any(x != 0 for x in bcdata.norm_exps(datum, s)):
        return None
    ph = bcdata.iota_phase(datum, iota, s)
    return CycloNumber.root(ph.denominator, ph)


@dataclass(eq=False)
class AutPair:
    """(V, Phi) with Phi diagonalizable and eigenvalues iota(s) for the declared s."""

    datum: Datum
    matrix: object
    eigenvalues: tuple
    iota: Embedding | None = None
    validate: bool = True

    def __post_init__(self):
        self.iota = self.iota or bcdata.standard_embedding(self.datum)
        self.eigenvalues = tuple(self.eigenvalues)
        for s in self.eigenvalues:
            bcdata.check_kind(self.datum, s)
        if not self.exact:
            self.matrix = np.asarray(self.matrix, dtype=np.complex128)
        if len(self.eigenvalues) != self.dim or any(len(r) != self.dim for r in self.matrix):
            raise ValueError("matrix shape and eigenvalue count disagree")
        if self.validate:
            self.check()

    @property
    def exact(self) -> bool:
        return not isinstance(self.matrix, np.ndarray)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def eig_values(self) -> list:
        if self.exact:
            return [iota_exact(self.datum, self.iota, s) for s in self.eigenvalues]
        return [bcdata.iota_complex(self.datum, self.iota, s) for s in self.eigenvalues]

    def check(self) -> None:
        """Raise NotDiagonalizable unless Phi is diagonalizable with the declared spectrum."""
        if self.exact:
            roots = self.eig_values()
            if any(r is None for r in roots):
                raise NotDiagonalizable("declared eigenvalue off the unit circle needs a complex matrix")
            cp = charpoly(self.matrix)
            want = poly_from_roots(roots)
            if any(a != b for a, b in zip(cp, want)):
                raise NotDiagonalizable("characteristic polynomial differs from the declared spectrum")
            # minimal polynomial with simple roots <=> diagonalizable
            P = mat_identity(self.dim)
            for s in dict.fromkeys(self.eigenvalues):
                r = iota_exact(self.datum, self.iota, s)
                P = mat_mul(P, mat_add(self.matrix, mat_identity(self.dim, -r)))
            if not mat_is_zero(P):
                raise NotDiagonalizable("Phi is not diagonalizable")
            return
        A = self.matrix
        w, vecs = np.linalg.eig(A)
        if np.linalg.cond(vecs) > 1 / TOL:
            raise NotDiagonalizable("eigenvector matrix is numerically singular")
        want = sorted(self.eig_values(), key=lambda z: (round(z.real, 8), round(z.imag, 8)))
        got = sorted(w.tolist(), key=lambda z: (round(z.real, 8), round(z.imag, 8)))
        if any(abs(a - b) > TOL * max(1.0, abs(a)) for a, b in zip(want, got)):
            raise NotDiagonalizable("eigenvalues differ from the declared multiset")

    def to_complex(self) -> np.ndarray:
        if not self.exact:
            return self.matrix
        return np.array([[x.to_complex() for x in row] for row in self.matrix])


def frobenius(pair: AutPair, n: int) -> AutPair:
    """(V, Phi^n), eigenvalues pushed through sigma_n."""
    d = pair.datum
    mat = mat_pow(pair.matrix, n) if pair.exact else np.linalg.matrix_power(pair.matrix, n)
    eig = tuple(bcdata.sigma_apply(d, n, s) for s in pair.eigenvalues)
    return AutPair(d, mat, eig, pair.iota, validate=False)


def _verschiebung_matrix(phi, n: int, exact: bool):
    d = len(phi)
    if exact:
        M = [[_zero() for _ in range(n * d)] for _ in range(n * d)]
        for i in range(d):
            for j in range(d):
                M[i][(n - 1) * d + j] = phi[i][j]
        for b in range(1, n):
            for i in range(d):
                M[b * d + i][(b - 1) * d + i] = _one()
        return M
    M = np.zeros((n * d, n * d), dtype=np.complex128)
    M[:d, (n - 1) * d:] = phi
    for b in range(1, n):
        M[b * d:(b + 1) * d, (b - 1) * d:b * d] = np.eye(d)
    return M


def verschiebung(pair: AutPair, n: int) -> AutPair:
    """(V^n, V_n(Phi)): Phi in the top-right block, identities on the block subdiagonal.

    The declared spectrum becomes the union of the fibers rho_n(s), which
    needs alpha(n) = n and every eigenvalue in the image of sigma_n.
    """
    d = pair.datum
    if bcdata.alpha_of(d, n) != n:
        raise KindMismatch(f"V_{n} has {n} eigenvalues per block but alpha({n}) = {bcdata.alpha_of(d, n)}")
    bad = [s for s in pair.eigenvalues if not bcdata.in_image(d, n, s)]
    if bad:
        raise NotInImage(f"eigenvalues outside the image of sigma_{n}", bad)
    eig = tuple(t for s in pair.eigenvalues for t in bcdata.rho_fiber(d, n, s))
    # V_n(Phi) is block-permutation similar to the direct sum of the V_n of the
    # eigen-blocks, so the declared multiset is the concatenated fibers
    return AutPair(d, _verschiebung_matrix(pair.matrix, n, pair.exact), eig, pair.iota, validate=False)


def scalar_pair(datum: Datum, s, dim: int = 1, iota: Embedding | None = None) -> AutPair:
    iota = iota or bcdata.standard_embedding(datum)
    r = iota_exact(datum, iota, s)
    if r is None:
        z = bcdata.iota_complex(datum, iota, s)
        return AutPair(datum, z * np.eye(dim), (s,) * dim, iota)
    return AutPair(datum, mat_identity(dim, r), (s,) * dim, iota)


def check_verschiebung_diag(datum: Datum, s, n: int, iota: Embedding | None = None) -> bool:
    """char poly of V_n(iota(s)) is lambda^n - iota(s), with roots iota(rho_n(s)).

    Exact for cyclotomic iota(s); otherwise the roots are compared numerically.
    """
    iota = iota or bcdata.standard_embedding(datum)
    if not bcdata.in_image(datum, n, s):
        raise NotInImage(f"{s} is not in the image of sigma_{n}", [s])
    fiber = bcdata.rho_fiber(datum, n, s)
    r = iota_exact(datum, iota, s)
    if r is None:
        z = bcdata.iota_complex(datum, iota, s)
        M = _verschiebung_matrix(np.array([[z]]), n, exact=False)
        cp = np.poly(M)
        want = np.zeros(n + 1, dtype=complex)
        want[0], want[-1] = 1, -z
        roots = sorted(np.roots(cp).tolist(), key=lambda w: (round(w.real, 8), round(w.imag, 8)))
        fib = sorted((bcdata.iota_complex(datum, iota, t) for t in fiber),
                     key=lambda w: (round(w.real, 8), round(w.imag, 8)))
        return (np.allclose(cp, want, atol=TOL) and len(roots) == len(fib)
                and all(abs(a - b) <= TOL * max(1, abs(b)) for a, b in zip(roots, fib)))
    M = _verschiebung_matrix([[r]], n, exact=True)
    cp = charpoly(M)
    want = [-r] + [_zero()] * (n - 1) + [_one()]
    if any(a != b for a, b in zip(cp, want)):
        return False
    roots = [iota_exact(datum, iota, t) for t in fiber]
    # n distinct roots of a degree-n polynomial exhaust its root multiset
    distinct = all(a != b for a, b in itertools.combinations(roots, 2))
    return len(roots) == n and distinct and all(x ** n == r for x in roots)


def eig_to_grading(pair: AutPair) -> GradedSpace:
    """Grade s gets the eigenspace of iota(s)."""
    dims = {}
    if pair.exact:
        for s in dict.fromkeys(pair.eigenvalues):
            r = iota_exact(pair.datum, pair.iota, s)
            dims[s] = pair.dim - mat_rank(mat_add(pair.matrix, mat_identity(pair.dim, -r)))
    else:
        A = pair.matrix
        for s in dict.fromkeys(pair.eigenvalues):
            z = bcdata.iota_complex(pair.datum, pair.iota, s)
            dims[s] = pair.dim - np.linalg.matrix_rank(A - z * np.eye(pair.dim), tol=1e-8)
    if dims != dict(Counter(pair.eigenvalues)) or sum(dims.values()) != pair.dim:
        raise NotDiagonalizable(f"eigenspace dimensions {dims} do not fill the space")
    return GradedSpace(pair.datum, dims)


def grading_to_aut(V: GradedSpace, iota: Embedding | None = None) -> AutPair:
    """The diagonal automorphism acting by iota(s) on grade s."""
    iota = iota or bcdata.standard_embedding(V.datum)
    eig = tuple(s for s, d in sorted(V.dims.items()) for _ in range(d))
    roots = [iota_exact(V.datum, iota, s) for s in eig]
    if any(r is None for r in roots):
        mat = np.diag([bcdata.iota_complex(V.datum, iota, s) for s in eig])
    else:
        mat = [[roots[i] if i == j else _zero() for j in range(len(eig))] for i in range(len(eig))]
    return AutPair(V.datum, mat, eig, iota, validate=False)


def similar(p: AutPair, q: AutPair) -> bool:
    """Two diagonalizable automorphisms are similar iff their spectra agree."""
    p.check()
    q.check()
    return p.dim == q.dim and Counter(p.eigenvalues) == Counter(q.eigenvalues)


# ---------------------------------------------------------------- orbit category


def orbit_hom_dim(V: dict, Vp: dict, n: int) -> tuple:
    """dim Hom from V to V' in Vect_Z / (- (x) S_n), two ways.

    The first sums dim V^s dim V'^{ni+s} over i and s; the second folds
    both gradings to Z/n and pairs the fibers.
    """
    if n < 1:
        raise ValueError("n must be positive")
    V = {int(s): int(d) for s, d in V.items() if d}
    Vp = {int(s): int(d) for s, d in Vp.items() if d}
    first = 0
    if V and Vp:
        lo = (min(Vp) - max(V)) // n - 1
        hi = (max(Vp) - min(V)) // n + 1
        for i in range(lo, hi + 1):
            for s, d in V.items():
                first += d * Vp.get(n * i + s, 0)
    second = 0
    for c in range(n):
        fib = [s for s in V if s % n == c]
        fibp = [t for t in Vp if t % n == c]
        second += sum(V[a] * Vp[b] for a in fib for b in fibp)
    if first != second:
        raise BCError(f"orbit Hom dimensions disagree: {first} != {second}")
    return first, second
