"""Partition functions and Gibbs states, in closed form and as truncated traces.

Every series comes back as a SeriesResult carrying a rigorous bound on what
was left out.  Sums of many terms go through math.fsum, which is exactly
rounded, so the result does not depend on summation order.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import bcdata
from .bcdata import Datum, Embedding
from .errors import ConfigError, DivergentParameter
from .ghom import IDENTITY, GHom, g_from_primes

__all__ = ["SeriesResult", "GHom", "g_from_primes", "riemann_zeta", "polylog", "euler_partition",
           "partition_closed", "partition_truncated", "partition_trace", "gibbs_closed",
           "ground_state", "ground_state_phase", "galois_pullback_check", "case_of", "MARGIN"]

MARGIN = 1e-3
MAX_TERMS = 10_000_000


@dataclass(frozen=True)
class SeriesResult:
    value: complex | float
    tail_bound: float
    terms_used: int
    deviation: float | None = None

    def contains(self, x, slack: float = 0.0) -> bool:
        return abs(x - self.value) <= self.tail_bound + slack

    def to_json(self) -> dict:
        v = self.value
        out = {"value": repr(v.real) if isinstance(v, complex) else repr(float(v)),
               "tail_bound": repr(self.tail_bound), "terms_used": self.terms_used}
        if isinstance(v, complex):
            out["value_imag"] = repr(v.imag)
        if self.deviation is not None:
            out["deviation"] = repr(self.deviation)
        return out


def _fsum_c(z: np.ndarray) -> complex:
    return complex(math.fsum(z.real.tolist()), math.fsum(z.imag.tolist()))


def _require(beta: float, threshold: float, what: str) -> None:
    if not beta > threshold + MARGIN:
        raise DivergentParameter(f"beta={beta} must exceed {what} = {threshold} (margin {MARGIN})", threshold)


# ---------------------------------------------------------------- zeta and polylog


def _zeta_cut(beta: float, tol: float) -> int:
    # bracket half-width beta N^{-beta-1} / 16 from convexity of x^-beta
    N = math.ceil((beta / (16 * tol)) ** (1.0 / (beta + 1)))
    return min(max(N, 16), MAX_TERMS)


def _zeta_tail(beta: float, N: int) -> tuple:
    """Midpoint and half-width of the bracket for sum_{n>N} n^-beta.

    For convex decreasing f the tail lies in
    [int_N^oo f - f(N)/2, int_{N+1/2}^oo f].
    """
    lo = N ** (1 - beta) / (beta - 1) - 0.5 * N ** -beta
    hi = (N + 0.5) ** (1 - beta) / (beta - 1)
    return 0.5 * (lo + hi), max(0.5 * (hi - lo), beta * N ** (-beta - 1) / 16)


def riemann_zeta(beta: float, tol: float = 1e-12) -> SeriesResult:
    """zeta(beta) for real beta > 1 by direct summation plus an integral-test tail."""
    if not beta > 1:
        raise DivergentParameter(f"zeta(beta) diverges for beta={beta} <= 1", 1.0)
    N = _zeta_cut(beta, tol)
    n = np.arange(1, N + 1, dtype=np.float64)
    mid, half = _zeta_tail(beta, N)
    return SeriesResult(math.fsum(np.power(n, -beta).tolist()) + mid, half, N)


def _zeta_minus_one(s: float) -> SeriesResult:
    """zeta(s) - 1 with full relative precision for large s."""
    if s > 60:
        v = 2.0 ** -s + 3.0 ** -s
        return SeriesResult(v, 4.0 ** -s * (1 + 4 / (s - 1)), 2)
    N = _zeta_cut(s, 1e-18)
    n = np.arange(2, N + 1, dtype=np.float64)
    mid, half = _zeta_tail(s, N)
    return SeriesResult(math.fsum(np.power(n, -s).tolist()) + mid, half, N)


def _unit_phase_terms(phase: Fraction, n: np.ndarray) -> np.ndarray:
    """exp(2 pi i n phase) with n * phase reduced exactly mod 1."""
    num, den = phase.numerator, phase.denominator
    r = (n.astype(np.int64) * num) % den
    ang = 2 * np.pi * r / den
    return np.cos(ang) + 1j * np.sin(ang)


def polylog(beta: float, z, tol: float = 1e-12) -> SeriesResult:
    """Li_beta(z) = sum z^n n^-beta for |z| <= 1.

    z may be a complex number or, for points on the unit circle, an exact
    phase given as a Fraction (z = exp(2 pi i phase)).
    """
    phase = None
    if isinstance(z, Fraction):
        phase, z = z % 1, complex(math.cos(2 * math.pi * z), math.sin(2 * math.pi * z))
    z = complex(z)
    r = abs(z)
    if phase is not None or abs(r - 1) < 1e-15:
        r = 1.0
    if r > 1:
        raise DivergentParameter(f"|z|={r} > 1 is outside the disc of convergence", 1.0)
    if z == 0:
        return SeriesResult(0j, 0.0, 0)
    if r < 1:
        # |tail| <= r^{N+1} / ((N+1)^beta (1 - r)), beta >= 0 assumed for the monotone bound
        if beta < 0:
            raise DivergentParameter("negative order is not supported", 0.0)
        lr = math.log(r)
        N = 1
        while (N + 1) * lr - beta * math.log(N + 1) - math.log1p(-r) > math.log(tol) and N < MAX_TERMS:
            N *= 2
        n = np.arange(1, N + 1, dtype=np.float64)
        terms = np.exp(n * lr - beta * np.log(n) + 1j * n * math.atan2(z.imag, z.real))
        tail = math.exp((N + 1) * lr - beta * math.log(N + 1)) / (1 - r)
        return SeriesResult(_fsum_c(terms), tail, N)
    if not beta > 1:
        raise DivergentParameter(f"Li_beta on |z|=1 needs beta > 1, got {beta}", 1.0)
    if phase is None:
        phase = Fraction(math.atan2(z.imag, z.real) / (2 * math.pi)).limit_denominator(10 ** 12) % 1
    if phase == 0:
        return riemann_zeta(beta, tol)
    if phase.denominator <= HURWITZ_MAX_DEN:
        return _polylog_rational(beta, phase, tol)
    # Abel summation: partial sums of z^n are bounded by 2/|1-z|.
    gap = abs(1 - z)
    N = min(max(16, math.ceil((2 / (gap * tol)) ** (1 / beta))), MAX_TERMS)
    n = np.arange(1, N + 1, dtype=np.float64)
    terms = np.power(n, -beta) * _unit_phase_terms(phase, np.arange(1, N + 1))
    abel = 2 * (N + 1) ** -beta / gap
    zt = (N + 0.5) ** (1 - beta) / (beta - 1)
    return SeriesResult(_fsum_c(terms), min(abel, zt), N)


HURWITZ_MAX_DEN = 2048


def _polylog_rational(beta: float, phase: Fraction, tol: float) -> SeriesResult:
    """Li_beta(e(a/d)) = d^-beta sum_j e(aj/d) zeta(beta, j/d).

    Each Hurwitz zeta is summed to M terms and closed with the same convex
    bracket as zeta itself, so the bound stays rigorous.
    """
    d = phase.denominator
    M = _zeta_cut(beta, tol * d ** (beta - 1))
    x = np.arange(1, d + 1, dtype=np.float64) / d
    m = np.arange(M, dtype=np.float64)
    block = np.power(m[None, :] + x[:, None], -beta)
    hz = np.array([math.fsum(row) for row in block.tolist()])
    t = (M - 1) + x
    lo = t ** (1 - beta) / (beta - 1) - 0.5 * t ** -beta
    hi = (t + 0.5) ** (1 - beta) / (beta - 1)
    hz = hz + 0.5 * (lo + hi)
    half = np.maximum(0.5 * (hi - lo), beta * t ** (-beta - 1) / 16)
    w = _unit_phase_terms(phase, np.arange(1, d + 1)) * d ** -beta
    return SeriesResult(_fsum_c(w * hz), float(d ** -beta * half.sum()), d * M)


# ---------------------------------------------------------------- Euler products


def euler_partition(gh: GHom, beta: float, primes=None, tol: float = 1e-12,
                    max_terms: int = 2_000_000) -> SeriesResult:
    """prod_p (1 - g(p)^-beta)^-1 over the given primes, cross-checked by the Dirichlet sum.

    The Dirichlet side enumerates every integer supported on the primes with
    g(n) <= X; Rankin's trick bounds the rest by X^(sigma-beta) prod_p (1 - g(p)^-sigma)^-1.
    ``deviation`` is |product - Dirichlet sum|.
    """
    primes = sorted(gh.prime_values) if primes is None else sorted(int(p) for p in primes)
    lams = [gh.prime_values.get(p, float(p)) for p in primes]
    if any(lam <= 1 for lam in lams):
        raise DivergentParameter("some g(p) <= 1: the Euler factor has no convergent expansion", math.inf)
    if not beta > 0:
        raise DivergentParameter(f"beta={beta} must be positive", 0.0)
    if not primes:
        return SeriesResult(1.0, 0.0, 1, 0.0)
    logs = sorted(math.log(lam) for lam in lams)
    prod = math.exp(-math.fsum(math.log1p(-math.exp(-beta * L)) for L in logs))

    # pick sigma in (0, beta) and the cut X so that the Rankin bound is below tol
    best = None
    for sigma in np.linspace(beta * 0.1, beta * 0.95, 18):
        C = -math.fsum(math.log1p(-math.exp(-sigma * L)) for L in logs)
        logX = (C - math.log(tol)) / (beta - sigma)
        if best is None or logX < best[0]:
            best = (logX, sigma, C)
    logX, sigma, C = best
    # enumerate log g(n) <= logX in increasing order; a node whose largest
    # prime has index i spawns n*p_i and (n/p_i)*p_{i+1}, so each n once
    terms = [0.0]
    heap = [(logs[0], 0)] if logs[0] <= logX else []
    while heap and len(terms) < max_terms:
        lg, i = heapq.heappop(heap)
        terms.append(lg)
        for nxt, j in ((lg + logs[i], i), (lg - logs[i] + logs[i + 1], i + 1) if i + 1 < len(logs) else (math.inf, 0)):
            if nxt <= logX:
                heapq.heappush(heap, (nxt, j))
    if heap:
        logX = heap[0][0]
    tail = math.exp(C + (sigma - beta) * logX)
    dsum = math.fsum(math.exp(-beta * t) for t in terms)
    return SeriesResult(prod, tail, len(terms), abs(prod - dsum))


# ---------------------------------------------------------------- cases


def case_of(datum: Datum) -> str:
    if not datum.concrete:
        raise ConfigError(f"{datum.kind} is not concrete: no Hamiltonian with finite partition function")
    if datum.diagonal_rank_two:
        return "rank_two"
    return {"qmodz": "bc", "weil_zero": "bc", "weil": "weil", "alg_num_model": "infinite"}[datum.kind]


def _bc_series(beta: float, g: GHom, tol: float) -> SeriesResult:
    """sum g(n)^-beta = zeta(beta) prod_p (1 - p^-beta)/(1 - g(p)^-beta)."""
    z = riemann_zeta(beta, tol)
    corr = 1.0
    for p, lam in g.prime_values.items():
        corr *= (-math.expm1(-beta * math.log(p))) / (-math.expm1(-beta * math.log(lam)))
    return SeriesResult(z.value * corr, z.tail_bound * corr, z.terms_used)


def _threshold(case: str, g: GHom) -> tuple:
    b0 = g.beta0()
    if case == "infinite":
        return max(b0, 1.5), "max(beta0, 3/2)"
    if case == "rank_two":
        return b0 / 2, "beta0/2"
    return b0, "beta0"


def _progression_primes(datum: Datum, R: int | None) -> list:
    R = len(datum.generators) if R is None else R
    return bcdata.first_primes(R)


def partition_closed(datum: Datum, beta: float, g: GHom = IDENTITY, tol: float = 1e-12,
                     form: str = "geometric", R: int | None = None,
                     enforce_threshold: bool = True) -> SeriesResult:
    """Z(beta) from the case's closed form.

    bc        sum g(n)^-beta
    weil      sum g(n)^-beta / (1 - q^(-n beta/2)), or with form="polylog"
              sum_k Li_beta(q^(-k beta/2)) (needs g(n) = n)
    infinite  sum g(n)^-beta prod_{r<=R} (1 - p_r^(-n beta))^-1; R=None means
              all primes, i.e. zeta(n beta)
    rank_two  sum g(n)^(-2 beta)
    """
    case = case_of(datum)
    th, name = _threshold(case, g)
    if enforce_threshold:
        _require(beta, th, name)
    if case == "bc":
        return _bc_series(beta, g, tol)
    if case == "rank_two":
        return _bc_series(2 * beta, g, tol)
    if case == "weil":
        r = datum.q ** (-beta / 2)
        if form == "polylog":
            if not g.is_identity:
                raise ConfigError("the polylog form of Z needs g(n) = n")
            parts, tails = [], []
            k = 0
            while True:
                x = r ** k
                lk = polylog(beta, x if k else Fraction(0), tol)
                parts.append(complex(lk.value).real)
                tails.append(lk.tail_bound)
                k += 1
                rest = r ** k / (1 - r) ** 2
                if rest < tol or k > 4000:
                    break
            return SeriesResult(math.fsum(parts), math.fsum(tails) + rest, k)
        if form != "geometric":
            raise ConfigError(f"unknown form {form!r}")
        base = _bc_series(beta, g, tol)
        # sum g(n)^-beta r^n / (1 - r^n); g(n) >= 1 once every g(p) > 1
        N = 1
        while r ** (N + 1) / (1 - r) ** 2 > tol and N < MAX_TERMS:
            N *= 2
        n = np.arange(1, N + 1, dtype=np.float64)
        lg = g.log_values(N)
        rn = np.exp(n * math.log(r))
        extra = np.exp(-beta * lg) * rn / -np.expm1(n * math.log(r))
        return SeriesResult(base.value + math.fsum(extra.tolist()),
                            base.tail_bound + r ** (N + 1) / (1 - r) ** 2, max(N, base.terms_used))
    # infinite progressions: Z = Z_bc + sum g(n)^-beta (E_n - 1)
    base = _bc_series(beta, g, tol)
    primes = None if R is None else _progression_primes(datum, R)
    parts, tails = [], []
    n = 1
    while True:
        w = 1.0 / g_from_primes(g, n) ** beta
        if primes is None:
            e = _zeta_minus_one(n * beta)
            parts.append(w * e.value)
            tails.append(w * e.tail_bound)
        else:
            parts.append(w * math.expm1(-math.fsum(math.log1p(-p ** (-n * beta)) for p in primes)))
        s = (n + 1) * beta
        rest = 2.0 ** -s * (1 + 2 / (s - 1)) / -math.expm1(-beta * math.log(2))
        n += 1
        if rest < tol * 1e-3 or n > 10_000:
            break
    return SeriesResult(base.value + math.fsum(parts), base.tail_bound + math.fsum(tails) + rest,
                        max(n, base.terms_used))


def _energy_grid(datum: Datum, trunc, g: GHom, n: int) -> np.ndarray:
    """Energies of eps_{n, k} over the full k-grid, flattened."""
    case = case_of(datum)
    a = bcdata.alpha_of(datum, n)
    e0 = (2 if case == "rank_two" else 1) * math.log(g_from_primes(g, n))
    if not trunc.R:
        return np.array([e0])
    ks = np.arange(0, trunc.depth + 1, dtype=np.float64)
    grid = np.zeros((1,) * trunc.R)
    for r, h in enumerate(trunc.h_logs):
        shape = [1] * trunc.R
        shape[r] = trunc.depth + 1
        grid = grid + (a * h * ks).reshape(shape)  # -alpha(n) k log h with k = -ks
    return (e0 + grid).ravel()


def partition_trace(datum: Datum, trunc, beta: float, g: GHom = IDENTITY,
                    closed: SeriesResult | None = None) -> SeriesResult:
    """Tr exp(-beta H) over the truncated basis, one term per basis vector.

    ``tail_bound`` is how far the closed form (value plus its own tail) sits
    above the trace; pass ``closed`` to choose the comparison, otherwise the
    same-R closed form is used.
    """
    case = case_of(datum)
    if trunc.R == 0 and trunc.n_max > 1000:
        lg = g.log_values(trunc.n_max) * (2 if case == "rank_two" else 1)
        vals = [math.fsum(np.exp(-beta * lg).tolist())]
    else:
        vals = [math.fsum(np.exp(-beta * _energy_grid(datum, trunc, g, n)).tolist())
                for n in range(1, trunc.n_max + 1)]
    value = math.fsum(vals)
    if closed is None:
        try:
            closed = partition_closed(datum, beta, g, R=trunc.R if case == "infinite" else None,
                                      enforce_threshold=False)
        except DivergentParameter:
            closed = None
    tail = math.inf if closed is None else max(0.0, closed.value + closed.tail_bound - value)
    return SeriesResult(value, tail, trunc.size)


def partition_truncated(datum: Datum, trunc, beta: float, g: GHom = IDENTITY) -> SeriesResult:
    """The closed form restricted to exactly the truncation: per n a product of
    finite geometric sums over the progression generators."""
    case = case_of(datum)
    rank = 2 if case == "rank_two" else 1
    out = []
    D = trunc.depth + 1
    for n in range(1, trunc.n_max + 1):
        a = bcdata.alpha_of(datum, n)
        f = g_from_primes(g, n) ** (-rank * beta)
        for h in trunc.h_logs:
            x = -beta * a * h
            f *= math.expm1(D * x) / math.expm1(x)
        out.append(f)
    return SeriesResult(math.fsum(out), 0.0, trunc.n_max)


# ---------------------------------------------------------------- Gibbs states


def _nontrivial_norm(datum: Datum, s) -> bool:
    return any(x != 0 for x in bcdata.norm_exps(datum, s))


def gibbs_closed(datum: Datum, s, beta: float, iota: Embedding | None = None,
                 tol: float = 1e-12, R: int | None = None) -> complex:
    """phi_beta(s) from the closed formulas, for g(n) = n.

    Elements with N(s) != 1 (for Weil: weight != 0) move every basis vector
    off the diagonal and have state exactly 0.
    """
    case = case_of(datum)
    th, name = _threshold(case, IDENTITY)
    _require(beta, th, name)
    iota = iota or bcdata.standard_embedding(datum)
    if _nontrivial_norm(datum, s):
        return 0j
    ph = bcdata.iota_phase(datum, iota, s)
    if case == "bc":
        return complex(polylog(beta, ph, tol).value) / complex(polylog(beta, Fraction(0), tol).value)
    if case == "rank_two":
        return complex(polylog(2 * beta, ph, tol).value) / complex(polylog(2 * beta, Fraction(0), tol).value)
    if case == "weil":
        r = datum.q ** (-beta / 2)

        def series(phase: Fraction) -> complex:
            parts = [complex(polylog(beta, phase, tol).value)]
            k = 1
            while r ** k / (1 - r) ** 2 > tol and k < 4000:
                z = r ** k * complex(math.cos(2 * math.pi * phase), math.sin(2 * math.pi * phase))
                parts.append(complex(polylog(beta, z, tol).value))
                k += 1
            return complex(math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts))

        return series(ph) / series(Fraction(0))
    # infinite: sum iota(s)^n zeta(beta n) n^-beta / Z, or the same-R product
    primes = None if R is None else _progression_primes(datum, R)

    def series_inf(phase: Fraction) -> complex:
        # split off sum iota(s)^n n^-beta = Li_beta, then the fast (E_n - 1) part
        head = complex(polylog(beta, phase, tol).value)
        parts = []
        n = 1
        while True:
            if primes is None:
                e = _zeta_minus_one(n * beta).value
            else:
                e = math.expm1(-math.fsum(math.log1p(-p ** (-n * beta)) for p in primes))
            ang = 2 * math.pi * ((n * phase) % 1)
            parts.append(n ** -beta * e * complex(math.cos(ang), math.sin(ang)))
            n += 1
            sn = n * beta
            if 2.0 ** -sn * (1 + 2 / (sn - 1)) * 4 < tol * 1e-3 or n > 10_000:
                break
        return head + complex(math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts))

    return series_inf(ph) / series_inf(Fraction(0))


def ground_state_phase(datum: Datum, s, iota: Embedding | None = None) -> Fraction | None:
    """Exact phase of phi_inf(s) = iota(s), or None where the ground state vanishes."""
    case_of(datum)
    iota = iota or bcdata.standard_embedding(datum)
    if _nontrivial_norm(datum, s):
        return None
    return bcdata.iota_phase(datum, iota, s)


def ground_state(datum: Datum, s, iota: Embedding | None = None) -> complex:
    ph = ground_state_phase(datum, s, iota)
    if ph is None:
        return 0j
    if ph == 0:
        return 1 + 0j
    return complex(math.cos(2 * math.pi * ph), math.sin(2 * math.pi * ph))


def galois_pullback_check(datum: Datum, gammas: list | None = None, beta: float = 2.0,
                          samples: list | None = None, iota: Embedding | None = None,
                          tol: float = 1e-13) -> float:
    """max |phi_{beta,iota}(tau_gamma s) - phi_{beta, iota o gamma}(s)| over gammas and samples.

    beta = inf compares ground-state phases exactly and returns 0.0 or the
    largest numerical gap.  Raises NotAdmissible if iota o gamma leaves Emb_0.
    """
    iota = iota or bcdata.standard_embedding(datum)
    gammas = bcdata.admissible_symmetries(datum) if gammas is None else gammas
    samples = samples if samples is not None else bcdata.sample_elements(datum, 8, level=datum.galois_level)
    worst = 0.0
    for gam in gammas:
        iota_g = bcdata.compose_embedding(datum, iota, gam)
        for s in samples:
            t = bcdata.galois_apply(datum, gam, s)
            if math.isinf(beta):
                a, b = ground_state_phase(datum, t, iota), ground_state_phase(datum, s, iota_g)
                if a != b:
                    worst = max(worst, abs(ground_state(datum, t, iota) - ground_state(datum, s, iota_g)), 1e-300)
                continue
            lhs = gibbs_closed(datum, t, beta, iota, tol)
            rhs = gibbs_closed(datum, s, beta, iota_g, tol)
            worst = max(worst, abs(lhs - rhs))
    return worst
