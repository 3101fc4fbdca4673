"""Multiplicative functions g: N -> R_+ given by their values at primes."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bcdata import factor
from .errors import ConfigError


@dataclass(frozen=True)
class GHom:
    """g(p) = prime_values[p] for declared primes and g(p) = p otherwise."""

    prime_values: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = {}
        for p, lam in dict(self.prime_values).items():
            p = int(p)
            if p < 2 or len(factor(p)) != 1 or factor(p)[p] != 1:
                raise ConfigError(f"{p} is not a prime")
            lam = float(lam)
            if not lam > 0:
                raise ConfigError(f"g({p}) must be positive")
            vals[p] = lam
        object.__setattr__(self, "prime_values", vals)

    def __hash__(self):
        return hash(tuple(sorted(self.prime_values.items())))

    @property
    def is_identity(self) -> bool:
        return all(lam == p for p, lam in self.prime_values.items())

    def __call__(self, n: int) -> float:
        return g_from_primes(self, n)

    def log_values(self, n_max: int) -> np.ndarray:
        """log g(n) for n = 1..n_max as an array (index 0 is n = 1)."""
        n = np.arange(1, n_max + 1, dtype=np.float64)
        out = np.log(n)
        for p, lam in self.prime_values.items():
            corr = math.log(lam) - math.log(p)
            if corr == 0.0 or p > n_max:
                continue
            pk = p
            while pk <= n_max:
                out[pk - 1::pk] += corr
                pk *= p
        return out

    def beta0(self) -> float:
        """Convergence exponent of sum g(n)^-beta.

        Only finitely many primes are modified, so the series is zeta(beta)
        times finitely many Euler-factor ratios: beta0 = 1 unless some
        declared lambda_p <= 1, in which case no beta converges.
        """
        if any(lam <= 1.0 for lam in self.prime_values.values()):
            return math.inf
        return 1.0

    def to_json(self) -> dict:
        return {str(p): lam for p, lam in sorted(self.prime_values.items())}


IDENTITY = GHom()


def g_from_primes(gh: GHom, n: int) -> float:
    if n < 1:
        raise ValueError("n must be positive")
    out = 1.0
    for p, e in factor(n).items():
        out *= gh.prime_values.get(p, float(p)) ** e
    return out


def estimate_beta0(values: np.ndarray, start: int = 1024) -> float:
    """Doubling estimate of the abscissa of convergence of sum g(n)^-beta.

    With C(X) = #{n : g(n) <= X}, beta0 = limsup log C(X) / log X; we read
    the slope of log C between X and 2X for the largest usable X.
    """
    v = np.sort(np.asarray(values, dtype=np.float64))
    X = float(start)
    best = None
    while True:
        c1 = np.searchsorted(v, X, side="right")
        c2 = np.searchsorted(v, 2 * X, side="right")
        if c2 >= len(v) or c1 == 0:
            break
        best = math.log(c2 / c1) / math.log(2.0)
        X *= 2
    if best is None:
        raise ValueError("not enough values for a doubling estimate")
    return best


def ghom_from_spec(spec: str | dict | None) -> GHom:
    """Read g from ``builtin:n``, a JSON file path, or a {prime: lambda} map."""
    if spec is None or spec == "builtin:n":
        return IDENTITY
    if isinstance(spec, dict):
        return GHom(spec)
    if isinstance(spec, str) and spec.startswith("builtin:"):
        raise ConfigError(f"unknown builtin g {spec!r}")
    try:
        with open(spec) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read g from {spec}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("g file must hold a JSON object {prime: lambda}")
    return GHom(data)
