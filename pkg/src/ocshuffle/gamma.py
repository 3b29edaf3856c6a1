"""The analytic gap functional gamma(n, k, m) and its minimisation over m.

``gamma(n, k, m) = pi^2 (k m^2 + r^2) / (2 n^3)`` where ``r`` is the centred
residue of ``m (n - k)`` modulo ``2n``. The residue is computed in integer
arithmetic so the distance-to-nearest-integer term never suffers
cancellation; only the final scaling is floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .chain import ShuffleParams

PI2 = math.pi ** 2


def norm_dist(x):
    """Distance from ``x`` to the nearest integer, in ``[0, 1/2]``."""
    x = np.asarray(x, dtype=float)
    out = np.abs(x - np.round(x))
    return out[()] if out.ndim == 0 else out


def cmod2(x):
    """Representative of ``x`` modulo 2 in the half-open interval ``(-1, 1]``."""
    x = np.asarray(x, dtype=float)
    out = x - 2 * np.ceil((x - 1) / 2)
    return out[()] if out.ndim == 0 else out


def centered_residue(a: int, modulus: int) -> int:
    """Integer ``r = a (mod modulus)`` with ``-modulus/2 < r <= modulus/2``."""
    r = a % modulus
    return r - modulus if 2 * r > modulus else r


@dataclass(frozen=True)
class GammaTerm:
    n: int
    k: int
    m: int
    r: int
    value: float

    @property
    def numerator(self) -> int:
        """Exact integer ``k m^2 + r^2``; ``value = pi^2 * numerator / (2 n^3)``."""
        return self.k * self.m * self.m + self.r * self.r


@dataclass(frozen=True)
class GammaMin:
    m_star: int
    value: float
    search_bound: int
    r: int = 0
    numerator: int = field(default=0)


def gamma_term(params: ShuffleParams, m: int) -> GammaTerm:
    m = int(m)
    if m == 0:
        raise ValueError("gamma(n, k, m) is only defined for m != 0")
    n, k = params.n, params.k
    r = centered_residue(m * (n - k), 2 * n)
    value = PI2 * (k * m * m + r * r) / (2 * n ** 3)
    return GammaTerm(n, k, m, r, value)


def gamma_norm_form(n: int, k: int, m) -> float:
    """Floating evaluation written with the distance-to-nearest-integer norm."""
    m = np.asarray(m, dtype=float)
    return PI2 / (2 * n**2) * (m**2 * k / n + 4 * n * norm_dist(m * (n - k) / (2 * n)) ** 2)


def gamma_mod2_form(n: int, k: int, m) -> float:
    """Floating evaluation written with the centred mod-2 residue of ``m(1 - k/n)``."""
    m = np.asarray(m, dtype=float)
    return PI2 / (2 * n) * (k * (m / n) ** 2 + cmod2(m * (1 - k / n)) ** 2)


def search_bound(params: ShuffleParams) -> int:
    """Largest ``m`` examined by :func:`gamma_min`.

    Twice the bound ``2 sqrt(n) k^(-1/4)`` on the minimiser, floored at 4.
    """
    n, k = params.n, params.k
    return max(4, math.ceil(4 * math.sqrt(n) * k ** -0.25))


def _min_over(params: ShuffleParams, ms) -> GammaMin:
    n, k = params.n, params.k
    dtype = np.int64 if n < 10**9 else object
    ms = np.asarray(ms, dtype=dtype)
    r = (ms * (n - k)) % (2 * n)
    r = np.where(r > n, r - 2 * n, r)
    num = k * ms * ms + r * r
    i = int(np.argmin(num))  # first occurrence, i.e. smallest m on ties
    numerator = int(num[i])
    return GammaMin(
        m_star=int(ms[i]),
        value=PI2 * numerator / (2 * n**3),
        search_bound=search_bound(params),
        r=int(r[i]),
        numerator=numerator,
    )


def gamma_min(params: ShuffleParams) -> GammaMin:
    """Exhaustive minimum of gamma(n, k, m) over ``1 <= m <= search_bound``."""
    return _min_over(params, np.arange(1, search_bound(params) + 1))


@dataclass(frozen=True)
class CFApprox:
    x: Fraction
    partial_quotients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...]

    @property
    def denominators(self) -> tuple[int, ...]:
        return tuple(q for _, q in self.convergents)


def cf_expand(x) -> CFApprox:
    """Continued fraction of a rational in ``[0, 1)`` and its convergents.

    ``x`` may be a :class:`~fractions.Fraction`, an int, or a
    ``(numerator, denominator)`` pair.
    """
    if isinstance(x, tuple):
        num, den = x
        if den <= 0:
            raise ValueError(f"denominator must be positive, got {den}")
        x = Fraction(num, den)
    x = Fraction(x)
    if not 0 <= x < 1:
        raise ValueError(f"x must lie in [0, 1), got {x}")

    quotients = []
    a, b = x.numerator, x.denominator
    while b:
        q, rem = divmod(a, b)
        quotients.append(q)
        a, b = b, rem

    convergents = []
    p_prev, p = 1, quotients[0]
    q_prev, q = 0, 1
    convergents.append((p, q))
    for a_j in quotients[1:]:
        p_prev, p = p, a_j * p + p_prev
        q_prev, q = q, a_j * q + q_prev
        convergents.append((p, q))
    return CFApprox(x, tuple(quotients), tuple(convergents))


def cf_candidates(params: ShuffleParams) -> list[int]:
    """Candidate minimisers: convergent denominators of ``(n-k)/(2n)``, their
    doubles, and 1 and 2, capped at :func:`search_bound`."""
    bound = search_bound(params)
    cf = cf_expand(Fraction(params.n - params.k, 2 * params.n))
    cands = {1, 2}
    for q in cf.denominators:
        cands.update((q, 2 * q))
    return sorted(m for m in cands if m <= bound)


def gamma_min_cf(params: ShuffleParams) -> GammaMin:
    return _min_over(params, cf_candidates(params))
