"""Single-card Markov chain of the overlapping-cycles shuffle.

Each step moves either the bottom card (position ``n``) or the card at
position ``n - k`` to the top of the deck, with probability 1/2 each.
Positions are 1-indexed everywhere in the public API.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ShuffleParams:
    """Deck size ``n`` and shift ``k``; valid for ``n >= 2`` and ``1 <= k <= n - 1``."""

    n: int
    k: int

    def __post_init__(self):
        if int(self.n) != self.n or int(self.k) != self.k:
            raise ValueError(f"n and k must be integers, got n={self.n!r}, k={self.k!r}")
        if self.n < 2:
            raise ValueError(f"deck size n must be >= 2, got {self.n}")
        if not 1 <= self.k <= self.n - 1:
            raise ValueError(f"k must satisfy 1 <= k <= n-1 = {self.n - 1}, got {self.k}")

    @property
    def s(self) -> int:
        """Position of the second moving card, ``n - k``."""
        return self.n - self.k


def transition_distribution(params: ShuffleParams, i: int) -> dict[int, float]:
    n, s = params.n, params.s
    if not 1 <= i <= n:
        raise ValueError(f"position must lie in [1, {n}], got {i}")
    if i < s:
        return {i + 1: 1.0}
    if i == s:
        return {1: 0.5, s + 1: 0.5}
    if i < n:
        return {i: 0.5, i + 1: 0.5}
    return {1: 0.5, n: 0.5}


def build_matrix(params: ShuffleParams) -> np.ndarray:
    """Dense row-stochastic transition matrix, ``P[i-1, j-1] = Pr(i -> j)``."""
    n = params.n
    P = np.zeros((n, n))
    for i in range(1, n + 1):
        for j, pr in transition_distribution(params, i).items():
            P[i - 1, j - 1] += pr
    return P


def trace(params: ShuffleParams) -> float:
    """Exact trace of the transition matrix.

    Positions ``n-k+1 .. n`` each keep the card with probability 1/2. When
    ``k = n - 1`` position 1 is also the ``(n-k)``th position and gains a
    self-loop of its own.
    """
    return params.k / 2 + (0.5 if params.s == 1 else 0.0)


def as_distribution(probs, n: int | None = None, atol: float = 1e-12) -> np.ndarray:
    d = np.asarray(probs, dtype=float)
    if d.ndim != 1:
        raise ValueError("distribution must be one-dimensional")
    if n is not None and d.shape[0] != n:
        raise ValueError(f"distribution has length {d.shape[0]}, expected {n}")
    if np.any(d < 0):
        raise ValueError("distribution has negative entries")
    if abs(d.sum() - 1.0) > atol:
        raise ValueError(f"distribution sums to {d.sum()!r}, not 1")
    return d


def point_mass(params: ShuffleParams, position: int) -> np.ndarray:
    if not 1 <= position <= params.n:
        raise ValueError(f"position must lie in [1, {params.n}], got {position}")
    d = np.zeros(params.n)
    d[position - 1] = 1.0
    return d


def step(params: ShuffleParams, d: np.ndarray) -> np.ndarray:
    """One sparse O(n) update ``d -> d P``; works on any trailing axis of length n."""
    s = params.s
    out = np.empty_like(d)
    out[..., 0] = 0.5 * (d[..., s - 1] + d[..., -1])
    out[..., 1:s] = d[..., : s - 1]
    out[..., s:] = 0.5 * (d[..., s - 1 : -1] + d[..., s:])
    return out


def evolve(params: ShuffleParams, d, t: int) -> np.ndarray:
    if t < 0:
        raise ValueError(f"step count must be >= 0, got {t}")
    d = as_distribution(d, params.n).copy()
    for _ in range(t):
        d = step(params, d)
    return d


def _cpow(z: np.ndarray, e: int) -> np.ndarray:
    # z**e through exp/log; exact zero handled separately (log 0 = -inf).
    if e == 0:
        return np.ones_like(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(e * np.log(z))
    return np.where(z == 0, 0.0 + 0.0j, out)


def char_fn(params: ShuffleParams, lam):
    """``g(lam) = (2 lam^(n-k) - 1)(2 lam - 1)^k - 1``.

    The roots of ``g`` are exactly the eigenvalues of the transition matrix;
    ``g`` is ``2^(k+1)`` times the monic characteristic polynomial. Accepts a
    scalar or an array of complex points.
    """
    z = np.asarray(lam, dtype=complex)
    out = (2 * _cpow(z, params.s) - 1) * _cpow(2 * z - 1, params.k) - 1
    return out[()] if out.ndim == 0 else out


def char_fn_deriv(params: ShuffleParams, lam):
    z = np.asarray(lam, dtype=complex)
    s, k = params.s, params.k
    w = 2 * z - 1
    out = (2 * s * _cpow(z, s - 1) * _cpow(w, k)
           + 2 * k * (2 * _cpow(z, s) - 1) * _cpow(w, k - 1))
    return out[()] if out.ndim == 0 else out


def _logpow(z: np.ndarray, e: int) -> np.ndarray:
    # log(z**e) with log(0**e) = -inf for e > 0 and log(z**0) = 0.
    if e == 0:
        return np.zeros_like(z)
    safe = np.where(z == 0, 1.0, z)
    return np.where(z == 0, complex(-np.inf, 0.0), e * np.log(safe))


def scaled_g_dg(params: ShuffleParams, lam):
    """``g`` and ``g'`` multiplied by a common positive factor.

    The factor ``exp(-c)`` is chosen so that no exponential overflows, which
    keeps ratios of the two finite for iterates far outside the unit disc.
    """
    z = np.asarray(lam, dtype=complex)
    s, k = params.s, params.k
    w = 2 * z - 1
    la, lz1 = _logpow(z, s), _logpow(z, s - 1)
    lk, lk1 = _logpow(w, k), _logpow(w, k - 1)
    c = np.maximum(np.maximum((la + lk).real, lk.real), 0.0)
    with np.errstate(invalid="ignore", over="ignore"):
        g = 2 * np.exp(la + lk - c) - np.exp(lk - c) - np.exp(-c)
        dg = 2 * s * np.exp(lz1 + lk - c) + 2 * k * (2 * np.exp(la + lk1 - c) - np.exp(lk1 - c))
    return g, dg


def newton_correction(params: ShuffleParams, lam):
    """Newton step ``g/g'`` together with the scaled derivative it divided by."""
    g, dg = scaled_g_dg(params, lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = g / dg
    if out.ndim == 0:
        return out[()], dg[()]
    return out, dg
