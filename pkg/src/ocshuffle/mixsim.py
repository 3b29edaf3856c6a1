"""Total-variation decay of the shuffle: exact evolution and Monte Carlo.

Randomness comes from numpy's PCG64 generator. A run with master seed ``s``
splits its trials into fixed-size chunks; chunk ``i`` draws from the ``i``-th
child of ``numpy.random.SeedSequence(s).spawn(...)``. Results therefore do not
depend on how chunks are scheduled.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .chain import ShuffleParams, point_mass, step

RNG_NAME = "PCG64"
CHUNK = 1 << 15
DECK_EXACT_MAX_N = 8


@dataclass(frozen=True)
class SimConfig:
    params: ShuffleParams
    start: int = 1
    trials: int = 10_000
    steps: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.steps < 0:
            raise ValueError(f"steps must be >= 0, got {self.steps}")
        if not 1 <= self.start <= self.params.n:
            raise ValueError(f"start must lie in [1, {self.params.n}], got {self.start}")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")


def tv_to_uniform(d: np.ndarray) -> np.ndarray:
    """Total variation distance of each row of ``d`` from the uniform law."""
    n = d.shape[-1]
    return 0.5 * np.abs(d - 1.0 / n).sum(axis=-1)


def tv_exact(params: ShuffleParams, start: int, steps: int) -> np.ndarray:
    """``TV(t)`` for ``t = 0..steps`` starting from a point mass at ``start``."""
    d = point_mass(params, start)
    out = np.empty(steps + 1)
    out[0] = tv_to_uniform(d)
    for t in range(1, steps + 1):
        d = step(params, d)
        out[t] = tv_to_uniform(d)
    return out


def exact_distributions(params: ShuffleParams, start: int, checkpoints) -> dict[int, np.ndarray]:
    cps = sorted(set(int(t) for t in checkpoints))
    d = point_mass(params, start)
    out, t = {}, 0
    for cp in cps:
        for _ in range(cp - t):
            d = step(params, d)
        t = cp
        out[cp] = d.copy()
    return out


def _chunk_rngs(seed: int, trials: int):
    sizes = [CHUNK] * (trials // CHUNK)
    if trials % CHUNK:
        sizes.append(trials % CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    return [(size, np.random.Generator(np.random.PCG64(ss))) for size, ss in zip(sizes, children)]


def move_positions(params: ShuffleParams, pos: np.ndarray, big: np.ndarray) -> np.ndarray:
    """Advance 0-indexed positions one shuffle.

    ``big`` marks trials where the bottom card goes to the top; elsewhere the
    card at position ``n - k`` does.
    """
    n, s = params.n, params.s
    shift_all = np.where(pos == n - 1, 0, pos + 1)
    shift_top = np.where(pos < s - 1, pos + 1, np.where(pos == s - 1, 0, pos))
    return np.where(big, shift_all, shift_top)


def simulate_card(config: SimConfig, checkpoints=None) -> dict[int, np.ndarray]:
    """Occupancy counts (1-indexed positions as array index ``i-1``) at each checkpoint.

    Defaults to the single checkpoint ``config.steps``.
    """
    params = config.params
    cps = sorted(set(int(t) for t in (checkpoints if checkpoints is not None else [config.steps])))
    if cps and (cps[0] < 0 or cps[-1] > config.steps):
        raise ValueError(f"checkpoints must lie in [0, {config.steps}]")
    counts = {t: np.zeros(params.n, dtype=np.int64) for t in cps}
    for size, rng in _chunk_rngs(config.rng_seed, config.trials):
        pos = np.full(size, config.start - 1, dtype=np.int64)
        t = 0
        for cp in cps:
            for _ in range(cp - t):
                pos = move_positions(params, pos, rng.random(size) < 0.5)
            t = cp
            counts[cp] += np.bincount(pos, minlength=params.n)
    return counts


def tv_window(series, hi: float = 0.2, lo: float = 1e-9) -> tuple[int, int]:
    """First and last ``t`` of the stretch after ``TV`` has dropped to ``hi``
    and before it falls below ``lo``."""
    tv = np.asarray(series)
    below = np.flatnonzero(tv <= hi)
    if below.size == 0:
        raise ValueError(f"series never drops to {hi}")
    t0 = int(below[0])
    tail = np.flatnonzero(tv[t0:] < lo)
    t1 = t0 + int(tail[0]) - 1 if tail.size else len(tv) - 1
    if t1 <= t0:
        raise ValueError("window is empty")
    return t0, t1


def fit_relaxation(series, window: tuple[int, int], sub_window: int = 1) -> float:
    """Empirical decay rate ``-d ln TV / dt`` over ``window = (t0, t1)`` inclusive.

    The window is cut into blocks of ``sub_window`` steps and only the
    largest value of each block enters the least-squares fit, which follows
    the upper envelope of an oscillating series. ``sub_window=1`` is a plain
    log-linear fit.
    """
    tv = np.asarray(series, dtype=float)
    t0, t1 = window
    if not 0 <= t0 < t1 < len(tv):
        raise ValueError(f"window {window} is not inside [0, {len(tv) - 1}]")
    seg = tv[t0 : t1 + 1]
    if np.any(seg < 1e-9) or np.any(seg > 0.2):
        raise ValueError("TV values in the window must lie in [1e-9, 0.2] for a reliable fit")
    ts = np.arange(t0, t1 + 1)
    if sub_window > 1:
        idx = [i + int(np.argmax(seg[i : i + sub_window])) for i in range(0, len(seg), sub_window)]
        ts, seg = ts[idx], seg[idx]
    if len(seg) < 2:
        raise ValueError("need at least two points to fit")
    slope = np.polyfit(ts, np.log(seg), 1)[0]
    return float(-slope)


def deck_moves(params: ShuffleParams) -> tuple[np.ndarray, np.ndarray]:
    """Gather indices for the two moves: ``new_deck = deck[idx]``.

    Decks list card labels from top (index 0) to bottom.
    """
    n, s = params.n, params.s
    big = np.concatenate(([n - 1], np.arange(n - 1)))
    small = np.concatenate(([s - 1], np.arange(s - 1), np.arange(s, n)))
    return big, small


@dataclass
class DeckResult:
    checkpoints: list[int]
    mean_fixed_points: dict[int, float]
    samples: dict[int, np.ndarray] = field(default_factory=dict)
    tv_exact: dict[int, float] | None = None


def simulate_deck(config: SimConfig, checkpoints=None, keep_samples: bool = False) -> DeckResult:
    """Whole-deck trajectories from the sorted deck.

    Reports the mean number of fixed points at each checkpoint; the exact
    whole-deck TV to uniform is added when ``n <= 8``.
    """
    params = config.params
    n = params.n
    cps = sorted(set(int(t) for t in (checkpoints if checkpoints is not None else [config.steps])))
    big, small = deck_moves(params)
    fixed = {t: 0 for t in cps}
    samples: dict[int, list[np.ndarray]] = {t: [] for t in cps}
    for size, rng in _chunk_rngs(config.rng_seed, config.trials):
        deck = np.tile(np.arange(n), (size, 1))
        t = 0
        for cp in cps:
            for _ in range(cp - t):
                coin = rng.random(size) < 0.5
                deck = np.where(coin[:, None], deck[:, big], deck[:, small])
            t = cp
            fixed[cp] += int((deck == np.arange(n)).sum())
            if keep_samples:
                samples[cp].append(deck.copy())
    result = DeckResult(cps, {t: fixed[t] / config.trials for t in cps})
    if keep_samples:
        result.samples = {t: np.concatenate(v) for t, v in samples.items()}
    if n <= DECK_EXACT_MAX_N:
        tv = deck_tv_exact(params, max(cps) if cps else 0)
        result.tv_exact = {t: float(tv[t]) for t in cps}
    return result


def deck_tv_exact(params: ShuffleParams, steps: int) -> np.ndarray:
    """Exact TV distance to uniform on all ``n!`` orderings, for ``n <= 8``."""
    n = params.n
    if n > DECK_EXACT_MAX_N:
        raise ValueError(f"exact deck evolution is limited to n <= {DECK_EXACT_MAX_N}, got {n}")
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    big, small = deck_moves(params)
    arr = np.array(perms)
    to_big = np.array([index[tuple(r)] for r in arr[:, big]])
    to_small = np.array([index[tuple(r)] for r in arr[:, small]])
    N = len(perms)
    d = np.zeros(N)
    d[index[tuple(range(n))]] = 1.0
    out = np.empty(steps + 1)
    out[0] = 0.5 * np.abs(d - 1 / N).sum()
    for t in range(1, steps + 1):
        nd = np.zeros(N)
        np.add.at(nd, to_big, 0.5 * d)
        np.add.at(nd, to_small, 0.5 * d)
        d = nd
        out[t] = 0.5 * np.abs(d - 1 / N).sum()
    return out


def binomial_zscores(counts: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Per-cell ``(count - T p) / sqrt(T p (1 - p))``; zero where the variance vanishes."""
    T = counts.sum()
    var = T * probs * (1 - probs)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (counts - T * probs) / np.sqrt(var)
    return np.where(var > 0, z, np.where(counts == T * probs, 0.0, np.inf))


def gap_rate(gap: float) -> float:
    return -math.log1p(-gap)
