"""Asymptotic predictions for the gap and sweeps over k at fixed n."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .chain import ShuffleParams
from .gamma import PI2, gamma_min, norm_dist
from .spectra import spectral_gap

ENVELOPE_CONSTANT = 2 * PI2 / math.sqrt(3)


def round_half_up(x) -> int:
    """Nearest integer to ``x``, halves rounded up. Exact for Fractions."""
    if isinstance(x, (int, Fraction)):
        return math.floor(Fraction(x) + Fraction(1, 2))
    return math.floor(x + 0.5)


@dataclass(frozen=True)
class RationalPoint:
    p: int
    q: int

    def __post_init__(self):
        if self.q < 1 or self.p < 0 or self.p > self.q:
            raise ValueError(f"need 0 <= p <= q and q >= 1, got {self.p}/{self.q}")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"{self.p}/{self.q} is not in lowest terms")

    @property
    def A(self) -> int:
        """Parity factor: 1 when ``p = q (mod 2)``, else 2."""
        return 1 if (self.p - self.q) % 2 == 0 else 2

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)

    def nearest_k(self, n: int) -> int:
        return round_half_up(Fraction(self.p * n, self.q))


@dataclass(frozen=True)
class BellParams:
    """Offset ``c`` in ``k = (p/q) n + c n^(3/4)``."""

    point: RationalPoint
    c: float

    @classmethod
    def from_k(cls, point: RationalPoint, n: int, k: int) -> "BellParams":
        d = k - point.p * n / point.q
        return cls(point, d / n**0.75)

    @property
    def c_bound(self) -> float:
        p, q, A = self.point.p, self.point.q, self.point.A
        return (4 * p / q) ** 0.25 / (A * q)

    @property
    def in_window(self) -> bool:
        return abs(self.c) <= self.c_bound


def predict_thm1(point: RationalPoint, n: int) -> float:
    """Leading-order gap at ``k`` nearest to ``(p/q) n``: ``pi^2 p q A^2 / (2 n^2)``."""
    if point.p == 0 or point.p == point.q:
        raise ValueError(f"prediction needs 0 < p/q < 1, got {point.p}/{point.q}")
    return PI2 * point.p * point.q * point.A**2 / (2 * n**2)


def predict_thm3(point: RationalPoint, n: int, k: int) -> float:
    """Bell-shaped prediction for ``k`` near ``(p/q) n``.

    Raises ``ValueError`` outside the validity window, which for ``p > 0`` is
    ``|c| <= (4p/q)^(1/4) / (A q)`` and for ``p = 0`` is ``k <= (n/2)^(2/3)``.
    """
    p, q, A = point.p, point.q, point.A
    if p == 0:
        kmax = (n / 2) ** (2 / 3)
        if k > kmax:
            raise ValueError(f"k={k} exceeds the p=0 window k <= (n/2)^(2/3) = {kmax:.4g}")
        return 2 * PI2 * (k + k * k) / n**3
    bell = BellParams.from_k(point, n, k)
    if not bell.in_window:
        raise ValueError(
            f"k={k} is outside the window |c| <= (4p/q)^(1/4)/(Aq) = {bell.c_bound:.4g} "
            f"(c = {bell.c:.4g})")
    d = k - p * n / q
    return PI2 * p * q * A**2 / (2 * n**2) * (1 + (q / p) * d * d / n)


def window_ks(point: RationalPoint, n: int) -> list[int]:
    """All ``k`` in ``[1, n-1]`` for which :func:`predict_thm3` is defined."""
    out = []
    for k in range(1, n):
        try:
            predict_thm3(point, n, k)
        except ValueError:
            continue
        out.append(k)
    return out


@dataclass
class Thm2Report:
    n: int
    upper_violations: list[int] = field(default_factory=list)
    lower_violations: list[int] = field(default_factory=list)
    lower_attained: list[int] = field(default_factory=list)
    delta_counts: dict[float, tuple[int, float]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (not self.upper_violations and not self.lower_violations
                and all(c <= b for c, b in self.delta_counts.values()))


def check_thm2_bounds(n: int, deltas=(0.01,)) -> Thm2Report:
    """Check the extremal and typical-k bounds on ``gamma(n, k)`` for every k.

    With ``N = k m^2 + r^2`` the exact numerator of the minimum, the bounds
    are ``N <= 4 n sqrt(k)`` (compared as ``N^2 <= 16 n^2 k``) and ``N >= 8``.
    For each delta, the number of k with ``N < delta n^(3/2)`` must not
    exceed ``4 delta^(2/3) n``.
    """
    if n < 11:
        raise ValueError(f"bounds are only claimed for n >= 11, got {n}")
    rep = Thm2Report(n)
    nums = []
    for k in range(1, n):
        N = gamma_min(ShuffleParams(n, k)).numerator
        nums.append(N)
        if N * N > 16 * n * n * k:
            rep.upper_violations.append(k)
        if N < 8:
            rep.lower_violations.append(k)
        elif N == 8:
            rep.lower_attained.append(k)
    nums = np.array(nums, dtype=float)
    for delta in deltas:
        count = int(np.count_nonzero(nums < delta * n**1.5))
        rep.delta_counts[delta] = (count, 4 * delta ** (2 / 3) * n)
    return rep


@dataclass(frozen=True)
class Thm5Row:
    q: int
    n: int
    k: int
    m_star: int
    gamma: float
    product: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.product < self.bound * 1.15


def thm5_bound(alpha: float) -> float:
    return 2 * PI2 * math.sqrt(alpha) / math.sqrt(5)


def thm5_sequence(alpha, q_list) -> list[Thm5Row]:
    """``gamma(n, k) n^(3/2)`` along ``n = ceil(5 q^4 alpha / 4)``, ``k = round(alpha n)``.

    Only ``q`` with ``||q (1 - alpha)/2|| < 1/(sqrt(5) q)`` and ``q^2 >= 1/alpha``
    are used; others are skipped.
    """
    alpha_f = float(alpha)
    if not 0 < alpha_f < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    x = (1 - Fraction(alpha)) / 2 if isinstance(alpha, Fraction) else (1 - alpha_f) / 2
    rows = []
    for q in q_list:
        if q * q * alpha_f < 1:
            continue
        if not float(norm_dist(float(q * x))) < 1 / (math.sqrt(5) * q):
            continue
        n = math.ceil(5 * q**4 * alpha_f / 4)
        k = round_half_up(alpha * n)
        k = min(max(k, 1), n - 1)
        gm = gamma_min(ShuffleParams(n, k))
        rows.append(Thm5Row(q, n, k, gm.m_star, gm.value, gm.value * n**1.5, thm5_bound(alpha_f)))
    return rows


def fibonacci(count: int) -> list[int]:
    out = [1, 2]
    while len(out) < count:
        out.append(out[-1] + out[-2])
    return out[:count]


@dataclass(frozen=True)
class ScanRecord:
    n: int
    k: int
    m_star: int
    gamma: float
    relaxation: float
    gap_numeric: float | None = None
    ratio: float | None = None


def scan_k(n: int, with_numeric: bool = False, sample_stride: int = 1) -> list[ScanRecord]:
    """One record per ``k in [1, n-1]``; numeric gaps only where ``k % sample_stride == 0``."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if sample_stride < 1:
        raise ValueError(f"sample_stride must be >= 1, got {sample_stride}")
    out = []
    for k in range(1, n):
        params = ShuffleParams(n, k)
        gm = gamma_min(params)
        gap = ratio = None
        if with_numeric and k % sample_stride == 0:
            gap = spectral_gap(params).gap
            ratio = gap / gm.value
        out.append(ScanRecord(n, k, gm.m_star, gm.value, 1.0 / gm.value, gap, ratio))
    return out


def local_maxima(values) -> list[int]:
    """Indices ``i`` with ``values[i-1] < values[i] >= values[i+1]`` (ends use one neighbour)."""
    v = np.asarray(values, dtype=float)
    out = []
    for i in range(len(v)):
        left = v[i - 1] if i > 0 else -np.inf
        right = v[i + 1] if i + 1 < len(v) else -np.inf
        if v[i] > left and v[i] >= right:
            out.append(i)
    return out


def simple_rationals(qmax: int) -> list[RationalPoint]:
    pts = []
    for q in range(2, qmax + 1):
        for p in range(1, q):
            if math.gcd(p, q) == 1:
                pts.append(RationalPoint(p, q))
    return sorted(pts, key=lambda r: r.value)


def spike_offsets(records: list[ScanRecord], qmax: int = 5) -> dict[tuple[int, int], int | None]:
    """Distance from ``round(n p/q)`` to the nearest local maximum of relaxation.

    Keys are ``(p, q)`` for ``0 < p/q < 1`` with ``q <= qmax``.
    """
    n = records[0].n
    ks = [r.k for r in records]
    peaks = [ks[i] for i in local_maxima([r.relaxation for r in records])]
    out = {}
    for pt in simple_rationals(qmax):
        target = pt.nearest_k(n)
        out[(pt.p, pt.q)] = min((abs(k - target) for k in peaks), default=None)
    return out


@dataclass(frozen=True)
class BellRow:
    k: int
    gamma: float
    prediction: float | None
    ratio: float | None


def bell_rows(n: int, point: RationalPoint, halfwidth: int) -> list[BellRow]:
    """``gamma(n, k)`` beside the bell prediction for ``|k - round(n p/q)| <= halfwidth``.

    ``ratio`` is ``gamma / prediction``; both are None outside the window.
    """
    centre = point.nearest_k(n)
    rows = []
    for k in range(centre - halfwidth, centre + halfwidth + 1):
        if not 1 <= k <= n - 1:
            continue
        g = gamma_min(ShuffleParams(n, k)).value
        try:
            pred = predict_thm3(point, n, k)
        except ValueError:
            rows.append(BellRow(k, g, None, None))
            continue
        rows.append(BellRow(k, g, pred, g / pred))
    return rows


@dataclass
class EnvelopeReport:
    n: int
    ks: np.ndarray
    relaxation: np.ndarray
    envelope: np.ndarray
    max_scaled: float
    argmax_k: int
    constant: float = ENVELOPE_CONSTANT

    @property
    def ratio_to_constant(self) -> float:
        return self.max_scaled / self.constant


def envelope_report(n: int) -> EnvelopeReport:
    """Compare ``max_k gamma(n, k) n^2 / sqrt(k)`` with ``2 pi^2 / sqrt(3)``.

    The envelope column is the relaxation time the conjectured bound would
    imply, ``sqrt(3) n^2 / (2 pi^2 sqrt(k))``. Nothing here is asserted.
    """
    ks = np.arange(1, n)
    gam = np.array([gamma_min(ShuffleParams(n, int(k))).value for k in ks])
    scaled = gam * n**2 / np.sqrt(ks)
    i = int(np.argmax(scaled))
    env = 1.0 / (ENVELOPE_CONSTANT * np.sqrt(ks) / n**2)
    return EnvelopeReport(n, ks, 1.0 / gam, env, float(scaled[i]), int(ks[i]))


def thm1_deviation(point: RationalPoint, n: int) -> float:
    k = point.nearest_k(n)
    return abs(predict_thm1(point, n) / gamma_min(ShuffleParams(n, k)).value - 1)

