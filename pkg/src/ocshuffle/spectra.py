"""Eigenvalues of the single-card chain.

Two independent routes:

* seeded Newton refinement of the characteristic function, with seeds near
  ``+1`` built from the gap functional and seeds on the two approximate
  circles of eigenvalues;
* an Aberth-Ehrlich simultaneous iteration for the full set of ``n`` roots,
  used as an oracle at desk scale (``n <= 512``).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .chain import ShuffleParams, newton_correction, scaled_g_dg
from .gamma import cmod2, gamma_mod2_form, search_bound

NEWTON_TOL = 1e-13
NEWTON_MAXITER = 50
ORACLE_MAX_N = 512
UNIT_TOL = 1e-10
TIE_TOL = 1e-12


class ConvergenceError(RuntimeError):
    """A root-finding iteration did not converge."""


class SeedFamily(enum.Enum):
    NEAR_ONE = "near_one"
    OUTER_CIRCLE = "outer_circle"
    INNER_CIRCLE = "inner_circle"
    ORACLE = "oracle"


@dataclass(frozen=True)
class PolarEigen:
    """Eigenvalue ``lam = exp(-eps + i pi a)`` with ``lam^(n-k) = exp(-(n-k) eps + i pi b)``."""

    lam: complex
    eps: float
    a: float
    b: float
    residual: float
    family: SeedFamily
    index: int | None = None
    iterations: int = 0

    @property
    def modulus(self) -> float:
        return abs(self.lam)

    @property
    def seed_family(self) -> str:
        if self.index is None:
            return self.family.value
        return f"{self.family.value}({self.index})"


def polar(params: ShuffleParams, lam: complex, residual: float, family: SeedFamily,
          index: int | None = None, iterations: int = 0) -> PolarEigen:
    lam = complex(lam)
    mod = abs(lam)
    eps = -math.log(mod) if mod > 0 else math.inf
    a = cmath.phase(lam) / math.pi
    if a <= -1.0:
        a = 1.0
    b = float(cmod2(params.s * a))
    return PolarEigen(lam, eps, a, b, float(residual), family, index, iterations)


@dataclass
class Spectrum:
    eigs: list[PolarEigen]
    n_expected: int
    failures: list[str] = field(default_factory=list)

    def values(self) -> np.ndarray:
        return np.array([e.lam for e in self.eigs])

    def __len__(self):
        return len(self.eigs)


def dedup_radius(lam: complex) -> float:
    return 1e-8 * max(1.0, abs(lam))


def seeds_near_one(params: ShuffleParams, m_max: int) -> list[tuple[int, complex]]:
    """Seeds ``exp(i pi m / n - gamma(n, k, m))`` for ``0 < |m| <= m_max``."""
    if m_max < 1:
        raise ValueError(f"m_max must be >= 1, got {m_max}")
    n, k = params.n, params.k
    out = []
    for m in range(1, m_max + 1):
        for sm in (m, -m):
            g = float(gamma_mod2_form(n, k, sm))
            out.append((sm, cmath.exp(1j * math.pi * sm / n - g)))
    return out


def seeds_circles(params: ShuffleParams, m_max: int | None = None) -> list[tuple[SeedFamily, int, complex]]:
    """Seeds on the inner circle ``|2 lam - 1| = 1`` and the outer circle ``|lam| = 2^(-1/(n-k))``.

    Seeds whose argument is within ``pi (m_max + 1/2) / n`` of zero are left to
    :func:`seeds_near_one`. ``m_max=0`` keeps every seed; ``None`` uses the
    gap-functional search bound.
    """
    n, k, s = params.n, params.k, params.s
    if m_max is None:
        m_max = search_bound(params)
    cut = math.pi * (m_max + 0.5) / n if m_max > 0 else -1.0
    out = []
    for j in range(k):
        z = (1 + cmath.exp(1j * math.pi * (2 * j + 1) / k)) / 2
        if abs(z) < 1e-15:
            z = 0j
        if abs(cmath.phase(z)) > cut or z == 0:
            out.append((SeedFamily.INNER_CIRCLE, j, z))
    rad = 2.0 ** (-1.0 / s)
    for j in range(s):
        z = rad * cmath.exp(2j * math.pi * j / s)
        if abs(cmath.phase(z)) > cut:
            out.append((SeedFamily.OUTER_CIRCLE, j, z))
    return out


def newton_refine(params: ShuffleParams, seed: complex, family: SeedFamily = SeedFamily.NEAR_ONE,
                  index: int | None = None, tol: float = NEWTON_TOL,
                  maxiter: int = NEWTON_MAXITER) -> PolarEigen:
    """Refine ``seed`` to a root of the characteristic function.

    Stops once the Newton correction is below ``tol * max(1, |lam|)``.
    Raises :class:`ConvergenceError` on a vanishing derivative or when
    ``maxiter`` corrections are not enough.
    """
    lam = complex(seed)
    for it in range(maxiter + 1):
        corr, dg = newton_correction(params, lam)
        if not abs(dg) > 1e-300 or not cmath.isfinite(corr):
            raise ConvergenceError(f"derivative vanished near {lam!r} (seed {seed!r})")
        lam = lam - corr
        if abs(corr) < tol * max(1.0, abs(lam)):
            final, _ = newton_correction(params, lam)
            return polar(params, lam, abs(final), family, index, it)
    raise ConvergenceError(
        f"no convergence from seed {seed!r} after {maxiter} steps (last correction {abs(corr):.3e})")


def _aberth(params: ShuffleParams, z: np.ndarray, tol: float, maxiter: int):
    n = len(z)
    eye = np.eye(n, dtype=bool)
    active = np.ones(n, dtype=bool)
    for it in range(maxiter):
        g, dg = scaled_g_dg(params, z)
        diff = z[:, None] - z[None, :]
        diff[eye] = 1.0
        inv = 1.0 / diff
        inv[eye] = 0.0
        S = inv.sum(axis=1)
        # N / (1 - N S) with N = g/g', written so that g' -> 0 stays finite
        with np.errstate(divide="ignore", invalid="ignore"):
            w = 1.0 / (dg / g - S)
        w = np.where(g == 0, 0, w)
        w = np.where(active, w, 0)
        z = z - w
        done = np.abs(w) < tol * np.maximum(1.0, np.abs(z))
        active &= ~done
        if not active.any():
            return z, it + 1
    return z, maxiter


def full_spectrum_oracle(params: ShuffleParams, maxiter: int = 2000) -> Spectrum:
    """All ``n`` roots of the characteristic function by Aberth-Ehrlich iteration.

    Starts from ``n`` equally spaced points on the circle of radius 0.9,
    rotated by an irrational angle so no start point sits on the real axis.
    Each root is finished with Newton polishing; a root whose final correction
    stays above threshold raises :class:`ConvergenceError`.
    """
    n = params.n
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle is limited to n <= {ORACLE_MAX_N}, got {n}")
    rot = (math.sqrt(5) - 1) / 2 * 2 * math.pi / n / 3
    z0 = 0.9 * np.exp(1j * (2 * math.pi * np.arange(n) / n + rot))
    z, iters = _aberth(params, z0, NEWTON_TOL, maxiter)

    eigs = []
    for lam in z:
        for _ in range(5):
            corr, _ = newton_correction(params, lam)
            lam = lam - corr
            if abs(corr) < NEWTON_TOL * max(1.0, abs(lam)):
                break
        res, _ = newton_correction(params, lam)
        if not abs(res) < 1e-12 * max(1.0, abs(lam)):
            raise ConvergenceError(
                f"Aberth stagnated for n={n}, k={params.k} after {iters} sweeps: "
                f"root {lam!r} has correction {abs(res):.3e}")
        eigs.append(polar(params, lam, abs(res), SeedFamily.ORACLE))
    eigs.sort(key=lambda e: (-e.modulus, -e.lam.imag))
    return Spectrum(eigs, n)


def dedup(eigs: list[PolarEigen]) -> list[PolarEigen]:
    """Drop entries within the dedup radius of an earlier one.

    Uses a coarse grid so each entry is compared only with its neighbours.
    """
    h = 2e-8
    grid: dict[tuple[int, int], list[PolarEigen]] = {}
    kept: list[PolarEigen] = []
    for e in eigs:
        scale = max(1.0, abs(e.lam))
        cx, cy = math.floor(e.lam.real / (h * scale)), math.floor(e.lam.imag / (h * scale))
        clash = False
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for f in grid.get((cx + dx, cy + dy), ()):
                    if abs(e.lam - f.lam) <= dedup_radius(f.lam):
                        clash = True
        if not clash:
            kept.append(e)
            grid.setdefault((cx, cy), []).append(e)
    return kept


def newton_refine_many(params: ShuffleParams, seeds, tol: float = NEWTON_TOL,
                       maxiter: int = NEWTON_MAXITER):
    """Vectorised :func:`newton_refine` over an array of seeds.

    Returns ``(roots, residuals, iterations, ok)``; ``ok[i]`` is False where
    seed ``i`` diverged, hit a vanishing derivative, or ran out of steps.
    """
    z = np.array(seeds, dtype=complex)
    active = np.ones(z.shape, dtype=bool)
    ok = np.zeros(z.shape, dtype=bool)
    iters = np.zeros(z.shape, dtype=int)
    for it in range(maxiter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        corr, dg = newton_correction(params, z[idx])
        bad = ~(np.abs(dg) > 1e-300) | ~np.isfinite(corr)
        active[idx[bad]] = False
        good = idx[~bad]
        corr = corr[~bad]
        z[good] -= corr
        conv = np.abs(corr) < tol * np.maximum(1.0, np.abs(z[good]))
        ok[good[conv]] = True
        iters[good[conv]] = it
        active[good[conv]] = False
    res, _ = newton_correction(params, z)
    res = np.abs(res)
    return z, res, iters, ok


def newton_spectrum(params: ShuffleParams, m_max: int | None = None,
                    circles: bool = True, circle_cut: bool = True) -> Spectrum:
    """Eigenvalues reachable from the three seed families, deduplicated.

    With ``circle_cut=False`` no circle seed is left out near ``+1``.
    Seeds that do not converge are listed in ``failures``; near-one seeds
    whose gap term is not small have no eigenvalue nearby and routinely land
    there.
    """
    if m_max is None:
        m_max = search_bound(params)
    # the trivial root is exact; seeding it keeps a full set countable
    seeds = [(SeedFamily.NEAR_ONE, 0, 1.0 + 0j)]
    seeds += [(SeedFamily.NEAR_ONE, m, z) for m, z in seeds_near_one(params, m_max)]
    if circles:
        seeds += seeds_circles(params, m_max if circle_cut else 0)
    roots, res, iters, ok = newton_refine_many(params, [z for _, _, z in seeds])
    found, failures = [], []
    for (fam, idx, z), lam, r, it, good in zip(seeds, roots, res, iters, ok):
        if good:
            found.append(polar(params, lam, r, fam, idx, int(it)))
        else:
            failures.append(f"{fam.value}({idx}): no convergence from seed {z!r}")
    # dedup in seed order so a root keeps its near-one label when reached twice
    kept = dedup(found)
    kept.sort(key=lambda e: (-e.modulus, -e.lam.imag))
    return Spectrum(kept, params.n, failures)


@dataclass(frozen=True)
class GapResult:
    gap: float
    witness: PolarEigen
    ties: tuple[PolarEigen, ...]
    source: str
    complete: bool = True
    failures: tuple[str, ...] = ()

    @property
    def eps(self) -> float:
        return self.witness.eps


def gap_from_spectrum(eigs: list[PolarEigen], source: str, complete: bool = True,
                      failures=()) -> GapResult:
    eigs = dedup(sorted(eigs, key=lambda e: (-e.modulus, -e.lam.imag)))
    unit = [e for e in eigs if abs(e.lam - 1) < UNIT_TOL]
    if len(unit) > 1:
        raise RuntimeError(f"{len(unit)} distinct eigenvalues within {UNIT_TOL} of 1")
    rest = [e for e in eigs if abs(e.lam - 1) >= UNIT_TOL]
    if not rest:
        raise RuntimeError("no non-unit eigenvalue found")
    top = rest[0].modulus
    ties = tuple(e for e in rest if top - e.modulus <= TIE_TOL)
    witness = max(ties, key=lambda e: (e.lam.imag >= 0, -abs(e.a)))
    return GapResult(1.0 - top, witness, ties, source, complete, tuple(failures))


def spectral_gap(params: ShuffleParams, use_oracle_fallback: bool = True,
                 circles: bool = True) -> GapResult:
    """``1 - max |lam|`` over eigenvalues other than 1.

    Candidates come from Newton refinement of the near-one seeds with
    ``m_max`` equal to the gap-functional search bound, plus both circle
    families unless ``circles=False`` (they decide the gap for small ``n``).
    The result is ``complete`` when all ``n`` distinct roots were found. An
    incomplete Newton spectrum is replaced by the Aberth oracle when
    ``n <= 512``; above that the failures are carried in the result.
    """
    spec = newton_spectrum(params, circles=circles, circle_cut=False)
    complete = len(spec.eigs) == params.n
    nonunit = [e for e in spec.eigs if abs(e.lam - 1) >= UNIT_TOL]
    if (not complete or not nonunit) and use_oracle_fallback and params.n <= ORACLE_MAX_N:
        return gap_from_spectrum(full_spectrum_oracle(params).eigs, "oracle", True, spec.failures)
    return gap_from_spectrum(spec.eigs, "newton", complete, spec.failures)
