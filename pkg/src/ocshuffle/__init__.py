"""Spectral gap of a single card under the overlapping-cycles shuffle."""

from .chain import ShuffleParams, build_matrix, char_fn, char_fn_deriv, evolve, transition_distribution
from .gamma import GammaMin, GammaTerm, cf_expand, cmod2, gamma_min, gamma_min_cf, gamma_term, norm_dist
from .spectra import PolarEigen, Spectrum, full_spectrum_oracle, newton_refine, spectral_gap

__all__ = [
    "ShuffleParams", "build_matrix", "char_fn", "char_fn_deriv", "evolve", "transition_distribution",
    "GammaMin", "GammaTerm", "cf_expand", "cmod2", "gamma_min", "gamma_min_cf", "gamma_term",
    "norm_dist", "PolarEigen", "Spectrum", "full_spectrum_oracle", "newton_refine", "spectral_gap",
]
