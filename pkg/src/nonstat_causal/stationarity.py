"""Priestley-Subba Rao stationarity test on multitaper log-spectra.

The log-spectral grid ``W[i, j] = log f(t_i, w_j) + digamma(K) + log K`` is
treated as a two-way ANOVA layout. The interaction term ``S_{I+R}`` screens
for non-uniform modulation (the UMP test); if it is not significant, the
between-time term ``S_T`` decides stationarity. Both are compared with
chi-square laws after dividing by ``trigamma(K)``, the variance of a log
multitaper estimate with ``K`` tapers.

The two stages are nearly independent under the null, so running each at
``alpha`` gives the composite test a size close to ``2*alpha``. By default
the stage p-values are Sidak-adjusted (``1 - (1 - p)**2``) so that the
verdict has size ``alpha``; ``adjust="none"`` runs both stages at ``alpha``.
The raw interaction p-value always drives ``ump_test``, which is a single
test.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .errors import InsufficientDataError, ParameterError
from .spectra import EvolutionarySpectrum, TaperSet, auto_spectrum, dpss_tapers

SPECTRUM_FLOOR = 1e-300

STATIONARY = "stationary"
UMP_NONSTATIONARY = "ump_nonstationary"
NONSTATIONARY = "nonstationary"


def digamma_int(k: int) -> float:
    """``psi(k) = -gamma + sum_{m<k} 1/m`` for positive integers."""
    if k < 1 or int(k) != k:
        return float(special.digamma(k))
    return -np.euler_gamma + math.fsum(1.0 / m for m in range(1, int(k)))


def trigamma_int(k: int) -> float:
    """``psi'(k) = pi^2/6 - sum_{m<k} 1/m^2`` for positive integers."""
    if k < 1 or int(k) != k:
        return float(special.polygamma(1, k))
    return np.pi**2 / 6 - math.fsum(1.0 / m**2 for m in range(1, int(k)))


def chi2_sf(x: float, df: int) -> float:
    """Upper tail ``P(chi2_df > x)`` via the regularized upper incomplete gamma."""
    if x <= 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))


@dataclass(frozen=True)
class StationarityReport:
    s_t: float
    s_f: float
    s_ir: float
    i_blocks: int
    j_freqs: int
    taper_count: int
    p_ump: float
    p_time: float
    verdict: str
    alpha: float
    p_ump_raw: float = float("nan")
    p_time_raw: float = float("nan")
    adjust: str = "sidak"

    @property
    def stationary(self) -> bool:
        return self.verdict == STATIONARY

    @property
    def is_ump(self) -> bool:
        """Interaction term not significant at ``alpha`` (single-test level)."""
        return self.p_ump_raw > self.alpha

    def to_dict(self) -> dict:
        return asdict(self)


def anova_terms(w: np.ndarray) -> tuple[float, float, float]:
    """``(S_T, S_F, S_{I+R})`` of a two-way layout."""
    grand = w.mean()
    rows = w.mean(axis=1)
    cols = w.mean(axis=0)
    i_count, j_count = w.shape
    s_t = j_count * float(np.sum((rows - grand) ** 2))
    s_f = i_count * float(np.sum((cols - grand) ** 2))
    s_ir = float(np.sum((w - rows[:, None] - cols[None, :] + grand) ** 2))
    return s_t, s_f, s_ir


def log_spectrum_grid(spec: EvolutionarySpectrum) -> np.ndarray:
    k = spec.taper_count
    values = np.maximum(np.real(spec.values), SPECTRUM_FLOOR)
    return np.log(values) + digamma_int(k) + math.log(k)


ADJUSTMENTS = ("sidak", "none")


def _adjusted(p: float, adjust: str) -> float:
    if adjust == "sidak":
        return 1.0 - (1.0 - p) ** 2
    return p


def psr_test(spec: EvolutionarySpectrum, alpha: float = 0.05, adjust: str = "sidak") -> StationarityReport:
    if adjust not in ADJUSTMENTS:
        raise ParameterError(f"adjust must be one of {ADJUSTMENTS}")
    if spec.kind != "auto":
        raise ParameterError("the PSR test needs an auto-spectrum")
    if not 0 < alpha < 1:
        raise ParameterError("alpha must lie in (0, 1)")
    i_count, j_count = spec.values.shape
    if i_count < 2 or j_count < 2:
        raise InsufficientDataError(f"need at least 2 blocks and 2 frequencies, got {i_count}x{j_count}")
    w = log_spectrum_grid(spec)
    s_t, s_f, s_ir = anova_terms(w)
    sigma2 = trigamma_int(spec.taper_count)
    p_ump_raw = chi2_sf(s_ir / sigma2, (i_count - 1) * (j_count - 1))
    p_time_raw = chi2_sf(s_t / sigma2, i_count - 1)
    p_ump = _adjusted(p_ump_raw, adjust)
    p_time = _adjusted(p_time_raw, adjust)
    if p_ump <= alpha:
        verdict = NONSTATIONARY
    elif p_time <= alpha:
        verdict = UMP_NONSTATIONARY
    else:
        verdict = STATIONARY
    return StationarityReport(s_t, s_f, s_ir, i_count, j_count, spec.taper_count, p_ump, p_time, verdict,
                              alpha, p_ump_raw, p_time_raw, adjust)


def ump_test(spec: EvolutionarySpectrum, alpha: float = 0.05) -> bool:
    """True when ``S_{I+R}`` is not significant (stationary or uniformly modulated)."""
    return psr_test(spec, alpha).is_ump


def psr_series(x, block_len: int = 128, alpha: float = 0.05, tapers: TaperSet | None = None,
               adjust: str = "sidak") -> StationarityReport:
    """Convenience wrapper: multitaper spectrum of ``x`` followed by ``psr_test``."""
    if tapers is None:
        tapers = dpss_tapers(block_len)
    return psr_test(auto_spectrum(x, tapers), alpha, adjust)


def min_stationary(candidates: Sequence, alpha: float = 0.05, block_len: int = 128,
                   tapers: TaperSet | None = None) -> int | None:
    """Index of the UMP-passing candidate with the smallest ``S_T``.

    Returns None when no candidate passes the UMP screen. Ties go to the
    lowest index.
    """
    if len(candidates) == 0:
        raise ParameterError("min_stationary needs at least one candidate")
    best, best_st = None, np.inf
    for idx, cand in enumerate(candidates):
        rep = cand if isinstance(cand, StationarityReport) else psr_series(cand, block_len, alpha, tapers)
        if rep.is_ump and rep.s_t < best_st:
            best, best_st = idx, rep.s_t
    return best
