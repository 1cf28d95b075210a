"""Independence tests between a driver series and a residual series.

``kernel_independence`` is an HSIC test with Gaussian kernels. Its null
distribution comes from a wild bootstrap whose multipliers follow a
unit-variance AR(1) process, which keeps the test valid for serially
dependent inputs. Below ``SHORT_SERIES`` samples the gamma approximation
is used instead and the report says so.

``mean_filter_independence`` is the cheap surrogate used inside the
network search: a driver counts as independent of a target when every
time-averaged filter coefficient over lags ``1..q`` stays below ``a``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import special
from scipy.signal import lfilter

from .errors import DegenerateInputError, DimensionError, ParameterError
from .spectra import TvFilter

DEFAULT_RESAMPLES = 300
DEFAULT_AR_COEF = 0.8
SHORT_SERIES = 500
MIN_LENGTH = 64
_MEDIAN_POINTS = 600


@dataclass(frozen=True)
class IndependenceReport:
    statistic: float
    p_value: float
    method: str  # "kernel" | "mean_filter"
    n_resamples: int
    approximation: str = "wild_bootstrap"  # | "gamma" | "threshold"

    def to_dict(self) -> dict:
        return asdict(self)


def median_bandwidth(x) -> float:
    """Median pairwise distance, computed on at most 600 evenly spaced samples."""
    x = np.asarray(x, dtype=float)
    if x.size > _MEDIAN_POINTS:
        x = x[np.linspace(0, x.size - 1, _MEDIAN_POINTS).astype(int)]
    d = np.abs(x[:, None] - x[None, :])
    d = d[np.triu_indices(x.size, 1)]
    d = d[d > 0]
    if d.size == 0:
        raise DegenerateInputError("constant series: kernel bandwidth is zero")
    return float(np.median(d))


def gaussian_gram(x, bandwidth: float | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if bandwidth is None:
        bandwidth = median_bandwidth(x)
    if not bandwidth > 0:
        raise DegenerateInputError("kernel bandwidth must be positive")
    sq = (x[:, None] - x[None, :]) ** 2
    return np.exp(sq / (-2.0 * bandwidth**2))


def _center(k: np.ndarray) -> np.ndarray:
    rows = k.mean(axis=1)
    return k - rows[:, None] - rows[None, :] + rows.mean()


def _centered_gram32(x) -> np.ndarray:
    """Centred Gaussian Gram matrix in float32, built in place (bootstrap hot path)."""
    z = (np.asarray(x, dtype=float) / median_bandwidth(x)).astype(np.float32)
    g = np.subtract.outer(z, z)
    np.multiply(g, g, out=g)
    g *= np.float32(-0.5)
    np.exp(g, out=g)
    rows = g.mean(axis=1, dtype=np.float64).astype(np.float32)
    g -= rows[:, None]
    g -= rows[None, :]
    g += np.float32(rows.mean(dtype=np.float64))
    return g


def _check_pair(x, y):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise DimensionError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < MIN_LENGTH:
        raise DimensionError(f"need at least {MIN_LENGTH} samples, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DegenerateInputError("non-finite values in input")
    return x, y


def hsic_statistic(x, y) -> float:
    """``sum(Kc * Lc) / T^2`` with centred Gaussian Gram matrices."""
    x, y = _check_pair(x, y)
    kc = _center(gaussian_gram(x))
    lc = _center(gaussian_gram(y))
    return float(np.sum(kc * lc)) / x.size**2


def ar1_multipliers(length: int, count: int, rng, coef: float = DEFAULT_AR_COEF) -> np.ndarray:
    """Stationary unit-variance AR(1) multipliers, centred per column."""
    e = rng.standard_normal((length, count))
    e[1:] *= np.sqrt(1.0 - coef**2)
    w = lfilter([1.0], [1.0, -coef], e, axis=0)
    return w - w.mean(axis=0, keepdims=True)


def hsic_gamma(x, y) -> IndependenceReport:
    """HSIC with the two-moment gamma approximation of the i.i.d. null."""
    x, y = _check_pair(x, y)
    n = x.size
    k = gaussian_gram(x)
    l = gaussian_gram(y)
    kc = _center(k)
    lc = _center(l)
    prod = kc * lc
    stat = float(np.sum(prod)) / n
    v = (prod / 6.0) ** 2
    var = (np.sum(v) - np.trace(v)) / n / (n - 1)
    var = var * 72 * (n - 4) * (n - 5) / n / (n - 1) / (n - 2) / (n - 3)
    np.fill_diagonal(k, 0.0)
    np.fill_diagonal(l, 0.0)
    mu_x = k.sum() / n / (n - 1)
    mu_y = l.sum() / n / (n - 1)
    mean = (1 + mu_x * mu_y - mu_x - mu_y) / n
    if not (var > 0 and mean > 0):
        raise DegenerateInputError("degenerate HSIC null moments")
    shape = mean**2 / var
    scale = var * n / mean
    p = float(special.gammaincc(shape, stat / scale))
    return IndependenceReport(stat / n, min(max(p, 0.0), 1.0), "kernel", 0, "gamma")


def kernel_independence(x, y, n_resamples: int = DEFAULT_RESAMPLES, seed=None,
                        ar_coef: float = DEFAULT_AR_COEF, approximation: str = "auto") -> IndependenceReport:
    """HSIC test of ``x`` against ``y``.

    ``approximation`` is ``"wild_bootstrap"``, ``"gamma"`` or ``"auto"``
    (gamma below ``SHORT_SERIES`` samples). The bootstrap p-value is the
    fraction of resampled statistics at least as large as the observed one.
    """
    x, y = _check_pair(x, y)
    if approximation == "auto":
        approximation = "gamma" if x.size < SHORT_SERIES else "wild_bootstrap"
    if approximation == "gamma":
        return hsic_gamma(x, y)
    if approximation != "wild_bootstrap":
        raise ParameterError(f"unknown approximation {approximation!r}")
    if n_resamples < 1:
        raise ParameterError("n_resamples must be positive")
    if not 0 <= ar_coef < 1:
        raise ParameterError("ar_coef must lie in [0, 1)")
    n = x.size
    prod = _centered_gram32(x)
    prod *= _centered_gram32(y)
    stat = float(np.sum(prod, dtype=np.float64)) / n**2
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    w = ar1_multipliers(n, n_resamples, rng, ar_coef).astype(np.float32)
    boot = np.einsum("ib,ib->b", w, prod @ w, dtype=np.float64) / n**2
    p = float(np.mean(boot >= stat))
    return IndependenceReport(max(stat, 0.0), p, "kernel", int(n_resamples), "wild_bootstrap")


def mean_filter_statistic(filt: TvFilter, lags: int = 3, first_lag: int = 1) -> np.ndarray:
    """``(1/T) |sum_t d_t(u)|`` for ``u = first_lag .. first_lag + lags - 1`` (default ``1..lags``)."""
    if lags < 1:
        raise ParameterError("lags must be at least 1")
    if first_lag < 0:
        raise ParameterError("first_lag must be non-negative")
    last = first_lag + lags - 1
    if filt.order < last:
        raise ParameterError(f"filter carries lags up to {filt.order}, test needs {first_lag}..{last}")
    values = np.asarray(filt.values)
    return np.abs(values[:, first_lag: last + 1].sum(axis=0)) / values.shape[0]


def mean_filter_independence(filt: TvFilter, threshold_a: float = 0.15, lags: int = 3, first_lag: int = 1) -> bool:
    """True (independent) when every tested lag has ``|mean d_t(u)| < a``."""
    if not 0 < threshold_a:
        raise ParameterError("threshold_a must be positive")
    return bool(np.all(mean_filter_statistic(filt, lags, first_lag) < threshold_a))


def mean_filter_report(filt: TvFilter, threshold_a: float = 0.15, lags: int = 3, first_lag: int = 1) -> IndependenceReport:
    stat = float(np.max(mean_filter_statistic(filt, lags, first_lag)))
    # p-value is a 0/1 indicator: 1 when the threshold test calls independence
    return IndependenceReport(stat, 1.0 if stat < threshold_a else 0.0, "mean_filter", 0, "threshold")
