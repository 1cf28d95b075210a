"""Multitaper evolutionary spectra on non-overlapping blocks.

Conventions
-----------
* Blocks are ``[i*N, (i+1)*N)`` for ``i = 0..I-1`` with ``I = floor(T / N)``;
  block ``i`` is centred at ``i*N + N//2``.
* Spectra are one-sided densities on ``(0, pi]`` normalised so that
  ``integral_0^pi f(w) dw`` equals the variance; a white process with
  variance ``s2`` therefore has the flat level ``s2 / pi``.
* The PSR grid is spaced by the full multitaper bandwidth ``2*pi*(K+1)/N``
  and starts one bandwidth above ``w = 0`` (see ``psr_frequencies``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DimensionError, InsufficientDataError, ParameterError

DEFAULT_NW = 2.5
DEFAULT_K = 4
DENOMINATOR_FLOOR = 1e-6


@dataclass(frozen=True)
class TaperSet:
    tapers: np.ndarray  # (K, N), orthonormal rows
    time_bandwidth: float
    eigenvalues: np.ndarray  # in-band energy concentration, descending

    @property
    def count(self) -> int:
        return self.tapers.shape[0]

    @property
    def block_length(self) -> int:
        return self.tapers.shape[1]


@dataclass(frozen=True)
class EvolutionarySpectrum:
    block_centers: np.ndarray
    freqs: np.ndarray
    values: np.ndarray  # (I, J), real for auto, complex for cross
    taper_count: int
    block_length: int
    kind: str = "auto"

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class TvFilter:
    """Per-sample filter ``values[t, u] = d_t(u)`` for lags ``u = 0..p``."""

    values: np.ndarray
    block_centers: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    block_values: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    flagged_blocks: tuple[int, ...] = ()

    @property
    def order(self) -> int:
        return self.values.shape[1] - 1

    @property
    def lags(self) -> np.ndarray:
        return np.arange(self.order + 1)

    def truncated(self, order: int) -> "TvFilter":
        if order > self.order:
            raise ParameterError(f"filter only carries lags up to {self.order}")
        return TvFilter(
            self.values[:, : order + 1],
            self.block_centers,
            self.block_values[:, : order + 1] if self.block_values.size else self.block_values,
            self.flagged_blocks,
        )

    def apply(self, x) -> np.ndarray:
        """``sum_u d_t(u) x[t-u]`` with zero padding."""
        from . import _core

        x = np.asarray(x, dtype=float)
        if x.size != self.values.shape[0]:
            raise DimensionError("series length does not match the filter grid")
        return _core.tv_apply(self.values, x)


@lru_cache(maxsize=32)
def _dpss_cached(block_len: int, nw: float, k: int):
    n = np.arange(block_len)
    w = nw / block_len
    diag = ((block_len - 1 - 2 * n) / 2.0) ** 2 * np.cos(2 * np.pi * w)
    off = n[1:] * (block_len - n[1:]) / 2.0
    _, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(block_len - k, block_len - 1))
    vecs = vecs[:, ::-1].T.copy()
    for i, v in enumerate(vecs):
        # symmetric tapers: positive mean; antisymmetric: positive first lobe
        ref = v.sum() if i % 2 == 0 else np.sum(v * (block_len - 1 - 2 * n))
        if ref < 0:
            vecs[i] = -v
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    lam = concentration(vecs, nw)
    vecs.setflags(write=False)
    lam.setflags(write=False)
    return vecs, lam


def concentration(tapers, nw: float) -> np.ndarray:
    """Fraction of each taper's energy inside ``|f| < W`` (sinc-kernel quadratic form)."""
    tapers = np.atleast_2d(tapers)
    n = tapers.shape[1]
    w = nw / n
    m = np.arange(n)
    d = m[:, None] - m[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        a = np.where(d == 0, 2 * w, np.sin(2 * np.pi * w * d) / (np.pi * d))
    return np.einsum("kn,nm,km->k", tapers, a, tapers)


def dpss_tapers(block_len: int, nw: float = DEFAULT_NW, k: int = DEFAULT_K) -> TaperSet:
    """Discrete prolate spheroidal sequences from the tridiagonal eigenproblem."""
    if block_len < 8:
        raise ParameterError("block_len must be at least 8")
    if k < 1 or k > 2 * nw - 1:
        raise ParameterError(f"need 1 <= k <= 2*nw - 1, got k={k}, nw={nw}")
    vecs, lam = _dpss_cached(int(block_len), float(nw), int(k))
    return TaperSet(vecs, float(nw), lam)


def n_blocks(length: int, block_len: int) -> int:
    return length // block_len


def block_centers(length: int, block_len: int) -> np.ndarray:
    return np.arange(n_blocks(length, block_len)) * block_len + block_len // 2


def psr_frequencies(block_len: int, k: int) -> np.ndarray:
    """PSR frequency grid with spacing equal to the full multitaper bandwidth.

    Points sit at ``j * 2*pi*(K+1)/N`` for ``j = 1..J`` inside ``(0, pi)``, so
    neighbouring log-estimates are nearly uncorrelated, as the chi-square
    reference laws of the PSR test assume.
    """
    step = 2 * np.pi * (k + 1) / block_len
    j_count = int(np.floor(block_len / (2 * (k + 1))))
    if j_count * step >= np.pi - 1e-12:
        j_count -= 1
    if j_count < 1:
        raise ParameterError(f"block_len={block_len} too short for {k} tapers")
    return step * np.arange(1, j_count + 1)


def _blocks(x, block_len: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError("expected a 1-D series")
    count = n_blocks(x.size, block_len)
    if count < 1:
        raise InsufficientDataError(f"series of length {x.size} is shorter than one block ({block_len})")
    return x[: count * block_len].reshape(count, block_len)


def _tapered_dft(x, tapers: TaperSet, freqs) -> np.ndarray:
    """Tapered DFTs, shape ``(I, K, J)``."""
    blocks = _blocks(x, tapers.block_length)
    basis = np.exp(-1j * np.outer(np.arange(tapers.block_length), freqs))
    return np.einsum("in,kn,nj->ikj", blocks, tapers.tapers, basis, optimize=True)


def _as_taperset(tapers) -> TaperSet:
    if isinstance(tapers, TaperSet):
        return tapers
    if isinstance(tapers, int):
        return dpss_tapers(tapers)
    raise ParameterError("tapers must be a TaperSet or a block length")


def auto_spectrum(x, tapers, freqs=None) -> EvolutionarySpectrum:
    """Multitaper auto-spectrum ``mean_k |J_k(w)|^2 / pi`` on every block."""
    tapers = _as_taperset(tapers)
    if freqs is None:
        freqs = psr_frequencies(tapers.block_length, tapers.count)
    freqs = np.asarray(freqs, dtype=float)
    dft = _tapered_dft(x, tapers, freqs)
    values = np.mean(np.abs(dft) ** 2, axis=1) / np.pi
    centers = block_centers(np.asarray(x).size, tapers.block_length)
    return EvolutionarySpectrum(centers, freqs, values, tapers.count, tapers.block_length, "auto")


def cross_spectrum(x, y, tapers, freqs=None) -> EvolutionarySpectrum:
    """Multitaper cross-spectrum ``mean_k J_k^y(w) conj(J_k^x(w)) / pi``.

    ``cross_spectrum(x, x)`` returns exactly the real auto-spectrum.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionError(f"length mismatch: {x.size} vs {y.size}")
    if x is y or np.array_equal(x, y):
        return auto_spectrum(x, tapers, freqs)
    tapers = _as_taperset(tapers)
    if freqs is None:
        freqs = psr_frequencies(tapers.block_length, tapers.count)
    freqs = np.asarray(freqs, dtype=float)
    dx = _tapered_dft(x, tapers, freqs)
    dy = _tapered_dft(y, tapers, freqs)
    values = np.mean(dy * np.conj(dx), axis=1) / np.pi
    centers = block_centers(x.size, tapers.block_length)
    return EvolutionarySpectrum(centers, freqs, values, tapers.count, tapers.block_length, "cross")


def block_filters(x, y, tapers: TaperSet, max_lag: int, floor: float = DENOMINATOR_FLOOR):
    """Block-centre filter estimates ``d_{t_i}(u)``, ``u = 0..max_lag``.

    The transfer function ``D = f_yx / f_xx`` is formed on the full
    ``N``-point DFT grid and inverted with an inverse DFT. Returns the
    ``(I, max_lag + 1)`` grid and the indices of blocks with (near) zero
    input power; those rows are copied from the nearest valid block.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = tapers.block_length
    bx = _blocks(x, n)[:, None, :] * tapers.tapers[None]
    by = _blocks(y, n)[:, None, :] * tapers.tapers[None]
    fx = np.fft.rfft(bx, axis=-1)
    fy = np.fft.rfft(by, axis=-1)
    sxx = np.mean(np.abs(fx) ** 2, axis=1)
    syx = np.mean(fy * np.conj(fx), axis=1)
    level = sxx.mean(axis=1, keepdims=True)
    global_level = np.mean(sxx)
    degenerate = (level[:, 0] <= 1e-12 * max(global_level, np.finfo(float).tiny)) | ~np.isfinite(level[:, 0])
    denom = np.maximum(sxx, floor * np.maximum(level, np.finfo(float).tiny))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        d = np.fft.irfft(syx / denom, n=n, axis=-1)[:, : max_lag + 1]
    flagged = np.flatnonzero(degenerate)
    if flagged.size:
        good = np.flatnonzero(~degenerate)
        if good.size == 0:
            d[:] = 0.0
        else:
            for i in flagged:
                d[i] = d[good[np.argmin(np.abs(good - i))]]
    return d, tuple(int(i) for i in flagged)


def interpolate_blocks(block_values, centers, length: int) -> np.ndarray:
    """Linear interpolation between block centres, constant beyond the end centres."""
    t = np.arange(length)
    out = np.empty((length, block_values.shape[1]))
    for u in range(block_values.shape[1]):
        out[:, u] = np.interp(t, centers, block_values[:, u])
    return out


def estimate_filter(x, y, block_len: int = 128, order: int = 1, tapers: TaperSet | None = None) -> TvFilter:
    """Time-varying filter ``d_t(u)`` of ``y`` on ``x`` from the spectral ratio."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionError(f"length mismatch: {x.size} vs {y.size}")
    if order < 0 or order > block_len // 2:
        raise ParameterError(f"order must lie in 0..{block_len // 2}")
    if tapers is None:
        tapers = dpss_tapers(block_len)
    elif tapers.block_length != block_len:
        raise ParameterError("taper length differs from block_len")
    d, flagged = block_filters(x, y, tapers, order)
    centers = block_centers(x.size, block_len)
    return TvFilter(interpolate_blocks(d, centers, x.size), centers, d, flagged)
