"""Time-varying lag-polynomial operators.

An operator ``Phi_t(B) = sum_j phi[t, j] B^j`` is stored as a dense
``(T, p + 1)`` grid on the sample grid ``t = 0..T-1``. Infinite-order
operators (inverses, backward models) only ever exist as truncations that
carry the magnitude of their last retained lag.

Two grid conventions hold throughout:

* applying an operator zero-pads the input, ``x[t] = 0`` for ``t < 0``;
* coefficient rows requested outside ``[0, T)`` are clamped to the nearest
  edge row, so every operator is implicitly extended as constant beyond its
  grid. This only changes coefficients that multiply zero-padded samples.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import _core
from .errors import DimensionError, ModelViolationError, NonInvertibleError, ParameterError

R_MAX_CAP = 4096
TAIL_TOL = 1e-10
TIME_INVARIANCE_TOL = 0.02


@dataclass(frozen=True)
class TimeVaryingOperator:
    """Coefficient grid ``coeffs[t, j]`` of a lag polynomial of order ``p``."""

    coeffs: np.ndarray
    time_invariant: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2 or c.shape[0] == 0 or c.shape[1] == 0:
            raise DimensionError(f"coefficient grid must be 2-D and non-empty, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ParameterError("coefficient grid contains non-finite values")
        if self.time_invariant and not np.all(c == c[0]):
            raise ParameterError("time_invariant operator must have identical rows")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def length(self) -> int:
        return self.coeffs.shape[0]

    @property
    def degree(self) -> int:
        """Highest lag with a nonzero coefficient at some ``t`` (-1 for the zero operator)."""
        nz = np.flatnonzero(np.any(self.coeffs != 0.0, axis=0))
        return int(nz[-1]) if nz.size else -1

    def trimmed(self) -> "TimeVaryingOperator":
        """Drop trailing lag columns that vanish for every ``t``."""
        keep = max(self.degree, 0) + 1
        return TimeVaryingOperator(self.coeffs[:, :keep], self.time_invariant)

    def padded(self, order: int) -> "TimeVaryingOperator":
        if order < self.order:
            raise DimensionError("cannot pad to a smaller order")
        c = np.zeros((self.length, order + 1))
        c[:, : self.order + 1] = self.coeffs
        return TimeVaryingOperator(c, self.time_invariant)

    def polynomial(self, z) -> np.ndarray:
        """Evaluate ``Phi_t(z)`` for every ``t``; returns shape ``(T,) + z.shape``."""
        z = np.asarray(z, dtype=complex)
        powers = z[..., None] ** np.arange(self.order + 1)
        return np.tensordot(self.coeffs, np.moveaxis(powers, -1, 0), axes=(1, 0))

    @classmethod
    def identity(cls, length: int) -> "TimeVaryingOperator":
        return cls(np.ones((length, 1)), time_invariant=True)

    @classmethod
    def constant(cls, coeffs, length: int) -> "TimeVaryingOperator":
        row = np.atleast_1d(np.asarray(coeffs, dtype=float))
        return cls(np.tile(row, (length, 1)), time_invariant=True)


@dataclass(frozen=True)
class LagCovariance:
    """Auto-covariance, either ``gamma(k)`` (stationary) or ``gamma(t1, t2)``.

    For the stationary kind ``values[k]`` holds ``gamma(k)`` for ``k >= 0``;
    lags beyond the stored range are zero.
    """

    values: np.ndarray
    kind: str = "stationary"

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if self.kind == "stationary":
            v = np.atleast_1d(v)
            if v.ndim != 1:
                raise DimensionError("stationary covariance takes a 1-D lag array")
            if v[0] < 0:
                raise ParameterError("gamma(0) must be non-negative")
        elif self.kind == "general":
            if v.ndim != 2 or v.shape[0] != v.shape[1]:
                raise DimensionError("general covariance must be a square grid")
            if not np.allclose(v, v.T):
                raise ParameterError("general covariance must be symmetric")
            if np.any(np.diag(v) < 0):
                raise ParameterError("variances on the diagonal must be non-negative")
        else:
            raise ParameterError(f"unknown covariance kind {self.kind!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def at(self, lag) -> np.ndarray:
        if self.kind != "stationary":
            raise ParameterError("lag lookup needs a stationary covariance")
        lag = np.abs(np.asarray(lag))
        out = np.zeros(lag.shape)
        inside = lag < self.values.size
        out[inside] = self.values[lag[inside]]
        return out

    @classmethod
    def white(cls, variance: float) -> "LagCovariance":
        return cls(np.array([variance]))


@dataclass(frozen=True)
class NoiseSpec:
    sigma_x_sq: float
    sigma_n_sq: float

    def __post_init__(self):
        for name in ("sigma_x_sq", "sigma_n_sq"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ParameterError(f"{name} must be finite and >= 0, got {v}")

    @property
    def ratio(self) -> float:
        if self.sigma_x_sq <= 0:
            raise ModelViolationError("sigma_x_sq must be > 0 for the backward recursion")
        return self.sigma_n_sq / self.sigma_x_sq


class TruncatedInverse(NamedTuple):
    op: TimeVaryingOperator
    tail: float  # max_t |theta[t, r_max]|
    r_max: int


class BackwardModel(NamedTuple):
    op: TimeVaryingOperator
    abs_sums: np.ndarray  # sum_i |psi[t, i]| per t


class InvertibilityReport(NamedTuple):
    cond_a: bool
    cond_b: bool
    finite_inverse_necessary: bool


def _check_same_length(a: TimeVaryingOperator, b: TimeVaryingOperator):
    if a.length != b.length:
        raise DimensionError(f"operators live on different grids ({a.length} vs {b.length})")


def _rows(idx, n):
    return np.clip(idx, 0, n - 1)


def apply(op: TimeVaryingOperator, x) -> np.ndarray:
    """``out[t] = sum_j phi[t, j] * x[t - j]`` with zero padding before ``t = 0``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != op.length:
        raise DimensionError(f"series length {x.size} does not match operator grid {op.length}")
    return _core.tv_apply(op.coeffs, x)


def compose(a: TimeVaryingOperator, b: TimeVaryingOperator) -> TimeVaryingOperator:
    """Operator product ``a(B) b(B)``: apply ``b`` first, then ``a``."""
    _check_same_length(a, b)
    return TimeVaryingOperator(
        _core.tv_compose(a.coeffs, b.coeffs),
        time_invariant=a.time_invariant and b.time_invariant,
    )


def _require_leading(op: TimeVaryingOperator):
    if np.any(op.coeffs[:, 0] == 0.0):
        t = int(np.flatnonzero(op.coeffs[:, 0] == 0.0)[0])
        raise NonInvertibleError(f"phi[{t}, 0] = 0; no inverse operator exists")


def default_r_max(order: int) -> int:
    return 8 * order + 64


def invert(op: TimeVaryingOperator, r_max: int | None = None) -> TruncatedInverse:
    """Left inverse ``Theta`` with ``Theta(B) Phi(B) = 1``, truncated at lag ``r_max``.

    With ``r_max=None`` the truncation starts at ``8p + 64`` and doubles until
    the mass beyond ``r_max / 2`` drops below 1e-10 or the cap (4096) is hit.
    """
    _require_leading(op)
    if r_max is not None:
        if r_max < 0:
            raise ParameterError("r_max must be non-negative")
        theta = _core.tv_invert(op.coeffs, int(r_max))
        return TruncatedInverse(TimeVaryingOperator(theta), float(np.max(np.abs(theta[:, -1]))), int(r_max))
    r = default_r_max(op.order)
    while True:
        theta = _core.tv_invert(op.coeffs, r)
        tail_mass = np.max(np.sum(np.abs(theta[:, r // 2 + 1 :]), axis=1))
        if tail_mass < TAIL_TOL or r >= R_MAX_CAP or not np.isfinite(tail_mass):
            break
        r = min(2 * r, R_MAX_CAP)
    return TruncatedInverse(TimeVaryingOperator(theta), float(np.max(np.abs(theta[:, -1]))), r)


def check_invertibility(op: TimeVaryingOperator, q: int | None = None) -> InvertibilityReport:
    """Evaluate the two sufficient conditions and the finite-inverse necessary condition.

    ``cond_a``: ``|phi[t,0]| > sum_{j>=1} |phi[t+j, j]| > 0`` for every ``t``.
    ``cond_b``: ``phi[t,0] > phi[t+1,1] > ... > phi[t+p,p] >= 0`` for every ``t``.
    ``finite_inverse_necessary``: ``phi[t,0] != 0`` everywhere and
    ``prod_{i=0..q} phi[t-i, p] = 0`` for each ``t`` whose window ``t-q..t``
    lies on the grid. ``q`` defaults to ``T - 1`` (the whole grid).
    """
    c = op.coeffs
    n, p = op.length, op.order
    t = np.arange(n)
    diag = np.stack([c[_rows(t + j, n), j] for j in range(p + 1)], axis=1)
    off = np.abs(diag[:, 1:]).sum(axis=1)
    cond_a = bool(np.all((np.abs(diag[:, 0]) > off) & (off > 0)))
    if p == 0:
        cond_b = bool(np.all(diag[:, 0] > 0))
    else:
        chain = np.all(diag[:, :-1] > diag[:, 1:], axis=1) & (diag[:, -1] >= 0)
        cond_b = bool(np.all(chain))
    if q is None:
        q = n - 1
    nonzero_lead = bool(np.all(c[:, 0] != 0.0))
    last = c[:, p]
    windows = [last[s - q : s + 1] for s in range(q, n)]
    products_vanish = bool(windows) and all(np.any(w == 0.0) for w in windows)
    if p == 0:
        # a zero-order operator's inverse is 1/phi, always of finite order
        products_vanish = True
    return InvertibilityReport(cond_a, cond_b, nonzero_lead and products_vanish)


def backward_coefficients(op: TimeVaryingOperator, noise: NoiseSpec, q_max: int) -> BackwardModel:
    """Backward-model operator for i.i.d. cause and i.i.d. noise.

    For ``p >= 1``: ``psi[t,0] = 1/phi[t,0]`` and for ``i >= 1``
    ``psi[t,i] = -(sum_j psi[t,i-j] phi[t-i+j,j] + r psi[t,i-p] / phi[t+p-i,p]) / phi[t-i,0]``
    with ``r = sigma_n^2 / sigma_x^2``. For ``p = 0`` the closed form
    ``psi[t,0] = phi / (phi^2 + r)`` applies and higher lags vanish.
    """
    if q_max < 0:
        raise ParameterError("q_max must be non-negative")
    ratio = noise.ratio
    c = op.coeffs
    if np.any(c[:, 0] == 0.0) or np.any(c[:, op.order] == 0.0):
        raise ModelViolationError("backward recursion needs phi[t,0] != 0 and phi[t,p] != 0 for all t")
    psi = _core.tv_backward(c, float(ratio), int(q_max))
    return BackwardModel(TimeVaryingOperator(psi), np.sum(np.abs(psi), axis=1))


def backward_noise_variance(
    forward: TimeVaryingOperator,
    backward: TimeVaryingOperator,
    gamma_nn: LagCovariance,
    r_max: int | None = None,
) -> np.ndarray:
    """``Var(W_t) = sum_j sum_k eta[t,j] theta[t-j,k] gamma_NN(k-j)``, lags from 0."""
    _check_same_length(forward, backward)
    theta = invert(forward, r_max).op.coeffs
    eta = backward.coeffs
    n = forward.length
    t = np.arange(n)
    k = np.arange(theta.shape[1])
    out = np.zeros(n)
    for j in range(eta.shape[1]):
        if not np.any(eta[:, j]):
            continue
        g = gamma_nn.at(k - j)
        out += eta[:, j] * (theta[_rows(t - j, n)] @ g)
    return out


def relative_spread(values) -> float:
    """``(max - min) / mean`` of a positive sequence."""
    values = np.asarray(values, dtype=float)
    mean = values.mean()
    if mean == 0:
        return 0.0 if np.all(values == 0) else np.inf
    return float((values.max() - values.min()) / abs(mean))


def is_time_invariant(values, tol: float = TIME_INVARIANCE_TOL) -> bool:
    return relative_spread(values) < tol


def companion_product_norm(op: TimeVaryingOperator, n_blocks: int, t: int | None = None) -> np.ndarray:
    """Infinity norms of ``A_{t,Np} ... A_{t,1}`` for ``N = 1..n_blocks``.

    The companion matrices carry ``a[t,n,j] = phi[t-(n+p-1)+j, j] / phi[t-(n+p-1), 0]``
    in their last row. Returns the sequence at grid point ``t``, or the
    worst case over the grid when ``t`` is None.
    """
    if op.order < 1:
        raise ParameterError("companion matrices need order p >= 1")
    if n_blocks < 1:
        raise ParameterError("n_blocks must be positive")
    _require_leading(op)
    norms = _core.companion_norms(op.coeffs, int(n_blocks))
    if t is None:
        return norms.max(axis=0)
    return norms[t]


def companion_matrices(op: TimeVaryingOperator, t: int, count: int) -> np.ndarray:
    """Companion matrices ``A_{t,1..count}`` as an array of shape ``(count, p, p)``."""
    p, n = op.order, op.length
    c = op.coeffs
    mats = np.zeros((count, p, p))
    for m in range(1, count + 1):
        base = t - (m + p - 1)
        if p > 1:
            mats[m - 1, :-1, 1:] = np.eye(p - 1)
        for j in range(1, p + 1):
            mats[m - 1, p - 1, p - j] = -c[_rows(base + j, n), j] / c[_rows(base, n), 0]
    return mats


def equal_on_disk(a: TimeVaryingOperator, b: TimeVaryingOperator, radius: float = 0.5,
                  n_points: int = 32, atol: float = 1e-10, seed: int = 0) -> bool:
    """Compare two operators through their polynomials on random points of ``|z| < radius``."""
    _check_same_length(a, b)
    rng = np.random.default_rng(seed)
    z = radius * np.sqrt(rng.uniform(size=n_points)) * np.exp(2j * np.pi * rng.uniform(size=n_points))
    return bool(np.allclose(a.polynomial(z), b.polynomial(z), rtol=0, atol=atol))


def write_operator_csv(op: TimeVaryingOperator, path) -> None:
    """One row per ``t``, columns ``j0..jp``; 17 significant digits."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"j{j}" for j in range(op.order + 1)])
        for row in op.coeffs:
            w.writerow([repr(float(v)) for v in row])


def read_operator_csv(path) -> TimeVaryingOperator:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return TimeVaryingOperator(np.array([[float(v) for v in r] for r in rows[1:]]))
