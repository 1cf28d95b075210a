"""Seeded generators for the five synthetic experiments.

Every generator draws from two independent streams: a *structure* stream
for model parameters (orders, kernels, ARMA roots, graphs) and a *noise*
stream for innovations. Fixing ``structure_seed`` and varying ``seed``
therefore gives fresh realisations of one fixed model.

Filters that map a cause to its effect are recorded as
``TimeVaryingOperator`` grids and applied with zero padding, so
``y == lagop.apply(filter, x) + noise`` holds to rounding error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.signal import lfilter

from . import lagop
from .errors import ModelViolationError, ParameterError
from .lagop import TimeVaryingOperator

BURN_IN = 500
DEFAULT_LENGTH = 2048
EXPERIMENTS = ("exp1", "exp2", "exp3", "exp4", "exp5")
NOISE_KINDS = ("arma", "uniform", "student_t")

_MASK64 = (1 << 64) - 1


def splitmix64(value: int) -> int:
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Per-replicate seed: splitmix64 of the base seed offset by the index."""
    return splitmix64((int(seed) + splitmix64(int(index))) & _MASK64) >> 1


def streams(seed: int, structure_seed: int | None = None):
    """``(structure_rng, noise_rng)`` for one model draw."""
    if structure_seed is None:
        structure_seed = seed
    return (np.random.default_rng([int(structure_seed), 0]),
            np.random.default_rng([int(seed), 1]))


@dataclass(frozen=True)
class SynthModelSpec:
    experiment: str
    length: int = DEFAULT_LENGTH
    params: dict = field(default_factory=dict)
    seed: int = 0
    structure_seed: int | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ParameterError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if self.length < 16:
            raise ParameterError("length must be at least 16")

    def get(self, key, default):
        return self.params.get(key, default)


@dataclass
class GeneratedData:
    series: np.ndarray  # (n_series, T)
    names: list
    truth: dict
    filters: dict  # (cause, effect) -> TimeVaryingOperator
    noises: np.ndarray
    params: dict[str, Any]

    @property
    def x(self) -> np.ndarray:
        return self.series[0]

    @property
    def y(self) -> np.ndarray:
        return self.series[1]


# ---------------------------------------------------------------- primitives

def arma_coefficients(d) -> tuple[np.ndarray, np.ndarray]:
    """``(ar, ma)`` lfilter polynomials of the root-parametrised ARMA(2, 2).

    ``1 - Phi(z) = (1 - d1 z)(1 - d2 z)`` and ``Theta(z) = (1 + d3 z)(1 + d4 z)``.
    """
    d1, d2, d3, d4 = (float(v) for v in d)
    ar = np.array([1.0, -(d1 + d2), d1 * d2])
    ma = np.array([1.0, d3 + d4, d3 * d4])
    return ar, ma


def spectral_radius(ar) -> float:
    """Largest |eigenvalue| of the AR companion matrix (0 for a pure MA)."""
    ar = np.asarray(ar, dtype=float)
    p = len(ar) - 1
    if p == 0 or np.all(ar[1:] == 0):
        return 0.0
    comp = np.zeros((p, p))
    comp[0] = -ar[1:] / ar[0]
    comp[1:, :-1] = np.eye(p - 1)
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


def draw_arma_roots(rng) -> np.ndarray:
    """Four draws from ``Unif[-0.6, -0.1] U [0.1, 0.6]``."""
    mag = rng.uniform(0.1, 0.6, size=4)
    sign = np.where(rng.random(4) < 0.5, -1.0, 1.0)
    return mag * sign


def gen_arma(length: int, rng, ar=(1.0,), ma=(1.0,), sigma: float = 1.0, burn_in: int = BURN_IN) -> np.ndarray:
    """Stationary ARMA realisation ``ar(B) W = ma(B) e`` with ``e ~ N(0, sigma^2)``."""
    ar = np.asarray(ar, dtype=float)
    ma = np.asarray(ma, dtype=float)
    rho = spectral_radius(ar)
    if rho >= 1:
        raise ModelViolationError(f"AR part is not stationary (spectral radius {rho:.4f})")
    e = rng.normal(0.0, sigma, size=length + burn_in)
    return lfilter(ma, ar, e)[burn_in:]


def gen_ar2_exp1(length: int, rng, sigma: float = 100.0, burn_in: int = BURN_IN) -> np.ndarray:
    """``Z_t = 0.8 Z_{t-1} - 0.4 Z_{t-2} + e_t``."""
    return gen_arma(length, rng, (1.0, -0.8, 0.4), (1.0,), sigma, burn_in)


def gaussian_kernel(t, mu: float, sigma: float) -> np.ndarray:
    """Unnormalised Gaussian bump with peak value 1 at ``mu``."""
    t = np.asarray(t, dtype=float)
    return np.exp(-((t - mu) ** 2) / (2.0 * sigma**2))


def ump_gain(t, length: int, sigma: float) -> np.ndarray:
    """Experiment-3 noise gain ``g(t) = exp((t - T/2)^2 / (2 sigma^2))``; ``g(T/2) = 1``."""
    t = np.asarray(t, dtype=float)
    return np.exp((t - length / 2.0) ** 2 / (2.0 * sigma**2))


def tri(t, b: float) -> np.ndarray:
    """Triangle wave of period ``2*pi`` with vertex ``(2*pi*b, 1)`` and zeros at multiples of ``2*pi``."""
    if not 0 <= b < 1:
        raise ParameterError("b must lie in [0, 1)")
    s = np.mod(np.asarray(t, dtype=float), 2 * np.pi)
    if b == 0:
        return 1.0 - s / (2 * np.pi)
    rise = s / (2 * np.pi * b)
    fall = s / (2 * np.pi * b - 2 * np.pi) + 1.0 / (1.0 - b)
    return np.where(s <= 2 * np.pi * b, rise, fall)


def student_t(rng, df: int, size: int) -> np.ndarray:
    """Student-t variates as a normal over ``sqrt(chi2_df / df)``, the chi-square built from normals."""
    z = rng.standard_normal(size)
    chi = np.sum(rng.standard_normal((df, size)) ** 2, axis=0)
    return z / np.sqrt(chi / df)


def normalised_polynomial(rng, length: int, degree: int | None = None):
    """``f(P(t/T))``: random-root polynomial scaled to unit peak magnitude."""
    if degree is None:
        degree = int(rng.integers(1, 7))
    roots = rng.uniform(-1.0, 1.0, size=degree)
    u = np.arange(length) / length
    values = np.prod(u[:, None] - roots[None, :], axis=1)
    peak = np.max(np.abs(values))
    if peak == 0:
        values = np.ones(length)
        peak = 1.0
    return values / peak, {"degree": degree, "roots": roots.tolist()}


def smooth_coefficient(rng, length: int, scale: float):
    """``g(f(P(t/T)) + sinc((t - a)/b))`` with peak magnitude ``scale``."""
    poly, info = normalised_polynomial(rng, length)
    a = rng.uniform(300.0, 1500.0)
    b = rng.uniform(400.0, 800.0)
    t = np.arange(length)
    raw = poly + np.sinc((t - a) / b)
    peak = np.max(np.abs(raw))
    if peak == 0:
        raw, peak = np.ones(length), 1.0
    info.update({"sinc_a": a, "sinc_b": b})
    return scale * raw / peak, info


def smooth_filter(rng, length: int, order: int, amp: float, period: float):
    """``c(t) [1, a_1(t), ..., a_p(t)]`` with ``c(t) = 1 + A cos(t/L)`` and ``max|a_k| = (1/1.5)^k``."""
    t = np.arange(length)
    coeffs = np.ones((length, order + 1))
    infos = []
    for k in range(1, order + 1):
        coeffs[:, k], info = smooth_coefficient(rng, length, (1 / 1.5) ** k)
        infos.append(info)
    gain = 1.0 + amp * np.cos(t / period)
    return coeffs * gain[:, None], {"order": order, "A": amp, "L": period, "kernels": infos}


# ---------------------------------------------------------------- experiments

def _first_order_pair(spec: SynthModelSpec, a_of_t, extra: dict) -> GeneratedData:
    T = spec.length
    struct, noise = streams(spec.seed, spec.structure_seed)
    sigma_n = float(spec.get("sigma_n", 25.0))
    t = np.arange(T)
    b = gaussian_kernel(t, float(spec.get("mu_frac", 0.5)) * T, float(spec.get("sigma_frac", 0.2)) * T)
    z = gen_ar2_exp1(T, noise, float(spec.get("sigma_z", 100.0)))
    x = b * z
    n = gen_arma(T, noise, (1.0, -0.8, 0.16), (1.0,), sigma_n) if sigma_n > 0 else np.zeros(T)
    op = TimeVaryingOperator(np.column_stack([np.ones(T), a_of_t]))
    y = lagop.apply(op, x) + n
    params = {"sigma_n": sigma_n, **extra}
    return GeneratedData(np.vstack([x, y]), ["x", "y"], {"direction": "x_to_y", "cause": 0, "effect": 1},
                         {(0, 1): op}, np.vstack([z, n]), params)


def gen_experiment1(spec: SynthModelSpec) -> GeneratedData:
    """``Y_t = X_t + a(t) X_{t-1} + N_t`` with ``a(t) = 0.5 cos(t/L)`` and UMP cause ``X = b(t) Z``."""
    period = float(spec.get("L", 200.0))
    a = 0.5 * np.cos(np.arange(spec.length) / period)
    return _first_order_pair(spec, a, {"L": period})


def gen_experiment4(spec: SynthModelSpec) -> GeneratedData:
    """Experiment-1 model with the triangle-wave filter ``a(t) = 0.5 tri(t/200; b)``."""
    b = float(spec.get("b", 0.5))
    if not 0 <= b < 1:
        raise ParameterError("b must lie in [0, 1)")
    scale = float(spec.get("period_scale", 200.0))
    a = 0.5 * tri(np.arange(spec.length) / scale, b)
    return _first_order_pair(spec, a, {"b": b, "period_scale": scale})


def _high_order_signal(spec: SynthModelSpec, struct, noise):
    T = spec.length
    order = spec.get("order", None)
    order = int(struct.integers(1, 6)) if order is None else int(order)
    amp = float(spec.get("A", struct.uniform(0.05, 0.2)))
    period = float(spec.get("L", struct.uniform(400.0, 800.0)))
    filt, finfo = smooth_filter(struct, T, order, amp, period)
    # cause: X_t = Z_t + b_1(t) Z_{t-1} + b_2(t) Z_{t-2}
    bcoef = np.ones((T, 3))
    binfo = []
    for k in (1, 2):
        bcoef[:, k], info = smooth_coefficient(struct, T, (1 / 1.5) ** k)
        binfo.append(info)
    dz = draw_arma_roots(struct)
    ar, ma = arma_coefficients(dz)
    sigma_z = float(spec.get("sigma_z", 100.0))
    z_full = gen_arma(T + 2, noise, ar, ma, sigma_z)
    z = z_full[2:]
    x = z + bcoef[:, 1] * z_full[1:-1] + bcoef[:, 2] * z_full[:-2]
    params = {"filter": finfo, "cause_kernels": binfo, "z_roots": dz.tolist(), "sigma_z": sigma_z,
              "per_k_independent_draws": True}
    return x, z, TimeVaryingOperator(filt), params


def gen_experiment2(spec: SynthModelSpec) -> GeneratedData:
    """``Y_t = c(t) sum_k a_k(t) X_{t-k} + N_t`` with random smooth high-order filters."""
    struct, noise = streams(spec.seed, spec.structure_seed)
    x, z, op, params = _high_order_signal(spec, struct, noise)
    dn = draw_arma_roots(struct)
    sigma_n = float(spec.get("sigma_n", 25.0))
    ar, ma = arma_coefficients(dn)
    n = gen_arma(spec.length, noise, ar, ma, sigma_n)
    y = lagop.apply(op, x) + n
    params.update({"n_roots": dn.tolist(), "sigma_n": sigma_n})
    return GeneratedData(np.vstack([x, y]), ["x", "y"], {"direction": "x_to_y", "cause": 0, "effect": 1},
                         {(0, 1): op}, np.vstack([z, n]), params)


def gen_experiment3(spec: SynthModelSpec) -> GeneratedData:
    """Experiment-2 signal with uniformly modulated noise ``N_t = g(t) W_t``."""
    kind = spec.get("noise_kind", "arma")
    if kind not in NOISE_KINDS:
        raise ParameterError(f"unknown noise_kind {kind!r}; expected one of {NOISE_KINDS}")
    T = spec.length
    struct, noise = streams(spec.seed, spec.structure_seed)
    x, z, op, params = _high_order_signal(spec, struct, noise)
    sigma_g = float(spec.get("sigma_g_frac", struct.uniform(0.4, 0.8))) * T
    if kind == "arma":
        dw = draw_arma_roots(struct)
        ar, ma = arma_coefficients(dw)
        w = gen_arma(T, noise, ar, ma, float(spec.get("sigma_w", 25.0)))
        params["w_roots"] = dw.tolist()
    elif kind == "uniform":
        w = noise.uniform(-30.0, 30.0, size=T)
    else:
        w = 15.0 * student_t(noise, 5, T)
    n = ump_gain(np.arange(T), T, sigma_g) * w
    y = lagop.apply(op, x) + n
    params.update({"noise_kind": kind, "sigma_g": sigma_g})
    return GeneratedData(np.vstack([x, y]), ["x", "y"], {"direction": "x_to_y", "cause": 0, "effect": 1},
                         {(0, 1): op}, np.vstack([z, w]), params)


def random_dag(rng, n_nodes: int, edge_prob: float) -> tuple[np.ndarray, np.ndarray]:
    """Upper-triangular draw relabelled by a random permutation; returns ``(adjacency, order)``."""
    upper = np.triu(rng.random((n_nodes, n_nodes)) < edge_prob, k=1)
    perm = rng.permutation(n_nodes)
    adj = np.zeros((n_nodes, n_nodes), dtype=bool)
    adj[np.ix_(perm, perm)] = upper
    return adj, perm


def gen_experiment5(spec: SynthModelSpec) -> GeneratedData:
    """Random DAG with order-2 smooth time-varying edges and i.i.d. Gaussian noises."""
    T = spec.length
    struct, noise = streams(spec.seed, spec.structure_seed)
    n_nodes = spec.get("n_nodes", None)
    n_nodes = int(struct.integers(2, 6)) if n_nodes is None else int(n_nodes)
    if n_nodes < 1:
        raise ParameterError("n_nodes must be positive")
    edge_prob = float(spec.get("edge_prob", 0.6))
    adj, order = random_dag(struct, n_nodes, edge_prob)
    variances = struct.uniform(5.0, 10.0, size=n_nodes)
    filters = {}
    finfo = {}
    for i, j in zip(*np.nonzero(adj)):
        amp = struct.uniform(0.5, 2.0)
        period = struct.uniform(400.0, 800.0)
        coeffs, info = smooth_filter(struct, T, 2, amp, period)
        filters[(int(i), int(j))] = TimeVaryingOperator(coeffs)
        finfo[f"{i}->{j}"] = info
    noises = noise.standard_normal((n_nodes, T)) * np.sqrt(variances)[:, None]
    series = np.zeros((n_nodes, T))
    for j in order:
        acc = noises[j].copy()
        for i in np.flatnonzero(adj[:, j]):
            acc += lagop.apply(filters[(int(i), int(j))], series[i])
        series[j] = acc
    params = {"n_nodes": n_nodes, "edge_prob": edge_prob, "noise_variances": variances.tolist(),
              "causal_order": [int(v) for v in order], "filters": finfo}
    truth = {"adjacency": adj.astype(int).tolist(), "causal_order": [int(v) for v in order]}
    return GeneratedData(series, [f"x{i}" for i in range(n_nodes)], truth, filters, noises, params)


GENERATORS = {
    "exp1": gen_experiment1,
    "exp2": gen_experiment2,
    "exp3": gen_experiment3,
    "exp4": gen_experiment4,
    "exp5": gen_experiment5,
}


def generate(spec: SynthModelSpec) -> GeneratedData:
    return GENERATORS[spec.experiment](spec)


def parse_params(text: str | None) -> dict:
    """``"k=v,k2=v2"`` into a dict with numeric values where possible."""
    out: dict = {}
    if not text:
        return out
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ParameterError(f"malformed parameter {item!r}; expected k=v")
        key, value = (s.strip() for s in item.split("=", 1))
        for cast in (int, float):
            try:
                out[key] = cast(value)
                break
            except ValueError:
                continue
        else:
            out[key] = value
    return out
