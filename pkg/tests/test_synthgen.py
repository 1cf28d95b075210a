import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from nonstat_causal import lagop, spectra, stationarity, synthgen
from nonstat_causal.errors import ModelViolationError, ParameterError
from nonstat_causal.synthgen import SynthModelSpec, generate

LONG = 2**16


def arma_variance(ar, ma, sigma):
    """Spectral-integral oracle: ``sigma^2/(2 pi) int |ma(e^-iw)|^2 / |ar(e^-iw)|^2 dw``."""
    def dens(w):
        z = np.exp(-1j * w * np.arange(3))
        return abs(np.dot(ma, z[: len(ma)])) ** 2 / abs(np.dot(ar, z[: len(ar)])) ** 2
    val, _ = integrate.quad(dens, -np.pi, np.pi, limit=200)
    return sigma**2 * val / (2 * np.pi)


# ---------------------------------------------------------------- primitives

def test_degenerate_arma_is_white():
    ar, ma = synthgen.arma_coefficients([0, 0, 0, 0])
    x = synthgen.gen_arma(LONG, np.random.default_rng(0), ar, ma, 3.0)
    assert abs(x.var() / 9.0 - 1) < 0.03
    assert abs(np.corrcoef(x[1:], x[:-1])[0, 1]) < 0.02


def test_first_experiment_ar2_autocorrelation():
    z = synthgen.gen_ar2_exp1(LONG, np.random.default_rng(1))
    # Yule-Walker: rho_1 = phi_1 / (1 - phi_2)
    assert abs(np.corrcoef(z[1:], z[:-1])[0, 1] - 0.8 / 1.4) < 0.05


def test_arma_variance_matches_spectral_integral():
    rng = np.random.default_rng(2)
    for _ in range(3):
        ar, ma = synthgen.arma_coefficients(synthgen.draw_arma_roots(rng))
        x = synthgen.gen_arma(LONG, rng, ar, ma, 25.0)
        assert abs(x.var() / arma_variance(ar, ma, 25.0) - 1) < 0.05
    assert arma_variance([1.0, -0.8, 0.4], [1.0], 1.0) == pytest.approx(1.4 / (0.6 * (1.4**2 - 0.64)))


def test_arma_root_draws_and_stationarity():
    rng = np.random.default_rng(3)
    for _ in range(200):
        d = synthgen.draw_arma_roots(rng)
        assert np.all((np.abs(d) >= 0.1) & (np.abs(d) <= 0.6))
        ar, _ = synthgen.arma_coefficients(d)
        assert synthgen.spectral_radius(ar) < 1
    with pytest.raises(ModelViolationError):
        synthgen.gen_arma(100, rng, (1.0, -1.2, 0.1))


def test_student_t_moments():
    v = synthgen.student_t(np.random.default_rng(4), 5, 200000)
    # Var t_5 = 5/3
    assert abs(v.var() / (5 / 3) - 1) < 0.05


def test_tri_vertex_and_shape():
    for b in (0.1, 0.3, 0.5, 0.9):
        assert synthgen.tri(2 * np.pi * b, b) == pytest.approx(1.0)
    t = np.linspace(0, 2 * np.pi, 1001)
    v = synthgen.tri(t, 0.5)
    assert np.allclose(v, v[::-1], atol=1e-12)
    assert np.max(np.abs(v)) <= 1 + 1e-12
    assert np.allclose(synthgen.tri(t + 2 * np.pi, 0.3), synthgen.tri(t, 0.3), atol=1e-9)
    assert np.all(np.abs(synthgen.tri(np.linspace(-20, 20, 4001), 0.0)) <= 1 + 1e-12)


def test_ump_gain_peak():
    T = 2048
    assert synthgen.ump_gain(np.array([T / 2]), T, 0.5 * T)[0] == 1.0
    g = synthgen.ump_gain(np.arange(T), T, 0.5 * T)
    assert g.argmin() == T // 2


def test_scaling_contracts():
    rng = np.random.default_rng(5)
    for _ in range(50):
        f, _ = synthgen.normalised_polynomial(rng, 2048)
        assert np.max(np.abs(f)) == pytest.approx(1.0, abs=1e-15)
        for k in (1, 2, 3):
            a, _ = synthgen.smooth_coefficient(rng, 2048, (1 / 1.5) ** k)
            assert np.max(np.abs(a)) == pytest.approx((1 / 1.5) ** k, rel=1e-14)


def test_uniform_noise_variance():
    d = generate(SynthModelSpec("exp3", length=LONG, params={"noise_kind": "uniform"}, seed=6))
    w = d.noises[1]
    assert abs(w.var() / 300.0 - 1) < 0.05


def test_spec_errors():
    with pytest.raises(ParameterError):
        SynthModelSpec("exp9")
    with pytest.raises(ParameterError):
        SynthModelSpec("exp1", length=8)
    with pytest.raises(ParameterError):
        generate(SynthModelSpec("exp4", params={"b": 1.0}))
    with pytest.raises(ParameterError):
        generate(SynthModelSpec("exp3", params={"noise_kind": "cauchy"}))


def test_parse_params():
    assert synthgen.parse_params("L=200, sigma_n=2.5,noise_kind=uniform") == {"L": 200, "sigma_n": 2.5,
                                                                               "noise_kind": "uniform"}
    assert synthgen.parse_params("") == {}
    with pytest.raises(ParameterError):
        synthgen.parse_params("L")


def test_derive_seed_spread():
    seeds = {synthgen.derive_seed(0, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert all(0 <= s < 2**63 for s in seeds)
    assert synthgen.derive_seed(5, 3) == synthgen.derive_seed(5, 3)


# ---------------------------------------------------------------- experiments

def test_noiseless_first_experiment_is_exact_filter():
    d = generate(SynthModelSpec("exp1", params={"sigma_n": 0}, seed=7))
    assert np.max(np.abs(d.y - lagop.apply(d.filters[(0, 1)], d.x))) < 1e-10


def test_first_experiment_power_profile():
    T = 2048
    tapers = spectra.dpss_tapers(128)
    acc = np.zeros(16)
    for seed in range(100):
        acc += spectra.auto_spectrum(generate(SynthModelSpec("exp1", seed=seed)).x, tapers).values.mean(axis=1)
    centers = spectra.block_centers(T, 128)
    b2 = synthgen.gaussian_kernel(centers, T / 2, 0.2 * T) ** 2
    ratio = (acc / acc.sum()) / (b2 / b2.sum())
    assert np.all(np.abs(ratio - 1) < 0.25)


@pytest.mark.parametrize("tag,params", [
    ("exp1", {}), ("exp2", {}), ("exp3", {"noise_kind": "arma"}), ("exp3", {"noise_kind": "uniform"}),
    ("exp3", {"noise_kind": "student_t"}), ("exp4", {"b": 0.0}), ("exp4", {"b": 0.5}),
])
def test_filters_reproduce_effect(tag, params):
    d = generate(SynthModelSpec(tag, params=params, seed=11))
    noise = d.noises[1]
    if tag == "exp3":
        noise = synthgen.ump_gain(np.arange(d.y.size), d.y.size, d.params["sigma_g"]) * noise
    assert np.max(np.abs(d.y - (lagop.apply(d.filters[(0, 1)], d.x) + noise))) < 1e-10
    assert d.truth["direction"] == "x_to_y"
    assert d.series.shape == (2, 2048)


def test_network_filters_reproduce_nodes():
    for seed in range(5):
        d = generate(SynthModelSpec("exp5", seed=seed))
        for j in range(d.series.shape[0]):
            acc = d.noises[j].copy()
            for (i, k), op in d.filters.items():
                if k == j:
                    acc += lagop.apply(op, d.series[i])
            assert np.max(np.abs(d.series[j] - acc)) < 1e-10


def test_network_edge_probability_zero():
    d = generate(SynthModelSpec("exp5", params={"edge_prob": 0.0, "n_nodes": 4}, seed=12))
    assert not np.any(d.truth["adjacency"])
    assert d.filters == {}
    assert np.array_equal(d.series, d.noises)


def test_network_stationarity_of_roots_and_descendants():
    tapers = spectra.dpss_tapers(128)
    roots = root_pass = nonroots = nonroot_reject = 0
    for seed in range(100):
        d = generate(SynthModelSpec("exp5", seed=seed))
        adj = np.array(d.truth["adjacency"], dtype=bool)
        for j in range(adj.shape[0]):
            ok = stationarity.psr_test(spectra.auto_spectrum(d.series[j], tapers)).stationary
            if adj[:, j].any():
                nonroots += 1
                nonroot_reject += not ok
            else:
                roots += 1
                root_pass += ok
    assert root_pass / roots >= 1 - 0.05 - 0.05
    assert nonroot_reject / nonroots >= 0.8


# ---------------------------------------------------------------- seeding

@pytest.mark.parametrize("tag", synthgen.EXPERIMENTS)
def test_deterministic_under_seed(tag):
    a = generate(SynthModelSpec(tag, seed=99))
    b = generate(SynthModelSpec(tag, seed=99))
    assert np.array_equal(a.series, b.series)
    assert a.truth == b.truth and a.params == b.params


@pytest.mark.parametrize("tag", ["exp2", "exp3", "exp5"])
def test_two_stream_seeding(tag):
    a = generate(SynthModelSpec(tag, seed=1, structure_seed=42))
    b = generate(SynthModelSpec(tag, seed=2, structure_seed=42))
    assert a.params == b.params and a.truth == b.truth
    for key in a.filters:
        assert np.array_equal(a.filters[key].coeffs, b.filters[key].coeffs)
    assert not np.array_equal(a.series, b.series)


@settings(max_examples=20)
@given(st.integers(0, 2**31), st.integers(2, 5), st.floats(0, 1))
def test_property_random_dag_acyclic(seed, n, p):
    adj, order = synthgen.random_dag(np.random.default_rng(seed), n, p)
    pos = {int(v): i for i, v in enumerate(order)}
    for i, j in zip(*np.nonzero(adj)):
        assert pos[i] < pos[j]
    assert not np.any(np.diag(adj))
