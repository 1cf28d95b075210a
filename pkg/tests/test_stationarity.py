import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special, stats

from nonstat_causal import spectra, stationarity, synthgen
from nonstat_causal.errors import InsufficientDataError, ParameterError
from nonstat_causal.spectra import EvolutionarySpectrum

TAPERS = spectra.dpss_tapers(128)
T = 2048


def grid_spectrum(values, k=4):
    values = np.asarray(values, dtype=float)
    freqs = np.linspace(0.1, 3.0, values.shape[1])
    return EvolutionarySpectrum(np.arange(values.shape[0]), freqs, values, k, 128, "auto")


def report(x):
    return stationarity.psr_test(spectra.auto_spectrum(x, TAPERS))


# ---------------------------------------------------------------- special functions

@pytest.mark.parametrize("k", [1, 2, 4, 7, 20])
def test_polygamma_identities(k):
    assert math.isclose(stationarity.digamma_int(k), special.digamma(k), rel_tol=1e-12, abs_tol=1e-14)
    assert math.isclose(stationarity.trigamma_int(k), special.polygamma(1, k), rel_tol=1e-12)


@pytest.mark.parametrize("x,df", [(0.5, 1), (3.0, 3), (40.0, 30), (200.0, 165), (1e-3, 10)])
def test_chi2_tail_against_scipy(x, df):
    assert math.isclose(stationarity.chi2_sf(x, df), stats.chi2.sf(x, df), rel_tol=1e-10)


def test_log_grid_is_unbiased_for_exponential_average():
    # E log(mean of K unit exponentials) = psi(K) - log K, so W is centred on log f
    k = 4
    rng = np.random.default_rng(0)
    sample = np.log(rng.exponential(size=(200000, k)).mean(axis=1))
    assert abs(sample.mean() - (stationarity.digamma_int(k) - math.log(k))) < 0.005
    assert abs(sample.var() / stationarity.trigamma_int(k) - 1) < 0.02


# ---------------------------------------------------------------- psr_test

def test_constant_grid_is_stationary():
    rep = stationarity.psr_test(grid_spectrum(np.full((16, 12), 3.7)))
    assert rep.s_t == pytest.approx(0, abs=1e-20)
    assert rep.s_f == pytest.approx(0, abs=1e-20)
    assert rep.s_ir == pytest.approx(0, abs=1e-20)
    assert rep.verdict == stationarity.STATIONARY
    assert rep.p_ump == 1.0 and rep.p_time == 1.0


def test_grid_too_small():
    with pytest.raises(InsufficientDataError):
        stationarity.psr_test(grid_spectrum(np.ones((1, 12))))
    with pytest.raises(InsufficientDataError):
        stationarity.psr_test(grid_spectrum(np.ones((16, 1))))


def test_rejects_bad_arguments():
    spec = grid_spectrum(np.ones((4, 4)))
    with pytest.raises(ParameterError):
        stationarity.psr_test(spec, alpha=1.5)
    with pytest.raises(ParameterError):
        stationarity.psr_test(spec, adjust="bonferroni")


def test_zero_spectrum_is_floored():
    rep = stationarity.psr_test(grid_spectrum(np.zeros((4, 4))))
    assert rep.verdict == stationarity.STATIONARY


def test_calibration_on_stationary_ar2():
    rng = np.random.default_rng(1)
    rejections = sum(not report(synthgen.gen_ar2_exp1(T, rng)).stationary for _ in range(500))
    assert abs(rejections / 500 - 0.05) <= 0.03


def test_sidak_versus_literal_two_stage():
    rng = np.random.default_rng(12)
    spec = spectra.auto_spectrum(rng.standard_normal(T), TAPERS)
    adj = stationarity.psr_test(spec, 0.05, "sidak")
    raw = stationarity.psr_test(spec, 0.05, "none")
    assert raw.p_ump == adj.p_ump_raw and raw.p_time == adj.p_time_raw
    assert adj.p_ump == pytest.approx(1 - (1 - raw.p_ump) ** 2)
    assert adj.p_ump >= raw.p_ump


def test_backward_residuals_rejected_more_than_forward():
    fwd = bwd = 0
    for seed in range(100):
        d = synthgen.generate(synthgen.SynthModelSpec("exp1", params={"L": 200}, seed=seed))
        for cause, effect, is_forward in ((d.x, d.y, True), (d.y, d.x, False)):
            filt = spectra.estimate_filter(cause, effect, 128, 1, TAPERS)
            resid = effect - filt.apply(cause)
            resid[:1] = 0.0
            rejected = not report(resid).stationary
            fwd += rejected and is_forward
            bwd += rejected and not is_forward
    assert bwd - fwd > 30


# ---------------------------------------------------------------- ump_test

def test_ump_accepts_uniformly_modulated_noise():
    rng = np.random.default_rng(2)
    g = synthgen.ump_gain(np.arange(T), T, 0.5 * T)
    hits = sum(stationarity.ump_test(spectra.auto_spectrum(g * rng.standard_normal(T), TAPERS)) for _ in range(100))
    assert hits >= 90


def test_ump_accepts_stationary_arma():
    rng = np.random.default_rng(3)
    hits = sum(stationarity.ump_test(spectra.auto_spectrum(synthgen.gen_ar2_exp1(T, rng), TAPERS))
               for _ in range(500))
    assert hits / 500 >= 1 - 0.05 - 0.03


def drifting_ar1(rng, length, burn=500):
    a = np.linspace(0.8, -0.8, length + burn)
    e = rng.standard_normal(length + burn)
    x = np.zeros(length + burn)
    for k in range(1, length + burn):
        x[k] = a[k] * x[k - 1] + e[k]
    return x[burn:]


def test_ump_rejects_changing_spectral_shape():
    rng = np.random.default_rng(4)
    misses = sum(not stationarity.ump_test(spectra.auto_spectrum(drifting_ar1(rng, T), TAPERS)) for _ in range(100))
    assert misses >= 80


# ---------------------------------------------------------------- min_stationary

def test_min_stationary_prefers_stationary_candidate():
    rng = np.random.default_rng(5)
    gain = synthgen.gaussian_kernel(np.arange(T), T / 2, 0.2 * T)
    hits = 0
    for _ in range(100):
        ump = gain * synthgen.gen_ar2_exp1(T, rng)
        hits += stationarity.min_stationary([ump, synthgen.gen_ar2_exp1(T, rng)]) == 1
    assert hits >= 90


def test_min_stationary_none_when_all_fail():
    rng = np.random.default_rng(6)
    cands = [drifting_ar1(rng, T) for _ in range(3)]
    assert stationarity.min_stationary(cands) is None


def test_min_stationary_singleton_and_reports():
    rng = np.random.default_rng(7)
    assert stationarity.min_stationary([rng.standard_normal(T)]) == 0
    reps = [stationarity.psr_test(grid_spectrum(np.ones((4, 4)))),
            stationarity.psr_test(grid_spectrum(np.ones((4, 4))))]
    # ties go to the lowest index
    assert stationarity.min_stationary(reps) == 0
    with pytest.raises(ParameterError):
        stationarity.min_stationary([])


# ---------------------------------------------------------------- properties

seeds = st.integers(0, 2**32 - 1)


@given(seeds, st.floats(1e-3, 1e3))
def test_property_scale_invariance(seed, c):
    x = np.random.default_rng(seed).standard_normal(1024)
    a, b = report(x), report(c * x)
    assert b.s_t == pytest.approx(a.s_t, rel=1e-9, abs=1e-9)
    assert b.s_f == pytest.approx(a.s_f, rel=1e-9, abs=1e-9)
    assert b.s_ir == pytest.approx(a.s_ir, rel=1e-9, abs=1e-9)
    assert a.verdict == b.verdict


@given(seeds, st.integers(2, 20), st.integers(2, 20))
def test_property_anova_identity(seed, i_count, j_count):
    w = np.random.default_rng(seed).normal(size=(i_count, j_count)) * 3
    s_t, s_f, s_ir = stationarity.anova_terms(w)
    total = float(np.sum((w - w.mean()) ** 2))
    assert s_t + s_f + s_ir == pytest.approx(total, rel=1e-10, abs=1e-10)
    assert min(s_t, s_f, s_ir) >= 0


@given(seeds, st.sampled_from(["sidak", "none"]), st.floats(0.01, 0.2))
def test_property_verdict_consistency(seed, adjust, alpha):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(1024) * np.linspace(0.5, 1 + 2 * rng.uniform(), 1024)
    rep = stationarity.psr_test(spectra.auto_spectrum(x, TAPERS), alpha, adjust)
    assert 0 <= rep.p_ump <= 1 and 0 <= rep.p_time <= 1
    assert rep.stationary == (rep.p_ump > alpha and rep.p_time > alpha)
    assert (rep.verdict == stationarity.NONSTATIONARY) == (rep.p_ump <= alpha)
