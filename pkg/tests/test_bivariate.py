import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonstat_causal import bivariate, spectra, synthgen
from nonstat_causal.bivariate import InferenceConfig, decide
from nonstat_causal.errors import DimensionError, ParameterError


def exp1(seed, length=2048):
    return synthgen.generate(synthgen.SynthModelSpec("exp1", length=length, params={"L": 200}, seed=seed))


# ---------------------------------------------------------------- configuration

@pytest.mark.parametrize("rule,expected", [
    ("bic", ("bic", None)), ("AIC", ("aic", None)), ("fixed(3)", ("fixed", 3)), ("fixed:2", ("fixed", 2)),
    (4, ("fixed", 4)),
])
def test_parse_order_rule(rule, expected):
    assert bivariate.parse_order_rule(rule) == expected


@pytest.mark.parametrize("kw", [
    {"alpha_ind": 0.0}, {"alpha_stat": 1.0}, {"window": 100}, {"window": 16},
    {"order_rule": "fixed(65)"}, {"order_rule": "hqic"}, {"stationarity": "kpss"},
])
def test_config_rejects(kw):
    with pytest.raises(ParameterError):
        InferenceConfig(**kw)


def test_candidate_orders():
    assert InferenceConfig().candidate_orders() == list(range(11))
    assert InferenceConfig(window=32, max_order=30).candidate_orders() == list(range(17))
    assert InferenceConfig(order_rule="fixed(2)").candidate_orders() == [2]


def test_information_criteria():
    rss, n, m = 50.0, 1000, 6
    base = n * math.log(rss / n)
    assert bivariate.information_criterion(rss, n, m, "aic") == pytest.approx(base + 12)
    assert bivariate.information_criterion(rss, n, m, "bic") == pytest.approx(base + 6 * math.log(n))


# ---------------------------------------------------------------- decide

def reference_rule(ind_xy, ind_yx, q_xy, q_yx):
    """Written out from the acceptance/rejection rules case by case."""
    if ind_xy and not ind_yx:
        return "x_to_y"
    if ind_yx and not ind_xy:
        return "y_to_x"
    if ind_xy and ind_yx:
        if q_xy and not q_yx:
            return "x_to_y"
        if q_yx and not q_xy:
            return "y_to_x"
    return "undecided"


def test_decide_truth_table():
    seen = 0
    for ind_xy, ind_yx, q_xy, q_yx in itertools.product([False, True], repeat=4):
        p_xy = 0.5 if ind_xy else 0.01
        p_yx = 0.5 if ind_yx else 0.01
        direction, reason = decide(p_xy, p_yx, q_xy, q_yx, 0.05)
        assert direction == reference_rule(ind_xy, ind_yx, q_xy, q_yx)
        assert (direction != "undecided") == (reason == "none")
        if direction == "undecided":
            if not (ind_xy or ind_yx):
                assert reason == "both_dependent"
            else:
                assert reason == ("both_stationary" if q_xy else "both_nonstationary")
        seen += 1
    assert seen == 16


def test_decide_examples():
    assert decide(0.3, 0.01, True, False, 0.05) == ("x_to_y", "none")
    assert decide(0.2, 0.4, True, True, 0.05) == ("undecided", "both_stationary")
    assert decide(0.01, 0.01, True, False, 0.05) == ("undecided", "both_dependent")
    assert decide(0.2, 0.4, False, False, 0.05) == ("undecided", "both_nonstationary")
    # the boundary p = alpha counts as "not rejected"
    assert decide(0.05, 0.049, False, False, 0.05) == ("x_to_y", "none")


@given(st.floats(0, 1), st.floats(0, 1), st.booleans(), st.booleans(), st.floats(0.001, 0.5))
def test_property_decide_swap_symmetry(p_xy, p_yx, q_xy, q_yx, alpha):
    d1, r1 = decide(p_xy, p_yx, q_xy, q_yx, alpha)
    d2, r2 = decide(p_yx, p_xy, q_yx, q_xy, alpha)
    swap = {"x_to_y": "y_to_x", "y_to_x": "x_to_y", "undecided": "undecided"}
    assert d2 == swap[d1] and r1 == r2


# ---------------------------------------------------------------- fit_direction

def test_fit_direction_first_experiment_rates():
    cfg = InferenceConfig()
    ind = stat = 0
    for seed in range(100):
        d = exp1(seed)
        fit = bivariate.fit_direction(d.x, d.y, cfg, test_seed=seed)
        ind += fit.p_ind >= 0.05
        stat += fit.q_stationary
    assert ind >= 80 and stat >= 80


def test_fit_direction_null_model():
    rng = np.random.default_rng(21)
    x, y = rng.standard_normal((2, 2048))
    fit = bivariate.fit_direction(x, y, InferenceConfig())
    assert fit.order <= 2
    assert np.max(np.abs(fit.residual - y)) < 0.5 * np.std(y)
    assert np.sum(fit.residual**2) / np.sum(y**2) > 0.97
    assert fit.q_stationary and fit.p_ind >= 0.05


def test_fixed_order_bypasses_selection():
    d = exp1(4)
    cfg = InferenceConfig(order_rule="fixed(1)")
    fit = bivariate.fit_direction(d.x, d.y, cfg)
    ref = spectra.estimate_filter(d.x, d.y, 128, 1, cfg.taper_set())
    assert fit.order == 1 and fit.criterion == {}
    assert np.array_equal(fit.filter.values, ref.values)
    assert np.array_equal(fit.residual, d.y - ref.apply(d.x))


def test_selection_truncates_the_max_order_fit():
    d = exp1(5)
    cfg = InferenceConfig()
    filt, order, scores = bivariate.select_filter(d.x, d.y, cfg)
    full = spectra.estimate_filter(d.x, d.y, 128, 10, cfg.taper_set())
    assert set(scores) == set(range(11))
    assert order == min(scores, key=lambda p: (scores[p], p))
    assert np.array_equal(filt.values, full.values[:, : order + 1])
    assert order >= 1


def test_fit_direction_input_errors(rng):
    x = rng.standard_normal(300)
    with pytest.raises(DimensionError):
        bivariate.fit_direction(x[:200], x[:200])
    with pytest.raises(DimensionError):
        bivariate.fit_direction(x, x[:-1])


# ---------------------------------------------------------------- infer_direction

def test_identical_series_undecided(rng):
    x = synthgen.gen_ar2_exp1(1024, rng)
    dec = bivariate.infer_direction(x, x.copy(), InferenceConfig(n_resamples=100))
    assert dec.direction == "undecided"
    assert dec.undecided_reason == "both_dependent"


def test_first_experiment_decision_and_report():
    d = exp1(8)
    dec = bivariate.infer_direction(d.x, d.y, InferenceConfig(seed=8))
    assert dec.direction == "x_to_y" and dec.undecided_reason == "none"
    out = dec.to_dict()
    for key in ("direction", "undecided_reason", "p_ind_xy", "p_ind_yx", "stat_xy", "stat_yx",
                "order_xy", "order_yx", "diagnostics"):
        assert key in out
    assert out["diagnostics"]["x_to_y"]["stationarity"]["verdict"] in ("stationary", "ump_nonstationary", "nonstationary")
    assert dec.stat_xy == (out["diagnostics"]["x_to_y"]["stationarity"]["verdict"] == "stationary")


def test_antisymmetry_under_argument_swap():
    swap = {"x_to_y": "y_to_x", "y_to_x": "x_to_y", "undecided": "undecided"}
    for seed in range(3):
        d = exp1(100 + seed, length=1024)
        cfg = InferenceConfig(n_resamples=100, seed=seed)
        a = bivariate.infer_direction(d.x, d.y, cfg)
        b = bivariate.infer_direction(d.y, d.x, cfg)
        assert b.direction == swap[a.direction] and b.undecided_reason == a.undecided_reason
        assert (b.p_ind_xy, b.p_ind_yx) == (a.p_ind_yx, a.p_ind_xy)
        assert (b.stat_xy, b.stat_yx) == (a.stat_yx, a.stat_xy)
        assert (b.order_xy, b.order_yx) == (a.order_yx, a.order_xy)


@pytest.mark.slow
def test_scaling_invariance_of_direction():
    rng = np.random.default_rng(31)
    for seed in range(50):
        d = exp1(1000 + seed, length=1024)
        c = float(rng.choice([-1, 1]) * 10 ** rng.uniform(-2, 2))
        cfg = InferenceConfig(n_resamples=100, seed=seed)
        a = bivariate.infer_direction(d.x, d.y, cfg)
        b = bivariate.infer_direction(d.x, c * d.y, cfg)
        assert (a.direction, a.undecided_reason) == (b.direction, b.undecided_reason)


def test_ump_variant_uses_interaction_flag():
    d = exp1(9)
    dec = bivariate.infer_direction(d.x, d.y, InferenceConfig(stationarity="ump", seed=9))
    diag = dec.diagnostics
    assert diag["stationarity_mode"] == "ump"
    rep = diag["x_to_y"]["stationarity"]
    assert dec.stat_xy == (rep["p_ump_raw"] > rep["alpha"])
