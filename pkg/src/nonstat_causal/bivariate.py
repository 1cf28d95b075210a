"""Bivariate direction inference from residual independence and stationarity.

For each candidate direction a time-varying filter is estimated from the
multitaper spectral ratio, the residual ``N_t = Y_t - sum_u d_t(u) X_{t-u}``
is formed, and two questions are asked: is the residual independent of the
putative cause, and is it stationary? ``decide`` turns the four answers
into a verdict.

Both directions draw bootstrap multipliers from the same derived seed, so
swapping the inputs swaps every diagnostic exactly.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any

import numpy as np

from . import spectra, stationarity
from .errors import DegenerateInputError, DimensionError, ParameterError
from .independence import IndependenceReport, kernel_independence
from .spectra import TvFilter
from .stationarity import StationarityReport
from .synthgen import derive_seed

X_TO_Y = "x_to_y"
Y_TO_X = "y_to_x"
UNDECIDED = "undecided"
REASONS = ("both_dependent", "both_stationary", "both_nonstationary", "conflicting", "none")
MAX_CANDIDATE_ORDER = 10
DEGENERATE_RATIO = 1e-20


def parse_order_rule(rule) -> tuple[str, int | None]:
    """``"aic"``, ``"bic"``, ``"fixed:3"``, ``"fixed(3)"`` or an int (fixed order)."""
    if isinstance(rule, (int, np.integer)) and not isinstance(rule, bool):
        return "fixed", int(rule)
    if isinstance(rule, tuple) and len(rule) == 2 and rule[0] == "fixed":
        return "fixed", int(rule[1])
    text = str(rule).strip().lower()
    if text in ("aic", "bic"):
        return text, None
    for prefix in ("fixed:", "fixed(", "fixed="):
        if text.startswith(prefix):
            try:
                return "fixed", int(text[len(prefix):].rstrip(")"))
            except ValueError:
                break
    raise ParameterError(f"order_rule must be aic, bic or fixed(p); got {rule!r}")


@dataclass(frozen=True)
class InferenceConfig:
    window: int = 128
    alpha_ind: float = 0.05
    alpha_stat: float = 0.05
    order_rule: Any = "bic"
    seed: int = 0
    n_resamples: int = 300
    stationarity: str = "psr"  # "psr" or "ump"
    psr_adjust: str = "sidak"
    independence: str = "auto"  # "auto" | "wild_bootstrap" | "gamma"
    max_order: int = MAX_CANDIDATE_ORDER
    nw: float = spectra.DEFAULT_NW
    tapers: int = spectra.DEFAULT_K

    def __post_init__(self):
        for name in ("alpha_ind", "alpha_stat"):
            a = getattr(self, name)
            if not 0 < a < 1:
                raise ParameterError(f"{name} must lie in (0, 1), got {a}")
        w = self.window
        if w < 32 or w & (w - 1):
            raise ParameterError(f"window must be a power of two >= 32, got {w}")
        kind, p = parse_order_rule(self.order_rule)
        if kind == "fixed" and not 0 <= p <= w // 2:
            raise ParameterError(f"fixed order must lie in 0..{w // 2}")
        if self.stationarity not in ("psr", "ump"):
            raise ParameterError("stationarity must be 'psr' or 'ump'")
        if self.max_order < 0:
            raise ParameterError("max_order must be non-negative")

    @property
    def order_kind(self) -> str:
        return parse_order_rule(self.order_rule)[0]

    def candidate_orders(self) -> list[int]:
        kind, p = parse_order_rule(self.order_rule)
        if kind == "fixed":
            return [p]
        return list(range(0, min(self.max_order, self.window // 2) + 1))

    def taper_set(self) -> spectra.TaperSet:
        return spectra.dpss_tapers(self.window, self.nw, self.tapers)


@dataclass
class DirectionFit:
    filter: TvFilter
    residual: np.ndarray
    p_ind: float
    stat: StationarityReport
    independence: IndependenceReport | None
    order: int
    criterion: dict = field(default_factory=dict)
    degenerate: bool = False

    @property
    def q_stationary(self) -> bool:
        return self.stat.stationary

    def diagnostics(self) -> dict:
        return {
            "order": self.order,
            "p_ind": self.p_ind,
            "stationarity": self.stat.to_dict(),
            "independence": None if self.independence is None else self.independence.to_dict(),
            "criterion": {str(k): v for k, v in self.criterion.items()},
            "flagged_blocks": list(self.filter.flagged_blocks),
            "degenerate_residual": self.degenerate,
        }


@dataclass
class DirectionDecision:
    direction: str
    undecided_reason: str
    p_ind_xy: float
    p_ind_yx: float
    stat_xy: bool
    stat_yx: bool
    order_xy: int
    order_yx: int
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def information_criterion(rss: float, length: int, params: int, kind: str) -> float:
    """``T log(RSS/T) + penalty`` with penalty ``2m`` (AIC) or ``m log T`` (BIC)."""
    rss = max(rss, np.finfo(float).tiny)
    base = length * math.log(rss / length)
    if kind == "aic":
        return base + 2 * params
    return base + params * math.log(length)


def _check_inputs(x, y, cfg: InferenceConfig):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise DimensionError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2 * cfg.window:
        raise DimensionError(f"need at least 2*window = {2 * cfg.window} samples, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DegenerateInputError("non-finite values in input")
    return x, y


def select_filter(x, y, cfg: InferenceConfig, tapers=None) -> tuple[TvFilter, int, dict]:
    """Filter of ``y`` on ``x`` at the order chosen by ``cfg.order_rule``.

    The filter is estimated once at the largest candidate order; lower
    orders are truncations of it (the per-lag estimates do not depend on
    the maximal lag). Residual sums of squares skip the first ``p_max``
    samples so every candidate is scored on the same stretch. Each block
    fits its own ``p + 1`` coefficients, so the penalty counts
    ``I * (p + 1)`` parameters.
    """
    if tapers is None:
        tapers = cfg.taper_set()
    orders = cfg.candidate_orders()
    top = max(orders)
    full = spectra.estimate_filter(x, y, cfg.window, top, tapers)
    if len(orders) == 1:
        return full, top, {}
    scores = {}
    span = x.size - top
    blocks = spectra.n_blocks(x.size, cfg.window)
    for p in orders:
        resid = y - full.truncated(p).apply(x)
        rss = float(np.dot(resid[top:], resid[top:]))
        scores[p] = information_criterion(rss, span, blocks * (p + 1), cfg.order_kind)
    best = min(orders, key=lambda p: (scores[p], p))
    return full.truncated(best), best, scores


def _stationarity(resid, order, cfg, tapers) -> StationarityReport:
    # the first `order` residuals depend on zero-padded inputs; zero weight
    # keeps them out of the first block (DPSS tapers vanish at block edges)
    series = resid.copy()
    series[:order] = 0.0
    return stationarity.psr_test(spectra.auto_spectrum(series, tapers), cfg.alpha_stat, cfg.psr_adjust)


def fit_direction(x, y, cfg: InferenceConfig | None = None, tapers=None, test_seed=None) -> DirectionFit:
    """Filter, residual, independence p-value and stationarity report for ``x -> y``."""
    cfg = cfg or InferenceConfig()
    x, y = _check_inputs(x, y, cfg)
    if tapers is None:
        tapers = cfg.taper_set()
    filt, order, scores = select_filter(x, y, cfg, tapers)
    resid = y - filt.apply(x)
    stat = _stationarity(resid, order, cfg, tapers)
    energy = float(np.dot(y, y))
    degenerate = float(np.dot(resid, resid)) <= DEGENERATE_RATIO * max(energy, np.finfo(float).tiny)
    if degenerate:
        # y is an exact filter of x: treat as trivially dependent
        return DirectionFit(filt, resid, 0.0, stat, None, order, scores, True)
    seed = derive_seed(cfg.seed, 0) if test_seed is None else test_seed
    try:
        rep = kernel_independence(x[order:], resid[order:], cfg.n_resamples, seed,
                                  approximation=cfg.independence)
    except DegenerateInputError:
        return DirectionFit(filt, resid, 0.0, stat, None, order, scores, True)
    return DirectionFit(filt, resid, rep.p_value, stat, rep, order, scores)


def decide(p_xy: float, p_yx: float, q_xy: bool, q_yx: bool, alpha: float = 0.05) -> tuple[str, str]:
    """``(direction, undecided_reason)`` from independence p-values and stationarity flags.

    The stationarity flags only matter when neither independence test
    rejects. ``conflicting`` is kept in the reason vocabulary but no input
    reaches it under this rule.
    """
    ind_xy = p_xy >= alpha
    ind_yx = p_yx >= alpha
    if ind_xy and not ind_yx:
        return X_TO_Y, "none"
    if ind_yx and not ind_xy:
        return Y_TO_X, "none"
    if not ind_xy:
        return UNDECIDED, "both_dependent"
    if q_xy and not q_yx:
        return X_TO_Y, "none"
    if q_yx and not q_xy:
        return Y_TO_X, "none"
    if q_xy:
        return UNDECIDED, "both_stationary"
    return UNDECIDED, "both_nonstationary"


def _flag(fit: DirectionFit, cfg: InferenceConfig) -> bool:
    return fit.stat.stationary if cfg.stationarity == "psr" else fit.stat.is_ump


def infer_direction(x, y, cfg: InferenceConfig | None = None) -> DirectionDecision:
    cfg = cfg or InferenceConfig()
    x, y = _check_inputs(x, y, cfg)
    tapers = cfg.taper_set()
    seed = derive_seed(cfg.seed, 0)
    fxy = fit_direction(x, y, cfg, tapers, seed)
    fyx = fit_direction(y, x, cfg, tapers, seed)
    q_xy, q_yx = _flag(fxy, cfg), _flag(fyx, cfg)
    direction, reason = decide(fxy.p_ind, fyx.p_ind, q_xy, q_yx, cfg.alpha_ind)
    diag = {"x_to_y": fxy.diagnostics(), "y_to_x": fyx.diagnostics(), "stationarity_mode": cfg.stationarity}
    return DirectionDecision(direction, reason, fxy.p_ind, fyx.p_ind, q_xy, q_yx, fxy.order, fyx.order, diag)


def with_overrides(cfg: InferenceConfig, **kw) -> InferenceConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
