"""Network inference: causal ordering, ancestor sets and parent selection.

The outer loop repeatedly removes the most stationary remaining residual
(``MinStationary``). For every node still in play it then estimates filters
from the residuals of removed nodes, keeps the ones that fail the
independence screen as ancestors, subtracts their contribution and picks
the most stationary corrected series. That node's parents are the subset
of its ancestors whose subtraction leaves the most stationary remainder.

A node can be picked in several rounds before it is removed; its adjacency
column is rewritten from scratch each time, so only the latest parent set
survives. Parents always come from already removed nodes, which keeps the
graph acyclic and the removal order topological.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field

import numpy as np

from . import spectra
from .bivariate import InferenceConfig, select_filter
from .errors import DimensionError, EnumerationLimitError, ParameterError
from .independence import kernel_independence, mean_filter_independence, mean_filter_statistic
from .spectra import TvFilter
from .stationarity import StationarityReport, min_stationary, psr_test
from .synthgen import derive_seed


@dataclass(frozen=True)
class NetworkConfig(InferenceConfig):
    mean_filter_a: float = 0.15
    mean_filter_lags: int = 3
    mean_filter_first_lag: int = 1
    max_ancestors_enumerated: int = 12
    parent_fallback: bool = False
    independence_method: str = "mean_filter"  # or "kernel"
    greedy: bool = False

    def __post_init__(self):
        super().__post_init__()
        if not 0 < self.mean_filter_a < 1:
            raise ParameterError("mean_filter_a must lie in (0, 1)")
        if self.mean_filter_lags < 1:
            raise ParameterError("mean_filter_lags must be at least 1")
        if self.max_ancestors_enumerated < 1:
            raise ParameterError("max_ancestors_enumerated must be at least 1")
        if self.independence_method not in ("mean_filter", "kernel"):
            raise ParameterError("independence_method must be 'mean_filter' or 'kernel'")


@dataclass
class DagResult:
    adjacency: np.ndarray
    ordering: list
    residuals: np.ndarray
    ancestor_sets: list
    fallback_used: list
    complete: bool = True
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "adjacency": self.adjacency.astype(int).tolist(),
            "ordering": list(self.ordering),
            "ancestor_sets": [sorted(s) for s in self.ancestor_sets],
            "fallback_used": list(self.fallback_used),
            "complete": self.complete,
            "diagnostics": self.diagnostics,
        }


def _reports(series, cfg: NetworkConfig, tapers) -> list[StationarityReport]:
    return [psr_test(spectra.auto_spectrum(s, tapers), cfg.alpha_stat, cfg.psr_adjust) for s in series]


def _pair_filter(source, target, cfg: NetworkConfig, tapers) -> TvFilter:
    """Filter of ``target`` on ``source``; always carries the lags the mean test reads."""
    filt, order, _ = select_filter(source, target, cfg, tapers)
    need = cfg.mean_filter_first_lag + cfg.mean_filter_lags - 1
    if order >= need:
        return filt
    return spectra.estimate_filter(source, target, cfg.window, need, tapers)


def _dependent(filt: TvFilter, target, source, cfg: NetworkConfig, seed) -> tuple[bool, float]:
    if cfg.independence_method == "mean_filter":
        stat = float(np.max(mean_filter_statistic(filt, cfg.mean_filter_lags, cfg.mean_filter_first_lag)))
        return stat >= cfg.mean_filter_a, stat
    rep = kernel_independence(target, source, cfg.n_resamples, seed, approximation=cfg.independence)
    return rep.p_value < cfg.alpha_ind, rep.p_value


def subset_residual(target, x, filters: dict, subset) -> np.ndarray:
    """``x^j - sum_{m in Q} sum_u d^{m->j}_t(u) x^m_{t-u}``."""
    out = np.asarray(target, dtype=float).copy()
    for m in subset:
        out -= filters[m].apply(x[m])
    return out


def select_parents(ancestors, x, filters: dict, cfg: NetworkConfig | None = None, target: int | None = None,
                   tapers=None) -> tuple[list, bool]:
    """Most stationary subtraction subset of ``ancestors``; returns ``(parents, fallback_used)``.

    Subsets are enumerated by size, then lexicographically, so ties in
    ``S_T`` favour smaller sets.
    """
    cfg = cfg or NetworkConfig()
    ancestors = sorted(int(a) for a in ancestors)
    if not ancestors:
        return [], False
    if target is None:
        raise ParameterError("select_parents needs the target node index")
    x = np.asarray(x, dtype=float)
    if tapers is None:
        tapers = cfg.taper_set()
    if len(ancestors) > cfg.max_ancestors_enumerated:
        if not cfg.greedy:
            raise EnumerationLimitError(
                f"{len(ancestors)} ancestors exceed max_ancestors_enumerated="
                f"{cfg.max_ancestors_enumerated}; raise the cap or enable greedy mode")
        chosen = _greedy_parents(ancestors, x, filters, cfg, target, tapers)
    else:
        subsets = [list(q) for r in range(len(ancestors) + 1) for q in itertools.combinations(ancestors, r)]
        cands = [subset_residual(x[target], x, filters, q) for q in subsets]
        idx = min_stationary(_reports(cands, cfg, tapers), cfg.alpha_stat)
        chosen = [] if idx is None else subsets[idx]
    if not chosen and cfg.parent_fallback:
        return list(ancestors), True
    return chosen, False


def _greedy_parents(ancestors, x, filters, cfg, target, tapers) -> list:
    """Forward selection: add the ancestor that most lowers ``S_T`` among UMP-passing remainders."""
    chosen: list = []
    best = _reports([x[target]], cfg, tapers)[0]
    best_st = best.s_t if best.is_ump else np.inf
    while True:
        rest = [a for a in ancestors if a not in chosen]
        if not rest:
            return sorted(chosen)
        reps = _reports([subset_residual(x[target], x, filters, chosen + [a]) for a in rest], cfg, tapers)
        scored = [(r.s_t, a) for r, a in zip(reps, rest) if r.is_ump]
        if not scored:
            return sorted(chosen)
        s_t, a = min(scored)
        if s_t >= best_st:
            return sorted(chosen)
        chosen.append(a)
        best_st = s_t


def infer_dag(series, cfg: NetworkConfig | None = None, names=None) -> DagResult:
    cfg = cfg or NetworkConfig()
    x = np.asarray(series, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DimensionError("need a (N, T) array with N >= 2 series")
    n_nodes, length = x.shape
    if length < 2 * cfg.window:
        raise DimensionError(f"need at least 2*window = {2 * cfg.window} samples, got {length}")
    if not np.all(np.isfinite(x)):
        raise DimensionError("non-finite values in input")
    tapers = cfg.taper_set()
    resid = x.copy()
    adj = np.zeros((n_nodes, n_nodes), dtype=bool)
    ancestors: list = [set() for _ in range(n_nodes)]
    fallback = [False] * n_nodes
    remaining = list(range(n_nodes))
    removed: list = []
    rounds = []
    complete = True
    step = 0
    while remaining:
        reps = _reports([resid[i] for i in remaining], cfg, tapers)
        pick = min_stationary(reps, cfg.alpha_stat)
        if pick is None:
            complete = False
            break
        i_star = remaining.pop(pick)
        removed.append(i_star)
        log = {"removed": i_star, "s_t": reps[pick].s_t}
        if remaining:
            corrected, found, pair_filters, screens = [], [], [], {}
            for j in remaining:
                c = np.zeros(length)
                an, filt_j = [], {}
                for k in removed:
                    filt = _pair_filter(resid[k], x[j], cfg, tapers)
                    dep, score = _dependent(filt, x[j], resid[k], cfg, derive_seed(cfg.seed, step))
                    step += 1
                    screens[f"{k}->{j}"] = score
                    if dep:
                        an.append(k)
                        filt_j[k] = filt
                        c += filt.apply(resid[k])
                corrected.append(x[j] - c)
                found.append(an)
                pair_filters.append(filt_j)
            sub = _reports(corrected, cfg, tapers)
            pos = min_stationary(sub, cfg.alpha_stat)
            log["screens"] = screens
            if pos is not None:
                j_star = remaining[pos]
                resid[j_star] = corrected[pos]
                parents, used = select_parents(found[pos], x, pair_filters[pos], cfg, j_star, tapers)
                adj[:, j_star] = False
                adj[parents, j_star] = True
                ancestors[j_star] = set(found[pos])
                fallback[j_star] = used
                log.update({"selected": j_star, "ancestors": sorted(found[pos]), "parents": sorted(parents)})
        rounds.append(log)
    ordering = removed + remaining
    diag = {"rounds": rounds, "names": list(names) if names is not None else None,
            "unresolved": list(remaining)}
    return DagResult(adj, ordering, resid, ancestors, fallback, complete, diag)


def is_acyclic(adjacency) -> bool:
    a = np.asarray(adjacency, dtype=bool)
    alive = np.ones(a.shape[0], dtype=bool)
    while alive.any():
        # peel off nodes with no incoming edge from a live node
        sources = alive & ~(a & alive[:, None]).any(axis=0)
        if not sources.any():
            return False
        alive &= ~sources
    return True


def classify_graph(estimated, truth) -> str:
    """``correct``, ``p_subgraph`` (strict subset of the true edges) or ``others``."""
    est = np.asarray(estimated, dtype=bool)
    tru = np.asarray(truth, dtype=bool)
    if np.array_equal(est, tru):
        return "correct"
    if not np.any(est & ~tru):
        return "p_subgraph"
    return "others"
