"""Causal inference for nonstationary time series.

Time-varying linear filters are estimated from multitaper evolutionary
spectra; candidate causal models are then judged by whether their
residuals are independent of the cause and stationary.
"""

from . import bivariate, independence, lagop, network, spectra, stationarity, synthgen
from ._core import BACKEND
from .bivariate import DirectionDecision, InferenceConfig, decide, fit_direction, infer_direction
from .errors import NonstatCausalError
from .independence import IndependenceReport, kernel_independence, mean_filter_independence
from .lagop import TimeVaryingOperator, apply, backward_coefficients, compose, invert
from .network import DagResult, NetworkConfig, infer_dag, select_parents
from .spectra import EvolutionarySpectrum, TaperSet, TvFilter, auto_spectrum, cross_spectrum, dpss_tapers, estimate_filter
from .stationarity import StationarityReport, min_stationary, psr_test, ump_test
from .synthgen import GeneratedData, SynthModelSpec, generate

__version__ = "0.1.0"
