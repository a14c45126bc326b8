"""Bayesian multi-period portfolio weights under exponential utility.

Estimation from return histories under diffuse or conjugate priors,
closed-form weight moments, two exact posterior weight samplers, a
posterior-predictive wealth model with credible bands and default
probabilities, and a rolling-window backtest harness.  See the README
for the CLI (``bayport <subcommand>``).
"""

from ._kernels import BACKEND, available_backends
from .backtest import (BacktestConfig, BacktestReport, EmpiricalBayesPrior,
                       PeriodRecord, PriorComparison, compare_priors,
                       replay_wealth, run_backtest)
from .dataio import PriceTable, ingest, read_table, write_returns
from .errors import (BayportError, DataError, DegenerateSample,
                     DegenerateVariance, IndefiniteMatrix, InsufficientData,
                     InsufficientSample, InvalidDf, InvalidSelector,
                     NonMonotoneDates, NotSpd, NumericalError, ParseError,
                     RaggedRow, TooFewSamples, ZeroWealth)
from .linalg import (PsdSqrtResult, SpdMatrix, psd_sqrt, spd_inv_sqrt,
                     spd_inverse)
from .posterior import (ConjugatePrior, DiffusePrior, PosteriorParams,
                        PriorSpec, ReturnsWindow, empirical_bayes_hyperparams,
                        posterior_params, sample_moments)
from .predictive import (CredibleBand, WealthSampleBatch, credible_band,
                         default_probability, sample_predictive_wealth,
                         wealth_step)
from .rng import (RngStream, sample_chi2, sample_f, sample_mvt,
                  sample_student_t, sample_unit_sphere)
from .weights import (LatentParams, PortfolioContext, WeightSampleBatch,
                      asymptotic_covariance, bayes_estimate, discount_factor,
                      normality_check, oracle_weights, plugin_weights,
                      sample_weights_basic, sample_weights_fast,
                      standardize_batch, weight_covariance)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "available_backends",
    "BacktestConfig",
    "BacktestReport",
    "EmpiricalBayesPrior",
    "PeriodRecord",
    "PriorComparison",
    "compare_priors",
    "replay_wealth",
    "run_backtest",
    "PriceTable",
    "ingest",
    "read_table",
    "write_returns",
    "BayportError",
    "DataError",
    "DegenerateSample",
    "DegenerateVariance",
    "IndefiniteMatrix",
    "InsufficientData",
    "InsufficientSample",
    "InvalidDf",
    "InvalidSelector",
    "NonMonotoneDates",
    "NotSpd",
    "NumericalError",
    "ParseError",
    "RaggedRow",
    "TooFewSamples",
    "ZeroWealth",
    "PsdSqrtResult",
    "SpdMatrix",
    "psd_sqrt",
    "spd_inv_sqrt",
    "spd_inverse",
    "ConjugatePrior",
    "DiffusePrior",
    "PosteriorParams",
    "PriorSpec",
    "ReturnsWindow",
    "empirical_bayes_hyperparams",
    "posterior_params",
    "sample_moments",
    "CredibleBand",
    "WealthSampleBatch",
    "credible_band",
    "default_probability",
    "sample_predictive_wealth",
    "wealth_step",
    "RngStream",
    "sample_chi2",
    "sample_f",
    "sample_mvt",
    "sample_student_t",
    "sample_unit_sphere",
    "LatentParams",
    "PortfolioContext",
    "WeightSampleBatch",
    "asymptotic_covariance",
    "bayes_estimate",
    "discount_factor",
    "normality_check",
    "oracle_weights",
    "plugin_weights",
    "sample_weights_basic",
    "sample_weights_fast",
    "standardize_batch",
    "weight_covariance",
    "__version__",
]
