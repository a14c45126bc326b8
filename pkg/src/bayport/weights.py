"""Portfolio weights under the multi-period exponential-utility rule.

For an investor with constant absolute risk aversion ``gamma`` rebalancing
toward horizon ``T``, the optimal risky-asset weights at period ``t`` are

    w = weight_scale * inv(cov) @ (mean - rf_next * 1)

where ``weight_scale = 1 / (gamma * wealth * prod of gross risk-free
returns over periods t+2..T)`` (empty product = 1) and ``rf_next`` is the
coming period's risk-free rate.  This module provides that rule evaluated
at known parameters (:func:`oracle_weights`), at sample moments
(:func:`plugin_weights`), and under the posterior:

* :func:`bayes_estimate` — posterior-mean weights in closed form;
* :func:`weight_covariance` — the exact posterior covariance matrix of the
  weights;
* :func:`asymptotic_covariance` — its large-n normal limit;
* :func:`sample_weights_basic` — posterior draws via the conditional-scale
  representation (one k x k solve per draw);
* :func:`sample_weights_fast` — distribution-identical draws via an
  F/unit-sphere representation that precomputes every k x k inverse once.

Both samplers delegate their per-draw assembly to ``bayport._kernels``
(compiled when available) and draw all randomness up front from a single
:class:`~bayport.rng.RngStream`, in a fixed documented order, so a seed
pins the batch bitwise on any particular backend regardless of internal
chunking (across backends the draws share their variates but can differ
by floating-point rounding, as the backends factorize through different
LAPACK drivers).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _kernels
from .errors import (DegenerateVariance, InvalidSelector, TooFewSamples,
                     ZeroWealth)
from .linalg import SpdMatrix, spd_inv_sqrt, spd_inverse
from .posterior import PosteriorParams, ReturnsWindow, sample_moments
from .rng import RngStream, _chi2_from, _f_from, _mvt_from, _sphere_from

__all__ = [
    "PortfolioContext",
    "LatentParams",
    "WeightSampleBatch",
    "discount_factor",
    "oracle_weights",
    "plugin_weights",
    "bayes_estimate",
    "weight_covariance",
    "asymptotic_covariance",
    "sample_weights_basic",
    "sample_weights_fast",
    "standardize_batch",
    "normality_check",
]

#: SVD tolerance for the selector full-row-rank check.
SELECTOR_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class PortfolioContext:
    """Investor state: risk aversion, wealth, period, horizon, rates.

    ``rf_schedule[i - 1]`` is the net risk-free rate of period ``i`` for
    ``i = 1..horizon``; the schedule may be longer than the horizon (extra
    entries are ignored).  Invariants: ``gamma > 0``,
    ``0 <= t <= horizon - 1``, all gross rates positive.
    """

    gamma: float
    wealth: float
    t: int
    horizon: int
    rf_schedule: np.ndarray

    def __post_init__(self) -> None:
        if not float(self.gamma) > 0.0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not np.isfinite(self.wealth):
            raise ValueError(f"wealth must be finite, got {self.wealth}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if not 0 <= self.t <= self.horizon - 1:
            raise ValueError(
                f"period index t={self.t} outside 0..{self.horizon - 1}")
        rf = np.atleast_1d(np.asarray(self.rf_schedule, dtype=float))
        if rf.ndim != 1 or rf.shape[0] < self.horizon:
            raise ValueError(
                f"rf_schedule needs at least horizon={self.horizon} entries")
        if not np.all(np.isfinite(rf)) or np.any(1.0 + rf <= 0.0):
            raise ValueError("every gross risk-free return must be positive")
        object.__setattr__(self, "rf_schedule", rf)

    @property
    def rf_next(self) -> float:
        """Risk-free net rate of the coming period (period ``t + 1``)."""
        return float(self.rf_schedule[self.t])


@dataclass(frozen=True)
class LatentParams:
    """A known (mean, covariance) pair, for oracle evaluations."""

    mu: np.ndarray
    sigma: SpdMatrix

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float)
        if mu.ndim != 1 or not np.all(np.isfinite(mu)):
            raise ValueError("mu must be a finite vector")
        object.__setattr__(self, "mu", mu)
        if not isinstance(self.sigma, SpdMatrix):
            object.__setattr__(self, "sigma", SpdMatrix(self.sigma))
        if self.sigma.dim != mu.shape[0]:
            raise ValueError("mu and sigma dimensions disagree")


@dataclass(frozen=True)
class WeightSampleBatch:
    """B posterior draws of (selected) portfolio weights plus provenance."""

    draws: np.ndarray
    seed: RngStream
    posterior: PosteriorParams
    context: PortfolioContext

    def __post_init__(self) -> None:
        draws = np.asarray(self.draws, dtype=float)
        if draws.ndim != 2 or draws.shape[0] < 1:
            raise ValueError(f"draws must be a nonempty 2-d array, got shape "
                             f"{draws.shape}")
        if not np.all(np.isfinite(draws)):
            raise ValueError("draws contain non-finite values")
        object.__setattr__(self, "draws", draws)

    @property
    def b(self) -> int:
        return self.draws.shape[0]


# --- closed forms ------------------------------------------------------------

def discount_factor(ctx: PortfolioContext) -> float:
    """Scaling constant applied to every weight vector at period ``t``.

    Equal to ``1 / (gamma * wealth * prod(1 + rf_schedule[t+1 : horizon]))``;
    the product is empty (= 1) in the final period.

    Raises
    ------
    ZeroWealth
        If current wealth is exactly zero.
    """
    if ctx.wealth == 0.0:
        raise ZeroWealth("wealth is zero; weights are undefined")
    gross = 1.0 + ctx.rf_schedule[ctx.t + 1:ctx.horizon]
    return 1.0 / (ctx.gamma * ctx.wealth * float(np.prod(gross)))


def oracle_weights(params: LatentParams, ctx: PortfolioContext) -> np.ndarray:
    """Optimal weights at known mean and covariance."""
    excess = params.mu - ctx.rf_next
    return discount_factor(ctx) * np.linalg.solve(params.sigma.entries, excess)


def plugin_weights(window: ReturnsWindow, ctx: PortfolioContext) -> np.ndarray:
    """Optimal-weight formula evaluated at the sample moments."""
    mean, cov = sample_moments(window)
    return oracle_weights(LatentParams(mean, cov), ctx)


def bayes_estimate(post: PosteriorParams, ctx: PortfolioContext) -> np.ndarray:
    """Posterior mean of the weights, in closed form.

    ``discount_factor * (chi2_df - 1) * inv(scale) @ (mean - rf_next * 1)``;
    the multiplier is ``n - 1`` under the diffuse prior and
    ``n + d0 - k - 1`` under the conjugate one.
    """
    excess = post.mean - ctx.rf_next
    multiplier = post.chi2_df - 1.0
    return (discount_factor(ctx) * multiplier
            * np.linalg.solve(post.scale.entries, excess))


def weight_covariance(post: PosteriorParams, ctx: PortfolioContext) -> SpdMatrix:
    """Exact posterior covariance matrix of the weight vector.

    The posterior factors as ``inv(cov) ~ Wishart(chi2_df - 1, inv(scale))``
    marginally with ``mean_vec | cov ~ N(mean, cov / precision)``, so with
    ``si = inv(scale)``, ``q = mean - rf*1`` and ``a = si @ q`` the law of
    total covariance gives, entirely in closed form,

        weight_scale^2 * (chi2_df - 1)
            * [ outer(a, a) + (q @ a + 1 / precision) * si ]

    The same expression covers both priors through the posterior fields.
    Every sampler and the hierarchical two-stage construction reproduce
    this matrix to Monte Carlo accuracy.
    """
    c = discount_factor(ctx)
    si = spd_inverse(post.scale).entries
    excess = post.mean - ctx.rf_next
    a = si @ excess
    coef_si = float(excess @ a) + 1.0 / post.precision
    cov = (c * c) * (post.chi2_df - 1.0) * (np.outer(a, a) + coef_si * si)
    return SpdMatrix((cov + cov.T) / 2.0)


def asymptotic_covariance(post: PosteriorParams, ctx: PortfolioContext) -> SpdMatrix:
    """Covariance of the large-sample normal limit of the weight posterior.

    Evaluated at the posterior point estimates: the limit covariance matrix
    uses ``centered_scale = scale / (precision - 1)`` for the diffuse
    posterior (recovering the plain sample covariance) and
    ``scale / precision`` for the conjugate one.  With ``a`` the limit
    weight vector at unit scaling and ``s2`` the squared excess-return
    Mahalanobis length, the matrix is

        weight_scale^2 * [ outer(a, a) + (1 + s2) * inv(centered_scale) ]

    identical under both priors, and ``n * weight_covariance`` converges to
    it entrywise as the window grows.
    """
    c = discount_factor(ctx)
    denom = post.precision - 1.0 if post.prior_kind == "diffuse" else post.precision
    centered = post.scale.entries / denom
    si = spd_inverse(SpdMatrix(centered)).entries
    excess = post.mean - ctx.rf_next
    a = si @ excess
    s2 = float(excess @ a)
    cov = (c * c) * (np.outer(a, a) + (1.0 + s2) * si)
    return SpdMatrix((cov + cov.T) / 2.0)


# --- posterior sampling -------------------------------------------------------

def _selector_matrix(selector, k: int) -> np.ndarray:
    """Validate a p x k selector (default: identity); full row rank required."""
    if selector is None:
        return np.eye(k)
    sel = np.asarray(selector, dtype=float)
    if sel.ndim == 1:
        sel = sel[None, :]
    if sel.ndim != 2 or sel.shape[1] != k:
        raise InvalidSelector(f"selector must be p x {k}, got shape {sel.shape}")
    p = sel.shape[0]
    if p < 1 or p > k:
        raise InvalidSelector(f"selector needs 1 <= p <= {k} rows, got {p}")
    if not np.all(np.isfinite(sel)):
        raise InvalidSelector("selector has non-finite entries")
    singular_values = np.linalg.svd(sel, compute_uv=False)
    if singular_values[-1] <= SELECTOR_RANK_RTOL * singular_values[0]:
        raise InvalidSelector("selector is rank deficient "
                              f"(singular values {singular_values})")
    return sel


def _check_batch_size(B) -> int:
    if isinstance(B, bool) or not isinstance(B, (int, np.integer)) or B < 1:
        raise ValueError(f"B must be a positive integer, got {B!r}")
    return int(B)


def sample_weights_basic(post: PosteriorParams, ctx: PortfolioContext, B: int,
                         selector=None, *, rng: RngStream) -> WeightSampleBatch:
    """Posterior weight draws via the conditional-scale representation.

    Per draw: sample the mean vector from its marginal multivariate t, a
    chi-square mixing variable with ``chi2_df`` degrees, and a standard
    Gaussian block; assemble with the *conditional* covariance scale of the
    drawn mean, which costs one k x k solve per draw.  Kept as the
    pedagogical reference; :func:`sample_weights_fast` is the production
    sampler.

    Randomness order (fixed contract): mean-marginal chi-squares, mean
    Gaussian block, mixing chi-squares, assembly Gaussian block.

    Parameters
    ----------
    selector : array_like, shape (p, k), optional
        Full-row-rank selection matrix; ``None`` means the identity (all
        assets).
    rng : RngStream
        Keyword-only; the batch is a pure function of it.
    """
    B = _check_batch_size(B)
    sel = _selector_matrix(selector, post.k)
    c = discount_factor(ctx)
    gen = rng.generator()
    chol = np.linalg.cholesky(post.mean_dispersion())
    mu = _mvt_from(gen, post.t_df, post.mean, chol, B)
    eta = _chi2_from(gen, post.chi2_df, B)
    z0 = gen.standard_normal((B, sel.shape[0]))
    draws = _kernels.basic_weight_draws(
        post.scale.entries, post.mean, post.precision, ctx.rf_next,
        sel, c, np.ascontiguousarray(mu), eta, z0)
    return WeightSampleBatch(draws=draws, seed=rng, posterior=post, context=ctx)


def sample_weights_fast(post: PosteriorParams, ctx: PortfolioContext, B: int,
                        selector=None, *, rng: RngStream) -> WeightSampleBatch:
    """Posterior weight draws via the F/unit-sphere representation.

    Equal in distribution to :func:`sample_weights_basic`, but every k x k
    inverse (``inv(scale)`` and ``scale^{-1/2}``) is computed once up
    front; the per-draw work is rank-structured (p, p) assembly only.

    Randomness order (fixed contract): mixing chi-squares, F numerator
    chi-squares, F denominator chi-squares, sphere Gaussian block, assembly
    Gaussian block.
    """
    B = _check_batch_size(B)
    sel = _selector_matrix(selector, post.k)
    c = discount_factor(ctx)
    s_inv = spd_inverse(post.scale).entries
    s_inv_half = spd_inv_sqrt(post.scale).entries
    excess = post.mean - ctx.rf_next
    gen = rng.generator()
    eta = _chi2_from(gen, post.chi2_df, B)
    qf = _f_from(gen, float(post.k), post.t_df, B)
    u = _sphere_from(gen, post.k, B)
    z0 = gen.standard_normal((B, sel.shape[0]))
    draws = _kernels.fast_weight_draws(
        s_inv, s_inv_half, excess, post.precision, post.t_df,
        sel, c, eta, qf, np.ascontiguousarray(u), z0)
    return WeightSampleBatch(draws=draws, seed=rng, posterior=post, context=ctx)


# --- diagnostics ---------------------------------------------------------------

def standardize_batch(batch: WeightSampleBatch, post: PosteriorParams,
                      ctx: PortfolioContext) -> np.ndarray:
    """Center by the Bayes estimate and scale by the exact posterior SDs.

    Expects a full (identity-selector) batch: coordinate ``j`` maps to
    ``(draw_j - bayes_j) / sqrt(weight_covariance[j, j])``.

    Raises
    ------
    DegenerateVariance
        If any diagonal covariance entry is not strictly positive.
    """
    if batch.draws.shape[1] != post.k:
        raise ValueError("standardize_batch needs full-weight draws "
                         f"(k={post.k}), got p={batch.draws.shape[1]}")
    center = bayes_estimate(post, ctx)
    variances = np.diag(weight_covariance(post, ctx).entries)
    if np.any(variances <= 0.0):
        raise DegenerateVariance("posterior weight variance is not positive")
    return (batch.draws - center) / np.sqrt(variances)


def normality_check(samples) -> tuple[float, float]:
    """Moment-based (Jarque-Bera) normality statistic and chi-square p-value.

    The statistic is ``B * (skewness^2 / 6 + (kurtosis - 3)^2 / 24)``,
    asymptotically chi-square with 2 degrees of freedom under normality.

    Raises
    ------
    TooFewSamples
        If fewer than 20 samples are supplied.
    DegenerateVariance
        If the sample variance is zero.
    """
    x = np.asarray(samples, dtype=float).ravel()
    b = x.shape[0]
    if b < 20:
        raise TooFewSamples(f"need at least 20 samples, got {b}")
    centered = x - x.mean()
    m2 = float(np.mean(centered ** 2))
    if m2 <= 0.0:
        raise DegenerateVariance("samples have zero variance")
    skew = float(np.mean(centered ** 3)) / m2 ** 1.5
    kurt = float(np.mean(centered ** 4)) / (m2 * m2)
    statistic = b * (skew * skew / 6.0 + (kurt - 3.0) ** 2 / 24.0)
    p_value = float(stats.chi2.sf(statistic, df=2))
    return statistic, p_value
