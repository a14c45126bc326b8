"""Posterior-predictive wealth: sampling, credible bands, default risk.

Next-period wealth for a held weight vector ``v`` is

    wealth * (1 + rf_next + v' (x_next - rf_next * 1))

with ``x_next`` the coming return vector.  Integrating the normal
likelihood against the parameter posterior gives a closed stochastic
representation for predictive wealth draws:

    wealth * (1 + rf_next + v'(mean - rf_next*1) + sqrt(v' scale v) * kappa)

where, with two independent standard t variables ``t1`` (``t_df`` degrees)
and ``t2`` (``t_df + 1`` degrees),

    kappa = t1 / sqrt(precision * t_df)
            + sqrt(1 + t1^2 / t_df) * t2 / sqrt(t_df + 1).

The same form serves both priors through the posterior fields.  Because
``kappa`` is symmetric with mean zero, the predictive mean is exactly
``wealth * (1 + rf_next + v'(mean - rf_next*1))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSample, TooFewSamples
from .posterior import PosteriorParams
from .rng import RngStream

__all__ = [
    "WealthSampleBatch",
    "CredibleBand",
    "wealth_step",
    "sample_predictive_wealth",
    "credible_band",
    "default_probability",
]


@dataclass(frozen=True)
class WealthSampleBatch:
    """B predictive draws of next-period wealth plus provenance."""

    draws: np.ndarray
    seed: RngStream
    period: int

    def __post_init__(self) -> None:
        draws = np.asarray(self.draws, dtype=float).ravel()
        if draws.shape[0] < 1:
            raise ValueError("batch must contain at least one draw")
        if not np.all(np.isfinite(draws)):
            raise ValueError("draws contain non-finite values")
        object.__setattr__(self, "draws", draws)

    @property
    def b(self) -> int:
        return self.draws.shape[0]


@dataclass(frozen=True)
class CredibleBand:
    """Equal-tailed credible interval with the predictive mean as point.

    The point estimate is not constrained to lie inside the band: for
    heavily skewed draws the mean can sit beyond an equal-tailed quantile
    pair, and for constant draws rounding can put it an ulp outside.
    """

    level: float
    lower: float
    upper: float
    point: float

    def __post_init__(self) -> None:
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"level must be in (0, 1), got {self.level}")
        if not self.lower <= self.upper:
            raise ValueError(
                f"band is not ordered: lower={self.lower}, "
                f"upper={self.upper}")

    @property
    def width(self) -> float:
        return self.upper - self.lower


def wealth_step(w_prev: float, v, realized_returns, rf_next: float) -> float:
    """One period of the wealth recursion at realized returns."""
    v = np.asarray(v, dtype=float)
    realized = np.asarray(realized_returns, dtype=float)
    return float(w_prev * (1.0 + rf_next + v @ (realized - rf_next)))


def sample_predictive_wealth(post: PosteriorParams, v, w_now: float,
                             rf_next: float, B: int, *, rng: RngStream,
                             period: int = 0) -> WealthSampleBatch:
    """B draws from the posterior-predictive distribution of next wealth.

    ``v`` is the held weight vector (not resampled).  With ``v = 0`` every
    draw equals ``w_now * (1 + rf_next)`` exactly.  ``period`` is an
    optional label stored on the batch (the backtest uses ``t + 1``).

    Randomness order (fixed contract): the ``t_df`` t-block, then the
    ``t_df + 1`` t-block.

    Raises
    ------
    InsufficientSample
        If the posterior degrees are not positive (defensive; cannot occur
        for a posterior built by :func:`bayport.posterior.posterior_params`).
    """
    if isinstance(B, bool) or not isinstance(B, (int, np.integer)) or B < 1:
        raise ValueError(f"B must be a positive integer, got {B!r}")
    if not post.t_df > 0.0:
        raise InsufficientSample(f"posterior t_df must be > 0, got {post.t_df}")
    v = np.asarray(v, dtype=float)
    if v.shape != (post.k,):
        raise ValueError(f"v must have shape ({post.k},), got {v.shape}")
    d = post.t_df
    drift = float(v @ (post.mean - rf_next))
    spread = float(np.sqrt(v @ post.scale.entries @ v))
    gen = rng.generator()
    t1 = gen.standard_t(d, int(B))
    t2 = gen.standard_t(d + 1.0, int(B))
    kappa = (t1 / np.sqrt(post.precision * d)
             + np.sqrt(1.0 + t1 * t1 / d) * t2 / np.sqrt(d + 1.0))
    draws = w_now * (1.0 + rf_next + drift + spread * kappa)
    return WealthSampleBatch(draws=draws, seed=rng, period=int(period))


def credible_band(batch: WealthSampleBatch, level: float) -> CredibleBand:
    """Equal-tailed credible interval from empirical quantiles.

    Quantiles use linear interpolation between order statistics; the point
    value is the batch mean.

    Raises
    ------
    TooFewSamples
        If the batch has fewer than 100 draws.
    """
    if not 0.0 < float(level) < 1.0:
        raise ValueError(f"level must be strictly inside (0, 1), got {level}")
    if batch.b < 100:
        raise TooFewSamples(f"need at least 100 draws for a credible band, "
                            f"got {batch.b}")
    tail = (1.0 - float(level)) / 2.0
    lower, upper = np.quantile(batch.draws, [tail, 1.0 - tail])
    return CredibleBand(level=float(level), lower=float(lower),
                        upper=float(upper), point=float(batch.draws.mean()))


def default_probability(batch: WealthSampleBatch) -> float:
    """Fraction of draws with strictly negative wealth (zero is no default)."""
    return float(np.count_nonzero(batch.draws < 0.0)) / batch.b
