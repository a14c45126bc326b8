"""Rolling-window backtest: per-period posteriors, weights, wealth tracking.

For each investment period ``t = 0..T-1`` the harness fits a posterior on
the trailing ``window_n`` observations (strictly before the realized
return of the period — no look-ahead), computes the period's weights
under the configured policy, draws a posterior-predictive wealth batch
for the credible band and default probability, and advances wealth with
the realized return row.  Realized (not predicted) wealth feeds the next
period's weight scaling.

Randomness: the predictive batch of period ``t`` uses
``RngStream(seed, stream_id=t)``, so a configuration and seed pin the
whole report bitwise and paired runs (:func:`compare_priors`) share their
Monte Carlo noise period by period.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .errors import DegenerateSample, InsufficientData
from .posterior import (ConjugatePrior, DiffusePrior, PosteriorParams,
                        ReturnsWindow, empirical_bayes_hyperparams,
                        posterior_params)
from .predictive import (CredibleBand, credible_band, default_probability,
                         sample_predictive_wealth, wealth_step)
from .rng import RngStream
from .weights import (PortfolioContext, bayes_estimate, plugin_weights,
                      weight_covariance)

__all__ = [
    "EmpiricalBayesPrior",
    "BacktestConfig",
    "PeriodRecord",
    "BacktestReport",
    "PriorComparison",
    "run_backtest",
    "compare_priors",
    "replay_wealth",
]

WEIGHT_POLICIES = ("bayes", "plugin", "zero")


@dataclass(frozen=True)
class EmpiricalBayesPrior:
    """Directive: refit conjugate hyperparameters from a presample each period.

    The presample is the ``presample_n`` rows ending ``offset`` rows before
    the estimation window (0 = adjacent; exposed because the alignment for
    later periods is a modeling choice, not a math fact).  A negative
    ``offset`` slides the presample into the window itself — with
    ``offset = -window_n`` and ``presample_n = window_n`` the presample *is*
    the estimation window — but it may never extend past the window's end
    (no look-ahead; enforced against ``window_n`` by ``BacktestConfig``).
    ``d0 = None`` defaults to the presample length.  ``r0`` is not
    identified by the closed-form fit and stays a user-chosen constant.
    """

    presample_n: int
    d0: float | None = None
    r0: float = 1.0
    offset: int = 0

    kind = "empirical_bayes"

    def __post_init__(self) -> None:
        if self.presample_n < 2:
            raise ValueError(f"presample_n must be >= 2, got {self.presample_n}")
        if self.d0 is not None and not float(self.d0) > 0:
            raise ValueError(f"d0 must be positive when given, got {self.d0}")
        if not float(self.r0) > 0:
            raise ValueError(f"r0 must be > 0, got {self.r0}")


PriorDirective = Union[DiffusePrior, ConjugatePrior, EmpiricalBayesPrior]


@dataclass(frozen=True)
class BacktestConfig:
    """Backtest layout, prior choice, sampling sizes, and weight policy."""

    window_n: int
    horizon_T: int
    gamma: float
    prior: PriorDirective
    B: int = 100_000
    seed: int = 42
    credible_level: float = 0.95
    weight_policy: str = "bayes"
    initial_wealth: float = 1.0

    def __post_init__(self) -> None:
        if self.window_n < 2:
            raise ValueError(f"window_n must be >= 2, got {self.window_n}")
        if self.horizon_T < 1:
            raise ValueError(f"horizon_T must be >= 1, got {self.horizon_T}")
        if not float(self.gamma) > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.B < 100:
            raise ValueError(f"B must be >= 100 (credible bands), got {self.B}")
        if not 0.0 < self.credible_level < 1.0:
            raise ValueError(f"credible_level must be in (0, 1), "
                             f"got {self.credible_level}")
        if self.weight_policy not in WEIGHT_POLICIES:
            raise ValueError(f"weight_policy must be one of {WEIGHT_POLICIES}, "
                             f"got {self.weight_policy!r}")
        if self.initial_wealth == 0.0 or not np.isfinite(self.initial_wealth):
            raise ValueError("initial_wealth must be finite and nonzero")
        if (isinstance(self.prior, EmpiricalBayesPrior)
                and self.prior.offset < -self.window_n):
            raise ValueError(
                f"presample offset {self.prior.offset} would reach past the "
                f"estimation window's end (needs offset >= -window_n = "
                f"{-self.window_n})")


@dataclass(frozen=True)
class PeriodRecord:
    """Everything recorded for one investment period."""

    t: int
    date: str
    weights: np.ndarray
    weight_cov: np.ndarray
    realized_wealth: float
    band: CredibleBand
    default_prob: float


@dataclass(frozen=True)
class BacktestReport:
    """Per-period records plus the inputs needed to audit them."""

    config: BacktestConfig
    seed: int
    assets: tuple[str, ...]
    dates: tuple[str, ...]
    rf_schedule: np.ndarray
    initial_wealth: float
    periods: tuple[PeriodRecord, ...]

    @property
    def wealth_path(self) -> np.ndarray:
        """Wealth series of length T + 1, starting at the initial wealth."""
        return np.concatenate([[self.initial_wealth],
                               [p.realized_wealth for p in self.periods]])

    @property
    def band_widths(self) -> np.ndarray:
        return np.array([p.band.width for p in self.periods])

    @property
    def default_probs(self) -> np.ndarray:
        return np.array([p.default_prob for p in self.periods])


@dataclass(frozen=True)
class PriorComparison:
    """Same-seed diffuse/conjugate report pair (common MC noise)."""

    diffuse: BacktestReport
    conjugate: BacktestReport


def _resolve_rf(rf, horizon: int) -> np.ndarray:
    if np.isscalar(rf):
        return np.full(horizon, float(rf))
    arr = np.asarray(rf, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != horizon:
        raise ValueError(f"rf schedule must be a scalar or a vector of "
                         f"{horizon} per-period rates, got shape {arr.shape}")
    return arr


def _period_prior(data: ReturnsWindow, cfg: BacktestConfig,
                  window_start: int) -> PriorDirective:
    """Concrete prior for the window starting at row ``window_start``."""
    prior = cfg.prior
    if not isinstance(prior, EmpiricalBayesPrior):
        return prior
    stop = window_start - prior.offset
    start = stop - prior.presample_n
    presample = data.rows(start, stop)
    d0 = float(prior.d0) if prior.d0 is not None else float(prior.presample_n)
    m0, s0 = empirical_bayes_hyperparams(presample, d0)
    return ConjugatePrior(m0=m0, r0=float(prior.r0), d0=d0, s0=s0)


def run_backtest(data: ReturnsWindow, rf, config: BacktestConfig) -> BacktestReport:
    """Run the rolling pipeline over the last ``horizon_T`` rows of ``data``.

    ``rf`` is a scalar rate or a vector of ``horizon_T`` per-period rates
    aligned with the investment rows.

    Raises
    ------
    InsufficientData
        If the dataset cannot hold the window, horizon, and (for the
        empirical-Bayes directive) presample plus offset.
    DegenerateSample
        Propagated from any window, annotated with the offending date;
        the run aborts rather than skipping a period, because a silent
        gap would corrupt the wealth recursion.
    """
    horizon = config.horizon_T
    lead = config.window_n
    if isinstance(config.prior, EmpiricalBayesPrior):
        lead += max(config.prior.presample_n + config.prior.offset, 0)
    if data.n < lead + horizon:
        raise InsufficientData(
            f"dataset has {data.n} rows; need at least {lead + horizon} "
            f"(window {config.window_n}"
            + (f" + presample {config.prior.presample_n}"
               f" + offset {config.prior.offset}"
               if isinstance(config.prior, EmpiricalBayesPrior) else "")
            + f" + horizon {horizon})")
    if config.window_n <= data.k:
        raise InsufficientData(
            f"window_n must exceed the number of assets k={data.k}, "
            f"got {config.window_n}")
    rf_schedule = _resolve_rf(rf, horizon)

    wealth = float(config.initial_wealth)
    records: list[PeriodRecord] = []
    for t in range(horizon):
        end = data.n - horizon + t  # row index of the period's realized return
        window_start = end - config.window_n
        date = data.dates[end]
        try:
            prior = _period_prior(data, config, window_start)
            window = data.rows(window_start, end)
            post = posterior_params(window, prior)
            ctx = PortfolioContext(gamma=config.gamma, wealth=wealth, t=t,
                                   horizon=horizon, rf_schedule=rf_schedule)
            weights = _policy_weights(config.weight_policy, post, window, ctx)
            cov = weight_covariance(post, ctx)
        except DegenerateSample as exc:
            raise DegenerateSample(
                f"period t={t} (return date {date}): {exc}") from exc
        batch = sample_predictive_wealth(
            post, weights, wealth, ctx.rf_next, config.B,
            rng=RngStream(config.seed, stream_id=t), period=t + 1)
        band = credible_band(batch, config.credible_level)
        prob = default_probability(batch)
        wealth = wealth_step(wealth, weights, data.returns[end], ctx.rf_next)
        records.append(PeriodRecord(
            t=t, date=date, weights=weights, weight_cov=cov.entries,
            realized_wealth=wealth, band=band, default_prob=prob))
    return BacktestReport(config=config, seed=config.seed, assets=data.assets,
                          dates=tuple(r.date for r in records),
                          rf_schedule=rf_schedule,
                          initial_wealth=float(config.initial_wealth),
                          periods=tuple(records))


def _policy_weights(policy: str, post: PosteriorParams, window: ReturnsWindow,
                    ctx: PortfolioContext) -> np.ndarray:
    if policy == "bayes":
        return bayes_estimate(post, ctx)
    if policy == "plugin":
        return plugin_weights(window, ctx)
    if policy == "zero":
        return np.zeros(post.k)
    raise ValueError(f"unknown weight_policy {policy!r}")  # pragma: no cover


def compare_priors(data: ReturnsWindow, rf,
                   config: BacktestConfig) -> PriorComparison:
    """Paired diffuse/conjugate backtests sharing one seed.

    ``config.prior`` supplies the conjugate leg (a concrete conjugate
    prior or the empirical-Bayes directive); the diffuse leg reuses every
    other setting and the same seed, so the two reports differ only
    through prior-dependent quantities.
    """
    if isinstance(config.prior, DiffusePrior):
        raise ValueError("compare_priors needs a conjugate or empirical-Bayes "
                         "prior on the config; the diffuse leg is implicit")
    diffuse = run_backtest(data, rf, replace(config, prior=DiffusePrior()))
    conjugate = run_backtest(data, rf, config)
    return PriorComparison(diffuse=diffuse, conjugate=conjugate)


def replay_wealth(report: BacktestReport, data: ReturnsWindow) -> np.ndarray:
    """Recompute the wealth path from recorded weights and realized returns.

    Audit helper: equals ``report.wealth_path`` exactly when the report is
    internally consistent.
    """
    horizon = report.config.horizon_T
    path = [float(report.initial_wealth)]
    for t, record in enumerate(report.periods):
        end = data.n - horizon + t
        if data.dates[end] != record.date:
            raise ValueError(f"report/date mismatch at period {t}: "
                             f"{data.dates[end]!r} vs {record.date!r}")
        path.append(wealth_step(path[-1], record.weights, data.returns[end],
                                float(report.rf_schedule[t])))
    return np.asarray(path)
