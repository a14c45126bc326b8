"""Posterior parameters for the asset-return model, under two priors.

Returns are modeled as i.i.d. multivariate normal with unknown mean and
covariance.  Two priors are supported:

* the diffuse (Jeffreys-type) prior, density proportional to
  ``|cov|^-(k+1)/2``;
* the conjugate normal-inverse-Wishart prior: ``mean | cov`` normal with
  prior mean ``m0`` and precision scalar ``r0``; ``cov`` inverse Wishart
  with ``d0`` degrees and scale ``s0``.

Both posteriors share one parameterization (:class:`PosteriorParams`): a
posterior mean vector, a posterior scale matrix, and three degree counts.
Writing ``n`` for the window length and ``k`` for the number of assets:

===============  ==================  ==========================
field            diffuse             conjugate
===============  ==================  ==========================
mean             column average      (n*avg + r0*m0)/(n + r0)
scale            (n-1)*S             (n-1)*S + s0 + correction
t_df             n - k               n + d0 - 2k
chi2_df          n                   n + d0 - k
iw_df            n + k + 1           n + d0 + 1
precision        n                   n + r0
===============  ==================  ==========================

where ``S`` is the unbiased sample covariance and the conjugate correction
is ``n*r0/(n+r0) * outer(m0 - mean, m0 - mean)``.  The marginal posterior
of the mean vector is multivariate t with ``t_df`` degrees, location
``mean``, and dispersion ``scale / (precision * t_df)``; given the mean,
the covariance is inverse Wishart with ``iw_df`` degrees and scale
``conditional_scale(mu) = scale + precision * outer(mu - mean, mu - mean)``
(equivalently, its inverse is Wishart with ``chi2_df`` degrees).

The conjugate hyperparameters can be fit from a presample by empirical
Bayes; the closed forms are implemented in
:func:`empirical_bayes_hyperparams`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Union

import numpy as np

from .errors import (DegenerateSample, InsufficientSample, InvalidDf,
                     NonMonotoneDates, NotSpd)
from .linalg import SpdMatrix

__all__ = [
    "ReturnsWindow",
    "DiffusePrior",
    "ConjugatePrior",
    "PriorSpec",
    "PosteriorParams",
    "sample_moments",
    "posterior_params",
    "empirical_bayes_hyperparams",
]


@dataclass(frozen=True)
class ReturnsWindow:
    """An n x k block of net simple returns with date and asset labels.

    Invariants: ``n >= 2``, ``k >= 1``, no missing entries, dates strictly
    ascending.
    """

    assets: tuple[str, ...]
    dates: tuple[str, ...]
    returns: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "assets", tuple(str(a) for a in self.assets))
        object.__setattr__(self, "dates", tuple(str(d) for d in self.dates))
        arr = np.asarray(self.returns, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"returns must be 2-d, got shape {arr.shape}")
        n, k = arr.shape
        if k < 1 or len(self.assets) != k:
            raise ValueError(f"expected {arr.shape[1]} asset labels, "
                             f"got {len(self.assets)}")
        if n < 2 or len(self.dates) != n:
            raise ValueError(f"need at least 2 dated rows, got {n} rows and "
                             f"{len(self.dates)} dates")
        if not np.all(np.isfinite(arr)):
            raise ValueError("returns contain missing or non-finite entries")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if not prev < cur:
                raise NonMonotoneDates(
                    f"dates must be strictly ascending, got {prev!r} before {cur!r}")
        object.__setattr__(self, "returns", arr)

    @property
    def n(self) -> int:
        return self.returns.shape[0]

    @property
    def k(self) -> int:
        return self.returns.shape[1]

    def rows(self, start: int, stop: int) -> "ReturnsWindow":
        """Sub-window of rows ``[start, stop)``."""
        if not 0 <= start < stop <= self.n:
            raise IndexError(f"row slice [{start}, {stop}) out of range for n={self.n}")
        return ReturnsWindow(self.assets, self.dates[start:stop],
                             self.returns[start:stop])


@dataclass(frozen=True)
class DiffusePrior:
    """Noninformative (Jeffreys-type) prior on (mean, covariance)."""

    kind: ClassVar[str] = "diffuse"


@dataclass(frozen=True)
class ConjugatePrior:
    """Normal-inverse-Wishart prior.

    ``m0`` is the prior mean, ``r0 > 0`` the prior precision scalar,
    ``d0 > k + 1`` the inverse-Wishart degrees, ``s0`` the SPD prior scale.
    """

    m0: np.ndarray
    r0: float
    d0: float
    s0: SpdMatrix

    kind: ClassVar[str] = "conjugate"

    def __post_init__(self) -> None:
        m0 = np.asarray(self.m0, dtype=float)
        if m0.ndim != 1 or not np.all(np.isfinite(m0)):
            raise ValueError("m0 must be a finite vector")
        object.__setattr__(self, "m0", m0)
        if not isinstance(self.s0, SpdMatrix):
            object.__setattr__(self, "s0", SpdMatrix(self.s0))
        if self.s0.dim != m0.shape[0]:
            raise ValueError(f"s0 is {self.s0.dim}x{self.s0.dim} but m0 has "
                             f"length {m0.shape[0]}")
        if not float(self.r0) > 0.0:
            raise ValueError(f"r0 must be > 0, got {self.r0}")
        k = m0.shape[0]
        if not float(self.d0) > k + 1:
            raise InvalidDf(f"d0 must exceed k + 1 = {k + 1}, got {self.d0}")

    @property
    def k(self) -> int:
        return self.m0.shape[0]


PriorSpec = Union[DiffusePrior, ConjugatePrior]


@dataclass(frozen=True)
class PosteriorParams:
    """Posterior mean/scale and degree counts, for either prior.

    ``prior_kind`` is ``"diffuse"`` or ``"conjugate"``.  See the module
    docstring for the field-by-field closed forms and the distributional
    meaning of each degree count.
    """

    prior_kind: str
    mean: np.ndarray
    scale: SpdMatrix
    t_df: float
    chi2_df: float
    iw_df: float
    precision: float

    def __post_init__(self) -> None:
        if self.prior_kind not in ("diffuse", "conjugate"):
            raise ValueError(f"unknown prior_kind {self.prior_kind!r}")
        mean = np.asarray(self.mean, dtype=float)
        if mean.ndim != 1 or not np.all(np.isfinite(mean)):
            raise ValueError("mean must be a finite vector")
        object.__setattr__(self, "mean", mean)
        if not isinstance(self.scale, SpdMatrix):
            object.__setattr__(self, "scale", SpdMatrix(self.scale))
        if self.scale.dim != mean.shape[0]:
            raise ValueError("scale and mean dimensions disagree")
        k = mean.shape[0]
        if not self.t_df > 0.0:
            raise InvalidDf(f"t_df must be > 0, got {self.t_df}")
        if not self.precision > 0.0:
            raise ValueError(f"precision must be > 0, got {self.precision}")
        if self.t_df + 2.0 > self.chi2_df + k:
            raise InvalidDf("inconsistent degrees: t_df + 2 must not exceed "
                            f"chi2_df + k (got {self.t_df} + 2 vs "
                            f"{self.chi2_df} + {k})")

    @property
    def k(self) -> int:
        return self.mean.shape[0]

    def conditional_scale(self, mu) -> np.ndarray:
        """Scale of the covariance posterior given a mean vector ``mu``."""
        mu = np.asarray(mu, dtype=float)
        diff = mu - self.mean
        return self.scale.entries + self.precision * np.outer(diff, diff)

    def mean_dispersion(self) -> np.ndarray:
        """Dispersion of the marginal multivariate-t posterior of the mean."""
        return self.scale.entries / (self.precision * self.t_df)


# ---------------------------------------------------------------------------

# A sample covariance whose smallest eigenvalue is this far below its
# largest is treated as rank-deficient even if Cholesky would succeed by
# rounding luck (e.g. a constant column whose "variance" is pure float
# noise around 1e-36).  Real asset panels sit many orders above this.
SINGULARITY_RTOL = 1e-12


def sample_moments(window: ReturnsWindow) -> tuple[np.ndarray, SpdMatrix]:
    """Column mean and unbiased (divisor n-1) sample covariance.

    Raises
    ------
    DegenerateSample
        If the sample covariance is singular or numerically so: ``n <= k``,
        a constant column, or collinear columns (smallest eigenvalue below
        ``SINGULARITY_RTOL`` times the largest).
    """
    x = window.returns
    n = window.n
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    cov = (cov + cov.T) / 2.0
    eigenvalues = np.linalg.eigvalsh(cov)
    if eigenvalues[0] <= SINGULARITY_RTOL * eigenvalues[-1]:
        raise DegenerateSample(
            f"sample covariance is numerically singular (eigenvalue ratio "
            f"{eigenvalues[0] / max(eigenvalues[-1], np.finfo(float).tiny):.2e}"
            f"); a column may be constant or collinear (n={n}, k={window.k})")
    try:
        return mean, SpdMatrix(cov)
    except NotSpd as exc:
        raise DegenerateSample(
            f"sample covariance is singular or indefinite "
            f"(n={n}, k={window.k}): {exc}") from None


def _raw_moments(window: ReturnsWindow) -> tuple[np.ndarray, np.ndarray]:
    """Mean and unbiased covariance without the SPD check (may be singular)."""
    x = window.returns
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (window.n - 1)
    return mean, (cov + cov.T) / 2.0


def posterior_params(window: ReturnsWindow, prior: PriorSpec) -> PosteriorParams:
    """Posterior parameters for the given window and prior.

    Raises
    ------
    InsufficientSample
        Conjugate prior with ``n + d0 - 2k <= 0``.
    DegenerateSample
        Diffuse prior with a singular sample covariance (this subsumes
        ``n <= k``), or a conjugate combined scale that is not SPD.
    """
    n, k = window.n, window.k
    if isinstance(prior, DiffusePrior):
        mean, cov = sample_moments(window)
        scale = SpdMatrix((n - 1) * cov.entries)
        return PosteriorParams(prior_kind="diffuse", mean=mean, scale=scale,
                               t_df=float(n - k), chi2_df=float(n),
                               iw_df=float(n + k + 1), precision=float(n))
    if isinstance(prior, ConjugatePrior):
        if prior.k != k:
            raise ValueError(f"prior is for k={prior.k} assets, window has k={k}")
        d0, r0 = float(prior.d0), float(prior.r0)
        if n + d0 - 2 * k <= 0.0:
            raise InsufficientSample(
                f"conjugate posterior needs n + d0 - 2k > 0, got "
                f"n={n}, d0={d0}, k={k}")
        # The prior scale can repair a singular sample covariance, so the
        # moments are taken unchecked and only the combined scale must be SPD.
        xbar, cov = _raw_moments(window)
        mean = (n * xbar + r0 * prior.m0) / (n + r0)
        shift = prior.m0 - mean
        scale = ((n - 1) * cov + prior.s0.entries
                 + (n * r0 / (n + r0)) * np.outer(shift, shift))
        try:
            scale_spd = SpdMatrix(scale)
        except NotSpd as exc:
            raise DegenerateSample(
                f"combined conjugate scale is not SPD (n={n}, k={k}): "
                f"{exc}") from None
        return PosteriorParams(prior_kind="conjugate", mean=mean,
                               scale=scale_spd,
                               t_df=n + d0 - 2 * k, chi2_df=n + d0 - k,
                               iw_df=n + d0 + 1, precision=n + r0)
    raise TypeError(f"unsupported prior {type(prior).__name__}")


def empirical_bayes_hyperparams(presample: ReturnsWindow,
                                d0: float) -> tuple[np.ndarray, SpdMatrix]:
    """Closed-form empirical-Bayes fit of the conjugate ``(m0, s0)``.

    ``m0`` is the presample mean; ``s0 = (d0 - k - 1) * (n - 1) / n * S``
    with ``S`` the unbiased presample covariance.

    Raises
    ------
    InsufficientSample
        If the presample has ``n <= k`` rows.
    InvalidDf
        If ``d0 <= k + 1``.
    """
    n, k = presample.n, presample.k
    if n <= k:
        raise InsufficientSample(f"presample needs n > k, got n={n}, k={k}")
    d0 = float(d0)
    if not d0 > k + 1:
        raise InvalidDf(f"d0 must exceed k + 1 = {k + 1}, got {d0}")
    mean, cov = sample_moments(presample)
    s0 = ((d0 - k - 1) * (n - 1) / n) * cov.entries
    return mean, SpdMatrix(s0)
