"""Bundled synthetic weekly dataset: 12 assets, 208 weeks, seeded Gaussian.

The generating recipe is deterministic and lives here next to the loaders,
so tests can compare the shipped CSV against a fresh regeneration and use
the true moments as an oracle.  ``tools/make_synthetic_dataset.py`` writes
the CSVs from this module.
"""

from __future__ import annotations

import datetime
from importlib import resources

import numpy as np

from .dataio import ingest, load_riskfree
from .linalg import SpdMatrix
from .posterior import ReturnsWindow
from .weights import LatentParams

__all__ = [
    "synthetic_truth",
    "generate_synthetic_returns",
    "generate_synthetic_riskfree",
    "load_synthetic_returns",
    "load_synthetic_riskfree",
]

SEED = 20140106
N_WEEKS = 208
N_ASSETS = 12
RETURNS_FILE = "synthetic_returns.csv"
RISKFREE_FILE = "synthetic_riskfree.csv"


def synthetic_truth() -> LatentParams:
    """True weekly mean/covariance behind the bundled returns.

    One-factor correlation structure with loadings below one, so the
    covariance is SPD by construction.
    """
    idx = np.arange(N_ASSETS)
    mu = 0.0008 + 0.0022 * idx / (N_ASSETS - 1)
    vol = 0.015 + 0.020 * ((idx * 5) % N_ASSETS) / (N_ASSETS - 1)
    loadings = 0.4 + 0.4 * ((idx * 7) % N_ASSETS) / (N_ASSETS - 1)
    corr = np.outer(loadings, loadings)
    np.fill_diagonal(corr, 1.0)
    sigma = corr * np.outer(vol, vol)
    return LatentParams(mu=mu, sigma=SpdMatrix(sigma))


def _weekly_dates(count: int) -> tuple[str, ...]:
    start = datetime.date(2014, 1, 6)
    return tuple((start + datetime.timedelta(weeks=i)).isoformat()
                 for i in range(count))


def generate_synthetic_returns() -> ReturnsWindow:
    """Regenerate the bundled returns (identical to the shipped CSV)."""
    truth = synthetic_truth()
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(SEED)))
    z = gen.standard_normal((N_WEEKS, N_ASSETS))
    chol = np.linalg.cholesky(truth.sigma.entries)
    returns = truth.mu + z @ chol.T
    assets = tuple(f"A{i + 1:02d}" for i in range(N_ASSETS))
    return ReturnsWindow(assets=assets, dates=_weekly_dates(N_WEEKS),
                         returns=returns)


def generate_synthetic_riskfree() -> tuple[tuple[str, ...], np.ndarray]:
    """Regenerate the bundled weekly risk-free rates (mildly varying)."""
    rates = 0.0004 + 0.0003 * (np.arange(N_WEEKS) % 6) / 5.0
    return _weekly_dates(N_WEEKS), rates


def _data_path(name: str):
    return resources.files("bayport").joinpath("data", name)


def load_synthetic_returns() -> ReturnsWindow:
    """Load the bundled 12-asset weekly returns."""
    with resources.as_file(_data_path(RETURNS_FILE)) as path:
        return ingest(path, kind="returns")


def load_synthetic_riskfree() -> tuple[tuple[str, ...], np.ndarray]:
    """Load the bundled weekly risk-free series as (dates, rates)."""
    with resources.as_file(_data_path(RISKFREE_FILE)) as path:
        return load_riskfree(path)
