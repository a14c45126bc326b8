"""Shared test fixtures and synthetic-data helpers."""

from __future__ import annotations

import numpy as np
import pytest

from bayport import ConjugatePrior, ReturnsWindow, SpdMatrix


def make_window(k: int, n: int, seed: int, *, mean=None, sigma=None,
                vol: float = 0.02) -> ReturnsWindow:
    """Seeded i.i.d. Gaussian returns window with a well-conditioned truth."""
    gen = np.random.Generator(np.random.PCG64(seed))
    if mean is None:
        mean = 0.002 + 0.003 * np.arange(k) / max(k - 1, 1)
    mean = np.asarray(mean, dtype=float)
    if sigma is None:
        base = 0.3 ** np.abs(np.subtract.outer(np.arange(k), np.arange(k)))
        vols = vol * (1.0 + 0.5 * np.arange(k) / max(k - 1, 1))
        sigma = base * np.outer(vols, vols)
    root = np.linalg.cholesky(np.asarray(sigma, dtype=float))
    returns = mean + gen.standard_normal((n, k)) @ root.T
    return ReturnsWindow(
        assets=tuple(f"A{i:02d}" for i in range(k)),
        dates=tuple(f"2020-{1 + i // 28:02d}-{1 + i % 28:02d}"
                    if n <= 300 else f"d{i:05d}" for i in range(n)),
        returns=returns,
    )


def make_conjugate_prior(k: int, seed: int = 0, *, r0: float = 2.0,
                         d0: float | None = None) -> ConjugatePrior:
    """A generic, well-posed conjugate prior for ``k`` assets."""
    gen = np.random.Generator(np.random.PCG64(seed + 1000))
    if d0 is None:
        d0 = float(2 * k + 6)
    m0 = 0.001 * gen.standard_normal(k)
    root = 0.02 * (np.eye(k) + 0.05 * gen.standard_normal((k, k)))
    s0 = (d0 - k - 1) * (root @ root.T)
    return ConjugatePrior(m0=m0, r0=r0, d0=d0, s0=SpdMatrix(s0))


@pytest.fixture
def window_k3():
    return make_window(3, 60, seed=42)


@pytest.fixture
def window_k1():
    return ReturnsWindow(assets=("x",),
                         dates=("2020-01-01", "2020-01-08", "2020-01-15"),
                         returns=np.array([[0.01], [0.02], [0.03]]))
