"""Seeded random streams and the scalar/vector samplers the engines consume.

Determinism contract
--------------------
An :class:`RngStream` is a value, not a mutable generator: every operation
that takes one builds a fresh ``numpy.random.Generator`` from it, so a call
is a pure function of its arguments.  Identical ``(seed, stream_id)`` pairs
reproduce draws bitwise; distinct ``stream_id`` values yield independent
substreams (they key the ``SeedSequence`` spawn path).  Parallel batch
sampling should therefore partition work by ``stream_id`` and concatenate
in stream order.

The module-private ``*_from`` helpers draw from an already-open generator;
composite samplers use them so that their documented draw order is fixed in
exactly one place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDf
from .linalg import SpdMatrix

__all__ = [
    "RngStream",
    "sample_chi2",
    "sample_f",
    "sample_student_t",
    "sample_unit_sphere",
    "sample_mvt",
]

_UINT64_CEIL = 2**64


@dataclass(frozen=True)
class RngStream:
    """Seed plus substream index identifying one reproducible draw sequence."""

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise TypeError(f"{name} must be an integer, got {value!r}")
            if not 0 <= int(value) < _UINT64_CEIL:
                raise ValueError(f"{name} must fit in an unsigned 64-bit integer")

    def generator(self) -> np.random.Generator:
        """Open a fresh PCG64 generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(entropy=int(self.seed),
                                     spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(seq))


# --- primitives over an open generator --------------------------------------
# Chi-square draws go through the gamma sampler (shape df/2, scale 2) so that
# non-integer degrees of freedom are supported by the same kernel.

def _chi2_from(gen: np.random.Generator, df: float, size=None) -> np.ndarray:
    return gen.standard_gamma(df / 2.0, size) * 2.0


def _f_from(gen: np.random.Generator, d1: float, d2: float, size=None) -> np.ndarray:
    num = _chi2_from(gen, d1, size)
    den = _chi2_from(gen, d2, size)
    return (num / d1) / (den / d2)


def _sphere_from(gen: np.random.Generator, k: int, size=None) -> np.ndarray:
    if size is None:
        z = gen.standard_normal(k)
        norm = float(np.linalg.norm(z))
        while norm == 0.0:  # measure-zero event; resample
            z = gen.standard_normal(k)
            norm = float(np.linalg.norm(z))
        return z / norm
    z = gen.standard_normal((size, k))
    norms = np.linalg.norm(z, axis=1)
    while np.any(norms == 0.0):  # pragma: no cover - measure-zero event
        degenerate = norms == 0.0
        z[degenerate] = gen.standard_normal((int(degenerate.sum()), k))
        norms = np.linalg.norm(z, axis=1)
    return z / norms[:, None]


def _mvt_from(gen: np.random.Generator, df: float, location: np.ndarray,
              chol: np.ndarray, size=None) -> np.ndarray:
    """Multivariate t draws: location + L z sqrt(df / chi2_df).

    Draw order: the chi-square mixing variables first, then the Gaussian
    block.  ``chol`` is a (lower) factor of the dispersion matrix.
    """
    k = location.shape[0]
    if size is None:
        chi = _chi2_from(gen, df)
        z = gen.standard_normal(k)
        return location + (chol @ z) * np.sqrt(df / chi)
    chi = _chi2_from(gen, df, size)
    z = gen.standard_normal((size, k))
    return location + (z @ chol.T) * np.sqrt(df / chi)[:, None]


# --- public sampler operations -----------------------------------------------

def _check_df(value: float, name: str = "df") -> float:
    value = float(value)
    if not value > 0.0:
        raise InvalidDf(f"{name} must be > 0, got {value}")
    return value


def sample_chi2(df: float, rng: RngStream, size: int | None = None):
    """Chi-square draw(s) with (possibly non-integer) ``df > 0`` degrees."""
    df = _check_df(df)
    return _chi2_from(rng.generator(), df, size)


def sample_f(d1: float, d2: float, rng: RngStream, size: int | None = None):
    """F(d1, d2) draw(s), realized as (chi2_d1/d1)/(chi2_d2/d2)."""
    d1 = _check_df(d1, "d1")
    d2 = _check_df(d2, "d2")
    return _f_from(rng.generator(), d1, d2, size)


def sample_student_t(df: float, rng: RngStream, size: int | None = None):
    """Standard univariate Student-t draw(s) with ``df > 0``."""
    df = _check_df(df)
    return rng.generator().standard_t(df, size)


def sample_unit_sphere(k: int, rng: RngStream, size: int | None = None):
    """Uniform draw(s) on the unit sphere in ``k`` dimensions.

    Realized by normalizing a standard Gaussian vector; the measure-zero
    zero-vector event is resampled.
    """
    if int(k) < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    return _sphere_from(rng.generator(), int(k), size)


def sample_mvt(df: float, location, dispersion, rng: RngStream,
               size: int | None = None):
    """Multivariate Student-t draw(s).

    Parameters
    ----------
    df : float
        Degrees of freedom, > 0.
    location : array_like, shape (k,)
    dispersion : SpdMatrix or array_like
        Dispersion (not covariance) matrix; the covariance is
        ``df/(df-2) * dispersion`` for ``df > 2``.
    rng : RngStream
    size : int, optional
        If given, return ``(size, k)`` draws; otherwise a single vector.

    Raises
    ------
    InvalidDf
        If ``df <= 0``.
    NotSpd
        If the dispersion matrix fails SPD validation.
    """
    df = _check_df(df)
    if not isinstance(dispersion, SpdMatrix):
        dispersion = SpdMatrix(dispersion)  # raises NotSpd on bad input
    location = np.asarray(location, dtype=float)
    if location.ndim != 1 or location.shape[0] != dispersion.dim:
        raise ValueError("location must be a vector matching the dispersion "
                         f"dimension {dispersion.dim}")
    chol = np.linalg.cholesky(dispersion.entries)
    return _mvt_from(rng.generator(), df, location, chol, size)
