"""Dense symmetric-matrix kernels.

Everything here operates on small (k x k, k up to ~100) symmetric matrices:
validated SPD containers, SPD inversion, the symmetric inverse square root,
and a clamped PSD square root for matrices that are positive semidefinite
analytically but carry rounding noise.

Square roots are symmetric (eigendecomposition-based) rather than Cholesky
factors because downstream formulas use them two-sidedly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import IndefiniteMatrix, NotSpd

__all__ = [
    "SpdMatrix",
    "PsdSqrtResult",
    "spd_inverse",
    "spd_inv_sqrt",
    "psd_sqrt",
]

#: Relative tolerance for the symmetry check on construction.
SYMMETRY_RTOL = 1e-12

#: Relative eigenvalue clamp in :func:`psd_sqrt`.
PSD_CLAMP_RTOL = 1e-10

#: Eigenvalue ratio below which an SPD matrix is treated as numerically singular.
SINGULAR_RTOL = 1e-14


class SpdMatrix:
    """A symmetric positive-definite matrix, validated at construction.

    Parameters
    ----------
    entries : array_like
        Square matrix; must be symmetric to relative tolerance
        ``SYMMETRY_RTOL`` and pass a Cholesky factorization.

    Raises
    ------
    NotSpd
        If the matrix is not square, not finite, not symmetric within
        tolerance, or not positive definite.

    Notes
    -----
    The stored array is the symmetrized input ``(A + A.T) / 2``, so exact
    symmetry can be assumed downstream.
    """

    __slots__ = ("entries",)

    def __init__(self, entries) -> None:
        arr = np.asarray(entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise NotSpd(f"expected a square matrix, got shape {arr.shape}")
        if arr.shape[0] == 0:
            raise NotSpd("empty matrix")
        if not np.all(np.isfinite(arr)):
            raise NotSpd("matrix has non-finite entries")
        scale = float(np.abs(arr).max())
        if float(np.abs(arr - arr.T).max()) > SYMMETRY_RTOL * scale:
            raise NotSpd("matrix is not symmetric within relative tolerance "
                         f"{SYMMETRY_RTOL:g}")
        sym = (arr + arr.T) / 2.0
        try:
            np.linalg.cholesky(sym)
        except np.linalg.LinAlgError:
            raise NotSpd("matrix is not positive definite") from None
        self.entries = sym

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, k: int) -> "SpdMatrix":
        return cls(np.eye(k))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"SpdMatrix(dim={self.dim})"


@dataclass(frozen=True)
class PsdSqrtResult:
    """Symmetric PSD square root plus the number of clamped eigenvalues."""

    root: np.ndarray
    clamped_count: int


def _as_square_symmetric(m, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Validate and symmetrize a square symmetric array (ValueError on misuse)."""
    arr = m.entries if isinstance(m, SpdMatrix) else np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    scale = float(np.abs(arr).max())
    if float(np.abs(arr - arr.T).max()) > rtol * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    return (arr + arr.T) / 2.0


def spd_inverse(m: SpdMatrix) -> SpdMatrix:
    """Invert an SPD matrix via its Cholesky factor.

    Raises
    ------
    NotSpd
        If the factorization breaks down (numerically singular input).
    """
    if not isinstance(m, SpdMatrix):
        m = SpdMatrix(m)
    try:
        chol, low = sla.cho_factor(m.entries, lower=True, check_finite=False)
        inv = sla.cho_solve((chol, low), np.eye(m.dim), check_finite=False)
    except sla.LinAlgError as exc:
        raise NotSpd(f"SPD inversion failed: {exc}") from None
    return SpdMatrix((inv + inv.T) / 2.0)


def spd_inv_sqrt(m: SpdMatrix) -> SpdMatrix:
    """Symmetric inverse square root of an SPD matrix.

    The result ``R`` satisfies ``R @ R == spd_inverse(m)`` up to rounding.

    Raises
    ------
    NotSpd
        If an eigenvalue is nonpositive or the matrix is numerically
        singular (smallest eigenvalue below ``SINGULAR_RTOL`` times the
        largest).
    """
    if not isinstance(m, SpdMatrix):
        m = SpdMatrix(m)
    eigvals, eigvecs = np.linalg.eigh(m.entries)
    if eigvals[-1] <= 0.0 or eigvals[0] <= SINGULAR_RTOL * eigvals[-1]:
        raise NotSpd("matrix is numerically singular or indefinite "
                     f"(eigenvalue range [{eigvals[0]:.3e}, {eigvals[-1]:.3e}])")
    inv_root = (eigvecs / np.sqrt(eigvals)) @ eigvecs.T
    return SpdMatrix((inv_root + inv_root.T) / 2.0)


def psd_sqrt(m, clamp_rtol: float = PSD_CLAMP_RTOL) -> PsdSqrtResult:
    """Symmetric square root of a (numerically) PSD matrix.

    Eigenvalues in ``[-clamp_rtol * max|eigenvalue|, 0)`` are treated as
    rounding noise, clamped to zero, and counted.

    Raises
    ------
    IndefiniteMatrix
        If an eigenvalue falls below the clamp window: the input is
        genuinely indefinite, which signals an upstream math bug since
        every matrix routed here is PSD by construction.
    """
    sym = _as_square_symmetric(m)
    eigvals, eigvecs = np.linalg.eigh(sym)
    lam_scale = float(np.abs(eigvals).max())
    floor = -clamp_rtol * lam_scale
    if eigvals[0] < floor:
        raise IndefiniteMatrix(
            f"eigenvalue {eigvals[0]:.6e} is below the clamp window "
            f"{floor:.6e} (largest magnitude {lam_scale:.6e})")
    negative = eigvals < 0.0
    clamped = int(np.count_nonzero(negative))
    eigvals = np.where(negative, 0.0, eigvals)
    root = (eigvecs * np.sqrt(eigvals)) @ eigvecs.T
    return PsdSqrtResult(root=(root + root.T) / 2.0, clamped_count=clamped)
