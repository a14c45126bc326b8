"""Vectorized numpy kernels for the weight-sampler assembly stage.

This is the fallback backend; ``bayport._kernels._native`` (Cython)
implements the same two functions with identical signatures.  Both consume
identical pre-drawn randomness, so a batch differs across backends only by
factorization rounding.

Each draw assembles a ``p`` -vector from a per-draw symmetric PSD matrix
square root.  The matrices are PSD analytically but are computed as
differences of PSD terms, so tiny negative eigenvalues appear by
cancellation; they are clamped against a *pre-cancellation* magnitude
anchor (the sum of the magnitudes of the terms being subtracted), which
stays meaningful even when the result is numerically zero.  Eigenvalues
below ``-CLAMP_RTOL * anchor`` raise :class:`IndefiniteMatrix`.
"""

from __future__ import annotations

import numpy as np

from ..errors import IndefiniteMatrix

#: Relative eigenvalue clamp, measured against the per-draw anchor.
CLAMP_RTOL = 1e-10

# Draws are processed in fixed-size chunks: memory stays bounded and the
# result is independent of the chunk boundary.
_CHUNK = 16384


def _root_times_z(mats: np.ndarray, anchors: np.ndarray,
                  z: np.ndarray) -> np.ndarray:
    """Apply the clamped PSD square root of each (p, p) slice to a vector.

    ``mats`` is (m, p, p), ``anchors`` (m,), ``z`` (m, p); returns (m, p).
    """
    sym = (mats + np.swapaxes(mats, 1, 2)) / 2.0
    eigvals, eigvecs = np.linalg.eigh(sym)
    floor = -CLAMP_RTOL * anchors[:, None]
    if np.any(eigvals < floor):
        deficit = float((eigvals - floor).min())
        raise IndefiniteMatrix(
            "per-draw matrix is indefinite beyond rounding tolerance "
            f"(eigenvalue deficit {deficit:.3e})")
    eigvals = np.clip(eigvals, 0.0, None)
    # root @ z = V diag(sqrt(w)) V^T z without forming the root
    vtz = np.einsum("mij,mi->mj", eigvecs, z)
    return np.einsum("mij,mj->mi", eigvecs, np.sqrt(eigvals) * vtz)


def basic_weight_draws(scale: np.ndarray, mean: np.ndarray, precision: float,
                       rf: float, selector: np.ndarray, weight_scale: float,
                       mu: np.ndarray, eta: np.ndarray,
                       z0: np.ndarray) -> np.ndarray:
    """Assembly stage of the conditional-scale sampler.

    Per draw, with mean draw ``mu_b`` and conditional scale
    ``A = scale + precision * outer(mu_b - mean, mu_b - mean)``:
    solve ``A`` against the selector rows and the excess mean, form
    ``M = phi * (L A^-1 L^T) - outer(Lb, Lb)`` with ``b = A^-1 (mu_b - rf*1)``
    and ``phi = (mu_b - rf*1)' b``, then emit
    ``weight_scale * (eta_b * Lb + sqrt(eta_b) * sqrtm(M) @ z0_b)``.
    """
    B = mu.shape[0]
    k = scale.shape[0]
    p = selector.shape[0]
    sel_t = np.ascontiguousarray(selector.T)
    out = np.empty((B, p))
    for lo in range(0, B, _CHUNK):
        sl = slice(lo, min(lo + _CHUNK, B))
        m = out[sl].shape[0]
        mu_b = mu[sl]
        dev = mu_b - mean
        cond = scale[None, :, :] + precision * (dev[:, :, None] * dev[:, None, :])
        excess = mu_b - rf
        rhs = np.concatenate(
            [np.broadcast_to(sel_t, (m, k, p)), excess[:, :, None]], axis=2)
        sol = np.linalg.solve(cond, rhs)
        inv_proj = sol[:, :, :p]              # A^-1 L^T
        b = sol[:, :, p]                      # A^-1 (mu_b - rf*1)
        lsl = np.einsum("ik,mkp->mip", selector, inv_proj)
        lsl = (lsl + np.swapaxes(lsl, 1, 2)) / 2.0
        lb = b @ sel_t
        phi = np.einsum("mk,mk->m", excess, b)
        mats = phi[:, None, None] * lsl - lb[:, :, None] * lb[:, None, :]
        anchors = (np.abs(phi) * np.trace(lsl, axis1=1, axis2=2)
                   + np.einsum("mp,mp->m", lb, lb))
        rz = _root_times_z(mats, anchors, z0[sl])
        out[sl] = weight_scale * (eta[sl, None] * lb
                                  + np.sqrt(eta[sl])[:, None] * rz)
    return out


def fast_weight_draws(s_inv: np.ndarray, s_inv_half: np.ndarray,
                      excess: np.ndarray, precision: float, t_df: float,
                      selector: np.ndarray, weight_scale: float,
                      eta: np.ndarray, qf: np.ndarray, u: np.ndarray,
                      z0: np.ndarray) -> np.ndarray:
    """Assembly stage of the sphere/F sampler (no per-draw inversion).

    All k x k inverses are precomputed by the caller (``s_inv``,
    ``s_inv_half``); each draw only forms a rank-structured (p, p) matrix
    from the F draw ``qf_b`` and sphere point ``u_b`` and applies its
    clamped PSD root.
    """
    B = eta.shape[0]
    k = s_inv.shape[0]
    a = s_inv @ excess
    la = selector @ a
    g0 = selector @ s_inv @ selector.T
    g0 = (g0 + g0.T) / 2.0
    h = selector @ s_inv_half
    smh = s_inv_half @ excess
    base_quad = float(excess @ a)
    la_sq = float(la @ la)
    tr_g0 = float(np.trace(g0))
    sqrt_v = np.sqrt(precision)
    p = selector.shape[0]
    out = np.empty((B, p))
    for lo in range(0, B, _CHUNK):
        sl = slice(lo, min(lo + _CHUNK, B))
        g = (k / t_df) * qf[sl]
        beta = g / (1.0 + g)
        sb = np.sqrt(g) / (1.0 + g)
        u_b = u[sl]
        delta = u_b @ smh
        lq = u_b @ h.T
        coef = sb / sqrt_v - beta * delta
        lzeta = la[None, :] + coef[:, None] * lq
        eps = (base_quad + (2.0 / sqrt_v) * sb * delta
               + beta / precision - beta * delta * delta)
        mats = (eps[:, None, None]
                * (g0[None, :, :] - beta[:, None, None]
                   * (lq[:, :, None] * lq[:, None, :]))
                - lzeta[:, :, None] * lzeta[:, None, :])
        lq_sq = np.einsum("mp,mp->m", lq, lq)
        anchors = (np.abs(eps) * (tr_g0 + beta * lq_sq)
                   + la_sq + coef * coef * lq_sq)
        rz = _root_times_z(mats, anchors, z0[sl])
        out[sl] = weight_scale * (eta[sl, None] * lzeta
                                  + np.sqrt(eta[sl])[:, None] * rz)
    return out
