# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Cython backend for the weight-sampler assembly stage.

Same two entry points and semantics as ``bayport._kernels._ref`` (which
documents the math); this version runs the per-draw loop in C with direct
LAPACK calls (``dposv`` for the conditional-scale solves, ``dsyev`` for the
clamped PSD roots).  Both backends consume identical pre-drawn randomness,
so results agree up to factorization rounding.
"""

import numpy as np

from libc.math cimport fabs, sqrt

from scipy.linalg.cython_lapack cimport dposv, dsyev

from ..errors import IndefiniteMatrix

#: Relative eigenvalue clamp, measured against the per-draw anchor.
CLAMP_RTOL = 1e-10

cdef double _CLAMP = 1e-10


cdef int _syev_lwork(int p) except -1:
    """Workspace size query for dsyev at dimension ``p``."""
    cdef char jobz = b'V'
    cdef char uplo = b'L'
    cdef int info = 0
    cdef int lwork = -1
    cdef double wkopt = 0.0
    cdef double dummy_a = 0.0
    cdef double dummy_w = 0.0
    dsyev(&jobz, &uplo, &p, &dummy_a, &p, &dummy_w, &wkopt, &lwork, &info)
    if info != 0:
        raise IndefiniteMatrix(f"eigensolver workspace query failed (info={info})")
    return <int>wkopt


cdef inline int _clamped_root_times_z(double* mat, double* w, double* work,
                                      int lwork, int p, double anchor,
                                      double* z, double* vtz,
                                      double* deficit) nogil:
    """Eigendecompose ``mat`` (Fortran p x p, overwritten), clamp, and
    store ``sqrtm(mat) @ z`` into ``z``.

    Returns 0 on success, 1 on LAPACK failure, 2 when an eigenvalue falls
    below ``-_CLAMP * anchor`` (the shortfall is written to ``deficit``).
    """
    cdef char jobz = b'V'
    cdef char uplo = b'L'
    cdef int info = 0
    cdef int r, c
    cdef double floor_ = -_CLAMP * anchor
    cdef double acc
    dsyev(&jobz, &uplo, &p, mat, &p, w, work, &lwork, &info)
    if info != 0:
        return 1
    if w[0] < floor_:
        deficit[0] = w[0] - floor_
        return 2
    for c in range(p):
        if w[c] < 0.0:
            w[c] = 0.0
        acc = 0.0
        for r in range(p):
            acc += mat[r + c * p] * z[r]
        vtz[c] = sqrt(w[c]) * acc
    for r in range(p):
        acc = 0.0
        for c in range(p):
            acc += mat[r + c * p] * vtz[c]
        z[r] = acc
    return 0


cdef inline void _raise_indefinite(int status, double deficit):
    if status == 1:
        raise IndefiniteMatrix("per-draw eigendecomposition did not converge")
    raise IndefiniteMatrix(
        "per-draw matrix is indefinite beyond rounding tolerance "
        f"(eigenvalue deficit {deficit:.3e})")


def basic_weight_draws(scale, mean, double precision, double rf, selector,
                       double weight_scale, mu, eta, z0):
    """Conditional-scale sampler assembly; see ``_ref.basic_weight_draws``."""
    scale_a = np.ascontiguousarray(scale, dtype=np.float64)
    mean_a = np.ascontiguousarray(mean, dtype=np.float64)
    sel_a = np.ascontiguousarray(selector, dtype=np.float64)
    mu_a = np.ascontiguousarray(mu, dtype=np.float64)
    eta_a = np.ascontiguousarray(eta, dtype=np.float64)
    z0_a = np.ascontiguousarray(z0, dtype=np.float64)

    cdef double[:, ::1] scale_v = scale_a
    cdef double[::1] mean_v = mean_a
    cdef double[:, ::1] sel_v = sel_a
    cdef double[:, ::1] mu_v = mu_a
    cdef double[::1] eta_v = eta_a
    cdef double[:, ::1] z0_v = z0_a

    cdef int B = <int>mu_a.shape[0]
    cdef int k = <int>scale_a.shape[0]
    cdef int p = <int>sel_a.shape[0]
    cdef int nrhs = p + 1

    out = np.empty((B, p), dtype=np.float64)
    cdef double[:, ::1] out_v = out

    cdef int lwork = _syev_lwork(p)
    cond_b = np.empty(k * k, dtype=np.float64)
    rhs_b = np.empty(k * nrhs, dtype=np.float64)
    lsl_b = np.empty(p * p, dtype=np.float64)
    lb_b = np.empty(p, dtype=np.float64)
    mat_b = np.empty(p * p, dtype=np.float64)
    w_b = np.empty(p, dtype=np.float64)
    vtz_b = np.empty(p, dtype=np.float64)
    z_b = np.empty(p, dtype=np.float64)
    dev_b = np.empty(k, dtype=np.float64)
    work_b = np.empty(lwork, dtype=np.float64)
    cdef double[::1] cond = cond_b
    cdef double[::1] rhs = rhs_b
    cdef double[::1] lsl = lsl_b
    cdef double[::1] lb = lb_b
    cdef double[::1] mat = mat_b
    cdef double[::1] w = w_b
    cdef double[::1] vtz = vtz_b
    cdef double[::1] z = z_b
    cdef double[::1] dev = dev_b
    cdef double[::1] work = work_b

    cdef char uplo = b'L'
    cdef int info, status
    cdef int m, i, j, r, c
    cdef double acc, phi, tr, lb_sq, anchor, se, sym, deficit
    deficit = 0.0

    for m in range(B):
        for i in range(k):
            dev[i] = mu_v[m, i] - mean_v[i]
        for c in range(k):
            for r in range(k):
                cond[r + c * k] = scale_v[r, c] + precision * dev[r] * dev[c]
        for j in range(p):
            for r in range(k):
                rhs[r + j * k] = sel_v[j, r]
        for r in range(k):
            rhs[r + p * k] = mu_v[m, r] - rf
        info = 0
        dposv(&uplo, &k, &nrhs, &cond[0], &k, &rhs[0], &k, &info)
        if info != 0:
            raise IndefiniteMatrix(
                f"conditional scale matrix is not positive definite "
                f"(draw {m}, dposv info={info})")
        # lsl = selector @ (A^-1 selector^T), symmetrized
        for i in range(p):
            for j in range(p):
                acc = 0.0
                for r in range(k):
                    acc += sel_v[i, r] * rhs[r + j * k]
                lsl[i + j * p] = acc
        for i in range(p):
            for j in range(i + 1, p):
                sym = 0.5 * (lsl[i + j * p] + lsl[j + i * p])
                lsl[i + j * p] = sym
                lsl[j + i * p] = sym
        phi = 0.0
        for r in range(k):
            phi += (mu_v[m, r] - rf) * rhs[r + p * k]
        for i in range(p):
            acc = 0.0
            for r in range(k):
                acc += sel_v[i, r] * rhs[r + p * k]
            lb[i] = acc
        tr = 0.0
        lb_sq = 0.0
        for i in range(p):
            tr += lsl[i + i * p]
            lb_sq += lb[i] * lb[i]
        for c in range(p):
            for r in range(p):
                mat[r + c * p] = phi * lsl[r + c * p] - lb[r] * lb[c]
        anchor = fabs(phi) * tr + lb_sq
        for r in range(p):
            z[r] = z0_v[m, r]
        status = _clamped_root_times_z(&mat[0], &w[0], &work[0], lwork, p,
                                       anchor, &z[0], &vtz[0], &deficit)
        if status != 0:
            _raise_indefinite(status, deficit)
        se = sqrt(eta_v[m])
        for r in range(p):
            out_v[m, r] = weight_scale * (eta_v[m] * lb[r] + se * z[r])
    return out


def fast_weight_draws(s_inv, s_inv_half, excess, double precision,
                      double t_df, selector, double weight_scale, eta, qf,
                      u, z0):
    """Sphere/F sampler assembly; see ``_ref.fast_weight_draws``."""
    s_inv_a = np.ascontiguousarray(s_inv, dtype=np.float64)
    s_inv_half_a = np.ascontiguousarray(s_inv_half, dtype=np.float64)
    excess_a = np.ascontiguousarray(excess, dtype=np.float64)
    sel_a = np.ascontiguousarray(selector, dtype=np.float64)
    eta_a = np.ascontiguousarray(eta, dtype=np.float64)
    qf_a = np.ascontiguousarray(qf, dtype=np.float64)
    u_a = np.ascontiguousarray(u, dtype=np.float64)
    z0_a = np.ascontiguousarray(z0, dtype=np.float64)

    a_vec = s_inv_a @ excess_a
    la_a = sel_a @ a_vec
    g0_a = sel_a @ s_inv_a @ sel_a.T
    g0_a = np.asfortranarray((g0_a + g0_a.T) / 2.0)
    h_a = np.ascontiguousarray(sel_a @ s_inv_half_a)
    smh_a = s_inv_half_a @ excess_a

    cdef double base_quad = float(excess_a @ a_vec)
    cdef double la_sq = float(la_a @ la_a)
    cdef double tr_g0 = float(np.trace(g0_a))
    cdef double sqrt_v = sqrt(precision)

    cdef double[::1] la = np.ascontiguousarray(la_a)
    cdef double[::1, :] g0 = g0_a
    cdef double[:, ::1] h = h_a
    cdef double[::1] smh = np.ascontiguousarray(smh_a)
    cdef double[::1] eta_v = eta_a
    cdef double[::1] qf_v = qf_a
    cdef double[:, ::1] u_v = u_a
    cdef double[:, ::1] z0_v = z0_a

    cdef int B = <int>eta_a.shape[0]
    cdef int k = <int>s_inv_a.shape[0]
    cdef int p = <int>sel_a.shape[0]

    out = np.empty((B, p), dtype=np.float64)
    cdef double[:, ::1] out_v = out

    cdef int lwork = _syev_lwork(p)
    lq_b = np.empty(p, dtype=np.float64)
    lzeta_b = np.empty(p, dtype=np.float64)
    mat_b = np.empty(p * p, dtype=np.float64)
    w_b = np.empty(p, dtype=np.float64)
    vtz_b = np.empty(p, dtype=np.float64)
    z_b = np.empty(p, dtype=np.float64)
    work_b = np.empty(lwork, dtype=np.float64)
    cdef double[::1] lq = lq_b
    cdef double[::1] lzeta = lzeta_b
    cdef double[::1] mat = mat_b
    cdef double[::1] w = w_b
    cdef double[::1] vtz = vtz_b
    cdef double[::1] z = z_b
    cdef double[::1] work = work_b

    cdef int m, i, r, c, status
    cdef double g, beta, sb, delta, coef, eps, lq_sq, anchor, se, acc, deficit
    deficit = 0.0

    for m in range(B):
        g = (<double>k / t_df) * qf_v[m]
        beta = g / (1.0 + g)
        sb = sqrt(g) / (1.0 + g)
        delta = 0.0
        for r in range(k):
            delta += u_v[m, r] * smh[r]
        for i in range(p):
            acc = 0.0
            for r in range(k):
                acc += h[i, r] * u_v[m, r]
            lq[i] = acc
        coef = sb / sqrt_v - beta * delta
        lq_sq = 0.0
        for i in range(p):
            lzeta[i] = la[i] + coef * lq[i]
            lq_sq += lq[i] * lq[i]
        eps = (base_quad + (2.0 / sqrt_v) * sb * delta
               + beta / precision - beta * delta * delta)
        for c in range(p):
            for r in range(p):
                mat[r + c * p] = (eps * (g0[r, c] - beta * lq[r] * lq[c])
                                  - lzeta[r] * lzeta[c])
        anchor = fabs(eps) * (tr_g0 + beta * lq_sq) + la_sq + coef * coef * lq_sq
        for r in range(p):
            z[r] = z0_v[m, r]
        status = _clamped_root_times_z(&mat[0], &w[0], &work[0], lwork, p,
                                       anchor, &z[0], &vtz[0], &deficit)
        if status != 0:
            _raise_indefinite(status, deficit)
        se = sqrt(eta_v[m])
        for r in range(p):
            out_v[m, r] = weight_scale * (eta_v[m] * lzeta[r] + se * z[r])
    return out
