# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: flooding sum-product BP and max-log demapping.

Mirrors ``scpbicm.kernels._fallback``; keep semantics in lockstep.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atanh, tanh

cnp.import_array()

DEF ATANH_LIM = 0.999999999999999  # 1 - 1e-15


def bp_decode(double[::1] llr,
              int[::1] chk_indptr, int[::1] chk_evar,
              int[::1] var_indptr, int[::1] var_eids,
              int max_iter, double clamp, bint early_stop):
    """Flooding sum-product decode; returns (posterior, iterations, converged)."""
    cdef int n_var = var_indptr.shape[0] - 1
    cdef int n_chk = chk_indptr.shape[0] - 1
    cdef int n_edge = chk_evar.shape[0]

    post_arr = np.empty(n_var, dtype=np.float64)
    cdef double[::1] post = post_arr
    r_arr = np.zeros(n_edge, dtype=np.float64)
    cdef double[::1] r = r_arr
    cdef double[::1] t = np.empty(n_edge, dtype=np.float64)
    cdef double[::1] fwd = np.empty(n_edge, dtype=np.float64)

    cdef int it, c, v, e, s, eidx
    cdef int iterations = 0
    cdef bint converged = False
    cdef double q, acc, prod
    cdef int parity

    for v in range(n_var):
        post[v] = llr[v]

    for it in range(1, max_iter + 1):
        iterations = it
        # variable->check in tanh domain
        for e in range(n_edge):
            q = post[chk_evar[e]] - r[e]
            if q > clamp:
                q = clamp
            elif q < -clamp:
                q = -clamp
            t[e] = tanh(0.5 * q)
        # check->variable via prefix/suffix products
        for c in range(n_chk):
            s = chk_indptr[c]
            e = chk_indptr[c + 1]
            acc = 1.0
            for eidx in range(s, e):
                fwd[eidx] = acc
                acc *= t[eidx]
            acc = 1.0
            for eidx in range(e - 1, s - 1, -1):
                prod = fwd[eidx] * acc
                acc *= t[eidx]
                if prod > ATANH_LIM:
                    prod = ATANH_LIM
                elif prod < -ATANH_LIM:
                    prod = -ATANH_LIM
                r[eidx] = 2.0 * atanh(prod)
        # posterior
        for v in range(n_var):
            acc = llr[v]
            for eidx in range(var_indptr[v], var_indptr[v + 1]):
                acc += r[var_eids[eidx]]
            post[v] = acc
        if early_stop:
            converged = True
            for c in range(n_chk):
                parity = 0
                for eidx in range(chk_indptr[c], chk_indptr[c + 1]):
                    if post[chk_evar[eidx]] < 0:
                        parity ^= 1
                if parity:
                    converged = False
                    break
            if converged:
                break
    return post_arr, iterations, converged


def check_syndrome(cnp.uint8_t[::1] hard, int[::1] chk_indptr, int[::1] chk_evar):
    """Per-check parity of the hard decisions (0 = satisfied)."""
    cdef int n_chk = chk_indptr.shape[0] - 1
    out_arr = np.zeros(n_chk, dtype=np.uint8)
    cdef cnp.uint8_t[::1] out = out_arr
    cdef int c, eidx
    cdef int parity
    for c in range(n_chk):
        parity = 0
        for eidx in range(chk_indptr[c], chk_indptr[c + 1]):
            parity ^= hard[chk_evar[eidx]]
        out[c] = parity
    return out_arr


def maxlog_demap(double[::1] y_re, double[::1] y_im,
                 double[::1] z_re, double[::1] z_im,
                 int n_bits, double[:, ::1] apriori, double inv_two_sigma2):
    """Max-log demapping with a-priori LLRs, excluding each bit's own prior."""
    cdef int n_sym = y_re.shape[0]
    cdef int n_labels = z_re.shape[0]
    out_arr = np.empty((n_sym, n_bits), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] max0 = np.empty(n_bits, dtype=np.float64)
    cdef double[::1] max1 = np.empty(n_bits, dtype=np.float64)
    cdef int sidx, l, k
    cdef double dr, di, metric
    cdef double neg_inf = -np.inf
    for sidx in range(n_sym):
        for k in range(n_bits):
            max0[k] = neg_inf
            max1[k] = neg_inf
        for l in range(n_labels):
            dr = y_re[sidx] - z_re[l]
            di = y_im[sidx] - z_im[l]
            metric = -(dr * dr + di * di) * inv_two_sigma2
            for k in range(n_bits):
                if (l >> (n_bits - 1 - k)) & 1:
                    metric -= apriori[sidx, k]
            for k in range(n_bits):
                if (l >> (n_bits - 1 - k)) & 1:
                    if metric > max1[k]:
                        max1[k] = metric
                else:
                    if metric > max0[k]:
                        max0[k] = metric
        for k in range(n_bits):
            out[sidx, k] = max0[k] - max1[k] - apriori[sidx, k]
    return out_arr
