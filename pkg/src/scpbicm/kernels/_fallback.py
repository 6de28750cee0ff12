"""Pure-NumPy implementations of the hot kernels.

Semantics match ``scpbicm.kernels._core`` (the Cython build); this module
is selected at import time when the extension is unavailable or when
``SCPBICM_FORCE_PYTHON=1``.
"""

from __future__ import annotations

import numpy as np

_ATANH_LIM = 1.0 - 1e-15


def bp_decode(llr, chk_indptr, chk_evar, var_indptr, var_eids,
              max_iter, clamp, early_stop):
    """Flooding sum-product decode over the edge lists of a sparse H.

    Returns ``(posterior, iterations, converged)``; the caller derives
    extrinsic LLRs and hard decisions.  Check updates run in the tanh
    domain with the product magnitude clipped before atanh.
    """
    llr = np.asarray(llr, dtype=np.float64)
    n_chk = len(chk_indptr) - 1
    r = np.zeros(len(chk_evar))
    posterior = llr.copy()
    converged = False
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        q = np.clip(posterior[chk_evar] - r, -clamp, clamp)
        t = np.tanh(0.5 * q)
        sign = np.where(t >= 0, 1.0, -1.0)
        absa = np.abs(t)
        zero = absa == 0.0
        lg = np.zeros_like(absa)
        np.log(absa, out=lg, where=~zero)
        seg = chk_indptr[:-1]
        n_zero = np.add.reduceat(zero.astype(np.int64), seg)
        slog = np.add.reduceat(np.where(zero, 0.0, lg), seg)
        sprod = np.multiply.reduceat(np.where(zero, 1.0, sign), seg)
        cid = np.repeat(np.arange(n_chk), np.diff(chk_indptr))
        others_zero = n_zero[cid] - zero
        mag = np.where(others_zero > 0, 0.0, np.exp(slog[cid] - lg))
        sgn = sprod[cid] * sign
        prod = np.clip(sgn * mag, -_ATANH_LIM, _ATANH_LIM)
        r = 2.0 * np.arctanh(prod)
        posterior = llr + np.add.reduceat(r[var_eids], var_indptr[:-1])
        if early_stop:
            hard = (posterior < 0).astype(np.uint8)
            syn = np.bitwise_xor.reduceat(hard[chk_evar], seg)
            if not syn.any():
                converged = True
                break
    return posterior, iterations, converged


def check_syndrome(hard, chk_indptr, chk_evar):
    """Per-check parity of the hard decisions (0 = satisfied)."""
    hard = np.asarray(hard, dtype=np.uint8)
    return np.bitwise_xor.reduceat(hard[chk_evar], chk_indptr[:-1])


def maxlog_demap(y_re, y_im, z_re, z_im, n_bits, apriori, inv_two_sigma2):
    """Max-log demapping with a-priori LLRs, excluding each bit's own prior.

    ``z_re/z_im`` are the constellation coordinates indexed by *label*
    (already permuted by the mapper); bit k of label ``l`` is the k-th
    most significant of its ``n_bits``-bit representation.  Returns the
    extrinsic LLR array with the same shape as ``apriori``.
    """
    y_re = np.asarray(y_re, dtype=np.float64)
    y_im = np.asarray(y_im, dtype=np.float64)
    la = np.asarray(apriori, dtype=np.float64)
    n_labels = len(z_re)
    labels = np.arange(n_labels)
    bits = ((labels[:, None] >> (n_bits - 1 - np.arange(n_bits))) & 1).astype(np.float64)
    d2 = (y_re[:, None] - z_re) ** 2 + (y_im[:, None] - z_im) ** 2
    metric = -d2 * inv_two_sigma2 - la @ bits.T
    out = np.empty_like(la)
    for k in range(n_bits):
        mask1 = bits[:, k] == 1.0
        max0 = metric[:, ~mask1].max(axis=1)
        max1 = metric[:, mask1].max(axis=1)
        out[:, k] = max0 - max1 - la[:, k]
    return out
