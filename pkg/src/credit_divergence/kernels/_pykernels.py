"""Numpy implementations of the hot kernels.

Used when the compiled extension is unavailable or disabled. Every function
here has a twin in ``_ckernels.pyx`` with the same signature and results that
agree to rounding.
"""

import math

import numpy as np

SERIES_CUTOFF = 3.0
SERIES_TERMS = 45
CF_DEPTH = 80
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def norm_cdf(x):
    """Standard normal CDF of a float array.

    |x| <= 3 uses the positive-term series
    Phi(x) = 1/2 + phi(x) * sum_k x^(2k+1) / (2k+1)!!, and the tails use the
    Mills-ratio continued fraction so small probabilities keep full relative
    precision.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    ax = np.abs(x)
    pdf = np.exp(-0.5 * x * x) * _INV_SQRT_2PI

    small = ax <= SERIES_CUTOFF
    if np.any(small):
        xs = x[small]
        x2 = xs * xs
        term = xs.copy()
        total = xs.copy()
        for k in range(1, SERIES_TERMS):
            term = term * x2 / (2 * k + 1)
            total = total + term
        out[small] = 0.5 + pdf[small] * total

    big = ax > SERIES_CUTOFF
    if np.any(big):
        xb = ax[big]
        t = np.zeros_like(xb)
        for k in range(CF_DEPTH, 0, -1):
            t = k / (xb + t)
        tail = pdf[big] / (xb + t)
        out[big] = np.where(x[big] < 0, tail, 1.0 - tail)

    nan = np.isnan(x)
    if np.any(nan):
        out[nan] = np.nan
    return out


def jeffreys_bernoulli(p, q, floor):
    """Elementwise Jeffreys divergence between Bernoulli(p) and Bernoulli(q).

    Inputs are clamped to [floor, 1 - floor]. Returns ``(j, kl_pq, kl_qp,
    n_clamped)`` where ``n_clamped`` counts clamped input values.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    hi = 1.0 - floor
    n_clamped = int(np.count_nonzero((p < floor) | (p > hi)))
    n_clamped += int(np.count_nonzero((q < floor) | (q > hi)))
    p = np.clip(p, floor, hi)
    q = np.clip(q, floor, hi)
    # log1p of the relative difference when the ratio is near 1
    d = p - q
    cq = 1.0 - q
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = np.where(np.abs(d) <= 0.5 * q, np.log1p(d / q), np.log(p) - np.log(q))
        log_cratio = np.where(np.abs(d) <= 0.5 * cq, np.log1p(-d / cq), np.log1p(-p) - np.log1p(-q))
    kl_pq = np.maximum(p * log_ratio + (1.0 - p) * log_cratio, 0.0)
    kl_qp = np.maximum(-(q * log_ratio + (1.0 - q) * log_cratio), 0.0)
    # (p - q)(lr - lc) equals kl_pq + kl_qp without the cancellation inside each term
    return d * (log_ratio - log_cratio), kl_pq, kl_qp, n_clamped


def gram_noise(base, vectors, eps, signs):
    """Return diag(s) (B + eps * (V^T V - I)) diag(s) with the diagonal of B kept.

    ``vectors`` is (noise_dim, n) with unit columns. The upper triangle is
    computed once and mirrored so the result is exactly symmetric.
    """
    base = np.asarray(base, dtype=np.float64)
    vectors = np.asarray(vectors, dtype=np.float64)
    signs = np.asarray(signs, dtype=np.float64)
    gram = vectors.T @ vectors
    upper = np.triu(base + eps * gram, 1)
    upper *= np.outer(signs, signs)
    out = upper + upper.T
    np.fill_diagonal(out, np.diagonal(base))
    return out


def row_sumsq(mat):
    mat = np.asarray(mat, dtype=np.float64)
    return np.einsum("ij,ij->i", mat, mat)


def offdiag_abs_range(mat):
    """``(min, max)`` of the strictly-upper off-diagonal magnitudes; ``(inf, 0)`` below dimension 2."""
    mat = np.asarray(mat, dtype=np.float64)
    n = mat.shape[0]
    if n < 2:
        return np.inf, 0.0
    mag = np.abs(mat[np.triu_indices(n, 1)])
    return float(mag.min()), float(mag.max())
