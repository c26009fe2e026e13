"""Reference implementations used only by the tests.

Each oracle is deliberately naive and shares no code with the package.
"""

import math

import numpy as np


def jacobi_eigenvalues(mat, tol=1e-14, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations."""
    a = np.array(mat, dtype=np.float64, copy=True)
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.triu(a, 1) ** 2)))
        if off <= tol * max(1.0, float(np.max(np.abs(np.diag(a))))):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
    return np.sort(np.diag(a))


def jacobi_min_eigenvalue(mat):
    return float(jacobi_eigenvalues(mat)[0])


def normal_cdf_quadrature(x, panels=20000):
    """Phi(x) by composite Simpson integration of the density from 0 to |x|."""
    if x == 0.0:
        return 0.5
    h = abs(x) / panels
    s = 0.0
    for k in range(panels + 1):
        w = 1 if k in (0, panels) else (4 if k % 2 else 2)
        t = k * h
        s += w * math.exp(-0.5 * t * t)
    half = s * h / 3.0 / math.sqrt(2.0 * math.pi)
    return 0.5 + math.copysign(half, x)


def normal_cdf_erfc(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def kl_two_point(p, q):
    """KL divergence by summing over the two outcomes {default, survive}."""
    total = 0.0
    for a, b in ((p, q), (1.0 - p, 1.0 - q)):
        if a > 0.0:
            total += a * math.log(a / b)
    return total


def jeffreys_two_point(p, q):
    return kl_two_point(p, q) + kl_two_point(q, p)


def gaussian_jeffreys_trapezoid(mu1, var1, mu2, var2, points=200001):
    """Jeffreys divergence of two normals by a wide trapezoid rule on the real line."""
    sd = math.sqrt(max(var1, var2))
    lo = min(mu1, mu2) - 40.0 * sd
    hi = max(mu1, mu2) + 40.0 * sd
    x = np.linspace(lo, hi, points)
    l1 = -0.5 * np.log(2 * np.pi * var1) - (x - mu1) ** 2 / (2 * var1)
    l2 = -0.5 * np.log(2 * np.pi * var2) - (x - mu2) ** 2 / (2 * var2)
    return float(np.trapezoid((np.exp(l1) - np.exp(l2)) * (l1 - l2), x))


def welch_by_hand(a, b):
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    na, nb = len(a), len(b)
    ma, mb = sum(a) / na, sum(b) / nb
    va = sum((v - ma) ** 2 for v in a) / (na - 1)
    vb = sum((v - mb) ** 2 for v in b) / (nb - 1)
    se2 = va / na + vb / nb
    t = (ma - mb) / math.sqrt(se2)
    dof = se2 ** 2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    return t, dof
