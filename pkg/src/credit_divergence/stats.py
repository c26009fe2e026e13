"""Special functions and two-sample tests used by the model and the harness.

Everything here is implemented in-repo so that results do not depend on the
installed scipy version.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateSampleError, InvalidArgumentError

P_VALUE_DISPLAY_FLOOR = 2.2e-16

_BETACF_EPS = 1e-16
_BETACF_FPMIN = 1e-300
_BETACF_MAXIT = 20000
_LN_SQRT_PI = 0.5 * math.log(math.pi)


@dataclass(frozen=True)
class WelchResult:
    t_stat: float
    dof: float
    p_value: float


@dataclass(frozen=True)
class SampleSummary:
    n: int
    mean: float
    sd: float
    se: float


def normal_cdf(x):
    """Standard normal CDF, absolute error below 1e-15.

    Accepts a scalar or an array and returns the same kind.
    """
    if np.ndim(x) == 0:
        return float(kernels.norm_cdf(np.array([x], dtype=np.float64))[0])
    return kernels.norm_cdf(np.asarray(x, dtype=np.float64))


def normal_pdf(x):
    return np.exp(-0.5 * np.square(x)) / math.sqrt(2.0 * math.pi)


def normal_quantile(p: float) -> float:
    """Inverse of :func:`normal_cdf` by safeguarded Newton iteration."""
    if not 0.0 < p < 1.0:
        if p == 0.0:
            return -math.inf
        if p == 1.0:
            return math.inf
        raise InvalidArgumentError(f"probability must lie in [0, 1], got {p}")
    if p == 0.5:
        return 0.0
    # work in the lower tail so the target keeps full relative precision
    lower = p < 0.5
    target = p if lower else 1.0 - p
    lo, hi = -40.0, 0.0
    x = -math.sqrt(-2.0 * math.log(target))
    x = min(max(x, lo), hi)
    for _ in range(100):
        f = normal_cdf(x) - target
        if f > 0:
            hi = x
        else:
            lo = x
        dens = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        step = f / dens if dens > 0 else math.inf
        nxt = x - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - x) <= 1e-15 * max(1.0, abs(x)):
            x = nxt
            break
        x = nxt
    return x if lower else -x


def _log_gamma_ratio_half(a: float) -> float:
    """ln Gamma(a + 1/2) - ln Gamma(a) without cancellation for large a."""
    if a < 20.0:
        return math.lgamma(a + 0.5) - math.lgamma(a)

    def corr(z):
        z2 = z * z
        return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * z2)) / z2) / z2) / z

    return a * math.log1p(0.5 / a) + 0.5 * math.log(a) - 0.5 + corr(a + 0.5) - corr(a)


def _log_beta(a: float, b: float) -> float:
    if b == 0.5:
        return _LN_SQRT_PI - _log_gamma_ratio_half(a)
    if a == 0.5:
        return _LN_SQRT_PI - _log_gamma_ratio_half(b)
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETACF_FPMIN:
        d = _BETACF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def regularized_beta(x: float, a: float, b: float, xc: float | None = None) -> float:
    """Regularized incomplete beta I_x(a, b).

    ``xc`` may carry 1 - x when the caller can form it without cancellation.
    """
    if a <= 0 or b <= 0:
        raise InvalidArgumentError("beta parameters must be positive")
    if xc is None:
        xc = 1.0 - x
    if x <= 0.0:
        return 0.0
    if xc <= 0.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log(xc) - _log_beta(a, b)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, xc) / b


def student_t_cdf(x: float, dof: float) -> float:
    """CDF of Student's t with ``dof`` (possibly fractional) degrees of freedom."""
    if not dof > 0:
        raise InvalidArgumentError(f"degrees of freedom must be positive, got {dof}")
    if math.isnan(x):
        return math.nan
    if x == 0.0:
        return 0.5
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    t2 = x * x
    denom = dof + t2
    # P(|T| > |x|) = I_{dof/(dof+x^2)}(dof/2, 1/2)
    tail = 0.5 * regularized_beta(dof / denom, 0.5 * dof, 0.5, xc=t2 / denom)
    return 1.0 - tail if x > 0 else tail


def summarize(sample) -> SampleSummary:
    arr = np.asarray(sample, dtype=np.float64).ravel()
    n = arr.size
    if n < 2:
        raise DegenerateSampleError(f"need at least 2 observations, got {n}")
    mean = float(arr.mean())
    sd = float(arr.std(ddof=1))
    return SampleSummary(n=n, mean=mean, sd=sd, se=sd / math.sqrt(n))


def welch_test(a, b) -> WelchResult:
    """Two-sided Welch unequal-variance t-test of equal means.

    Two constant samples with equal means give ``t = 0, p = 1`` by convention;
    constant samples with different means are rejected.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size < 2 or b.size < 2:
        raise DegenerateSampleError("each sample needs at least 2 observations")
    na, nb = a.size, b.size
    ma, mb = float(a.mean()), float(b.mean())
    va = float(a.var(ddof=1)) / na
    vb = float(b.var(ddof=1)) / nb
    se2 = va + vb
    if se2 == 0.0:
        if ma == mb:
            return WelchResult(t_stat=0.0, dof=float(na + nb - 2), p_value=1.0)
        raise DegenerateSampleError("both samples are constant with different means")
    t = (ma - mb) / math.sqrt(se2)
    # variance shares keep the dof formula free of under- and overflow
    wa, wb = va / se2, vb / se2
    dof = 1.0 / (wa * wa / (na - 1) + wb * wb / (nb - 1))
    p = 2.0 * student_t_cdf(-abs(t), dof)
    return WelchResult(t_stat=t, dof=dof, p_value=min(1.0, p))


def format_p_value(p: float) -> str:
    """Display form of a p-value, floored at 2.2e-16."""
    return f"{max(p, P_VALUE_DISPLAY_FLOOR):.2E}"
