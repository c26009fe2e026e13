"""Kullback-Leibler and Jeffreys divergences.

Two levels are provided: the two-point default/no-default distribution
(Bernoulli) and the log-normal terminal value density. The closed forms are
checked against :func:`jeffreys_quadrature`, which integrates
``(f1 - f2) * log(f1 / f2)`` on (0, inf) directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import kernels
from .errors import BoundaryError, DegenerateDistributionError, DivergenceOverflowError

PROB_FLOOR = 1e-15
OVERFLOW_GUARD = 1e6
UNDERFLOW_MASS = 1e-100
_LOG_MAX_FLOAT = math.log(np.finfo(np.float64).max)


@dataclass(frozen=True)
class DivergenceValue:
    j: float
    kl_forward: float
    kl_backward: float


def _check_prob(name, value):
    if not 0.0 <= value <= 1.0:
        raise BoundaryError(f"{name} must lie in [0, 1], got {value}")


def _log_ratio(d, b, log_a, log_b):
    """``ln((b + d) / b)``, via log1p when the ratio is near 1 to avoid cancellation."""
    if abs(d) <= 0.5 * b:
        return math.log1p(d / b)
    return log_a() - log_b()


def kl_bernoulli(p: float, q: float) -> float:
    """KL divergence of Bernoulli(q) from Bernoulli(p).

    Endpoints are only allowed when ``p == q`` (0 * ln 0 := 0).
    """
    _check_prob("p", p)
    _check_prob("q", q)
    if p == q:
        return 0.0
    if p in (0.0, 1.0) or q in (0.0, 1.0):
        raise BoundaryError(f"KL divergence is undefined or infinite at p={p}, q={q}")
    lr, lc = _log_ratios(p, q)
    return max(p * lr + (1.0 - p) * lc, 0.0)


def _log_ratios(p, q):
    """``ln(p/q)`` and ``ln((1-p)/(1-q))``."""
    lr = _log_ratio(p - q, q, lambda: math.log(p), lambda: math.log(q))
    lc = _log_ratio(q - p, 1.0 - q, lambda: math.log1p(-p), lambda: math.log1p(-q))
    return lr, lc


def jeffreys_bernoulli(p: float, q: float) -> DivergenceValue:
    """Jeffreys divergence ``KL(p||q) + KL(q||p)`` between two Bernoulli laws.

    ``j`` is evaluated as ``(p - q) * (ln(p/q) - ln((1-p)/(1-q)))``, which keeps
    full relative accuracy when ``p`` and ``q`` are close.
    """
    forward = kl_bernoulli(p, q)
    backward = kl_bernoulli(q, p)
    j = 0.0
    if p != q:
        lr, lc = _log_ratios(p, q)
        j = (p - q) * (lr - lc)
    return DivergenceValue(j=j, kl_forward=forward, kl_backward=backward)


def jeffreys_bernoulli_array(p, q, floor: float = PROB_FLOOR):
    """Elementwise Jeffreys divergence with probabilities clamped to [floor, 1 - floor].

    Returns ``(j, n_clamped)``; ``n_clamped`` counts input values that hit the
    clamp.
    """
    j, _, _, n_clamped = kernels.jeffreys_bernoulli(p, q, floor)
    return j, n_clamped


def jeffreys_normal(mu1: float, var1: float, mu2: float, var2: float) -> DivergenceValue:
    """Jeffreys divergence between N(mu1, var1) and N(mu2, var2).

    Divergences are invariant under ``x -> exp(x)``, so this is also the value
    for the log-normal densities with these log-moments.
    """
    if not (var1 > 0 and var2 > 0):
        raise DegenerateDistributionError(f"variances must be positive, got {var1}, {var2}")
    d2 = (mu1 - mu2) ** 2
    log_ratio = math.log(var2 / var1)
    forward = 0.5 * (log_ratio + (var1 + d2) / var2 - 1.0)
    backward = 0.5 * (-log_ratio + (var2 + d2) / var1 - 1.0)
    j = (var1 + d2) / (2.0 * var2) + (var2 + d2) / (2.0 * var1) - 1.0
    return DivergenceValue(j=max(j, 0.0), kl_forward=max(forward, 0.0), kl_backward=max(backward, 0.0))


@dataclass(frozen=True)
class LogNormal:
    """Log-normal density of ``exp(X)`` with ``X ~ N(mu, var)``."""

    mu: float
    var: float

    def __post_init__(self):
        if not self.var > 0:
            raise DegenerateDistributionError(f"variance must be positive, got {self.var}")

    @property
    def sd(self) -> float:
        return math.sqrt(self.var)

    def logpdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        with np.errstate(divide="ignore"):
            lx = np.log(x)
        return -lx - 0.5 * math.log(2 * math.pi * self.var) - (lx - self.mu) ** 2 / (2 * self.var)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    __call__ = pdf

    def log_breakpoints(self):
        return [self.mu + k * self.sd for k in (-40, -12, -6, -3, -1, 0, 1, 3, 6, 12, 40)]


def jeffreys_quadrature(f1, f2, breakpoints=(), epsabs: float = 1e-10) -> float:
    """Adaptive quadrature of ``(f1 - f2) * log(f1 / f2)`` over (0, inf).

    The integral is taken in ``y = ln x`` (``dx = e^y dy``) and split at
    ``breakpoints`` (given on the log scale). ``f1``/``f2`` are densities on
    (0, inf); objects with a ``logpdf`` method have their log-ratio computed
    in log space. Raises :class:`DivergenceOverflowError` when the integrand
    is infinite or the result exceeds the overflow guard.
    """
    log1 = getattr(f1, "logpdf", None)
    log2 = getattr(f2, "logpdf", None)

    def integrand(y):
        if y > _LOG_MAX_FLOAT:
            return 0.0  # x overflows; no density has mass there
        x = math.exp(y)
        if log1 is not None and log2 is not None:
            l1 = float(log1(x))
            l2 = float(log2(x))
            a, b = math.exp(l1), math.exp(l2)
            if a == 0.0 and b == 0.0:
                return 0.0
            return (a - b) * (l1 - l2) * x
        a = float(f1(x))
        b = float(f2(x))
        if a == b:
            return 0.0
        if a <= 0.0 or b <= 0.0:
            if max(a, b) * x < UNDERFLOW_MASS:
                return 0.0  # both densities are in the underflow region
            raise DivergenceOverflowError(f"log-ratio is infinite at x={x:.6g}")
        return (a - b) * (math.log(a) - math.log(b)) * x

    pts = sorted({float(p) for p in breakpoints if math.isfinite(p)})
    edges = [-math.inf] + pts + [math.inf]
    if len(edges) == 2:
        edges = [-math.inf, 0.0, math.inf]
    total = 0.0
    tol = epsabs / (len(edges) - 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, lo, hi, epsabs=tol, epsrel=1e-12, limit=400)
        total += val
        if not math.isfinite(total) or total > OVERFLOW_GUARD:
            raise DivergenceOverflowError(
                f"divergence exceeds the overflow guard ({OVERFLOW_GUARD:g})"
            )
    return max(total, 0.0)


def jeffreys_lognormal_quadrature(mu1: float, var1: float, mu2: float, var2: float) -> float:
    """Quadrature value for two log-normal densities, breakpoints chosen from their log-moments."""
    a = LogNormal(mu1, var1)
    b = LogNormal(mu2, var2)
    return jeffreys_quadrature(a, b, breakpoints=a.log_breakpoints() + b.log_breakpoints())
