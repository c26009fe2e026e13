"""Correlated geometric Brownian motion market and default probabilities.

Firm ``i`` has log-value

    ln V_T = ln V_0 + (mu - sum_j s_ij^2 / 2) T + sqrt(T) * sum_j s_ij Z_j

with independent standard normal ``Z_j``. The single-factor model keeps only
the stand-alone volatility ``sigma_base``; the multi-factor model uses the
loadings ``s_ij`` built from a correlation matrix.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .corrmat import CorrelationMatrix, cholesky_factor
from .errors import DegenerateDistributionError, InvalidArgumentError
from .stats import normal_cdf


class LoadingMode(str, enum.Enum):
    DIRECT = "direct"
    CHOLESKY = "cholesky"

    @classmethod
    def parse(cls, value) -> "LoadingMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidArgumentError(f"unknown loading mode {value!r}") from None


@dataclass(frozen=True)
class FirmParams:
    mu: float
    sigma_base: float
    v0: float
    debt: float
    horizon: float

    def __post_init__(self):
        for name in ("sigma_base", "v0", "debt", "horizon"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive, got {getattr(self, name)}")

    @classmethod
    def from_leverage(cls, log_leverage: float, mu: float, sigma_base: float, horizon: float):
        """Firm with ``v0 = 1`` and ``debt = exp(log_leverage)``."""
        return cls(mu=mu, sigma_base=sigma_base, v0=1.0, debt=math.exp(log_leverage), horizon=horizon)

    @property
    def log_leverage(self) -> float:
        return math.log(self.debt / self.v0)


@dataclass(frozen=True, eq=False)
class LoadingMatrix:
    loadings: np.ndarray
    mode: LoadingMode
    source: CorrelationMatrix | None = None
    sigma_base: float | None = None

    @property
    def n_firms(self) -> int:
        return self.loadings.shape[0]

    @property
    def n_factors(self) -> int:
        return self.loadings.shape[1]


@dataclass(frozen=True)
class TerminalMoments:
    mean: float
    variance: float
    log_mean: float
    log_variance: float


@dataclass(frozen=True)
class DefaultProbPair:
    p_single: float
    p_multi: float


def build_loadings(corr: CorrelationMatrix, sigma_base: float, mode=LoadingMode.DIRECT) -> LoadingMatrix:
    """Factor loadings from a correlation matrix.

    ``direct`` uses row ``i`` of the correlation matrix scaled by
    ``sigma_base`` as firm ``i``'s loadings, so the total variance rate grows
    with the squared correlations. ``cholesky`` factors ``sigma_base^2 * S``,
    which reproduces the correlations while keeping every firm's variance at
    ``sigma_base^2`` (the null case where both models agree).
    """
    if not sigma_base > 0:
        raise InvalidArgumentError(f"sigma_base must be positive, got {sigma_base}")
    mode = LoadingMode.parse(mode)
    if mode is LoadingMode.DIRECT:
        loads = sigma_base * corr.entries
    else:
        loads = cholesky_factor(sigma_base * sigma_base * corr.entries)
    loads.setflags(write=False)
    return LoadingMatrix(loads, mode, corr, float(sigma_base))


def variance_rates(loadings: LoadingMatrix) -> np.ndarray:
    """``sum_j s_ij^2`` for every firm.

    For Cholesky loadings of a known source matrix the identity
    ``sum_j L_ij^2 = sigma_base^2 * S_ii`` is used, so the null case is exact
    rather than zero up to rounding.
    """
    if loadings.mode is LoadingMode.CHOLESKY and loadings.sigma_base is not None:
        return np.full(loadings.n_firms, loadings.sigma_base ** 2)
    return kernels.row_sumsq(loadings.loadings)


def effective_variance(loadings: LoadingMatrix, firm_index: int) -> float:
    if not 0 <= firm_index < loadings.n_firms:
        raise IndexError(f"firm index {firm_index} out of range for {loadings.n_firms} firms")
    row = loadings.loadings[firm_index]
    return float(row @ row)


def terminal_moments(firm: FirmParams, log_variance_rate: float) -> TerminalMoments:
    if log_variance_rate < 0:
        raise InvalidArgumentError("variance rate must be nonnegative")
    t = firm.horizon
    growth = math.exp(firm.mu * t)
    log_var = log_variance_rate * t
    return TerminalMoments(
        mean=firm.v0 * growth,
        variance=firm.v0 ** 2 * growth ** 2 * math.expm1(log_var),
        log_mean=math.log(firm.v0) + (firm.mu - 0.5 * log_variance_rate) * t,
        log_variance=log_var,
    )


def default_threshold_z(log_leverage, mu, rate, horizon):
    """Standardized default threshold ``(ln(D/V0) - (mu - rate/2) T) / sqrt(rate T)``."""
    rate = np.asarray(rate, dtype=np.float64)
    return (log_leverage - (mu - 0.5 * rate) * horizon) / np.sqrt(rate * horizon)


def default_probability(firm: FirmParams, log_variance_rate: float) -> float:
    """``P(V_T <= D)`` under a log-normal terminal value with the given variance rate.

    Pass ``sigma_base**2`` for the single-factor model and the firm's
    :func:`effective_variance` for the multi-factor one.
    """
    if not log_variance_rate > 0:
        raise DegenerateDistributionError(
            f"variance rate must be positive for a default probability, got {log_variance_rate}"
        )
    z = default_threshold_z(firm.log_leverage, firm.mu, log_variance_rate, firm.horizon)
    return normal_cdf(float(z))


def default_probabilities(log_leverage, mu, sigma_base, rates, horizon):
    """Vectorized single- and multi-factor default probabilities.

    Returns ``(p_single, p_multi)`` where ``p_multi`` has one entry per rate.
    """
    rates = np.asarray(rates, dtype=np.float64)
    if np.any(rates <= 0):
        raise DegenerateDistributionError("variance rates must be positive")
    p_single = normal_cdf(float(default_threshold_z(log_leverage, mu, sigma_base ** 2, horizon)))
    p_multi = kernels.norm_cdf(default_threshold_z(log_leverage, mu, rates, horizon))
    return p_single, p_multi


def default_prob_pair(firm: FirmParams, loadings: LoadingMatrix, firm_index: int) -> DefaultProbPair:
    return DefaultProbPair(
        p_single=default_probability(firm, firm.sigma_base ** 2),
        p_multi=default_probability(firm, effective_variance(loadings, firm_index)),
    )


def _check_market(firms, loadings: LoadingMatrix):
    if len(firms) != loadings.n_firms:
        raise InvalidArgumentError(
            f"{len(firms)} firms but loadings have {loadings.n_firms} rows"
        )
    horizons = {f.horizon for f in firms}
    if len(horizons) != 1:
        raise InvalidArgumentError("all firms must share one horizon")
    return horizons.pop()


def simulate_terminal_values(
    firms, loadings: LoadingMatrix, reps: int, rng: np.random.Generator, chunk: int = 100_000
) -> np.ndarray:
    """Exact draws of ``V_T``, shape ``(reps, n_firms)``.

    Each draw shares one vector of factor shocks ``sqrt(T) * Z`` across firms;
    there is no time discretization.
    """
    if reps < 1:
        raise InvalidArgumentError(f"reps must be positive, got {reps}")
    horizon = _check_market(firms, loadings)
    mu = np.array([f.mu for f in firms])
    v0 = np.array([f.v0 for f in firms])
    load = loadings.loadings
    drift = (mu - 0.5 * variance_rates(loadings)) * horizon
    scale = math.sqrt(horizon)
    out = np.empty((reps, len(firms)))
    for start in range(0, reps, chunk):
        stop = min(reps, start + chunk)
        shocks = rng.standard_normal((stop - start, loadings.n_factors)) * scale
        out[start:stop] = v0 * np.exp(drift + shocks @ load.T)
    return out


def mc_default_probability(
    firms, loadings: LoadingMatrix, debts, reps: int, rng: np.random.Generator
):
    """Monte Carlo default frequency per firm with its binomial standard error.

    Returns two arrays ``(estimate, stderr)``.
    """
    if reps < 100:
        raise InvalidArgumentError(f"need at least 100 replications, got {reps}")
    debts = np.asarray(debts, dtype=np.float64)
    if debts.shape != (len(firms),):
        raise InvalidArgumentError("one debt level per firm is required")
    values = simulate_terminal_values(firms, loadings, reps, rng)
    est = np.mean(values <= debts, axis=0)
    se = np.sqrt(est * (1.0 - est) / reps)
    return est, se
