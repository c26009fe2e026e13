"""Monte Carlo grid over market size, leverage and correlation regime.

Each replication draws a fresh correlation matrix, builds the loadings,
computes both default probabilities for every firm and averages the per-firm
Jeffreys divergence. Replications get their own random stream derived from
``(master_seed, n, leverage index, regime, replication)``, so results do not
depend on how the work is split across processes.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import corrmat, dynamics
from .config import DivergenceLevel, ExperimentConfig, FirmAggregation
from .corrmat import Regime
from .divergence import jeffreys_bernoulli_array
from .errors import CreditDivergenceError
from .stats import SampleSummary, WelchResult, summarize, welch_test

REGIME_CODES = {Regime.LOW: 0, Regime.HIGH: 1}

# Published grid averages (mean, bracketed dispersion) used only as
# calibration targets.
CALIBRATION_TARGETS = {
    (10, 0.1, Regime.LOW): (0.3400, 0.1268),
    (10, 0.5, Regime.LOW): (0.1504, 0.0567),
    (10, 1.0, Regime.LOW): (0.0980, 0.0364),
    (10, 1.5, Regime.LOW): (0.0710, 0.0275),
    (10, 2.0, Regime.LOW): (0.0575, 0.0215),
    (50, 0.1, Regime.LOW): (0.5834, 0.0813),
    (50, 0.5, Regime.LOW): (0.2636, 0.0382),
    (50, 1.0, Regime.LOW): (0.1684, 0.0246),
    (50, 1.5, Regime.LOW): (0.1266, 0.0186),
    (50, 2.0, Regime.LOW): (0.1018, 0.0147),
    (100, 0.1, Regime.LOW): (0.6683, 0.0658),
    (100, 0.5, Regime.LOW): (0.3046, 0.0308),
    (100, 1.0, Regime.LOW): (0.1954, 0.0201),
    (100, 1.5, Regime.LOW): (0.1475, 0.0140),
    (100, 2.0, Regime.LOW): (0.1185, 0.0119),
    (1000, 0.1, Regime.LOW): (0.7926, 0.0241),
    (1000, 0.5, Regime.LOW): (0.3610, 0.0115),
    (1000, 1.0, Regime.LOW): (0.2328, 0.0074),
    (1000, 1.5, Regime.LOW): (0.1772, 0.0056),
    (1000, 2.0, Regime.LOW): (0.1425, 0.0040),
    (10, 0.1, Regime.HIGH): (0.5669, 0.1982),
    (10, 0.5, Regime.HIGH): (0.2618, 0.0931),
    (10, 1.0, Regime.HIGH): (0.1651, 0.0608),
    (10, 1.5, Regime.HIGH): (0.1240, 0.0448),
    (10, 2.0, Regime.HIGH): (0.0992, 0.0365),
    (50, 0.1, Regime.HIGH): (0.7722, 0.1081),
    (50, 0.5, Regime.HIGH): (0.3498, 0.0488),
    (50, 1.0, Regime.HIGH): (0.2243, 0.0318),
    (50, 1.5, Regime.HIGH): (0.1700, 0.0239),
    (50, 2.0, Regime.HIGH): (0.1377, 0.0192),
    (100, 0.1, Regime.HIGH): (0.7952, 0.0763),
    (100, 0.5, Regime.HIGH): (0.3607, 0.0358),
    (100, 1.0, Regime.HIGH): (0.2330, 0.0229),
    (100, 1.5, Regime.HIGH): (0.1764, 0.0172),
    (100, 2.0, Regime.HIGH): (0.1415, 0.0134),
    (1000, 0.1, Regime.HIGH): (0.8201, 0.0248),
    (1000, 0.5, Regime.HIGH): (0.3751, 0.0118),
    (1000, 1.0, Regime.HIGH): (0.2425, 0.0073),
    (1000, 1.5, Regime.HIGH): (0.1833, 0.0056),
    (1000, 2.0, Regime.HIGH): (0.1547, 0.0052),
}


class CellError(CreditDivergenceError, RuntimeError):
    """A replication failed; carries the grid coordinates."""

    def __init__(self, message, n, leverage, regime, rep):
        super().__init__(message)
        self.n = n
        self.leverage = leverage
        self.regime = regime
        self.rep = rep


@dataclass(frozen=True, eq=False)
class DivergenceCell:
    n: int
    leverage: float
    regime: Regime
    summary: SampleSummary
    raw: np.ndarray | None = None
    clamped: int = 0


@dataclass(frozen=True)
class RegimeComparison:
    n: int
    leverage: float
    welch: WelchResult


@dataclass
class GridResult:
    config: ExperimentConfig
    cells: list = field(default_factory=list)
    comparisons: list = field(default_factory=list)

    def cell(self, n, leverage, regime) -> DivergenceCell:
        regime = Regime.parse(regime)
        for c in self.cells:
            if c.n == n and c.leverage == float(leverage) and c.regime is regime:
                return c
        raise KeyError((n, leverage, regime))

    def comparison(self, n, leverage) -> RegimeComparison:
        for c in self.comparisons:
            if c.n == n and c.leverage == float(leverage):
                return c
        raise KeyError((n, leverage))


def substream(master_seed: int, n: int, leverage_index: int, regime, rep: int) -> np.random.Generator:
    """Independent generator for one replication."""
    code = REGIME_CODES[Regime.parse(regime)]
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(n, leverage_index, code, rep))
    return np.random.Generator(np.random.PCG64(seq))


def _divergences(n, leverage, regime, config: ExperimentConfig, rng, matrix_fn=None):
    # per-firm divergence vector plus the number of clamped probabilities
    if matrix_fn is not None:
        corr = matrix_fn(n)
        if not isinstance(corr, corrmat.CorrelationMatrix):
            corr = corrmat.CorrelationMatrix(corr)
    else:
        corr = corrmat.generate_correlation_matrix(
            n, config.band(regime), rng, noise_dim=config.noise_dim
        )
    sigma = config.sigma_base(regime)
    loads = dynamics.build_loadings(corr, sigma, config.loading_mode)
    rates = dynamics.variance_rates(loads)
    if config.divergence_level is DivergenceLevel.BERNOULLI:
        p_single, p_multi = dynamics.default_probabilities(
            leverage, config.mu, sigma, rates, config.horizon
        )
        return jeffreys_bernoulli_array(p_single, p_multi)
    # density level: log-values are N((mu - r/2) T, r T) under each model
    t = config.horizon
    var_s = sigma * sigma * t
    var_m = rates * t
    d2 = (0.5 * (rates - sigma * sigma) * t) ** 2
    j = (var_s + d2) / (2.0 * var_m) + (var_m + d2) / (2.0 * var_s) - 1.0
    return np.maximum(j, 0.0), 0


def _aggregate(values: np.ndarray, config: ExperimentConfig) -> float:
    if config.firm_aggregation is FirmAggregation.FIRST:
        return float(values[0])
    return float(np.mean(values))


def run_replication(n, leverage, regime, config: ExperimentConfig, rng, matrix_fn=None) -> float:
    """One Jeffreys divergence value for a freshly simulated market.

    ``matrix_fn(n)``, when given, replaces the random correlation matrix.
    """
    values, _ = _divergences(n, leverage, Regime.parse(regime), config, rng, matrix_fn)
    return _aggregate(values, config)


def _run_chunk(args):
    n, lev_idx, regime, start, stop, config = args
    leverage = config.leverages[lev_idx]
    out = np.empty(stop - start)
    clamped = 0
    for k, rep in enumerate(range(start, stop)):
        rng = substream(config.master_seed, n, lev_idx, regime, rep)
        try:
            values, c = _divergences(n, leverage, regime, config, rng)
        except CreditDivergenceError as exc:
            raise CellError(
                f"cell n={n} leverage={leverage} regime={regime.value} replication {rep}: {exc}",
                n, leverage, regime, rep,
            ) from exc
        out[k] = _aggregate(values, config)
        clamped += c
    return out, clamped


def _chunks(n, lev_idx, regime, config, size):
    return [
        (n, lev_idx, regime, s, min(config.reps, s + size), config)
        for s in range(0, config.reps, size)
    ]


def _chunk_size(config: ExperimentConfig, workers: int, n_cells: int) -> int:
    if workers <= 1:
        return config.reps
    per_cell = max(1, math.ceil(4 * workers / max(1, n_cells)))
    return max(25, math.ceil(config.reps / per_cell))


def _execute(tasks, workers):
    if workers <= 1:
        return [_run_chunk(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_chunk, tasks))


def _assemble(n, leverage, regime, parts, keep_raw=True) -> DivergenceCell:
    raw = np.concatenate([p[0] for p in parts])
    clamped = sum(p[1] for p in parts)
    return DivergenceCell(
        n=n,
        leverage=leverage,
        regime=regime,
        summary=summarize(raw),
        raw=raw if keep_raw else None,
        clamped=clamped,
    )


def run_cell(n, leverage, regime, config: ExperimentConfig, workers: int = 1) -> DivergenceCell:
    regime = Regime.parse(regime)
    lev_idx = config.leverage_index(leverage)
    tasks = _chunks(n, lev_idx, regime, config, _chunk_size(config, workers, 1))
    return _assemble(n, config.leverages[lev_idx], regime, _execute(tasks, workers))


def run_grid(config: ExperimentConfig, workers: int = 1, compare: bool = True) -> GridResult:
    """Every (n, leverage, regime) cell plus Welch comparisons between regimes.

    The comparison tests low against high, so a negative ``t`` means the
    high-correlation divergence is larger.
    """
    coords = [
        (n, lev_idx, regime)
        for n in config.market_sizes
        for lev_idx in range(len(config.leverages))
        for regime in config.regimes
    ]
    size = _chunk_size(config, workers, len(coords))
    tasks, owners = [], []
    for coord in coords:
        chunk = _chunks(*coord, config, size)
        tasks.extend(chunk)
        owners.extend([coord] * len(chunk))
    results = _execute(tasks, workers)
    grouped = {}
    for coord, part in zip(owners, results):
        grouped.setdefault(coord, []).append(part)
    out = GridResult(config=config)
    for coord in coords:
        n, lev_idx, regime = coord
        out.cells.append(_assemble(n, config.leverages[lev_idx], regime, grouped[coord]))
    if compare and set(config.regimes) == {Regime.LOW, Regime.HIGH}:
        for n in config.market_sizes:
            for leverage in config.leverages:
                low = out.cell(n, leverage, Regime.LOW)
                high = out.cell(n, leverage, Regime.HIGH)
                out.comparisons.append(RegimeComparison(n, leverage, welch_test(low.raw, high.raw)))
    return out


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))


def _fmt(x) -> str:
    return repr(float(x))


def write_table1(path, result: GridResult):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "leverage", "regime", "mean_J", "se_J", "reps"])
        for c in result.cells:
            w.writerow([c.n, _fmt(c.leverage), c.regime.value, _fmt(c.summary.mean), _fmt(c.summary.se), c.summary.n])


def write_table2(path, result: GridResult):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "leverage", "t", "dof", "p_value"])
        for c in result.comparisons:
            w.writerow([c.n, _fmt(c.leverage), _fmt(c.welch.t_stat), _fmt(c.welch.dof), _fmt(c.welch.p_value)])


def write_figure1(path, result: GridResult):
    """Long format: one row per (n, regime, leverage), sorted for plotting."""
    cells = sorted(result.cells, key=lambda c: (c.n, REGIME_CODES[c.regime], c.leverage))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "regime", "leverage", "mean_J", "se_J"])
        for c in cells:
            w.writerow([c.n, c.regime.value, _fmt(c.leverage), _fmt(c.summary.mean), _fmt(c.summary.se)])


def calibration_report(result: GridResult):
    """Achieved means next to the calibration targets for the cells both share.

    Returns tuples ``(n, leverage, regime, achieved, target, relative_gap)``.
    """
    rows = []
    for c in result.cells:
        target = CALIBRATION_TARGETS.get((c.n, c.leverage, c.regime))
        if target is None:
            continue
        gap = (c.summary.mean - target[0]) / target[0]
        rows.append((c.n, c.leverage, c.regime, c.summary.mean, target[0], gap))
    return rows
