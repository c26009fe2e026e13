import math

import numpy as np
import pytest

from credit_divergence import corrmat, harness
from credit_divergence.config import DivergenceLevel, ExperimentConfig, FirmAggregation
from credit_divergence.corrmat import Regime
from credit_divergence.divergence import jeffreys_normal

from oracles import jeffreys_two_point, normal_cdf_erfc


def small(**kw):
    base = dict(market_sizes=(10,), leverages=(0.1,), reps=20)
    base.update(kw)
    return ExperimentConfig(**base)


class TestSubstream:
    def test_deterministic(self):
        a = harness.substream(5, 10, 2, "high", 7).random(4)
        b = harness.substream(5, 10, 2, Regime.HIGH, 7).random(4)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("other", [(6, 10, 2, "high", 7), (5, 11, 2, "high", 7), (5, 10, 3, "high", 7),
                                       (5, 10, 2, "low", 7), (5, 10, 2, "high", 8)])
    def test_every_coordinate_matters(self, other):
        a = harness.substream(5, 10, 2, "high", 7).random(4)
        assert not np.array_equal(a, harness.substream(*other).random(4))


class TestReplication:
    def test_cholesky_null(self):
        cfg = small(loading_mode="cholesky")
        for seed in range(5):
            v = harness.run_replication(10, 0.5, "high", cfg, np.random.default_rng(seed))
            assert abs(v) <= 1e-12

    def test_identity_hook(self):
        cfg = small()
        v = harness.run_replication(6, 1.0, "high", cfg, np.random.default_rng(0), matrix_fn=np.eye)
        assert v == 0.0

    def test_two_firm_hand_trace(self):
        cfg = small(market_sizes=(2,))
        got = harness.run_replication(2, 0.1, "high", cfg, np.random.default_rng(99))
        rho = corrmat.generate_correlation_matrix(2, cfg.band("high"), np.random.default_rng(99)).entries[0, 1]
        s, t, mu, lev = cfg.sigma_base_high, cfg.horizon, cfg.mu, 0.1
        rate_multi = s * s * (1 + rho * rho)

        def p(rate):
            return normal_cdf_erfc((lev - (mu - rate / 2) * t) / math.sqrt(rate * t))

        want = jeffreys_two_point(p(s * s), p(rate_multi))
        assert got > 0
        assert got == pytest.approx(want, rel=1e-10)

    def test_first_firm_aggregation(self):
        rng_seed = 4
        c = small(firm_aggregation="first")
        m = small()
        first = harness.run_replication(10, 0.1, "low", c, np.random.default_rng(rng_seed))
        mean = harness.run_replication(10, 0.1, "low", m, np.random.default_rng(rng_seed))
        values, _ = harness._divergences(10, 0.1, Regime.LOW, m, np.random.default_rng(rng_seed))
        assert first == values[0] and mean == pytest.approx(values.mean())

    def test_density_level(self):
        cfg = small(divergence_level="density")
        got = harness.run_replication(4, 0.1, "low", cfg, np.random.default_rng(1))
        m = corrmat.generate_correlation_matrix(4, cfg.band("low"), np.random.default_rng(1)).entries
        s, t, mu = cfg.sigma_base_low, cfg.horizon, cfg.mu
        want = []
        for i in range(4):
            r = s * s * float(m[i] @ m[i])
            want.append(jeffreys_normal((mu - s * s / 2) * t, s * s * t, (mu - r / 2) * t, r * t).j)
        assert got == pytest.approx(np.mean(want), rel=1e-12)

    def test_density_independent_of_leverage(self):
        cfg = small(divergence_level=DivergenceLevel.DENSITY)
        a = harness.run_replication(5, 0.1, "high", cfg, np.random.default_rng(3))
        b = harness.run_replication(5, 2.0, "high", cfg, np.random.default_rng(3))
        assert a == b


class TestCell:
    def test_cholesky_cell(self):
        cell = harness.run_cell(10, 0.1, "low", small(reps=2, loading_mode="cholesky"))
        assert cell.summary.n == 2
        assert abs(cell.summary.mean) <= 1e-12 and cell.summary.se <= 1e-12

    def test_deterministic(self):
        cfg = small(reps=30)
        a = harness.run_cell(10, 0.1, "high", cfg)
        b = harness.run_cell(10, 0.1, "high", cfg)
        assert np.array_equal(a.raw, b.raw)
        assert a.summary == b.summary

    def test_workers_invariant(self):
        cfg = small(reps=60)
        a = harness.run_cell(10, 0.1, "high", cfg, workers=1)
        b = harness.run_cell(10, 0.1, "high", cfg, workers=3)
        assert np.array_equal(a.raw, b.raw)

    def test_replication_matches_substream(self):
        cfg = small(reps=5)
        cell = harness.run_cell(10, 0.1, "low", cfg)
        rng = harness.substream(cfg.master_seed, 10, 0, "low", 3)
        assert cell.raw[3] == harness.run_replication(10, 0.1, "low", cfg, rng)

    def test_unknown_leverage(self):
        with pytest.raises(ValueError):
            harness.run_cell(10, 0.3, "low", small())

    def test_nonnegative(self):
        cell = harness.run_cell(10, 0.1, "high", small(reps=40))
        assert np.all(cell.raw >= 0)

    def test_cell_error_names_coordinates(self):
        cfg = small(reps=3, band_high_min=1.0, band_high_max=1.0)
        with pytest.raises(harness.CellError) as info:
            harness.run_cell(10, 0.1, "high", cfg)
        err = info.value
        assert (err.n, err.leverage, err.regime, err.rep) == (10, 0.1, Regime.HIGH, 0)
        assert "n=10" in str(err)


class TestGrid:
    def test_counting(self):
        r = harness.run_grid(small(reps=5))
        assert len(r.cells) == 2 and len(r.comparisons) == 1

    def test_full_cross_product(self):
        cfg = small(market_sizes=(3, 5), leverages=(0.1, 1.0, 2.0), reps=4)
        r = harness.run_grid(cfg)
        assert len(r.cells) == 12 and len(r.comparisons) == 6
        assert {(c.n, c.leverage, c.regime) for c in r.cells} == {
            (n, lev, reg) for n in (3, 5) for lev in (0.1, 1.0, 2.0) for reg in Regime
        }

    def test_cholesky_grid_p_one(self):
        r = harness.run_grid(small(market_sizes=(4, 8), leverages=(0.1, 1.0), reps=5, loading_mode="cholesky"))
        assert all(c.welch.p_value == 1.0 for c in r.comparisons)

    def test_single_regime_no_comparison(self):
        r = harness.run_grid(small(reps=5, regimes=("high",)))
        assert len(r.cells) == 1 and r.comparisons == []

    def test_high_above_low(self):
        r = harness.run_grid(small(market_sizes=(10, 50), leverages=(0.1, 1.0), reps=40))
        for n in (10, 50):
            for lev in (0.1, 1.0):
                assert r.cell(n, lev, "high").summary.mean > r.cell(n, lev, "low").summary.mean
                assert r.comparison(n, lev).welch.t_stat < 0

    def test_lookup_missing(self):
        r = harness.run_grid(small(reps=3))
        with pytest.raises(KeyError):
            r.cell(11, 0.1, "low")
        with pytest.raises(KeyError):
            r.comparison(10, 0.2)

    def test_clamp_counter(self):
        # at N=100 in the high regime the multi-factor probability rounds to 1
        r = harness.run_grid(small(market_sizes=(100,), reps=3, regimes=("high",)))
        assert r.cells[0].clamped > 0
        lo = harness.run_grid(small(reps=3, regimes=("low",)))
        assert lo.cells[0].clamped == 0


class TestOutputs:
    @pytest.fixture(scope="class")
    @classmethod
    def result(cls):
        return harness.run_grid(small(market_sizes=(4, 6), leverages=(0.1, 2.0), reps=6))

    def test_table1(self, tmp_path, result):
        path = tmp_path / "t1.csv"
        harness.write_table1(path, result)
        lines = path.read_text().splitlines()
        assert lines[0] == "n,leverage,regime,mean_J,se_J,reps"
        assert len(lines) == 1 + 8
        row = lines[1].split(",")
        assert float(row[3]) == result.cells[0].summary.mean  # 17 digits round-trip

    def test_table2(self, tmp_path, result):
        path = tmp_path / "t2.csv"
        harness.write_table2(path, result)
        lines = path.read_text().splitlines()
        assert lines[0] == "n,leverage,t,dof,p_value"
        assert len(lines) == 1 + 4

    def test_figure1_sorted(self, tmp_path, result):
        path = tmp_path / "f1.csv"
        harness.write_figure1(path, result)
        rows = [r.split(",") for r in path.read_text().splitlines()[1:]]
        keys = [(int(r[0]), harness.REGIME_CODES[Regime(r[1])], float(r[2])) for r in rows]
        assert keys == sorted(keys)

    def test_calibration_report(self, result):
        assert harness.calibration_report(result) == []
        r = harness.run_grid(small(reps=3))
        rows = harness.calibration_report(r)
        assert len(rows) == 2
        for n, lev, reg, achieved, target, gap in rows:
            assert target == harness.CALIBRATION_TARGETS[(n, lev, reg)][0]
            assert gap == pytest.approx((achieved - target) / target)


def test_calibration_targets_table():
    # 4 market sizes x 5 leverages x 2 regimes; high above low in every published cell
    t = harness.CALIBRATION_TARGETS
    assert len(t) == 40
    for (n, lev, reg), (mean, disp) in t.items():
        if reg is Regime.LOW:
            assert t[(n, lev, Regime.HIGH)][0] > mean
    assert t[(10, 0.1, Regime.LOW)] == (0.3400, 0.1268)


def test_firm_aggregation_enum():
    assert small(firm_aggregation="FIRST").firm_aggregation is FirmAggregation.FIRST
