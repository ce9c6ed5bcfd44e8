import math
from dataclasses import replace

import numpy as np
import pytest

from frele.data_io import SineSumSpec, gen_ett_like, gen_sine_sum
from frele.diagnostics import (
    Experiment,
    SynthBiasConfig,
    ablation_configs,
    ablation_matrix,
    bias_profile,
    delta_sweep,
    frequency_trajectory,
    parse_grid,
    pruning_sweep,
    run_point,
    spectral_bias_report,
    synth_bias_run,
)
from frele.errors import ConfigError, NoData, NonIntegerFrequency
from frele.loss import FreLEConfig
from frele.spectral import band_partition, irfft_array, n_bins, rfft_array
from frele.timeseries import SplitSpec, Windows
from frele.trainer import TrainConfig


class TableModel:
    """Returns a fixed prediction per window, keyed by the window's first input value."""

    def __init__(self, preds):
        self.preds = preds

    def predict(self, inputs):
        return self.preds[inputs[:, 0, 0].astype(int)]


def indexed_windows(targets):
    n = targets.shape[0]
    inputs = np.broadcast_to(np.arange(n, dtype=float)[:, None, None], (n, 4, targets.shape[2])).copy()
    return Windows(inputs, targets, np.arange(n))


@pytest.fixture(scope="module")
def exp():
    series = gen_ett_like(900, seed=1)
    return Experiment.from_series(
        series,
        SplitSpec("fractional", (0.6, 0.2, 0.2)),
        lookback=48,
        horizon=24,
        stride=4,
        train_cfg=TrainConfig(epochs=3, batch_size=16, lr=0.01, seed=0),
    )


class TestBiasReport:
    def test_perfect(self, rng):
        t = rng.normal(size=(10, 24, 2))
        r = spectral_bias_report(TableModel(t), indexed_windows(t))
        assert r.as_row() == (0.0, 0.0, 0.0, 0.0)

    def test_low_pass_truth(self, rng):
        t = rng.normal(size=(10, 48, 2))
        B = n_bins(48)
        part = band_partition(B)
        F = rfft_array(t, axis=1)
        F[:, part.lf.stop :, :] = 0
        lp = irfft_array(F, 48, axis=1)
        r = spectral_bias_report(TableModel(lp), indexed_windows(t), part)
        assert r.lf_rmse < 1e-12
        assert r.mf_rmse > 0.1 and r.hf_rmse > 0.1

    def test_empty(self):
        with pytest.raises(NoData):
            spectral_bias_report(TableModel(None), Windows(np.zeros((0, 4, 1)), np.zeros((0, 8, 1))))


class TestTrajectory:
    def test_zero_and_exact(self):
        y = gen_sine_sum(SineSumSpec()).values[0]
        tr = frequency_trajectory([(0, np.zeros_like(y)), (5, y)], y, [8, 16, 24])
        np.testing.assert_allclose(tr.rel_error[0], 1.0)
        np.testing.assert_allclose(tr.rel_error[1], 0.0, atol=1e-12)
        assert tr.first_below(0.3) == [5, 5, 5]

    def test_non_integer(self):
        y = gen_sine_sum(SineSumSpec()).values[0]
        with pytest.raises(NonIntegerFrequency):
            frequency_trajectory([], y, [8.5])
        spec = SineSumSpec(n_points=100)
        with pytest.raises(NonIntegerFrequency):
            frequency_trajectory([], gen_sine_sum(spec).values[0], [spec.bin_of(1.0)])

    def test_synth_run_shape(self):
        cfg = SynthBiasConfig(hidden=16, iterations=40, snapshot_every=10)
        tr = synth_bias_run(SineSumSpec(), cfg, seed=0)
        assert tr.target_freqs == (8, 16, 24)
        assert tr.iterations == (0, 10, 20, 30, 40)
        assert np.all(np.isfinite(tr.rel_error)) and np.all(tr.rel_error >= 0)


class TestGrid:
    def test_eleven(self):
        g = parse_grid("0:1:0.1")
        assert len(g) == 11 and g[3] == 0.3 and g[-1] == 1.0

    def test_list(self):
        assert parse_grid("0,0.3,1") == [0.0, 0.3, 1.0]

    def test_bad(self):
        with pytest.raises(ConfigError):
            parse_grid("1:0:0.1")


class TestSweeps:
    def test_delta_zero_matches_plain_run(self, exp):
        sweep = delta_sweep(exp, [0.0], base_seed=3)
        plain, _, _ = run_point(exp, replace(exp.frele_cfg, delta=0.0), 3)
        assert sweep.points[0].mse == plain.mse and sweep.points[0].mae == plain.mae

    def test_points_reproducible_and_order_free(self, exp):
        fwd = delta_sweep(exp, [0.0, 0.5], base_seed=10)
        # point i uses base_seed + i, so running point 1 alone must agree
        alone = delta_sweep(exp, [0.5], base_seed=11)
        assert fwd.points[1] == alone.points[0]
        assert fwd.argmin in (0, 1)
        assert fwd.best_value == fwd.grid[fwd.argmin]

    def test_parallel_matches_serial(self, exp):
        a = delta_sweep(exp, [0.0, 0.3], base_seed=0, jobs=1)
        b = delta_sweep(exp, [0.0, 0.3], base_seed=0, jobs=2)
        assert a == b

    def test_grid_validation(self, exp):
        with pytest.raises(ConfigError):
            delta_sweep(exp, [1.5])
        with pytest.raises(ConfigError):
            pruning_sweep(exp, [])

    def test_full_retention_is_unpruned(self, exp):
        pr = pruning_sweep(exp, [1.0], base_seed=4)
        ref, _, _ = run_point(exp, exp.frele_cfg, 4)
        assert pr.points[0].mse == ref.mse

    def test_pruning_finite(self, exp):
        pr = pruning_sweep(exp, [0.5, 0.8], base_seed=4)
        assert all(math.isfinite(p.mse) for p in pr.points)


class TestAblation:
    def test_configs(self):
        cfgs = ablation_configs(FreLEConfig())
        assert list(cfgs) == ["EFR-IFR", "EFR", "EFR-AN"]
        assert cfgs["EFR-IFR"].implicit_enabled and not cfgs["EFR-IFR"].an_enabled
        assert not cfgs["EFR"].implicit_enabled and not cfgs["EFR"].an_enabled
        assert cfgs["EFR-AN"].an_enabled
        assert len({c.delta for c in cfgs.values()}) == 1

    def test_needs_frequency_term(self):
        with pytest.raises(ConfigError):
            ablation_configs(FreLEConfig(delta=0.0))

    def test_matrix(self, exp):
        table = ablation_matrix(exp, seed=2)
        assert list(table) == ["EFR-IFR", "EFR", "EFR-AN"]
        ref, _, _ = run_point(exp, ablation_configs(exp.frele_cfg)["EFR"], 2)
        assert table["EFR"] == {"mse": ref.mse, "mae": ref.mae}


def test_bias_profile(exp):
    profile, _, logs = bias_profile(exp, exp.frele_cfg, seed=0)
    assert len(profile.bands) == len(logs) == len(profile.metrics)
    assert all(set(m) == {"mse", "mae"} for m in profile.metrics)
