"""Spectral-bias measurements and the sweep experiments.

An :class:`Experiment` bundles standardized train/val/test windows with a
model recipe and training settings. Sweeps re-run it once per grid point,
seeding point ``i`` with ``base_seed + i``, so every point can be reproduced
on its own and the grid order does not matter.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, InvalidInput, NoData, NonIntegerFrequency
from .loss import FreLEConfig, frele_value_and_grad
from .models import ActivationKind, init_linear, init_mlp
from .rng import XorShift64Star
from .spectral import BandPartition, BandReport, band_partition, n_bins, rfft_array
from .timeseries import MultiSeries, SplitSpec, Windows, fit_apply_scaler, stack_windows, time_split
from .trainer import TrainConfig, band_report, evaluate, fit_curve, predict_windows, train

# --------------------------------------------------------------- bias reports


def spectral_bias_report(model, test_windows: Windows, partition: BandPartition | None = None) -> BandReport:
    if len(test_windows) == 0:
        raise NoData("no test windows")
    partition = partition or band_partition(n_bins(test_windows.horizon))
    return band_report(model, test_windows, partition)


@dataclass
class BiasProfile:
    bands: list[BandReport] = field(default_factory=list)
    metrics: list[dict] = field(default_factory=list)

    def append(self, report: BandReport, metrics: dict) -> None:
        self.bands.append(report)
        self.metrics.append(metrics)


# ----------------------------------------------------- per-frequency dynamics


@dataclass(frozen=True)
class FrequencyTrajectory:
    target_freqs: tuple[int, ...]
    iterations: tuple[int, ...]
    rel_error: np.ndarray  # [iterations, freqs]

    def first_below(self, threshold: float) -> list[int | None]:
        """First logged iteration at which each frequency's error drops below ``threshold``."""
        out = []
        for j in range(len(self.target_freqs)):
            hit = np.flatnonzero(self.rel_error[:, j] < threshold)
            out.append(int(self.iterations[hit[0]]) if hit.size else None)
        return out


def _as_bins(target_freqs) -> tuple[int, ...]:
    bins = []
    for f in target_freqs:
        if abs(f - round(f)) > 1e-9:
            raise NonIntegerFrequency(f"frequency {f} is not a DFT bin centre for this probe length")
        bins.append(int(round(f)))
    return tuple(bins)


def frequency_trajectory(snapshots, probe_series, target_freqs) -> FrequencyTrajectory:
    """Relative amplitude error ``|A_pred - A_true| / A_true`` at each target bin.

    ``snapshots`` is a sequence of ``(iteration, predicted_series)``;
    ``probe_series`` is the true series the predictions are compared against.
    """
    truth = np.asarray(probe_series, dtype=float).reshape(-1)
    bins = _as_bins(target_freqs)
    amp_true = np.abs(rfft_array(truth))
    if any(b < 0 or b >= amp_true.shape[0] for b in bins):
        raise NonIntegerFrequency("target frequency outside the spectrum")
    ref = amp_true[list(bins)]
    if np.any(ref <= 0):
        raise InvalidInput("true amplitude is zero at a target frequency")
    its, rows = [], []
    for it, pred in snapshots:
        amp = np.abs(rfft_array(np.asarray(pred, dtype=float).reshape(-1)))
        rows.append(np.abs(amp[list(bins)] - ref) / ref)
        its.append(int(it))
    return FrequencyTrajectory(bins, tuple(its), np.array(rows).reshape(len(rows), len(bins)))


@dataclass(frozen=True)
class SynthBiasConfig:
    """Two-layer network fitted to a sine sum over the sample grid.

    The network input is the sample coordinate centred on zero and spanning
    ``[-input_scale, input_scale)``; ``None`` keeps the natural half-range
    ``n_points * dx / 2``. The spectrum is taken over samples, so the input
    scaling never moves a bin.
    """

    hidden: int = 256
    activation: str = "tanh"
    ricker_a: float = 1.0
    iterations: int = 4000
    lr: float = 0.03
    snapshot_every: int = 20
    input_scale: float | None = None


def synth_bias_run(spec, cfg: SynthBiasConfig, seed: int) -> FrequencyTrajectory:
    from .data_io import gen_sine_sum

    y = gen_sine_sum(spec).values[0]
    n = y.shape[0]
    half = spec.n_points * spec.dx / 2 if cfg.input_scale is None else cfg.input_scale
    x = half * (2.0 * np.arange(n) / n - 1.0)
    model = init_mlp(1, cfg.hidden, 1, XorShift64Star(seed), ActivationKind(cfg.activation, cfg.ricker_a))
    _, snaps = fit_curve(model, x[:, None], y[:, None], cfg.iterations, cfg.lr, cfg.snapshot_every)
    freqs = [spec.bin_of(w) for w in spec.angular_frequencies]
    return frequency_trajectory(snaps, y, freqs)


# ------------------------------------------------------------------ experiments


@dataclass(frozen=True)
class ModelSpec:
    mode: str = "decomposed"
    channel_shared: bool = True
    ma_kernel: int = 25


@dataclass
class Experiment:
    train: Windows
    val: Windows
    test: Windows
    model: ModelSpec = field(default_factory=ModelSpec)
    train_cfg: TrainConfig = field(default_factory=TrainConfig)
    frele_cfg: FreLEConfig = field(default_factory=FreLEConfig)

    @classmethod
    def from_series(
        cls,
        series: MultiSeries,
        split: SplitSpec,
        lookback: int,
        horizon: int,
        stride: int = 1,
        **kw,
    ) -> "Experiment":
        """Split chronologically, standardize with train statistics, window each segment."""
        tr, va, te = time_split(series, split)
        (tr, va, te), _ = fit_apply_scaler(tr, [va, te])
        return cls(
            stack_windows(tr, lookback, horizon, stride),
            stack_windows(va, lookback, horizon, stride),
            stack_windows(te, lookback, horizon, stride),
            **kw,
        )

    def build_model(self, seed: int):
        w = self.train
        return init_linear(
            w.lookback,
            w.horizon,
            w.n_channels,
            XorShift64Star(seed),
            self.model.mode,
            self.model.channel_shared,
            self.model.ma_kernel,
        )


@dataclass(frozen=True)
class RunResult:
    seed: int
    mse: float
    mae: float
    time_loss: float
    freq_loss: float
    epochs: int
    grid_value: float = math.nan


def run_point(exp: Experiment, frele_cfg: FreLEConfig, seed: int, grid_value: float = math.nan):
    """Fresh init from ``seed``, train, evaluate on the test windows."""
    model = exp.build_model(seed)
    tcfg = replace(exp.train_cfg, seed=seed)
    model, logs = train(model, exp.train, exp.val, frele_cfg, tcfg)
    metrics = evaluate(model, exp.test)
    pred = predict_windows(model, exp.test)
    lb, _ = frele_value_and_grad(exp.test.targets, pred, frele_cfg, need_grad=False)
    res = RunResult(seed, metrics["mse"], metrics["mae"], lb.time_loss, lb.freq_loss, len(logs), grid_value)
    return res, model, logs


def _run_job(args) -> RunResult:
    exp, cfg, seed, value = args
    return run_point(exp, cfg, seed, value)[0]


def _run_many(jobs: list, n_workers: int) -> list[RunResult]:
    if n_workers <= 1 or len(jobs) <= 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(_run_job, jobs))


@dataclass(frozen=True)
class SweepResult:
    grid: tuple[float, ...]
    points: tuple[RunResult, ...]

    @property
    def argmin(self) -> int:
        return int(np.argmin([p.mse for p in self.points]))

    @property
    def best_value(self) -> float:
        return self.grid[self.argmin]


def parse_grid(text: str) -> list[float]:
    """``"a:b:step"`` (inclusive of b) or a comma list."""
    if ":" in text:
        a, b, step = (float(v) for v in text.split(":"))
        if step <= 0 or b < a:
            raise ConfigError(f"bad grid {text!r}")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        return [round(a + i * step, 12) for i in range(count)]
    return [float(v) for v in text.split(",") if v.strip()]


def delta_sweep(exp: Experiment, grid, base_seed: int | None = None, jobs: int = 1) -> SweepResult:
    grid = tuple(float(g) for g in grid)
    if not grid or any(not 0.0 <= g <= 1.0 for g in grid):
        raise ConfigError("delta grid must be nonempty with values in [0, 1]")
    base = exp.train_cfg.seed if base_seed is None else base_seed
    work = [(exp, replace(exp.frele_cfg, delta=g), base + i, g) for i, g in enumerate(grid)]
    return SweepResult(grid, tuple(_run_many(work, jobs)))


def pruning_sweep(exp: Experiment, retentions, base_seed: int | None = None, jobs: int = 1) -> SweepResult:
    grid = tuple(float(r) for r in retentions)
    if not grid or any(not 0.0 <= r <= 1.0 for r in grid):
        raise ConfigError("retentions must be nonempty with values in [0, 1]")
    base = exp.train_cfg.seed if base_seed is None else base_seed
    work = [
        (exp, replace(exp.frele_cfg, retention=r, epsilon_xi=None), base + i, r) for i, r in enumerate(grid)
    ]
    return SweepResult(grid, tuple(_run_many(work, jobs)))


ABLATIONS = ("EFR-IFR", "EFR", "EFR-AN")


def ablation_configs(base: FreLEConfig) -> dict[str, FreLEConfig]:
    if base.delta <= 0:
        raise ConfigError("ablation needs delta > 0 so the frequency term is active")
    return {
        "EFR-IFR": replace(base, implicit_enabled=True, an_enabled=False),
        "EFR": replace(base, implicit_enabled=False, an_enabled=False),
        "EFR-AN": replace(base, implicit_enabled=False, an_enabled=True),
    }


def ablation_matrix(exp: Experiment, seed: int | None = None, jobs: int = 1) -> dict[str, dict]:
    """MSE and MAE per setting; every setting uses the same splits and the same seed."""
    seed = exp.train_cfg.seed if seed is None else seed
    cfgs = ablation_configs(exp.frele_cfg)
    work = [(exp, cfg, seed, math.nan) for cfg in cfgs.values()]
    results = _run_many(work, jobs)
    return {name: {"mse": r.mse, "mae": r.mae} for name, r in zip(cfgs, results)}


def bias_profile(exp: Experiment, frele_cfg: FreLEConfig, seed: int):
    """Train once, recording the test band report and metrics after every epoch."""
    partition = band_partition(n_bins(exp.test.horizon))
    profile = BiasProfile()

    def record(epoch, model):
        profile.append(band_report(model, exp.test, partition), evaluate(model, exp.test))

    model = exp.build_model(seed)
    model, logs = train(model, exp.train, exp.val, frele_cfg, replace(exp.train_cfg, seed=seed), on_epoch=record)
    return profile, model, logs
