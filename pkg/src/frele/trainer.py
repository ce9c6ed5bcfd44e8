"""Adam, seeded mini-batch training with early stopping, evaluation."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NoData, ShapeMismatch
from .loss import FreLEConfig, LossBreakdown, frele_value_and_grad, spectral_weights, target_spectrum
from .models import with_params
from .rng import XorShift64Star
from .spectral import BandPartition, BandReport, band_rmse_arrays, rfft_array
from .timeseries import Windows

EVAL_CHUNK = 1024


@dataclass
class AdamState:
    m: dict
    v: dict
    step: int = 0
    lr: float = 0.005
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params: dict, lr: float = 0.005, **kw) -> "AdamState":
        return cls(
            {k: np.zeros_like(p) for k, p in params.items()},
            {k: np.zeros_like(p) for k, p in params.items()},
            lr=lr,
            **kw,
        )


def adam_step(state: AdamState, params: dict, grads: dict) -> tuple[AdamState, dict]:
    """One bias-corrected Adam update; inputs are left untouched."""
    if set(params) != set(grads) or set(params) != set(state.m):
        raise ShapeMismatch("parameter, gradient and moment names differ")
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    m, v, new = {}, {}, {}
    for k, p in params.items():
        g = np.asarray(grads[k], dtype=float)
        if g.shape != p.shape or state.m[k].shape != p.shape:
            raise ShapeMismatch(f"shape mismatch for {k}: param {p.shape}, grad {g.shape}")
        m[k] = b1 * state.m[k] + (1.0 - b1) * g
        v[k] = b2 * state.v[k] + (1.0 - b2) * g * g
        mhat = m[k] / (1.0 - b1**t)
        vhat = v[k] / (1.0 - b2**t)
        new[k] = p - state.lr * mhat / (np.sqrt(vhat) + state.eps)
    return AdamState(m, v, t, state.lr, b1, b2, state.eps), new


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    lr: float = 0.005
    patience: int = 3
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.lr < 0:
            raise ConfigError("lr must be >= 0")
        if self.patience < 1:
            raise ConfigError("patience must be >= 1")


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    train: LossBreakdown
    val: LossBreakdown
    val_bands: BandReport | None = None
    wall_time: float = 0.0


@dataclass
class _Prepared:
    """A window set together with its cached target spectra and loss weights."""

    windows: Windows
    F: np.ndarray = field(repr=False)
    W: np.ndarray = field(repr=False)


def _prepare(windows: Windows, cfg: FreLEConfig) -> _Prepared:
    F = target_spectrum(windows.targets)
    return _Prepared(windows, F, spectral_weights(F, cfg))


def predict_windows(model, windows: Windows, chunk: int = EVAL_CHUNK) -> np.ndarray:
    if len(windows) == 0:
        raise NoData("no windows to predict")
    parts = [model.predict(windows.inputs[i : i + chunk]) for i in range(0, len(windows), chunk)]
    return np.concatenate(parts, axis=0)


def _loss_over(model, prep: _Prepared, cfg: FreLEConfig) -> LossBreakdown:
    w = prep.windows
    n = len(w)
    tl = fl = 0.0
    for i in range(0, n, EVAL_CHUNK):
        sl = slice(i, i + EVAL_CHUNK)
        pred = model.predict(w.inputs[sl])
        lb, _ = frele_value_and_grad(w.targets[sl], pred, cfg, prep.F[sl], prep.W[sl], need_grad=False)
        k = pred.shape[0]
        tl += lb.time_loss * k
        fl += lb.freq_loss * k
    tl, fl = tl / n, fl / n
    return LossBreakdown(tl, fl, cfg.delta * fl + (1.0 - cfg.delta) * tl)


def band_report(model, windows: Windows, partition: BandPartition) -> BandReport:
    pred = predict_windows(model, windows)
    return band_rmse_arrays(rfft_array(windows.targets, axis=-2), rfft_array(pred, axis=-2), partition, axis=-2)


def train(
    model,
    train_set: Windows,
    val_set: Windows,
    frele_cfg: FreLEConfig,
    train_cfg: TrainConfig,
    partition: BandPartition | None = None,
    on_epoch=None,
):
    """Minimise ``delta * L_freq + (1 - delta) * L_time`` with Adam.

    Stops once the validation combined loss has not strictly improved for
    ``patience`` epochs and returns the best-validation parameters along with
    one :class:`EpochLog` per completed epoch. With ``partition`` each log also
    carries the validation band report. ``on_epoch(epoch, model)`` is called
    after every epoch with the current (not best) parameters.
    """
    if len(train_set) == 0 or len(val_set) == 0:
        raise NoData("training and validation sets must be nonempty")
    tr = _prepare(train_set, frele_cfg)
    va = _prepare(val_set, frele_cfg)
    rng = XorShift64Star(train_cfg.seed)
    params = {k: np.array(v, copy=True) for k, v in model.params.items()}
    state = AdamState.zeros_like(params, lr=train_cfg.lr)
    current = with_params(model, params)
    best_params, best_val, wait = params, np.inf, 0
    logs: list[EpochLog] = []
    n = len(train_set)
    bs = train_cfg.batch_size
    for epoch in range(train_cfg.epochs):
        t0 = time.perf_counter()
        order = rng.permutation(n) if train_cfg.shuffle else np.arange(n)
        tl = fl = 0.0
        for start in range(0, n, bs):
            idx = order[start : start + bs]
            x = tr.windows.inputs[idx]
            pred = current.predict(x)
            lb, g = frele_value_and_grad(tr.windows.targets[idx], pred, frele_cfg, tr.F[idx], tr.W[idx])
            tl += lb.time_loss * len(idx)
            fl += lb.freq_loss * len(idx)
            state, params = adam_step(state, params, current.gradients(x, g))
            current.params = params
        tl, fl = tl / n, fl / n
        train_lb = LossBreakdown(tl, fl, frele_cfg.delta * fl + (1.0 - frele_cfg.delta) * tl)
        val_lb = _loss_over(current, va, frele_cfg)
        bands = band_report(current, val_set, partition) if partition is not None else None
        logs.append(EpochLog(epoch, train_lb, val_lb, bands, time.perf_counter() - t0))
        if on_epoch is not None:
            on_epoch(epoch, current)
        if val_lb.combined < best_val:
            best_val, best_params, wait = val_lb.combined, params, 0
        else:
            wait += 1
            if wait >= train_cfg.patience:
                break
    return with_params(model, best_params), logs


def evaluate(model, test_set: Windows) -> dict[str, float]:
    """MSE and MAE over every horizon point, channel and window."""
    if len(test_set) == 0:
        raise NoData("no test windows")
    se = ae = 0.0
    count = 0
    for i in range(0, len(test_set), EVAL_CHUNK):
        sl = slice(i, i + EVAL_CHUNK)
        diff = model.predict(test_set.inputs[sl]) - test_set.targets[sl]
        se += float(np.sum(diff * diff))
        ae += float(np.sum(np.abs(diff)))
        count += diff.size
    return {"mse": se / count, "mae": ae / count}


def fit_curve(model, x: np.ndarray, y: np.ndarray, iterations: int, lr: float, snapshot_every: int = 0):
    """Full-batch Adam on the mean squared error of a regressor.

    Returns the trained model and, if ``snapshot_every > 0``, a list of
    ``(iteration, predictions)`` taken before the first update and then every
    ``snapshot_every`` updates.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    params = {k: np.array(v, copy=True) for k, v in model.params.items()}
    current = with_params(model, params)
    state = AdamState.zeros_like(params, lr=lr)
    snaps = []
    for it in range(iterations + 1):
        pred = current.predict(x)
        if snapshot_every and it % snapshot_every == 0:
            snaps.append((it, pred.copy()))
        if it == iterations:
            break
        g = 2.0 * (pred - y) / pred.size
        state, params = adam_step(state, params, current.gradients(x, g))
        current.params = params
    return current, snaps
