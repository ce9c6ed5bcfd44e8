"""Series containers, chronological splits, standardization and windowing."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateChannel,
    InvalidInput,
    NoData,
    SeriesTooShort,
    ShapeMismatch,
    SplitTooSmall,
)

# Standard ETT protocol: 12/4/4 months of 30 days.
ETT_MONTH_HOURS = 30 * 24
ETT_PRESET_MONTHS = (12, 4, 4)


@dataclass(frozen=True)
class MultiSeries:
    """Real-valued series stored channels-first, ``values[c, t]``."""

    values: np.ndarray
    channel_names: tuple[str, ...]
    timestamps: tuple[str, ...] | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[None, :]
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise InvalidInput(f"values must be a nonempty C x L array, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidInput("values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        names = tuple(str(n) for n in self.channel_names)
        if len(names) != values.shape[0]:
            raise ShapeMismatch(f"{len(names)} channel names for {values.shape[0]} channels")
        object.__setattr__(self, "channel_names", names)
        if self.timestamps is not None:
            ts = tuple(str(t) for t in self.timestamps)
            if len(ts) != values.shape[1]:
                raise ShapeMismatch(f"{len(ts)} timestamps for {values.shape[1]} steps")
            parsed = [datetime.fromisoformat(t) for t in ts]
            if any(b <= a for a, b in zip(parsed, parsed[1:])):
                raise InvalidInput("timestamps must be strictly increasing")
            object.__setattr__(self, "timestamps", ts)

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    def __len__(self) -> int:
        return self.values.shape[1]

    def slice(self, start: int, stop: int) -> "MultiSeries":
        ts = None if self.timestamps is None else self.timestamps[start:stop]
        return MultiSeries(self.values[:, start:stop], self.channel_names, ts)


@dataclass(frozen=True)
class SplitSpec:
    """How to cut a series into train/val/test.

    ``fractional`` floors the train and val lengths and gives the remainder to
    test. ``ett_preset`` uses the 12/4/4-month ETT protocol, scaled by
    ``rows_per_hour`` (1 for ETTh*, 4 for ETTm*); trailing rows are unused.
    """

    mode: str = "fractional"
    fractions: tuple[float, float, float] = (0.7, 0.1, 0.2)
    rows_per_hour: int = 1

    def __post_init__(self):
        if self.mode not in ("fractional", "ett_preset"):
            raise InvalidInput(f"unknown split mode {self.mode!r}")
        if self.mode == "fractional":
            fr = tuple(float(f) for f in self.fractions)
            if len(fr) != 3 or any(not 0.0 < f < 1.0 for f in fr):
                raise InvalidInput("fractions must be three values in (0, 1)")
            if abs(sum(fr) - 1.0) > 1e-9:
                raise InvalidInput("fractions must sum to 1")
            object.__setattr__(self, "fractions", fr)
        if self.rows_per_hour < 1:
            raise InvalidInput("rows_per_hour must be >= 1")

    def lengths(self, total: int) -> tuple[int, int, int]:
        if self.mode == "ett_preset":
            unit = ETT_MONTH_HOURS * self.rows_per_hour
            lens = tuple(m * unit for m in ETT_PRESET_MONTHS)
            if sum(lens) > total:
                raise SplitTooSmall(f"ETT preset needs {sum(lens)} rows, series has {total}")
            return lens
        n_train = int(np.floor(self.fractions[0] * total + 1e-9))
        n_val = int(np.floor(self.fractions[1] * total + 1e-9))
        return n_train, n_val, total - n_train - n_val


def time_split(series: MultiSeries, spec: SplitSpec) -> tuple[MultiSeries, MultiSeries, MultiSeries]:
    lens = spec.lengths(len(series))
    if min(lens) < 1:
        raise SplitTooSmall(f"split of {len(series)} rows gives segment lengths {lens}")
    a, b = lens[0], lens[0] + lens[1]
    return series.slice(0, a), series.slice(a, b), series.slice(b, b + lens[2])


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    std: np.ndarray

    def apply(self, series: MultiSeries) -> MultiSeries:
        self._check(series)
        vals = (series.values - self.mean[:, None]) / self.std[:, None]
        return MultiSeries(vals, series.channel_names, series.timestamps)

    def invert(self, series: MultiSeries) -> MultiSeries:
        self._check(series)
        vals = series.values * self.std[:, None] + self.mean[:, None]
        return MultiSeries(vals, series.channel_names, series.timestamps)

    def _check(self, series: MultiSeries) -> None:
        if series.n_channels != self.mean.shape[0]:
            raise ShapeMismatch(f"scaler fitted on {self.mean.shape[0]} channels, got {series.n_channels}")


def fit_scaler(train: MultiSeries) -> Scaler:
    if len(train) < 2:
        raise NoData("need at least two training steps to fit a scaler")
    mean = train.values.mean(axis=1)
    std = train.values.std(axis=1, ddof=1)
    bad = [train.channel_names[i] for i in np.flatnonzero(~(std > 0))]
    if bad:
        raise DegenerateChannel(f"zero-variance channel(s): {', '.join(bad)}")
    return Scaler(mean, std)


def fit_apply_scaler(
    train: MultiSeries,
    others: Sequence[MultiSeries] = (),
    invert: bool = False,
    scaler: Scaler | None = None,
) -> tuple[list[MultiSeries], Scaler]:
    """Fit on ``train`` (unless ``scaler`` is given) and transform every series.

    Returns ``([train, *others] transformed, scaler)``. With ``invert=True`` a
    previously fitted ``scaler`` is required and the inverse map is applied.
    """
    if invert:
        if scaler is None:
            raise InvalidInput("invert requires a previously fitted Scaler")
        return [scaler.invert(s) for s in (train, *others)], scaler
    if scaler is None:
        scaler = fit_scaler(train)
    return [scaler.apply(s) for s in (train, *others)], scaler


@dataclass(frozen=True)
class WindowPair:
    input: np.ndarray  # [T, C]
    target: np.ndarray  # [S, C]
    origin_index: int


@dataclass(frozen=True)
class Windows:
    """Stacked windows: ``inputs`` [n, T, C], ``targets`` [n, S, C]."""

    inputs: np.ndarray
    targets: np.ndarray
    origins: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def take(self, idx) -> "Windows":
        return Windows(self.inputs[idx], self.targets[idx], self.origins[idx])

    @property
    def lookback(self) -> int:
        return self.inputs.shape[1]

    @property
    def horizon(self) -> int:
        return self.targets.shape[1]

    @property
    def n_channels(self) -> int:
        return self.inputs.shape[2]


def _window_origins(length: int, lookback: int, horizon: int, stride: int) -> np.ndarray:
    if lookback < 1 or horizon < 1 or stride < 1:
        raise InvalidInput("lookback, horizon and stride must be >= 1")
    if length < lookback + horizon:
        raise SeriesTooShort(f"series of length {length} is shorter than T+S={lookback + horizon}")
    return np.arange(0, length - lookback - horizon + 1, stride)


def make_windows(series: MultiSeries, T: int, S: int, stride: int = 1) -> list[WindowPair]:
    origins = _window_origins(len(series), T, S, stride)
    data = series.values.T
    return [WindowPair(data[o : o + T], data[o + T : o + T + S], int(o)) for o in origins]


def stack_windows(series: MultiSeries, T: int, S: int, stride: int = 1) -> Windows:
    """Array form of :func:`make_windows` used by the trainer."""
    origins = _window_origins(len(series), T, S, stride)
    data = series.values.T
    view = np.lib.stride_tricks.sliding_window_view(data, T + S, axis=0)  # [L-T-S+1, C, T+S]
    blocks = np.ascontiguousarray(view[origins].transpose(0, 2, 1))
    return Windows(blocks[:, :T], blocks[:, T:], origins.astype(np.int64))


def windows_from_pairs(pairs: Sequence[WindowPair]) -> Windows:
    if not pairs:
        raise NoData("no windows")
    return Windows(
        np.stack([p.input for p in pairs]),
        np.stack([p.target for p in pairs]),
        np.array([p.origin_index for p in pairs], dtype=np.int64),
    )
