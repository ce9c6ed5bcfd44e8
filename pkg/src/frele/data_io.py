"""Synthetic signals, ETT-format CSV ingestion and report serialization."""

from __future__ import annotations

import csv
import json
import math
import subprocess
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInput, NoData, ParseError
from .rng import XorShift64Star
from .timeseries import MultiSeries

ETT_CHANNELS = ("HUFL", "HULL", "MUFL", "MULL", "LUFL", "LULL", "OT")


def fmt(v) -> str:
    """17 significant digits: enough for an exact float64 round trip."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


# ------------------------------------------------------------------ synthetic


@dataclass(frozen=True)
class SineSumSpec:
    """``y[n] = sum_j c_j sin(w_j * n * dx)`` plus optional Gaussian noise.

    With the default ``dx = 2*pi/64`` a unit angular frequency completes one
    cycle every 64 samples, so ``w`` in {1, 2, 3} land on integer DFT bins for
    any length that is a multiple of 64.
    """

    coefficients: tuple[float, ...] = (1.0, 1.0, 1.0)
    angular_frequencies: tuple[float, ...] = (1.0, 2.0, 3.0)
    n_points: int = 512
    dx: float = 2 * math.pi / 64
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if len(self.coefficients) != len(self.angular_frequencies):
            raise InvalidInput("coefficients and angular_frequencies differ in length")
        if self.n_points < 8:
            raise InvalidInput("n_points must be >= 8")
        if not self.dx > 0:
            raise InvalidInput("dx must be > 0")
        if self.noise_std < 0:
            raise InvalidInput("noise_std must be >= 0")

    def grid(self) -> np.ndarray:
        return np.arange(self.n_points) * self.dx

    def bin_of(self, omega: float) -> float:
        """DFT bin (cycles per series) at which angular frequency ``omega`` appears."""
        return omega * self.n_points * self.dx / (2 * math.pi)


def gen_sine_sum(spec: SineSumSpec) -> MultiSeries:
    x = spec.grid()
    y = np.zeros(spec.n_points)
    for c, w in zip(spec.coefficients, spec.angular_frequencies):
        y += c * np.sin(w * x)
    if spec.noise_std > 0:
        y += XorShift64Star(spec.seed).normal(spec.n_points, scale=spec.noise_std)
    return MultiSeries(y[None, :], ("y",))


def gen_ett_like(n_rows: int = 17420, seed: int = 0, rows_per_hour: int = 1) -> MultiSeries:
    """Seven-channel stand-in with ETT-like structure.

    Daily and weekly cycles, a slow AR(1) level and per-channel AR(1) noise.
    Only meant for exercising the pipeline when the public files are absent.
    """
    rng = XorShift64Star(seed)
    n = n_rows
    t = np.arange(n) / rows_per_hour  # hours
    day = 2 * math.pi * t / 24.0
    week = 2 * math.pi * t / 168.0
    level = np.zeros(n)
    shocks = rng.normal(n, scale=0.02)
    for i in range(1, n):
        level[i] = 0.999 * level[i - 1] + shocks[i]
    rows = []
    for c in range(len(ETT_CHANNELS)):
        a_day, p_day, a_week, p_week, a_lvl = rng.uniform(0.2, 1.5, 5)
        noise = rng.normal(n, scale=0.3)
        ar = np.zeros(n)
        for i in range(1, n):
            ar[i] = 0.8 * ar[i - 1] + noise[i]
        sig = (
            a_day * np.sin(day + 6 * p_day)
            + 0.4 * a_day * np.sin(2 * day + 3 * p_day)
            + a_week * np.sin(week + 6 * p_week)
            + 4 * a_lvl * level
            + ar
        )
        rows.append(5.0 + 3.0 * sig)
    start = datetime(2016, 7, 1)
    step = timedelta(minutes=60 // rows_per_hour)
    stamps = tuple((start + i * step).isoformat(sep=" ") for i in range(n))
    return MultiSeries(np.array(rows), ETT_CHANNELS, stamps)


# ------------------------------------------------------------------------ CSV


def _parse_stamp(text: str) -> bool:
    try:
        datetime.fromisoformat(text.strip())
        return True
    except ValueError:
        return False


def load_csv(path) -> MultiSeries:
    """Read an ETT-shaped CSV: header row, timestamp/index column, numeric channels."""
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as e:
        raise NoData(f"cannot open {path}: {e}") from e
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise NoData(f"{path} is empty")
        if len(header) < 2:
            raise ParseError(f"{path}: need a time column and at least one channel", row=1)
        width = len(header)
        first, cells = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != width:
                raise ParseError(f"{path}: row {lineno} has {len(row)} fields, expected {width}", row=lineno)
            try:
                vals = [float(c) for c in row[1:]]
            except ValueError:
                raise ParseError(f"{path}: non-numeric value in row {lineno}", row=lineno) from None
            if not all(math.isfinite(v) for v in vals):
                raise ParseError(f"{path}: NaN or infinite value in row {lineno}", row=lineno)
            first.append(row[0])
            cells.append(vals)
    if not cells:
        raise NoData(f"{path} has no data rows")
    stamps = tuple(s.strip() for s in first) if all(_parse_stamp(s) for s in first) else None
    return MultiSeries(np.array(cells).T, tuple(h.strip() for h in header[1:]), stamps)


def write_series_csv(path, series: MultiSeries, time_header: str = "date") -> None:
    stamps = series.timestamps or tuple(str(i) for i in range(len(series)))
    rows = ([s, *vals] for s, vals in zip(stamps, series.values.T))
    write_csv(path, [time_header, *series.channel_names], rows)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) for v in row])
    except OSError as e:
        raise OSError(f"cannot write report {path}: {e}") from e


def read_csv_rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# -------------------------------------------------------------------- reports


def write_band_report(path, report, metrics: dict | None = None) -> None:
    """One row: ``lf,mf,hf,gf`` then ``mae,mse`` when metrics are given."""
    header = ["lf", "mf", "hf", "gf"]
    row = list(report.as_row())
    if metrics is not None:
        header += ["mae", "mse"]
        row += [metrics["mae"], metrics["mse"]]
    write_csv(path, header, [row])


def write_bias_profile(path, profile) -> None:
    rows = (
        [e, *b.as_row(), m["mse"], m["mae"]]
        for e, (b, m) in enumerate(zip(profile.bands, profile.metrics))
    )
    write_csv(path, ["epoch", "lf", "mf", "hf", "gf", "mse", "mae"], rows)


def write_trajectory(path, traj) -> None:
    rows = []
    for it, errs in zip(traj.iterations, traj.rel_error):
        rows.extend([it, f, e] for f, e in zip(traj.target_freqs, errs))
    write_csv(path, ["iteration", "freq", "rel_error"], rows)


def write_sweep(path, result) -> None:
    rows = (
        [p.grid_value, p.mse, p.mae, p.time_loss, p.freq_loss]
        for p in result.points
    )
    write_csv(path, ["grid_value", "mse", "mae", "time_loss", "freq_loss"], rows)


def write_ablation(path, table: dict) -> None:
    rows = ([name, r["mse"], r["mae"]] for name, r in table.items())
    write_csv(path, ["setting", "mse", "mae"], rows)


def write_decay_curves(path, rows: Iterable[Sequence[float]]) -> None:
    write_csv(path, ["xi_norm", "gamma_relu_sq", "gamma_tanh_sq"], rows)


def write_epoch_log(path, logs) -> None:
    header = ["epoch", "train_time", "train_freq", "train_combined", "val_time", "val_freq", "val_combined"]
    with_bands = bool(logs) and logs[0].val_bands is not None
    if with_bands:
        header += ["val_lf", "val_mf", "val_hf", "val_gf"]
    rows = []
    for log in logs:
        row = [log.epoch, log.train.time_loss, log.train.freq_loss, log.train.combined]
        row += [log.val.time_loss, log.val.freq_loss, log.val.combined]
        if with_bands:
            row += list(log.val_bands.as_row())
        rows.append(row)
    write_csv(path, header, rows)


# ------------------------------------------------------------------- manifest


def code_version() -> str:
    from . import __version__

    try:
        rev = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if rev.returncode == 0 and rev.stdout.strip():
            return f"{__version__}+g{rev.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def dumps_manifest(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_manifest(path, payload: dict) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps_manifest(payload))
    except OSError as e:
        raise OSError(f"cannot write manifest {path}: {e}") from e


def load_manifest(path) -> dict:
    return json.loads(Path(path).read_text())
