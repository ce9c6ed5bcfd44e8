"""Command-line entry point: ``frele <subcommand> [flags]``.

Every option can also come from a flat JSON object passed with ``--config``;
explicit flags win over the file, the file wins over built-in defaults. Each
run writes its CSVs and a ``manifest.json`` under ``--out``. Only the manifest
carries a timestamp, so repeated runs produce byte-identical CSVs.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import ConfigError, FreLEError

DEFAULT_ETA = None  # bin count of the horizon


class Opt:
    def __init__(self, flag, dest, default, help, type=None, choices=None, action=None, shown=None):
        self.flag, self.dest, self.default, self.help = flag, dest, default, help
        self.type, self.choices, self.action = type, choices, action
        self.shown = shown

    def add(self, group):
        text = self.shown or ("none" if self.default is None else self.default)
        kw = {"dest": self.dest, "default": argparse.SUPPRESS, "help": f"{self.help} (default: {text})"}
        if self.action is not None:
            kw["action"] = self.action
        else:
            kw["type"] = self.type
            if self.choices:
                kw["choices"] = self.choices
        group.add_argument(self.flag, **kw)


def _floats(text):
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _opt_float(text):
    return None if str(text).lower() in ("none", "") else float(text)


GROUPS = {
    "common": [
        Opt("--seed", "seed", 0, "base random seed", int),
        Opt("--out", "out", None, "output directory", str, shown="./runs/<timestamp>-<seed>/"),
    ],
    "data": [
        Opt("--data", "data", None, "ETT-shaped CSV; omitted means a synthetic ETT-like series", str),
        Opt("--synthetic-rows", "synthetic_rows", 17420, "rows of the synthetic series", int),
        Opt("--data-seed", "data_seed", 0, "seed of the synthetic series", int),
        Opt("--split", "split", "ett_preset", "split protocol", str, ("ett_preset", "fractional")),
        Opt("--fractions", "fractions", "0.7,0.1,0.2", "train,val,test fractions for --split fractional", _floats),
        Opt("--rows-per-hour", "rows_per_hour", 1, "1 for hourly, 4 for 15-minute data", int),
        Opt("--lookback", "lookback", 96, "input window length T", int),
        Opt("--horizon", "horizon", 96, "forecast length S", int),
        Opt("--stride", "stride", 1, "step between window origins", int),
    ],
    "model": [
        Opt("--mode", "mode", "decomposed", "linear model form", str, ("decomposed", "plain")),
        Opt("--per-channel", "per_channel", False, "separate weights per channel", action="store_true"),
        Opt("--ma-kernel", "ma_kernel", 25, "moving-average kernel of the decomposition", int),
    ],
    "train": [
        Opt("--epochs", "epochs", 30, "maximum epochs", int),
        Opt("--batch-size", "batch_size", 32, "mini-batch size", int),
        Opt("--lr", "lr", 0.005, "Adam learning rate", float),
        Opt("--patience", "patience", 3, "early-stopping patience in epochs", int),
        Opt("--no-shuffle", "no_shuffle", False, "keep window order fixed", action="store_true"),
    ],
    "loss": [
        Opt("--delta", "delta", 0.3, "weight of the frequency loss", float),
        Opt("--d", "d", 5, "local-maximum window width", int),
        Opt("--eta", "eta", DEFAULT_ETA, "peak rescale constant", _opt_float, shown="B, the bin count of the horizon"),
        Opt("--time-loss", "time_loss", "mse", "time-domain loss", str, ("mse", "mae")),
        Opt("--implicit", "implicit", True, "rescale spectral peaks", action=argparse.BooleanOptionalAction),
        Opt("--an", "an", False, "divide bins by target amplitude; turns --implicit off", action="store_true"),
        Opt("--epsilon-xi", "epsilon_xi", None, "fixed amplitude threshold for pruning", _opt_float),
        Opt("--retention", "retention", None, "fraction of largest bins kept per spectrum", _opt_float),
    ],
    "jobs": [Opt("--jobs", "jobs", 1, "worker processes", int)],
    "synth": [
        Opt("--coefficients", "coefficients", "1,1,1", "sine amplitudes", _floats),
        Opt("--frequencies", "frequencies", "1,2,3", "angular frequencies", _floats),
        Opt("--n-points", "n_points", 512, "samples in the signal", int),
        Opt("--noise-std", "noise_std", 0.0, "Gaussian noise level", float),
        Opt("--hidden", "hidden", 256, "hidden width of the 2-layer network", int),
        Opt("--activation", "activation", "tanh", "hidden activation", str, ("tanh", "relu", "ricker")),
        Opt("--ricker-a", "ricker_a", 1.0, "ricker scale a", float),
        Opt("--iterations", "iterations", 4000, "full-batch Adam iterations", int),
        Opt("--lr", "lr", 0.03, "Adam learning rate", float),
        Opt("--snapshot-every", "snapshot_every", 20, "iterations between recorded spectra", int),
        Opt("--input-scale", "input_scale", None, "half-range of the network input", _opt_float, shown="n_points*dx/2"),
    ],
    "theory": [
        Opt("--xi-min", "xi_min", 0.01, "smallest frequency norm", float),
        Opt("--xi-max", "xi_max", 1000.0, "largest frequency norm", float),
        Opt("--points", "points", 60, "log-spaced grid points", int),
        Opt("--dim", "dim", 1, "input dimension d", int),
        Opt("--sampler", "sampler", "degenerate", "initialization law", str, ("degenerate", "normal", "abs")),
        Opt("--samples", "samples", 1, "Monte Carlo samples", int),
    ],
    "fft": [
        Opt("--trials", "trials", 1000, "random inputs", int),
        Opt("--max-n", "max_n", 512, "largest input length", int),
    ],
}

FORECAST = ("common", "data", "model", "train", "loss")
COMMANDS = {
    "synth-bias": (("common", "synth"), {}, "fit a 2-layer network to a sine sum; writes trajectory.csv"),
    "train": (FORECAST, {}, "train and evaluate a linear forecaster; writes epochs.csv and report.csv"),
    "diagnose": (FORECAST, {}, "per-epoch band errors on the test split; writes bias_profile.csv"),
    "sweep-delta": (FORECAST + ("jobs",), {"grid": "0:1:0.1"}, "train once per delta; writes sweep.csv"),
    "prune-sweep": (FORECAST + ("jobs",), {"grid": "0.5:1:0.1"}, "train once per retention; writes sweep.csv"),
    "ablate": (FORECAST + ("jobs",), {}, "EFR-IFR / EFR / EFR-AN comparison; writes ablation.csv"),
    "theory-curves": (("common", "theory"), {}, "evaluate the ReLU and tanh decay curves; writes decay_curves.csv"),
    "fft-check": (("common", "fft"), {}, "compare the fast transform with the direct sum"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="frele",
        description="Frequency-loss experiments for linear forecasters. Loss defaults: delta=0.3, d=5, eta=B.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True
    for name, (groups, extra, text) in COMMANDS.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", dest="config", default=argparse.SUPPRESS, help="JSON file of option values; flags win")
        for g in groups:
            grp = p.add_argument_group(g)
            for opt in GROUPS[g]:
                opt.add(grp)
        if "grid" in extra:
            p.add_argument("--grid", dest="grid", default=argparse.SUPPRESS, help=f"a:b:step or comma list (default: {extra['grid']})")
    return parser


def _defaults(command: str) -> dict:
    groups, extra, _ = COMMANDS[command]
    out = {}
    for g in groups:
        for opt in GROUPS[g]:
            v = opt.default
            out[opt.dest] = opt.type(v) if isinstance(v, str) and opt.type is _floats else v
    out.update(extra)
    return out


def resolve(command: str, ns: argparse.Namespace) -> dict:
    """Merge built-in defaults, the JSON config file, and explicit flags."""
    cfg = _defaults(command)
    explicit = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    path = getattr(ns, "config", None)
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(loaded) - set(cfg))
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {', '.join(unknown)}")
        for k, v in loaded.items():
            cfg[k] = tuple(float(x) for x in v) if isinstance(v, list) else v
    cfg.update(explicit)
    if isinstance(cfg.get("fractions"), str):
        cfg["fractions"] = _floats(cfg["fractions"])
    for k in ("coefficients", "frequencies"):
        if isinstance(cfg.get(k), str):
            cfg[k] = _floats(cfg[k])
    return cfg


# ------------------------------------------------------------------ builders


def _frele_cfg(cfg):
    from .loss import FreLEConfig

    return FreLEConfig(
        delta=float(cfg["delta"]),
        d=int(cfg["d"]),
        eta=None if cfg["eta"] is None else float(cfg["eta"]),
        implicit_enabled=bool(cfg["implicit"]) and not cfg["an"],
        an_enabled=bool(cfg["an"]),
        epsilon_xi=cfg["epsilon_xi"],
        retention=cfg["retention"],
        time_loss_kind=cfg["time_loss"],
    )


def _series(cfg):
    from .data_io import gen_ett_like, load_csv

    if cfg["data"]:
        return load_csv(cfg["data"]), {"path": str(cfg["data"])}
    series = gen_ett_like(int(cfg["synthetic_rows"]), int(cfg["data_seed"]), int(cfg["rows_per_hour"]))
    return series, {"synthetic": "ett_like", "rows": int(cfg["synthetic_rows"]), "seed": int(cfg["data_seed"])}


def _experiment(cfg):
    from .diagnostics import Experiment, ModelSpec
    from .timeseries import SplitSpec
    from .trainer import TrainConfig

    series, source = _series(cfg)
    exp = Experiment.from_series(
        series,
        SplitSpec(cfg["split"], tuple(cfg["fractions"]), int(cfg["rows_per_hour"])),
        int(cfg["lookback"]),
        int(cfg["horizon"]),
        int(cfg["stride"]),
        model=ModelSpec(cfg["mode"], not cfg["per_channel"], int(cfg["ma_kernel"])),
        train_cfg=TrainConfig(
            int(cfg["epochs"]), int(cfg["batch_size"]), float(cfg["lr"]), int(cfg["patience"]), int(cfg["seed"]), not cfg["no_shuffle"]
        ),
        frele_cfg=_frele_cfg(cfg),
    )
    return exp, source


def _out_dir(cfg) -> Path:
    if cfg.get("out"):
        return Path(cfg["out"])
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
    return Path("runs") / f"{stamp}-{cfg['seed']}"


def _jsonable(v):
    if isinstance(v, tuple):
        return list(v)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _manifest(out: Path, command: str, cfg: dict, metrics: dict, extra: dict | None = None) -> None:
    from .data_io import code_version, write_manifest

    payload = {
        "command": command,
        "config": {k: _jsonable(v) for k, v in cfg.items() if k != "out"},
        "seed": cfg.get("seed"),
        "version": code_version(),
        "created": datetime.now().isoformat(timespec="seconds"),
        "metrics": {k: _jsonable(v) for k, v in metrics.items()},
    }
    if extra:
        payload.update(extra)
    write_manifest(out / "manifest.json", payload)


# ------------------------------------------------------------------ commands


def cmd_synth_bias(cfg, out):
    from .data_io import SineSumSpec, write_trajectory
    from .diagnostics import SynthBiasConfig, synth_bias_run

    spec = SineSumSpec(tuple(cfg["coefficients"]), tuple(cfg["frequencies"]), int(cfg["n_points"]), noise_std=float(cfg["noise_std"]), seed=int(cfg["seed"]))
    sb = SynthBiasConfig(
        int(cfg["hidden"]), cfg["activation"], float(cfg["ricker_a"]), int(cfg["iterations"]), float(cfg["lr"]), int(cfg["snapshot_every"]), cfg["input_scale"]
    )
    traj = synth_bias_run(spec, sb, int(cfg["seed"]))
    write_trajectory(out / "trajectory.csv", traj)
    first = traj.first_below(0.3)
    print("first iteration below 0.3 per bin:", dict(zip(traj.target_freqs, first)))
    return {"first_below_0.3": {str(f): v for f, v in zip(traj.target_freqs, first)}, "final_rel_error": traj.rel_error[-1].tolist()}


def cmd_train(cfg, out):
    from .data_io import write_band_report, write_epoch_log
    from .diagnostics import run_point, spectral_bias_report
    from .models import save_checkpoint

    exp, source = _experiment(cfg)
    res, model, logs = run_point(exp, exp.frele_cfg, int(cfg["seed"]))
    metrics = {"mse": res.mse, "mae": res.mae, "time_loss": res.time_loss, "freq_loss": res.freq_loss, "epochs": res.epochs}
    write_epoch_log(out / "epochs.csv", logs)
    write_band_report(out / "report.csv", spectral_bias_report(model, exp.test), metrics)
    save_checkpoint(out / "model.npz", model)
    print(f"test mse={res.mse:.6f} mae={res.mae:.6f} epochs={res.epochs}")
    return metrics, {"dataset": source}


def cmd_diagnose(cfg, out):
    from .data_io import write_band_report, write_bias_profile
    from .diagnostics import bias_profile, spectral_bias_report
    from .trainer import evaluate

    exp, source = _experiment(cfg)
    profile, model, _ = bias_profile(exp, exp.frele_cfg, int(cfg["seed"]))
    metrics = evaluate(model, exp.test)
    report = spectral_bias_report(model, exp.test)
    write_bias_profile(out / "bias_profile.csv", profile)
    write_band_report(out / "band_report.csv", report, metrics)
    print("test bands lf=%.6f mf=%.6f hf=%.6f gf=%.6f" % report.as_row())
    return {**metrics, "bands": dict(zip(("lf", "mf", "hf", "gf"), report.as_row()))}, {"dataset": source}


def _sweep(cfg, out, fn):
    from .data_io import write_sweep
    from .diagnostics import parse_grid

    exp, source = _experiment(cfg)
    grid = parse_grid(str(cfg["grid"]))
    result = fn(exp, grid, base_seed=int(cfg["seed"]), jobs=int(cfg["jobs"]))
    write_sweep(out / "sweep.csv", result)
    for p in result.points:
        print(f"{p.grid_value:g}: mse={p.mse:.6f} mae={p.mae:.6f}")
    print(f"best grid value {result.best_value:g}")
    seeds = {f"{g:g}": int(cfg["seed"]) + i for i, g in enumerate(grid)}
    return {"best_value": result.best_value, "best_mse": result.points[result.argmin].mse}, {"dataset": source, "point_seeds": seeds}


def cmd_sweep_delta(cfg, out):
    from .diagnostics import delta_sweep

    return _sweep(cfg, out, delta_sweep)


def cmd_prune_sweep(cfg, out):
    from .diagnostics import pruning_sweep

    return _sweep(cfg, out, pruning_sweep)


def cmd_ablate(cfg, out):
    from .data_io import write_ablation
    from .diagnostics import ablation_matrix

    exp, source = _experiment(cfg)
    table = ablation_matrix(exp, seed=int(cfg["seed"]), jobs=int(cfg["jobs"]))
    write_ablation(out / "ablation.csv", table)
    for name, r in table.items():
        print(f"{name}: mse={r['mse']:.6f} mae={r['mae']:.6f}")
    return table, {"dataset": source}


def cmd_theory_curves(cfg, out):
    from .data_io import write_decay_curves
    from .theory import InitSampler, decay_curves

    if not 0 < cfg["xi_min"] < cfg["xi_max"] or cfg["points"] < 2:
        raise ConfigError("need 0 < xi_min < xi_max and at least 2 points")
    grid = np.logspace(math.log10(cfg["xi_min"]), math.log10(cfg["xi_max"]), int(cfg["points"]))
    sampler = InitSampler(cfg["sampler"], int(cfg["samples"]), int(cfg["seed"]))
    rows = decay_curves(grid, int(cfg["dim"]), sampler)
    write_decay_curves(out / "decay_curves.csv", rows)
    return {"points": len(rows)}


def fft_check(trials: int = 1000, max_n: int = 512, seed: int = 0) -> dict:
    """Random-input comparison of the fast transforms with the direct sum."""
    from .rng import XorShift64Star
    from .spectral import full_spectrum, irfft, rdft_naive, rfft

    rng = XorShift64Star(seed)
    worst = {"rfft_vs_naive": 0.0, "round_trip": 0.0, "parseval_rel": 0.0}
    for _ in range(trials):
        n = 1 + rng.integer(max_n)
        x = rng.normal(n)
        fast = rfft(x)
        worst["rfft_vs_naive"] = max(worst["rfft_vs_naive"], float(np.max(np.abs(fast.bins - rdft_naive(x).bins))))
        worst["round_trip"] = max(worst["round_trip"], float(np.max(np.abs(irfft(fast) - x))))
        energy = float(np.sum(x * x))
        spec = float(np.sum(np.abs(full_spectrum(fast)) ** 2)) / n
        worst["parseval_rel"] = max(worst["parseval_rel"], abs(spec - energy) / energy)
    return worst


def cmd_fft_check(cfg, out):
    t0 = time.perf_counter()
    worst = fft_check(int(cfg["trials"]), int(cfg["max_n"]), int(cfg["seed"]))
    ok = all(v < 1e-9 for v in worst.values())
    print(" ".join(f"{k}={v:.3e}" for k, v in worst.items()), f"time={time.perf_counter() - t0:.1f}s", "PASS" if ok else "FAIL")
    if not ok:
        raise FreLEError("fast transform disagrees with the direct sum")
    return worst


HANDLERS = {
    "synth-bias": cmd_synth_bias,
    "train": cmd_train,
    "diagnose": cmd_diagnose,
    "sweep-delta": cmd_sweep_delta,
    "prune-sweep": cmd_prune_sweep,
    "ablate": cmd_ablate,
    "theory-curves": cmd_theory_curves,
    "fft-check": cmd_fft_check,
}

WRITES_NOTHING = ("fft-check",)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        cfg = resolve(ns.command, ns)
        if ns.command in ("train", "diagnose", "sweep-delta", "prune-sweep", "ablate"):
            _frele_cfg(cfg)  # validate before any work starts
    except UsageError as e:
        print(e, file=sys.stderr)
        return 2
    except (ConfigError, FreLEError, ValueError, TypeError, KeyError) as e:
        print(f"frele: configuration error: {e}", file=sys.stderr)
        return 2
    out = None if ns.command in WRITES_NOTHING and not cfg.get("out") else _out_dir(cfg)
    try:
        result = HANDLERS[ns.command](cfg, out)
        metrics, extra = result if isinstance(result, tuple) else (result, None)
        if out is not None:
            _manifest(out, ns.command, cfg, metrics, extra)
            print(f"wrote {out}")
    except ConfigError as e:
        print(f"frele: configuration error: {e}", file=sys.stderr)
        return 2
    except (FreLEError, OSError) as e:
        print(f"frele: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
