"""Baseline (delta=0) against the frequency loss on one ETT-shaped CSV.

Runs every horizon in --horizons with lookback 96 and the ETT split, for both
the plain time loss and the default frequency loss, and writes table.csv.
Without --data a synthetic ETT-like series stands in.

    python3 scripts/forecast_table.py --data data/ETTh1.csv --horizons 96,192
"""

import argparse
from pathlib import Path

from frele.data_io import gen_ett_like, load_csv, write_csv
from frele.diagnostics import Experiment, run_point
from frele.loss import FreLEConfig
from frele.timeseries import SplitSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", type=Path)
    ap.add_argument("--rows-per-hour", type=int, default=1)
    ap.add_argument("--horizons", default="96")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("runs/forecast_table"))
    args = ap.parse_args()

    series = load_csv(args.data) if args.data else gen_ett_like(17420 * args.rows_per_hour, 0, args.rows_per_hour)
    rows = []
    for horizon in (int(h) for h in args.horizons.split(",")):
        exp = Experiment.from_series(series, SplitSpec("ett_preset", rows_per_hour=args.rows_per_hour), 96, horizon)
        for label, cfg in (("time_only", FreLEConfig(delta=0.0)), ("frele", FreLEConfig())):
            res, _, _ = run_point(exp, cfg, args.seed)
            rows.append([horizon, label, res.mse, res.mae, res.epochs])
            print(f"S={horizon} {label}: mse={res.mse:.4f} mae={res.mae:.4f}", flush=True)
    write_csv(args.out / "table.csv", ["horizon", "loss", "mse", "mae", "epochs"], rows)


if __name__ == "__main__":
    main()
