"""Delta sweep, pruning curve and ablation across several seeds.

For every seed the same splits are reused and each setting starts from the
same initialization, so differences come from the loss alone.

    python3 scripts/sensitivity.py --data data/ETTm1.csv --rows-per-hour 4 --stride 4 --seeds 5
"""

import argparse
from dataclasses import replace
from pathlib import Path

from frele.data_io import gen_ett_like, load_csv, write_csv
from frele.diagnostics import Experiment, ablation_configs, run_point
from frele.timeseries import SplitSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", type=Path)
    ap.add_argument("--rows-per-hour", type=int, default=1)
    ap.add_argument("--stride", type=int, default=1)
    ap.add_argument("--horizon", type=int, default=96)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--deltas", default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")
    ap.add_argument("--retentions", default="0.5,0.6,0.7,0.8,0.9,1")
    ap.add_argument("--out", type=Path, default=Path("runs/sensitivity"))
    args = ap.parse_args()

    series = load_csv(args.data) if args.data else gen_ett_like(17420 * args.rows_per_hour, 0, args.rows_per_hour)
    exp = Experiment.from_series(
        series, SplitSpec("ett_preset", rows_per_hour=args.rows_per_hour), 96, args.horizon, args.stride
    )
    settings = [("delta", float(d), replace(exp.frele_cfg, delta=float(d))) for d in args.deltas.split(",")]
    settings += [("retention", float(r), replace(exp.frele_cfg, retention=float(r))) for r in args.retentions.split(",")]
    settings += [("ablation", name, cfg) for name, cfg in ablation_configs(exp.frele_cfg).items()]
    rows = []
    for seed in range(args.seeds):
        for kind, value, cfg in settings:
            res, _, _ = run_point(exp, cfg, seed)
            rows.append([seed, kind, value, res.mse, res.mae])
            print(seed, kind, value, f"mse={res.mse:.4f}", flush=True)
    write_csv(args.out / "sensitivity.csv", ["seed", "kind", "value", "mse", "mae"], rows)


if __name__ == "__main__":
    main()
