#!/usr/bin/env python3
"""Fit-then-bootstrap predictive study on a CSV price series.

Defaults target the shipped synthetic fixture: 3031 training rows, 252 test
rows, psi = (0.9, 0.9, 10, 10, 2.5, 2.5), hard threshold 1e-3.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import sdebridge as sb  # noqa: E402
from sdebridge.experiments import PredictConfig, run_predict, write_bands_csv  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--input", default=os.path.join(
        os.path.dirname(__file__), "..", "data", "synthetic_prices.csv"))
    ap.add_argument("--model", default="linear4d")
    ap.add_argument("--delta", type=float, default=1.0 / 252.0)
    ap.add_argument("--train-n", type=int, default=3030)
    ap.add_argument("--N", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--bound", type=float, default=500.0)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    data = sb.load_series_csv(args.input, delta=args.delta)
    cfg = PredictConfig(
        model=args.model,
        delta=args.delta,
        train_n=args.train_n,
        methods=("bridge", "lasso", "qmle"),
        N=args.N,
        seed=args.seed,
        model_options={"bound": args.bound},
    )
    t0 = time.time()
    reports = run_predict(cfg, data)
    print(f"N={args.N} bootstrap paths per method: {time.time() - t0:.0f}s")
    for method, rep in reports.items():
        print(f"{method:8s} predictive mse per series: "
              + np.array2string(rep.mse, precision=2))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        meta = {"study": "predict", "input": args.input, "N": args.N,
                "seed": args.seed}
        rows = {m: r.mse.tolist() for m, r in reports.items()}
        with open(os.path.join(args.out, "predict_mse.json"), "w") as fh:
            json.dump(rows, fh, indent=2)
        for rep in reports.values():
            write_bands_csv(rep, args.out, meta=meta)
        print("wrote outputs to", args.out)


if __name__ == "__main__":
    main()
