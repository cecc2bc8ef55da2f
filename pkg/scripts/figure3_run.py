"""Simulate the two-state economy, write its price path and valuation summary."""

import argparse
from pathlib import Path

from landprice.artifacts import write_csv, write_kv
from landprice.scenarios import figure3_replication
from landprice.valuation import ValuationConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--T", type=int, default=200)
    ap.add_argument("--n-paths", type=int, default=10_000)
    ap.add_argument("--sampler", choices=["tilted", "plain"], default="tilted")
    ap.add_argument("--out", type=Path, default=Path("out/figure3"))
    args = ap.parse_args()

    cfg = ValuationConfig(n_paths=args.n_paths, seed=args.seed, sampler=args.sampler)
    rep = figure3_replication(seed=args.seed, T=args.T, valuation=cfg)
    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(args.out / "figure3.csv", rep.columns, rep.rows())
    write_kv(args.out / "summary.txt", rep.summary())
    for k, v in rep.summary().items():
        print(f"{k}={v}")


if __name__ == "__main__":
    main()
