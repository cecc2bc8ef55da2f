"""Least-squares slope of log(P/r) for a battery of seeds."""

import argparse
from pathlib import Path

import numpy as np

from landprice.artifacts import write_csv
from landprice.scenarios import slope_battery


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-seeds", type=int, default=100)
    ap.add_argument("--T", type=int, default=200)
    ap.add_argument("--start-seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("out/slopes.csv"))
    args = ap.parse_args()

    slopes = slope_battery(args.n_seeds, args.T, args.start_seed)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    seeds = range(args.start_seed, args.start_seed + args.n_seeds)
    write_csv(args.out, ["seed", "slope"], zip(seeds, map(float, slopes)))
    print(f"positive: {int(np.sum(slopes > 0))}/{args.n_seeds}")
    print(f"slope quartiles: {np.percentile(slopes, [25, 50, 75])}")


if __name__ == "__main__":
    main()
