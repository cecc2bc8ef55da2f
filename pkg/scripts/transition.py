"""Malthusian-to-modern transition path with the switch period."""

import argparse
from pathlib import Path

from landprice.artifacts import write_csv, write_kv
from landprice.scenarios import malthus_to_modern


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.8)
    ap.add_argument("--A1", type=float, default=1.0)
    ap.add_argument("--A2", type=float, default=0.1)
    ap.add_argument("--G1", type=float, default=1.0)
    ap.add_argument("--G2", type=float, default=1.05)
    ap.add_argument("--T", type=int, default=100)
    ap.add_argument("--out", type=Path, default=Path("out/transition"))
    args = ap.parse_args()

    rep = malthus_to_modern(args.alpha, args.A1, args.A2, args.G1, args.G2, T=args.T)
    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(args.out / "transition.csv", rep.columns, rep.rows())
    write_kv(args.out / "summary.txt", rep.summary())
    for k, v in rep.summary().items():
        print(f"{k}={v}")


if __name__ == "__main__":
    main()
