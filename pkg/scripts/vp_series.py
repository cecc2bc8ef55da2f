"""V_t/P_t under deterministic CES growth, and the first t with V/P below a threshold.

Also scans alpha for the smallest weight on labour at which V/P at --t-check
is below the threshold.
"""

import argparse
from pathlib import Path

from landprice.artifacts import write_csv
from landprice.production import CES
from landprice.stochastic_process import DeterministicExponential
from landprice.valuation import ValuationConfig, valuation_series


def vp_at(alpha, sigma, growth, beta, t):
    cfg = ValuationConfig(tail_tolerance=1e-10)
    return valuation_series(CES(alpha, sigma), DeterministicExponential(growth), beta, [t], cfg)[0].V_over_P


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.8)
    ap.add_argument("--sigma", type=float, default=1.25)
    ap.add_argument("--growth", type=float, default=1.1)
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--T", type=int, default=300)
    ap.add_argument("--threshold", type=float, default=0.5)
    ap.add_argument("--t-check", type=int, default=100)
    ap.add_argument("--out", type=Path, default=Path("out/vp_series.csv"))
    args = ap.parse_args()

    vals = valuation_series(CES(args.alpha, args.sigma), DeterministicExponential(args.growth), args.beta,
                            range(args.T + 1), ValuationConfig(tail_tolerance=1e-10))
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(args.out, ["t", "V_over_P", "bubble_share", "price_rent"],
              ((v.t, v.V_over_P, v.gap / v.P, v.price_rent) for v in vals))
    below = next((v.t for v in vals if v.V_over_P < args.threshold), None)
    print(f"V/P(0)={vals[0].V_over_P!r} V/P({args.T})={vals[-1].V_over_P!r}")
    print(f"first t with V/P < {args.threshold}: {below}")

    lo, hi = 1e-3, 1 - 1e-9
    if vp_at(hi, args.sigma, args.growth, args.beta, args.t_check) >= args.threshold:
        print("threshold not reachable for any alpha")
        return
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if vp_at(mid, args.sigma, args.growth, args.beta, args.t_check) < args.threshold:
            hi = mid
        else:
            lo = mid
    print(f"smallest alpha with V/P({args.t_check}) < {args.threshold}: {hi:.6f}")


if __name__ == "__main__":
    main()
