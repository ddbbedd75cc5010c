"""Secure capacity against alpha for a few BSC crossovers, closed form next to the
generic solver. Writes a CSV and, with --plot, a PNG.

    python scripts/alpha_sweep.py --out alpha_sweep.csv [--plot alpha_sweep.png] [--generic]
"""
import argparse
import csv

from macc.capacity import SolverConfig, capacity_sweep
from macc.prob_core import Channel
from macc.security import DistortionMatrix


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--p1", default="0.05,0.1,0.2")
    ap.add_argument("--step", type=float, default=0.05)
    ap.add_argument("--generic", action="store_true", help="also run the numerical solver")
    ap.add_argument("--out", default="alpha_sweep.csv")
    ap.add_argument("--plot")
    args = ap.parse_args()

    p1s = [float(v) for v in args.p1.split(",")]
    k = int(round(0.5 / args.step))
    alphas = [i * args.step for i in range(k + 1)]
    d = DistortionMatrix.hamming(2)
    modes = ["closed-form"] + (["generic"] if args.generic else [])
    rows = []
    for p1 in p1s:
        for mode in modes:
            for r in capacity_sweep(Channel.bsc(p1), d, alphas, mode=mode, cfg=SolverConfig()):
                rows.append((p1, r.alpha, r.capacity, mode))
                print(f"{p1:.3g} {mode:12s} alpha={r.alpha:.3f} C={r.capacity:.6f}", flush=True)

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p1", "alpha", "capacity_bits", "mode"])
        w.writerows(rows)

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5, 3.5))
        for p1 in p1s:
            for mode, style in (("closed-form", "-"), ("generic", "o")):
                pts = [(a, c) for q, a, c, m in rows if q == p1 and m == mode]
                if pts:
                    ax.plot(*zip(*pts), style, label=f"p1={p1:g} {mode}", ms=3)
        ax.set_xlabel("alpha")
        ax.set_ylabel("capacity (bits)")
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(args.plot, dpi=150)


if __name__ == "__main__":
    main()
