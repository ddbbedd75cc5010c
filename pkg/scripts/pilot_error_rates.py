"""Pilot runs behind the error-rate thresholds used in the acceptance tests.

For a BSC(p1) channel and BSC(p2) hash perturbation with uniform content,
the decoder sees a BSC(p1 + p2 - 2 p1 p2) and the other hash rows are uniform,
so the fresh-codebook ML error probability with message 1 and lowest-index
tie-breaking has an exact form:

    sum_d P(D = d) (1 - P(B >= d) ** (M - 1)),   D ~ Bin(n, p), B ~ Bin(n, 1/2)

(hash collisions ignored). The script prints that value next to Monte Carlo
estimates.

    python scripts/pilot_error_rates.py [--trials 2000] [--seed 7]
"""
import argparse
import math
import time

import numpy as np
from scipy.stats import binom

from macc.capacity import binary_achieving_joint, binary_crossover
from macc.codec_sim import CodeParams, collapsed_error_experiment, run_error_experiment
from macc.prob_core import Channel


def exact_pe(n: int, m: int, p: float) -> float:
    d = np.arange(n + 1)
    tail = binom.sf(d - 1, n, 0.5)  # P(B >= d)
    return float(np.sum(binom.pmf(d, n, p) * -np.expm1((m - 1) * np.log(tail))))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--p1", type=float, default=0.1)
    ap.add_argument("--p2", type=float, default=0.1)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    j = binary_achieving_joint(args.p2)
    ch = Channel.bsc(args.p1)
    p = binary_crossover(args.p1, args.p2)
    print(f"effective crossover {p:.4f}")
    print("n,M,R,exact_pe,sim_pe,sim_stderr,collisions,seconds,method")
    points = [(100, 2**10), (200, 2**20), (40, 2**20), (60, 2**20), (80, 2**20)]
    for n, m in points:
        t = time.time()
        rep = run_error_experiment(j, ch, CodeParams(n, m, args.seed), trials=args.trials)
        print(
            f"{n},{m},{math.log2(m) / n:.3f},{exact_pe(n, m, p):.3g},{rep.empirical_pe:.4g},"
            f"{rep.stderr:.2g},{rep.collisions},{time.time() - t:.0f},materialized"
        )
    for n in (40, 60, 80):
        m = 2 ** (n // 2)
        t = time.time()
        rep = collapsed_error_experiment(j, ch, CodeParams(n, m, args.seed), trials=args.trials)
        print(
            f"{n},{m},0.500,{exact_pe(n, m, p):.3g},{rep.empirical_pe:.4g},"
            f"{rep.stderr:.2g},{rep.collisions},{time.time() - t:.0f},collapsed"
        )


if __name__ == "__main__":
    main()
