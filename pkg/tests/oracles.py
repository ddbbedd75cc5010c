"""Closed-form references shared by the simulation tests."""
import numpy as np
from scipy.stats import binom


def random_coding_pe(n: int, m: int, p: float) -> float:
    """Fresh-codebook ML error probability on a BSC(p) with uniform hash rows.

    Message 1 is sent and wins ties, so it is lost only when another row is
    strictly closer: ``sum_d P(D=d) (1 - P(B >= d)^(M-1))`` with
    ``D ~ Bin(n, p)`` and ``B ~ Bin(n, 1/2)``. Hash collisions are ignored.
    """
    d = np.arange(n + 1)
    tail = binom.sf(d - 1, n, 0.5)
    return float(np.sum(binom.pmf(d, n, p) * -np.expm1((m - 1) * np.log(tail))))


def within(est: float, ref: float, se: float, k: float = 4.0, floor: float = 1e-3) -> bool:
    return abs(est - ref) <= k * max(se, floor)
