"""Bayes-risk security of a hash codebook against content estimation.

The security level of a joint law ``p(u, x)`` is the smallest expected
distortion any estimator ``pi: U -> X`` can achieve when reconstructing the
content symbol from its hash symbol. Over ``n`` i.i.d. letters the optimal
estimator acts letter by letter, so the single-letter value is also the
``n``-letter value; ``brute_force_nfold_min`` checks that by exhaustion.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .prob_core import JointUX

MAX_BRUTE_ALPHABET = 3
MAX_BRUTE_N = 3


@dataclass(frozen=True, eq=False)
class DistortionMatrix:
    """Bounded single-letter distortion; entry ``(xhat, x)`` is ``d(xhat, x)``.

    Every entry must lie in ``[0, bound)``. When ``bound`` is omitted it is
    set to ``max(d) + 1``.
    """

    d: np.ndarray
    bound: float | None = None
    name: str | None = None

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.size == 0:
            raise ValueError(f"distortion matrix must be square, got shape {d.shape}")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("distortion entries must be finite and non-negative")
        bound = float(d.max() + 1.0) if self.bound is None else float(self.bound)
        if not np.all(d < bound):
            raise ValueError(f"distortion entries must be below the bound {bound}")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "bound", bound)

    @property
    def size(self) -> int:
        return self.d.shape[0]

    @property
    def is_hamming(self) -> bool:
        return bool(np.array_equal(self.d, 1.0 - np.eye(self.size)))

    @classmethod
    def hamming(cls, size: int) -> "DistortionMatrix":
        return cls(1.0 - np.eye(size), bound=2.0, name="hamming")


@dataclass(frozen=True, eq=False)
class EstimatorMap:
    """Single-letter estimator ``u -> xhat`` with the joint-weighted risk at each ``u``."""

    map: np.ndarray
    per_u_risk: np.ndarray

    def __call__(self, u_word: np.ndarray) -> np.ndarray:
        return self.map[np.asarray(u_word)]


@dataclass(frozen=True)
class SecurityLevel:
    sigma: float

    def feasible_for(self, alpha: float) -> bool:
        return self.sigma >= alpha


def _check(j: JointUX, d: DistortionMatrix) -> None:
    if j.x_size != d.size:
        raise ValueError(
            f"dimension mismatch: joint has {j.x_size} content symbols, distortion {d.size}"
        )


def risk_table(j: JointUX, d: DistortionMatrix) -> np.ndarray:
    """Entry ``(u, xhat)`` = ``sum_x d(xhat, x) p(u, x)``."""
    _check(j, d)
    return j.table @ d.d.T


def bayes_estimator(j: JointUX, d: DistortionMatrix) -> EstimatorMap:
    """Posterior-risk minimizer per hash symbol; ties go to the lowest index.

    Zero-mass hash symbols map to 0 and carry zero risk.
    """
    r = risk_table(j, d)
    m = np.argmin(r, axis=1)
    risk = r[np.arange(r.shape[0]), m]
    dead = j.table.sum(axis=1) == 0
    m[dead] = 0
    risk[dead] = 0.0
    return EstimatorMap(m, risk)


def sigma(j: JointUX, d: DistortionMatrix) -> float:
    return float(bayes_estimator(j, d).per_u_risk.sum())


def security_level(j: JointUX, d: DistortionMatrix) -> SecurityLevel:
    return SecurityLevel(sigma(j, d))


def map_risk(j: JointUX, d: DistortionMatrix, pi) -> float:
    """Expected distortion of an arbitrary single-letter map ``pi``."""
    r = risk_table(j, d)
    pi = np.asarray(pi)
    return float(r[np.arange(r.shape[0]), pi].sum())


def nfold_bayes_estimator(j: JointUX, d: DistortionMatrix, n: int) -> float:
    """Expected per-letter distortion of the letter-wise Bayes estimator on ``n`` letters."""
    if n < 1:
        raise ValueError("n must be >= 1")
    # letters are i.i.d. and the optimal estimator is letter-wise, so the
    # average of n identical per-letter minima is the single-letter value
    return sigma(j, d)


def brute_force_nfold_min(j: JointUX, d: DistortionMatrix, n: int) -> float:
    """Exact minimum of ``E[d_n(pi(U^n), X^n)]`` over all maps ``pi: U^n -> X^n``.

    No product structure is assumed for ``pi``: since a map picks its output
    for each input word independently, the minimum over all maps is the sum,
    over hash words, of the best output word found by enumerating ``X^n``.
    Meant as a test oracle; alphabets are capped at 3 symbols and ``n`` at 3.
    """
    _check(j, d)
    nu, nx = j.table.shape
    if max(nu, nx) > MAX_BRUTE_ALPHABET or n > MAX_BRUTE_N or n < 1:
        raise ValueError(
            f"brute force limited to alphabets <= {MAX_BRUTE_ALPHABET} and n <= {MAX_BRUTE_N}"
        )
    x_words = np.array(list(itertools.product(range(nx), repeat=n)), dtype=int)
    # dn[a, b] = average distortion between content words a (estimate) and b (truth)
    dn = d.d[x_words[:, None, :], x_words[None, :, :]].mean(axis=2)
    total = 0.0
    for u_word in itertools.product(range(nu), repeat=n):
        # p(u^n, x^n) over all content words x^n
        p = np.prod(j.table[np.array(u_word)[None, :], x_words], axis=1)
        total += float(np.min(dn @ p))
    return total


def max_security(d: DistortionMatrix, x_size: int | None = None, u_size: int | None = None) -> float:
    """Largest security level any joint ``p(u, x)`` can reach.

    This is the value of the matrix game ``max_q min_xhat sum_x d(xhat, x) q(x)``;
    a joint that puts the maximizing ``q`` as the posterior of every hash symbol
    attains it, so ``u_size`` does not matter.
    """
    if x_size is not None and x_size != d.size:
        raise ValueError("x_size does not match the distortion matrix")
    k = d.size
    if d.is_hamming:
        return 1.0 - 1.0 / k
    if not np.any(d.d):
        return 0.0
    return float(np.min(d.d @ maximin_content_law(d)))


def maximin_content_law(d: DistortionMatrix) -> np.ndarray:
    """Content law ``q`` maximizing the Bayes risk ``min_xhat sum_x d(xhat, x) q(x)``."""
    k = d.size
    if d.is_hamming or not np.any(d.d):
        return np.full(k, 1.0 / k)
    # variables (q_0..q_{k-1}, t); maximize t s.t. D q >= t, sum q = 1
    c = np.zeros(k + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-d.d, np.ones((k, 1))])
    a_eq = np.hstack([np.ones((1, k)), np.zeros((1, 1))])
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.zeros(k),
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=[(0, None)] * k + [(None, None)],
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"matrix game LP failed: {res.message}")
    q = np.clip(res.x[:k], 0.0, None)
    return q / q.sum()


def estimator_constraints(u_size: int, d: DistortionMatrix) -> np.ndarray:
    """Rows ``a_pi`` with ``a_pi . vec(p(u,x)) = E[d(pi(U), X)]``, one per map ``pi``.

    ``sigma(p) >= alpha`` holds iff every row satisfies ``a_pi . p >= alpha``,
    which turns the security constraint into a polytope.
    """
    k = d.size
    maps = np.array(list(itertools.product(range(k), repeat=u_size)), dtype=int)
    # a[pi, u, x] = d(pi(u), x)
    a = d.d[maps]
    return a.reshape(len(maps), u_size * k)
