"""Secure capacity: max of I(U;Y) over hash/content joints meeting a security level.

Two routes are provided. ``binary_capacity_closed_form`` evaluates the binary
symmetric result ``1 - H(p1 + alpha (1 - 2 p1))``. ``information_capacity``
works for any finite channel and distortion by multi-start projected gradient
ascent over the joint ``p(u, x)``, followed by a local polish on the exact
polytope form of the security constraint.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .prob_core import Channel, JointUX, binary_entropy, mutual_information
from .security import (
    DistortionMatrix,
    estimator_constraints,
    max_security,
    maximin_content_law,
    sigma,
)

log = logging.getLogger(__name__)

LN2 = np.log(2.0)
SECURITY_SLACK = 1e-9
# polish only when the polytope has a manageable number of facets
MAX_POLYTOPE_ROWS = 4096


@dataclass(frozen=True)
class ProblemSpec:
    ch_yx: Channel
    d: DistortionMatrix
    alpha: float

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.d.size != self.ch_yx.in_size:
            raise ValueError(
                f"distortion is {self.d.size}x{self.d.size} but channel has "
                f"{self.ch_yx.in_size} inputs"
            )


@dataclass(frozen=True)
class BinaryParams:
    """Binary symmetric setting: channel crossover ``p1`` and security level ``alpha``."""

    p1: float
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.p1 <= 1.0:
            raise ValueError(f"p1 = {self.p1} outside [0, 1]")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")

    @property
    def feasible(self) -> bool:
        return self.alpha <= 0.5


@dataclass
class SolverConfig:
    u_size: int | None = None
    restarts: int = 32
    seed: int = 20240101
    max_iter: int = 3000
    # stop when the objective gains less than `tol` over `patience` iterations
    tol: float = 1e-9
    patience: int = 50
    polish: bool = True
    threads: int = 1


@dataclass
class SolverDiagnostics:
    restarts: int
    converged_restarts: int
    best_gap: float
    constraint_active: bool
    polished: bool
    restart_values: list[float] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.converged_restarts > 0


@dataclass
class CapacityResult:
    value: float
    argmax_joint: JointUX | None
    feasible: bool
    diagnostics: SolverDiagnostics | None = None

    @property
    def converged(self) -> bool:
        return self.diagnostics is None or self.diagnostics.converged


def binary_crossover(p1: float, p2: float) -> float:
    """Crossover of two cascaded BSCs, ``p1 + p2 - 2 p1 p2``, written around 1/2.

    The centered form is exactly 1/2 whenever either argument is 1/2.
    """
    return 0.5 - 2.0 * (p1 - 0.5) * (p2 - 0.5)


def binary_capacity_closed_form(p1: float, alpha: float) -> float:
    """``1 - H(p1 + alpha (1 - 2 p1))`` bits; 0 when ``alpha > 1/2`` (no feasible joint)."""
    bp = BinaryParams(p1, alpha)
    if not bp.feasible:
        return 0.0
    return 1.0 - binary_entropy(binary_crossover(bp.p1, bp.alpha))


def binary_achieving_joint(alpha: float) -> JointUX:
    """Uniform content through a BSC(alpha) hash perturbation."""
    if not 0.0 <= alpha <= 0.5:
        raise ValueError(f"alpha = {alpha} outside [0, 1/2]")
    return JointUX([[(1 - alpha) / 2, alpha / 2], [alpha / 2, (1 - alpha) / 2]])


def feasibility(d: DistortionMatrix, alpha: float) -> bool:
    return max_security(d) >= alpha


# --- objective ------------------------------------------------------------


def objective(flat: np.ndarray, w: np.ndarray, shape: tuple[int, int]) -> float:
    """I(U;Y) in bits for the flattened joint ``p(u, x)`` and channel rows ``w``."""
    return mutual_information(np.clip(flat, 0.0, None).reshape(shape) @ w)


def objective_grad(flat: np.ndarray, w: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    j = np.clip(flat, 0.0, None).reshape(shape)
    q = j @ w
    pu = q.sum(axis=1, keepdims=True)
    py = q.sum(axis=0, keepdims=True)
    tiny = 1e-300
    g = (np.log(np.maximum(q, tiny)) - np.log(np.maximum(pu, tiny)) - np.log(np.maximum(py, tiny)) - 1.0) / LN2
    return (g @ w.T).ravel()


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.flatnonzero(u - css / k > 0)[-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


class _Problem:
    def __init__(self, spec: ProblemSpec, u_size: int):
        self.w = spec.ch_yx.rows
        self.d = spec.d
        self.alpha = float(spec.alpha)
        self.shape = (u_size, spec.d.size)
        # interior point with the largest possible security level
        q = maximin_content_law(spec.d)
        self.anchor = (np.full((u_size, 1), 1.0 / u_size) * q[None, :]).ravel()
        self._dt = spec.d.d.T

    def sigma(self, flat: np.ndarray) -> float:
        # same value as security.sigma, without building a validated JointUX
        j = self._clean(flat).reshape(self.shape)
        return float((j @ self._dt).min(axis=1).sum())

    def feasible(self, flat: np.ndarray) -> bool:
        return self.sigma(flat) >= self.alpha

    def value(self, flat: np.ndarray) -> float:
        return objective(flat, self.w, self.shape)

    def grad(self, flat: np.ndarray) -> np.ndarray:
        return objective_grad(flat, self.w, self.shape)

    @staticmethod
    def _clean(flat: np.ndarray) -> np.ndarray:
        p = np.clip(flat, 0.0, None)
        return p / p.sum()

    def pull_to_feasible(self, flat: np.ndarray, iters: int = 60) -> np.ndarray:
        """Move ``flat`` toward the anchor until the security constraint holds.

        The feasible set is convex and contains the anchor, so the feasible
        part of the segment is an interval starting at the anchor; bisect for
        its far end.
        """
        if self.feasible(flat):
            return flat
        a = self.anchor
        flat = np.clip(flat, 0.0, None)
        # risk tables are linear along the segment, so bisect on them directly
        ra = a.reshape(self.shape) @ self._dt
        dr = flat.reshape(self.shape) @ self._dt - ra
        lo, hi = 0.0, 1.0
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if (ra + mid * dr).min(axis=1).sum() >= self.alpha:
                lo = mid
            else:
                hi = mid
        return a + lo * (flat - a)


def _ascend(prob: _Problem, start: np.ndarray, cfg: SolverConfig) -> tuple[np.ndarray, float, bool]:
    """Projected gradient ascent from ``start``; returns (point, value, converged)."""
    x = prob.pull_to_feasible(start)
    fx = prob.value(x)
    step = 1.0
    history = [fx]
    for _ in range(cfg.max_iter):
        g = prob.grad(x)
        improved = False
        while step > 1e-14:
            cand = prob.pull_to_feasible(project_simplex(x + step * g))
            fc = prob.value(cand)
            if fc > fx:
                x, fx = cand, fc
                step *= 1.5
                improved = True
                break
            step *= 0.5
        history.append(fx)
        if not improved:
            return x, fx, True
        if len(history) > cfg.patience and history[-1] - history[-1 - cfg.patience] < cfg.tol:
            return x, fx, True
    return x, fx, False


def _polish(prob: _Problem, x0: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Local SLSQP on the polytope ``{simplex, rows @ p >= alpha}``."""
    cons = [
        {"type": "eq", "fun": lambda p: np.sum(p) - 1.0, "jac": lambda p: np.ones_like(p)},
        {"type": "ineq", "fun": lambda p: rows @ p - prob.alpha, "jac": lambda p: rows},
    ]
    res = minimize(
        lambda p: -prob.value(p),
        x0,
        jac=lambda p: -prob.grad(p),
        bounds=[(0.0, 1.0)] * x0.size,
        constraints=cons,
        method="SLSQP",
        options={"ftol": 1e-15, "maxiter": 500},
    )
    return prob.pull_to_feasible(prob._clean(res.x))


def _restart(
    prob: _Problem, cfg: SolverConfig, index: int, rows: np.ndarray | None
) -> tuple[np.ndarray, float, bool]:
    rng = np.random.default_rng([cfg.seed, index])
    start = rng.dirichlet(np.full(prob.anchor.size, 0.5))
    x, fx, ok = _ascend(prob, start, cfg)
    if rows is not None:
        # the ascent's feasibility pull leans toward the (symmetric) anchor, so
        # also polish straight from the raw start
        for p in (_polish(prob, x, rows), _polish(prob, start, rows)):
            fp = prob.value(p)
            if fp > fx and prob.feasible(p):
                x, fx = p, fp
    return x, fx, ok


def information_capacity(spec: ProblemSpec, cfg: SolverConfig | None = None) -> CapacityResult:
    """Maximize I(U;Y) over joints ``p(u, x)`` whose security level is at least ``alpha``.

    Returns an infeasible result with value 0 when no joint reaches ``alpha``.
    Global optimality is not certified; restarts are independent and seeded by
    ``(cfg.seed, restart_index)``, so the result does not depend on ``threads``.
    """
    cfg = cfg or SolverConfig()
    if not feasibility(spec.d, spec.alpha):
        return CapacityResult(0.0, None, False)
    u_size = cfg.u_size or spec.d.size
    prob = _Problem(spec, u_size)

    rows = None
    if cfg.polish and prob.shape[1] ** prob.shape[0] <= MAX_POLYTOPE_ROWS:
        rows = estimator_constraints(prob.shape[0], spec.d)

    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            runs = list(pool.map(lambda i: _restart(prob, cfg, i, rows), range(cfg.restarts)))
    else:
        runs = [_restart(prob, cfg, i, rows) for i in range(cfg.restarts)]

    # ties resolved by restart index so the merge is order-independent
    top = min(range(len(runs)), key=lambda i: (-runs[i][1], i))
    best = prob._clean(runs[top][0])
    if not prob.feasible(best):
        best = prob.pull_to_feasible(best)
    value = prob.value(best)
    if abs(value) < 1e-12:
        value = 0.0
    joint = JointUX(best.reshape(prob.shape))

    vals = sorted((r[1] for r in runs), reverse=True)
    gap = vals[0] - vals[1] if len(vals) > 1 else 0.0
    sig = sigma(joint, spec.d)
    diag = SolverDiagnostics(
        restarts=len(runs),
        converged_restarts=sum(r[2] for r in runs),
        best_gap=float(gap),
        constraint_active=bool(spec.alpha > 0 and sig - spec.alpha <= 1e-6),
        polished=rows is not None,
        restart_values=[float(r[1]) for r in runs],
    )
    if not diag.converged:
        log.warning("no restart converged within %d iterations", cfg.max_iter)
    return CapacityResult(float(value), joint, True, diag)


def grid_search_binary(ch_yx: Channel, d: DistortionMatrix, alpha: float, step: float = 0.01) -> tuple[float, np.ndarray | None]:
    """Dense grid over the 3-simplex of binary joints; returns (best value, best joint)."""
    if ch_yx.in_size != 2 or d.size != 2:
        raise ValueError("grid search is for binary content alphabets")
    k = int(round(1.0 / step))
    i = np.arange(k + 1)
    a, b, c = np.meshgrid(i, i, i, indexing="ij")
    keep = a + b + c <= k
    pts = np.stack([a[keep], b[keep], c[keep], k - a[keep] - b[keep] - c[keep]], axis=1) / k
    joints = pts.reshape(-1, 2, 2)
    risk = joints @ d.d.T
    sig = risk.min(axis=2).sum(axis=1)
    ok = sig >= alpha - 1e-12
    if not ok.any():
        return 0.0, None
    q = joints[ok] @ ch_yx.rows
    pu = q.sum(axis=2, keepdims=True)
    py = q.sum(axis=1, keepdims=True)
    prod = pu * py
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(q > 0, q * np.log2(q / prod), 0.0)
    mi = terms.sum(axis=(1, 2))
    best = int(np.argmax(mi))
    return float(mi[best]), joints[ok][best]


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    capacity: float


def capacity_sweep(
    channel: Channel,
    d: DistortionMatrix,
    alphas,
    mode: str = "closed-form",
    cfg: SolverConfig | None = None,
) -> list[SweepRow]:
    """Capacity at each alpha of an ascending grid."""
    alphas = [float(a) for a in alphas]
    if any(b < a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alpha grid must be sorted ascending")
    if mode == "closed-form":
        p1 = channel.bsc_crossover()
        if p1 is None or not d.is_hamming or d.size != 2:
            raise ValueError("closed-form mode needs a binary symmetric channel and Hamming distortion")
        return [SweepRow(a, binary_capacity_closed_form(p1, a)) for a in alphas]
    if mode == "generic":
        return [
            SweepRow(a, information_capacity(ProblemSpec(channel, d, a), cfg).value)
            for a in alphas
        ]
    raise ValueError(f"unknown mode {mode!r}")
