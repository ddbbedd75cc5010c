"""Finite-alphabet distributions, channels and information measures.

Alphabets are index sets ``0..K-1``. All information quantities are in bits.
Inputs that are not normalized within ``TOL`` are rejected, never renormalized.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL = 1e-9


def _as_float_array(values, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    arr.setflags(write=False)
    return arr


def validate_dist(probs) -> str | None:
    """Return ``None`` if ``probs`` is a valid pmf, else a description of the violation."""
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        return f"expected a non-empty vector, got shape {p.shape}"
    if not np.all(np.isfinite(p)):
        return "non-finite entry"
    bad = np.flatnonzero((p < 0) | (p > 1))
    if bad.size:
        return f"entry {bad[0]} = {p[bad[0]]!r} outside [0, 1]"
    s = float(p.sum())
    if abs(s - 1.0) > TOL:
        return f"sum = {s:.12g}"
    return None


def _validate_table(t: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(t)):
        raise ValueError(f"{name}: non-finite entry")
    if np.any(t < 0) or np.any(t > 1):
        raise ValueError(f"{name}: entries must lie in [0, 1]")
    s = float(t.sum())
    if abs(s - 1.0) > TOL:
        raise ValueError(f"{name}: entries sum to {s:.12g}, not 1")


@dataclass(frozen=True, eq=False)
class Dist:
    """Probability mass function over ``0..size-1``."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _as_float_array(self.probs, 1, "Dist"))
        problem = validate_dist(self.probs)
        if problem is not None:
            raise ValueError(f"invalid distribution: {problem}")

    @property
    def size(self) -> int:
        return self.probs.shape[0]

    @classmethod
    def uniform(cls, size: int) -> "Dist":
        return cls(np.full(size, 1.0 / size))


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix; row ``r`` is the output law given input ``r``."""

    rows: np.ndarray

    def __post_init__(self):
        rows = _as_float_array(self.rows, 2, "Channel")
        if not np.all(np.isfinite(rows)) or np.any(rows < 0) or np.any(rows > 1):
            raise ValueError("Channel: entries must lie in [0, 1]")
        sums = rows.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > TOL)
        if bad.size:
            raise ValueError(f"Channel: row {bad[0]} sums to {sums[bad[0]]:.12g}")
        object.__setattr__(self, "rows", rows)

    @property
    def in_size(self) -> int:
        return self.rows.shape[0]

    @property
    def out_size(self) -> int:
        return self.rows.shape[1]

    @classmethod
    def identity(cls, size: int) -> "Channel":
        return cls(np.eye(size))

    @classmethod
    def bsc(cls, p: float) -> "Channel":
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"crossover {p} outside [0, 1]")
        return cls([[1.0 - p, p], [p, 1.0 - p]])

    def bsc_crossover(self) -> float | None:
        """Crossover probability if this is a binary symmetric channel, else ``None``."""
        r = self.rows
        if r.shape != (2, 2) or abs(r[0, 1] - r[1, 0]) > TOL:
            return None
        return float(r[0, 1])


@dataclass(frozen=True, eq=False)
class _Joint:
    table: np.ndarray

    def __post_init__(self):
        t = _as_float_array(self.table, 2, type(self).__name__)
        _validate_table(t, type(self).__name__)
        object.__setattr__(self, "table", t)

    @property
    def shape(self) -> tuple[int, int]:
        return self.table.shape


class JointUX(_Joint):
    """Joint pmf ``p(u, x)``: rows are hash symbols, columns content symbols."""

    @property
    def u_size(self) -> int:
        return self.table.shape[0]

    @property
    def x_size(self) -> int:
        return self.table.shape[1]


class JointUY(_Joint):
    """Joint pmf ``p(u, y)``."""


def _check_dims(px: Dist, ch: Channel, name: str) -> None:
    if ch.in_size != px.size:
        raise ValueError(
            f"dimension mismatch: {name} has {ch.in_size} inputs, px has {px.size} symbols"
        )


def compose_markov(px: Dist, ch_yx: Channel, ch_ux: Channel) -> JointUY:
    """Joint of ``(U, Y)`` for the chain ``U <-> X <-> Y``.

    Entry ``(u, y)`` is ``sum_x px(x) p(y|x) p(u|x)``.
    """
    _check_dims(px, ch_yx, "ch_yx")
    _check_dims(px, ch_ux, "ch_ux")
    table = np.einsum("x,xy,xu->uy", px.probs, ch_yx.rows, ch_ux.rows)
    return JointUY(table)


def joint_ux_from(px: Dist, ch_ux: Channel) -> JointUX:
    _check_dims(px, ch_ux, "ch_ux")
    return JointUX((px.probs[:, None] * ch_ux.rows).T)


def joint_uy_from(j: JointUX, ch_yx: Channel) -> JointUY:
    """``p(u, y) = sum_x p(u, x) p(y|x)``; same as composing through the marginal of ``j``."""
    if ch_yx.in_size != j.x_size:
        raise ValueError(
            f"dimension mismatch: channel has {ch_yx.in_size} inputs, joint has {j.x_size}"
        )
    return JointUY(j.table @ ch_yx.rows)


def marginals(j: _Joint) -> tuple[Dist, Dist]:
    """Row and column marginals ``(p(u), p(x))``."""
    t = j.table
    return Dist(_clip_norm(t.sum(axis=1))), Dist(_clip_norm(t.sum(axis=0)))


def _clip_norm(p: np.ndarray) -> np.ndarray:
    # summation can land a hair outside [0, 1]
    return np.clip(p, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class Conditional:
    """Conditional pmf with rows that may be undefined (zero-mass conditioning symbol).

    Undefined rows are stored as uniform so ``channel`` stays row-stochastic;
    ``defined`` says which rows carry meaning.
    """

    channel: Channel
    defined: np.ndarray


def _conditional(t: np.ndarray) -> Conditional:
    mass = t.sum(axis=1)
    defined = mass > 0
    rows = np.full_like(t, 1.0 / t.shape[1])
    rows[defined] = t[defined] / mass[defined, None]
    return Conditional(Channel(rows), defined)


def conditionals(j: JointUX) -> tuple[Conditional, Conditional]:
    """``(p(x|u), p(u|x))`` from a joint ``p(u, x)``."""
    return _conditional(j.table), _conditional(j.table.T)


def effective_channel(j: JointUX, ch_yx: Channel) -> Conditional:
    """Channel ``p(y|u)`` seen by a decoder holding hash codewords."""
    return _conditional(joint_uy_from(j, ch_yx).table)


def entropy(d) -> float:
    """Shannon entropy in bits of a pmf (``Dist`` or any array of probabilities)."""
    p = np.asarray(d.probs if isinstance(d, Dist) else d, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p))) + 0.0


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p = {p} outside [0, 1]")
    return entropy([p, 1.0 - p])


def mutual_information(j) -> float:
    """``I(U;Y)`` in bits for a 2-D joint (``JointUY``/``JointUX`` or array)."""
    t = np.asarray(j.table if isinstance(j, _Joint) else j, dtype=float)
    pu = t.sum(axis=1, keepdims=True)
    py = t.sum(axis=0, keepdims=True)
    prod = pu * py
    mask = (t > 0) & (prod > 0)
    mi = float(np.sum(t[mask] * np.log2(t[mask] / prod[mask])))
    return max(mi, 0.0)
