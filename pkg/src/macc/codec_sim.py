"""Monte Carlo simulation of random asymmetric codebooks.

Each message gets a content codeword (encoder side) and a hash codeword
(decoder side), drawn letter by letter from a joint ``p(u, x)``. The content
codeword goes through the channel; the decoder only sees hash codewords.

Randomness: every trial draws from its own stream seeded by
``(seed, trial_index)``, so reports are identical for serial and threaded runs.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .prob_core import Channel, JointUX, JointUY, effective_channel, joint_uy_from, marginals
from .security import DistortionMatrix, EstimatorMap, bayes_estimator

DEFAULT_SEED = 20240101
_CODEBOOK_KEY = 0xC0DE
_CHUNK = 1 << 16


@dataclass(frozen=True)
class CodeParams:
    n: int
    M: int
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"blocklength n must be >= 1, got {self.n}")
        if self.M < 2:
            raise ValueError(f"number of messages M must be >= 2, got {self.M}")

    @property
    def rate(self) -> float:
        """Bits per channel use, ``log2(M) / n``."""
        return math.log2(self.M) / self.n


@dataclass(frozen=True, eq=False)
class CodebookPair:
    """Content codewords ``enc`` and hash codewords ``dec``; row ``w-1`` is message ``w``."""

    enc: np.ndarray
    dec: np.ndarray

    @property
    def M(self) -> int:
        return self.enc.shape[0]

    @property
    def n(self) -> int:
        return self.enc.shape[1]

    @property
    def collisions(self) -> int:
        """Number of hash rows that duplicate an earlier row."""
        return self.M - np.unique(self.dec, axis=0).shape[0]


@dataclass(frozen=True)
class DecoderConfig:
    kind: str = "ml"
    epsilon: float = 0.05

    def __post_init__(self):
        if self.kind not in ("ml", "typicality"):
            raise ValueError(f"unknown decoder kind {self.kind!r}")
        if self.kind == "typicality" and not self.epsilon > 0:
            raise ValueError("typicality decoding needs epsilon > 0")


@dataclass
class SimReport:
    n: int
    M: int
    trials: int
    errors: int
    collisions: int
    attacker_distortion_mean: float | None = None
    attacker_distortion_stderr: float | None = None
    # mean conditional error probability, only set by the collapsed estimator
    expected_pe: float | None = None

    @property
    def empirical_pe(self) -> float:
        return self.errors / self.trials if self.trials else 0.0

    @property
    def stderr(self) -> float:
        p = self.empirical_pe
        return math.sqrt(p * (1 - p) / self.trials) if self.trials else 0.0

    @property
    def rate(self) -> float:
        return math.log2(self.M) / self.n


@dataclass
class AttackReport:
    n: int
    M: int
    trials: int
    mean: float
    stderr: float
    sigma: float
    per_trial: np.ndarray


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def codebook_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(_CODEBOOK_KEY,)))
    )


# --- sampling -------------------------------------------------------------


def sample_symbols(p: np.ndarray, shape, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. draws from pmf ``p`` by inverse CDF; zero-mass symbols never appear."""
    cdf = np.cumsum(p)
    r = rng.random(shape) * cdf[-1]
    idx = np.searchsorted(cdf, r, side="right")
    return np.minimum(idx, len(p) - 1).astype(np.uint8)


def sample_joint(j: JointUX, shape, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``(u, x)`` pairs; returns two arrays of the given shape."""
    flat = sample_symbols(j.table.ravel(), shape, rng)
    return flat // j.x_size, flat % j.x_size


def generate_codebooks(j: JointUX, cp: CodeParams, rng: np.random.Generator | None = None) -> CodebookPair:
    """``M x n`` letters drawn i.i.d. from ``j``; uses the codebook stream of ``cp.seed`` by default."""
    rng = rng if rng is not None else codebook_rng(cp.seed)
    u, x = sample_joint(j, (cp.M, cp.n), rng)
    return CodebookPair(enc=x, dec=u)


def transmit(x_word: np.ndarray, ch_yx: Channel, rng: np.random.Generator) -> np.ndarray:
    """Pass each symbol independently through the channel."""
    x_word = np.asarray(x_word)
    cdf = np.cumsum(ch_yx.rows, axis=1)[x_word]
    r = rng.random(x_word.shape)
    y = (r[..., None] >= cdf).sum(axis=-1)
    return np.minimum(y, ch_yx.out_size - 1).astype(np.uint8)


# --- decoding -------------------------------------------------------------


class _PairScorer:
    """Log-likelihood of a codeword from its ``(u, y)`` pair counts.

    Terms are grouped by distinct log-probability values and summed in a
    fixed order, so codewords with equal likelihood get bit-identical scores
    and ties always resolve to the lowest index.
    """

    def __init__(self, ch_yu: np.ndarray):
        with np.errstate(divide="ignore"):
            logp = np.log(np.asarray(ch_yu, dtype=float)).ravel()
        self.ny = ch_yu.shape[1]
        self.impossible = ~np.isfinite(logp)
        self.values, group = np.unique(np.where(self.impossible, 0.0, logp), return_inverse=True)
        onehot = np.zeros((logp.size, self.values.size), dtype=np.int64)
        onehot[np.arange(logp.size), group] = 1
        onehot[self.impossible] = 0
        self.onehot = onehot

    def scores(self, counts: np.ndarray) -> np.ndarray:
        counts = np.asarray(counts, dtype=np.int64)
        agg = counts @ self.onehot
        s = np.zeros(counts.shape[:-1])
        for i, v in enumerate(self.values):
            s += agg[..., i] * v
        if self.impossible.any():
            dead = counts[..., self.impossible].sum(axis=-1) > 0
            s = np.where(dead, -np.inf, s)
        return s

    def counts(self, dec: np.ndarray, y_word: np.ndarray) -> np.ndarray:
        codes = dec.astype(np.int64) * self.ny + np.asarray(y_word, dtype=np.int64)
        k = self.onehot.shape[0]
        return np.stack([(codes == c).sum(axis=-1) for c in range(k)], axis=-1)


def _dec_rows(cb) -> np.ndarray:
    return cb.dec if isinstance(cb, CodebookPair) else np.asarray(cb)


def decode_ml(y_word: np.ndarray, cb, ch_yu) -> int:
    """Maximum-likelihood message (1-based); ties go to the lowest index.

    ``ch_yu`` is the channel from hash symbols to outputs (``Channel`` or matrix).
    """
    rows = ch_yu.rows if isinstance(ch_yu, Channel) else np.asarray(ch_yu)
    scorer = _PairScorer(rows)
    s = scorer.scores(scorer.counts(_dec_rows(cb), y_word))
    return int(np.argmax(s)) + 1


def _neg_log2(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return -np.log2(p)


def decode_typicality(y_word: np.ndarray, cb, joint_uy: JointUY, eps: float) -> int:
    """Unique jointly typical hash codeword (1-based), or 0 if none or several.

    A pair is typical when the empirical entropies of ``u``, ``y`` and ``(u, y)``
    are each within ``eps`` bits of ``H(U)``, ``H(Y)`` and ``H(U, Y)``.
    """
    if not eps > 0:
        raise ValueError("eps must be > 0")
    dec = _dec_rows(cb)
    y_word = np.asarray(y_word)
    n = y_word.shape[-1]
    t = joint_uy.table
    pu, py = t.sum(axis=1), t.sum(axis=0)
    h_u = float(-np.sum(pu[pu > 0] * np.log2(pu[pu > 0])))
    h_y = float(-np.sum(py[py > 0] * np.log2(py[py > 0])))
    tt = t[t > 0]
    h_uy = float(-np.sum(tt * np.log2(tt)))

    ny = t.shape[1]
    codes = dec.astype(np.int64) * ny + y_word.astype(np.int64)
    counts = np.stack([(codes == c).sum(axis=-1) for c in range(t.size)], axis=-1)
    counts_u = counts.reshape(-1, t.shape[0], ny).sum(axis=2)
    counts_y = np.bincount(y_word.astype(np.int64), minlength=ny)

    def emp(c, p):
        w = _neg_log2(p)
        hit = c > 0
        # a symbol of zero probability makes the sample entropy infinite
        return np.where((hit & ~np.isfinite(w)).any(axis=-1), np.inf,
                        (np.where(hit, c, 0) * np.where(np.isfinite(w), w, 0)).sum(axis=-1) / n)

    ok = (
        (np.abs(emp(counts_u, pu) - h_u) < eps)
        & (np.abs(emp(counts, t.ravel()) - h_uy) < eps)
        & (abs(float(emp(counts_y[None, :], py)[0]) - h_y) < eps)
    )
    hits = np.flatnonzero(ok)
    return int(hits[0]) + 1 if hits.size == 1 else 0


# --- bit-packed binary ML ---------------------------------------------------


def _n_words(n: int) -> int:
    return (n + 63) // 64


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack 0/1 arrays along the last axis into little-endian uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    n = bits.shape[-1]
    w = _n_words(n)
    packed = np.packbits(bits, axis=-1, bitorder="little")
    pad = w * 8 - packed.shape[-1]
    if pad:
        packed = np.concatenate(
            [packed, np.zeros(packed.shape[:-1] + (pad,), dtype=np.uint8)], axis=-1
        )
    return np.ascontiguousarray(packed).view("<u8")


def _random_words(rows: int, n: int, q: float, rng: np.random.Generator) -> np.ndarray:
    """Word-major ``(W, rows)`` packed rows with i.i.d. Bernoulli(q) bits."""
    w = _n_words(n)
    if q == 0.5:
        out = rng.bit_generator.random_raw(rows * w).astype(np.uint64, copy=False).reshape(w, rows)
        tail = n % 64
        if tail:
            out[-1] &= np.uint64((1 << tail) - 1)
        return out
    out = np.empty((w, rows), dtype=np.uint64)
    for start in range(0, rows, _CHUNK):
        stop = min(rows, start + _CHUNK)
        out[:, start:stop] = pack_bits(rng.random((stop - start, n)) < q).T
    return out


def _popcount_words(words: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
    acc = np.zeros(words.shape[1], dtype=np.int32)
    for i, row in enumerate(words):
        acc += np.bitwise_count(row if mask is None else row & mask[i])
    return acc


def _score_grid(scorer: "_PairScorer", n: int, k: int) -> np.ndarray:
    """Score of every binary row by its counts; entry ``[n11, n10]``, given ``k`` ones in y."""
    a = np.arange(k + 1)[:, None]
    b = np.arange(n - k + 1)[None, :]
    counts = np.stack(np.broadcast_arrays(n - k - b, k - a, b, a), axis=-1)
    return scorer.scores(counts)


def count_duplicate_words(words: np.ndarray) -> int:
    """Rows equal to an earlier row, for word-major packed ``(W, M)`` arrays."""
    key = words[0].copy()
    for i in range(1, words.shape[0]):
        key ^= words[i] * np.uint64(0x9E3779B97F4A7C15 + 2 * i)
    ks = np.sort(key)
    dup_keys = ks[1:][ks[1:] == ks[:-1]]
    if dup_keys.size == 0:
        return 0
    sub = words[:, np.isin(key, dup_keys)].T
    return int(sub.shape[0] - np.unique(sub, axis=0).shape[0])


# --- experiments ------------------------------------------------------------


def _map_threads(fn, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def _summarize(cp: CodeParams, outcomes, measure_attack: bool) -> SimReport:
    trials = len(outcomes)
    errors = sum(o[0] for o in outcomes)
    collisions = sum(o[1] for o in outcomes)
    mean = se = None
    if measure_attack:
        dist = np.array([o[2] for o in outcomes])
        mean = float(dist.mean())
        se = float(dist.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return SimReport(cp.n, cp.M, trials, int(errors), int(collisions), mean, se)


def run_error_experiment(
    j: JointUX,
    ch_yx: Channel,
    cp: CodeParams,
    dec: DecoderConfig | None = None,
    trials: int = 1000,
    *,
    d: DistortionMatrix | None = None,
    fixed_codebook: bool = False,
    random_message: bool = False,
    threads: int = 1,
) -> SimReport:
    """Estimate the average error probability of random asymmetric codes.

    Each trial draws a fresh codebook (or reuses one fixed codebook), sends
    message 1 (or a uniform message with ``random_message``), and decodes from
    the hash codebook. A codebook whose hash rows are not all distinct cannot
    be decoded; such trials are aborted, counted in ``collisions`` and scored
    as errors (null decision).

    With fresh codebooks only the sent message's content codeword is ever
    used, so the other messages' hash rows are drawn straight from the hash
    marginal ``p(u)``; this is the same distribution as drawing full pairs.
    When ``d`` is given, the Bayes attacker's per-letter distortion on the
    sent pair is averaged over trials.
    """
    dec = dec or DecoderConfig()
    if ch_yx.in_size != j.x_size:
        raise ValueError(
            f"dimension mismatch: channel has {ch_yx.in_size} inputs, joint has {j.x_size} content symbols"
        )
    if d is not None and d.size != j.x_size:
        raise ValueError("distortion matrix does not match the content alphabet")
    n, m = cp.n, cp.M
    ch_yu = effective_channel(j, ch_yx).channel
    pu = marginals(j)[0].probs
    juy = joint_uy_from(j, ch_yx)
    estimator = bayes_estimator(j, d) if d is not None else None
    binary_fast = dec.kind == "ml" and j.u_size == 2 and ch_yx.out_size == 2 and not fixed_codebook
    scorer = _PairScorer(ch_yu.rows)

    fixed = generate_codebooks(j, cp) if fixed_codebook else None
    fixed_collided = fixed is not None and fixed.collisions > 0

    def attack(u_row, x_row):
        if estimator is None:
            return None
        return float(d.d[estimator(u_row), x_row].mean())

    def decide(y, rows):
        if dec.kind == "ml":
            return int(np.argmax(scorer.scores(scorer.counts(rows, y)))) + 1
        return decode_typicality(y, rows, juy, dec.epsilon)

    def one(t: int):
        rng = trial_rng(cp.seed, t)
        w = int(rng.integers(1, m + 1)) if random_message else 1
        if fixed is not None:
            x_row, u_row = fixed.enc[w - 1], fixed.dec[w - 1]
            y = transmit(x_row, ch_yx, rng)
            if fixed_collided:
                return True, True, attack(u_row, x_row)
            return decide(y, fixed.dec) != w, False, attack(u_row, x_row)

        u_row, x_row = sample_joint(j, n, rng)
        y = transmit(x_row, ch_yx, rng)
        if binary_fast:
            others = _random_words(m - 1, n, float(pu[1]), rng)
            u_p, y_p = pack_bits(u_row), pack_bits(y)
            if (
                count_duplicate_words(others) > 0
                or (others == u_p[:, None]).all(axis=0).any()
            ):
                return True, True, attack(u_row, x_row)
            k = int(y.sum())
            grid = _score_grid(scorer, n, k)
            n11_t = int((u_row & y).sum())
            s_true = grid[n11_t, int(u_row.sum()) - n11_t]
            n11 = _popcount_words(others, y_p)
            idx = n11 * (n - k + 1) + (_popcount_words(others) - n11)
            flat = grid.ravel()
            # others[i] sits at message index i+1 before w, i+2 after
            lost = bool((flat[idx] > s_true).any() or (flat[idx[: w - 1]] == s_true).any())
            return lost, False, attack(u_row, x_row)

        others = np.empty((m - 1, n), dtype=np.uint8)
        for start in range(0, m - 1, _CHUNK):
            stop = min(m - 1, start + _CHUNK)
            others[start:stop] = sample_symbols(pu, (stop - start, n), rng)
        rows = np.concatenate([others[: w - 1], u_row[None, :].astype(np.uint8), others[w - 1 :]])
        if np.unique(rows, axis=0).shape[0] < m:
            return True, True, attack(u_row, x_row)
        return decide(y, rows) != w, False, attack(u_row, x_row)

    outcomes = _map_threads(one, range(trials), threads)
    return _summarize(cp, outcomes, estimator is not None)


def collapsed_error_experiment(
    j: JointUX, ch_yx: Channel, cp: CodeParams, trials: int = 1000, *, threads: int = 1
) -> SimReport:
    """Fresh-codebook ML error rate for binary hash/output alphabets without storing codebooks.

    Given the sent pair and the channel output, the other ``M - 1`` hash rows
    are i.i.d. and independent of everything else, and their likelihood
    depends only on two binomial counts. So the conditional probability that
    some other row beats (or duplicates) the sent one is computed exactly, and
    the trial's outcome is drawn from it. This makes ``M`` up to ``2**60`` or
    so practical. Only duplicates of the sent hash row are modelled as
    collisions; duplicates among the other rows cannot change the decision
    for message 1 and are ignored. ``expected_pe`` holds the average
    conditional error probability.
    """
    if j.u_size != 2 or ch_yx.out_size != 2:
        raise ValueError("collapsed estimator needs binary hash and output alphabets")
    if ch_yx.in_size != j.x_size:
        raise ValueError("dimension mismatch between channel and joint")
    n, m = cp.n, cp.M
    q = float(marginals(j)[0].probs[1])
    scorer = _PairScorer(effective_channel(j, ch_yx).channel.rows)

    def one(t: int):
        rng = trial_rng(cp.seed, t)
        u_row, x_row = sample_joint(j, n, rng)
        y = transmit(x_row, ch_yx, rng)
        k = int(y.sum())
        n11 = int((u_row & y).sum())
        n10 = int(u_row.sum()) - n11
        grid = _score_grid(scorer, n, k)
        a = np.arange(k + 1)[:, None]
        b = np.arange(n - k + 1)[None, :]
        pmf = binom.pmf(a, k, q) * binom.pmf(b, n - k, q)
        p_beat = float(pmf[grid > grid[n11, n10]].sum())
        ones = int(u_row.sum())
        p_same = (q ** ones) * ((1 - q) ** (n - ones))
        p_coll = -math.expm1((m - 1) * math.log1p(-p_same)) if p_same < 1 else 1.0
        if rng.random() < p_coll:
            return True, True, p_coll
        beat = min(1.0, p_beat / (1 - p_same)) if p_same < 1 else 1.0
        p_err = -math.expm1((m - 1) * math.log1p(-beat)) if beat < 1 else 1.0
        return bool(rng.random() < p_err), False, p_coll + (1 - p_coll) * p_err

    outcomes = _map_threads(one, range(trials), threads)
    rep = _summarize(cp, [(e, c, None) for e, c, _ in outcomes], False)
    rep.expected_pe = float(np.mean([o[2] for o in outcomes]))
    return rep


def attack_distortion(cb: CodebookPair, estimator, d: DistortionMatrix) -> float:
    """Per-letter distortion of ``estimator`` (map or ``EstimatorMap``) over a codebook."""
    table = estimator.map if isinstance(estimator, EstimatorMap) else np.asarray(estimator)
    return float(d.d[table[cb.dec], cb.enc].mean())


def run_attack_experiment(
    j: JointUX,
    d: DistortionMatrix,
    cp: CodeParams,
    trials: int = 100,
    *,
    estimator=None,
    threads: int = 1,
) -> AttackReport:
    """Attacker reconstructs every content codeword from its hash codeword.

    Uses the letter-wise Bayes estimator unless another single-letter map is
    given. Trials share seeds across estimators, so comparisons are paired.
    """
    if d.size != j.x_size:
        raise ValueError("distortion matrix does not match the content alphabet")
    bayes = bayes_estimator(j, d)
    est = bayes if estimator is None else estimator

    def one(t: int) -> float:
        return attack_distortion(generate_codebooks(j, cp, trial_rng(cp.seed, t)), est, d)

    per = np.array(_map_threads(one, range(trials), threads))
    se = float(per.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return AttackReport(cp.n, cp.M, trials, float(per.mean()), se, float(bayes.per_u_risk.sum()), per)
