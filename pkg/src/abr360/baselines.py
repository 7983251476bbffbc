"""Comparison algorithms and the bandwidth predictor they share.

All five baselines pick levels from throughput predictions rather than
buffer thresholds.  Each returns an ordinary decision vector so the
session engine treats them exactly like the buffer-based rule.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .bola import DecisionVector
from .media import BitrateLadder


@dataclass(frozen=True)
class PredictorConfig:
    """Sliding-window arithmetic-mean throughput estimator."""

    window_s: float = 5.0
    bootstrap_mbps: float = 1.0

    def __post_init__(self) -> None:
        if not self.window_s > 0:
            raise ValueError("predictor window must be positive")
        if not self.bootstrap_mbps > 0:
            raise ValueError("bootstrap bandwidth must be positive")


@dataclass(frozen=True)
class DownloadSample:
    """One completed download: wall-clock interval and delivered megabits."""

    start: float
    finish: float
    mbits: float


def predict_bandwidth(history, now: float, config: PredictorConfig) -> float:
    """Mean delivery rate over the trailing window.

    Bits are prorated into the window; the denominator is the time the
    link was actually observed (downloads inside the window), so idle gaps
    do not dilute the estimate.  Returns the bootstrap value until some
    download overlaps the window.
    """
    lo = now - config.window_s
    bits = 0.0
    covered = 0.0
    for sample in history:
        a = max(sample.start, lo)
        b = min(sample.finish, now)
        if b <= a:
            continue
        duration = sample.finish - sample.start
        if duration <= 0:
            continue
        bits += sample.mbits * (b - a) / duration
        covered += b - a
    if covered <= 0:
        return config.bootstrap_mbps
    return bits / covered


DP_ON_ENUM_CAP = 2_000_000


def dp_on_decide(
    probs,
    w_p: float,
    ladder: BitrateLadder,
    gamma: float,
    chunk_duration: float,
    beta: float = 0.0,
    enum_cap: int = DP_ON_ENUM_CAP,
) -> DecisionVector:
    """One-chunk lookahead maximizing expected reward per download second.

    Enumerates every non-empty level assignment when (M+1)^D fits under
    enum_cap; otherwise falls back to deterministic coordinate ascent from
    the all-lowest vector (at most 10 sweeps).  beta penalizes the skip
    mass p_D and defaults to 0.
    """
    if not w_p > 0:
        raise ValueError("predicted bandwidth must be positive")
    d = len(probs)
    m = len(ladder)
    sizes = ladder.sizes
    utils = ladder.utilities

    def reward(vector) -> float:
        agg = 0.0
        n = 0
        gain = 0.0
        for p, lv in zip(probs, vector):
            if lv is None:
                gain -= p * beta
                continue
            agg += sizes[lv - 1]
            n += 1
            gain += utils[lv - 1] * p
        if n == 0:
            return -math.inf
        t = agg / w_p
        return (gamma * n * chunk_duration + gain) / t

    if (m + 1) ** d <= enum_cap:
        best = None
        best_r = -math.inf
        options = (None,) + tuple(range(1, m + 1))
        for vector in itertools.product(options, repeat=d):
            r = reward(vector)
            if r > best_r:
                best_r = r
                best = vector
        return best

    # Coordinate ascent: exact rewards, per-tile sweeps to a fixed point.
    current: list[int | None] = [1] * d
    for _ in range(10):
        changed = False
        for i in range(d):
            best_lv = current[i]
            best_r = reward(tuple(current))
            for lv in (None,) + tuple(range(1, m + 1)):
                if lv == current[i]:
                    continue
                trial = list(current)
                trial[i] = lv
                r = reward(tuple(trial))
                if r > best_r:
                    best_r = r
                    best_lv = lv
            if best_lv != current[i]:
                current[i] = best_lv
                changed = True
        if not changed:
            break
    return tuple(current)


def top_x_decide(
    probs, w_p: float, ladder: BitrateLadder, chunk_duration: float, x: int
) -> DecisionVector:
    """Equal level for the X most likely tiles, nothing for the rest.

    The shared level is the largest m with x * S_m <= delta * w_p, i.e.
    the selection is downloadable within one chunk duration at the
    predicted bandwidth; level 1 is the fallback when none fits.
    """
    d = len(probs)
    if not 1 <= x <= d:
        raise ValueError(f"x must lie in 1..{d}")
    budget = chunk_duration * w_p
    level = 1
    for lv in ladder.levels:
        if x * lv.size_mbits <= budget:
            level = lv.index
    order = sorted(range(d), key=lambda i: (-probs[i], i))
    chosen = set(order[:x])
    return tuple(level if i in chosen else None for i in range(d))


def va360_decide(probs, w_p: float, ladder: BitrateLadder) -> DecisionVector:
    """Probability-proportional bandwidth split, every tile downloaded.

    Tile d targets w_p * p_d Mbps and takes the ladder bitrate nearest the
    target, breaking distance ties toward the lower level.
    """
    decision = []
    for p in probs:
        target = w_p * p
        best = min(ladder.levels, key=lambda lv: (abs(lv.bitrate_mbps - target), lv.index))
        decision.append(best.index)
    return tuple(decision)


@dataclass(frozen=True)
class ProbDashParams:
    """Buffer-controlled budget with greedy expected-utility packing."""

    q_target_s: float = 10.0
    clamp_lo: float = 0.25
    clamp_hi: float = 2.0

    def __post_init__(self) -> None:
        if not self.q_target_s > 0:
            raise ValueError("target buffer must be positive")
        if not 0 < self.clamp_lo <= self.clamp_hi:
            raise ValueError("clamp bounds must satisfy 0 < lo <= hi")


def probdash_decide(
    probs,
    w_p: float,
    q_avl_s: float,
    ladder: BitrateLadder,
    chunk_duration: float,
    params: ProbDashParams,
) -> DecisionVector:
    """Water-filling under a rate budget B = w_p * clamp(q_avl / q_target).

    Every tile starts at level 1 (never dropped, even over budget); the
    remaining budget is spent on the single upgrade with the best marginal
    expected utility per megabit until nothing fits.
    """
    d = len(probs)
    ratio = q_avl_s / params.q_target_s
    ratio = min(max(ratio, params.clamp_lo), params.clamp_hi)
    budget = w_p * ratio * chunk_duration
    sizes = ladder.sizes
    utils = ladder.utilities
    levels = [1] * d
    agg = d * sizes[0]
    while True:
        best_i = -1
        best_ratio = 0.0
        for i in range(d):
            m = levels[i]
            if m >= len(ladder):
                continue
            dsize = sizes[m] - sizes[m - 1]
            dgain = probs[i] * (utils[m] - utils[m - 1])
            if agg + dsize > budget:
                continue
            marginal = math.inf if dsize <= 0 else dgain / dsize
            if marginal > best_ratio:
                best_ratio = marginal
                best_i = i
        if best_i < 0:
            return tuple(levels)
        levels[best_i] += 1
        agg += sizes[levels[best_i] - 1] - sizes[levels[best_i] - 2]


@dataclass(frozen=True)
class SalientParams:
    """Buffer-guarded saliency split; q_thr_s defaults to one chunk."""

    q_thr_s: float | None = None


def salient_vr_decide(
    probs,
    w_p: float,
    q_avl_s: float,
    ladder: BitrateLadder,
    chunk_duration: float,
    params: SalientParams,
) -> DecisionVector:
    """Split a safety-margined rate budget across tiles by probability.

    B_max = max(0, w_p * (q_avl - q_thr) / delta); tile d may spend
    p_d * B_max * delta megabits and takes the largest level that fits,
    with level 1 as the floor for every tile.
    """
    q_thr = params.q_thr_s if params.q_thr_s is not None else chunk_duration
    b_max = max(0.0, w_p * (q_avl_s - q_thr) / chunk_duration)
    decision = []
    for p in probs:
        tile_budget = p * b_max * chunk_duration
        level = 1
        for lv in ladder.levels:
            if lv.size_mbits <= tile_budget:
                level = lv.index
        decision.append(level)
    return tuple(decision)
