"""Buffer-threshold bitrate selection for tiled video (the BOLA360 rule).

Each tile of the next chunk is scored independently: downloading level m
for a tile viewed with probability p while the buffer holds Q segments is
worth (V * (v_m * p + gamma * delta) - Q) / S_m.  The per-tile maximizer
wins; a tile whose best score is not positive is skipped.  When every
tile is skipped the player idles and retries later.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .media import BitrateLadder

# Levels are 1-based everywhere; None in a decision vector means "no
# download for this tile", so a vector carries at most one level per tile
# by construction.
DecisionVector = tuple  # tuple[int | None, ...]


@dataclass(frozen=True)
class WaitPolicy:
    """How the player idles when a decision selects nothing.

    kind "fixed" retries after delta_s seconds (defaulting to half a chunk
    if delta_s is None); kind "dynamic" retries exactly when the projected
    buffer drain re-enables some tile.
    """

    kind: str = "dynamic"
    delta_s: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("fixed", "dynamic"):
            raise ValueError(f"unknown wait policy {self.kind!r}")
        if self.kind == "fixed" and self.delta_s is not None and not self.delta_s > 0:
            raise ValueError("fixed wait needs a positive delay")


@dataclass(frozen=True)
class BolaParams:
    """Control parameters: V trades buffer headroom for quality, gamma
    weighs smooth playback against utility."""

    v: float
    gamma: float
    wait: WaitPolicy = WaitPolicy()

    def __post_init__(self) -> None:
        if not self.v > 0:
            raise ValueError("V must be positive")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


def score(
    level_index: int,
    prob: float,
    buffer_segments: float,
    ladder: BitrateLadder,
    params: BolaParams,
    chunk_duration: float,
) -> float:
    """Drift-plus-penalty score of one ladder level for one tile."""
    if not 0.0 <= prob <= 1.0:
        raise ValueError(f"probability {prob} outside [0, 1]")
    lv = ladder[level_index]
    gain = params.v * (lv.utility * prob + params.gamma * chunk_duration)
    return (gain - buffer_segments) / lv.size_mbits


def decide_chunk(
    buffer_segments: float,
    probs,
    ladder: BitrateLadder,
    params: BolaParams,
    chunk_duration: float,
) -> DecisionVector:
    """Pick a level (or None) per tile for the next chunk.

    Ties between levels break toward the smaller index; a best score of
    exactly zero skips the tile, matching the idle-at-threshold reading of
    the selection rule.
    """
    decision: list[int | None] = []
    for p in probs:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {p} outside [0, 1]")
        best_m: int | None = None
        best_s = 0.0
        for lv in ladder.levels:
            s = (params.v * (lv.utility * p + params.gamma * chunk_duration) - buffer_segments) / lv.size_mbits
            if s > best_s:
                best_s = s
                best_m = lv.index
        decision.append(best_m)
    return tuple(decision)


def v_upper_bound(
    q_max: float, num_tiles: int, max_utility: float, gamma: float, chunk_duration: float
) -> float:
    """Largest admissible V for a buffer capacity of q_max segments."""
    return (q_max - num_tiles) / (max_utility + gamma * chunk_duration)


def max_buffer_bound(params: BolaParams, ladder: BitrateLadder, chunk_duration: float, num_tiles: int) -> float:
    """Worst-case buffer occupancy at decision instants: V(v_M + gamma*delta) + D."""
    return params.v * (ladder.max_utility + params.gamma * chunk_duration) + num_tiles


def idle_threshold(params: BolaParams, ladder: BitrateLadder, chunk_duration: float) -> float:
    """Buffer level above which every tile is skipped even at probability 1."""
    return params.v * (ladder.max_utility + params.gamma * chunk_duration)


def reactivation_threshold(
    params: BolaParams, ladder: BitrateLadder, chunk_duration: float, probs
) -> float:
    """Buffer level below which at least one tile scores positive.

    With heterogeneous probabilities tiles switch off earlier than the
    probability-1 idle threshold; the effective wake-up point for a chunk
    is V * (v_M * max(p) + gamma * delta).
    """
    pmax = max(probs) if len(probs) else 0.0
    return params.v * (ladder.max_utility * pmax + params.gamma * chunk_duration)


def level_thresholds(
    prob: float, ladder: BitrateLadder, params: BolaParams, chunk_duration: float
):
    """Buffer thresholds of the per-tile level staircase.

    Returns ([(q_switch, lower_level, higher_level), ...], q_cutoff): the
    chosen level steps up through the listed switches as the buffer rises
    and the tile switches off entirely at q_cutoff.  Derived from the
    upper envelope of the per-level score lines, which are linear in Q.
    """
    gains = [params.v * (lv.utility * prob + params.gamma * chunk_duration) for lv in ladder.levels]
    sizes = ladder.sizes
    # Walk the envelope upward from Q = 0.
    switches: list[tuple[float, int, int]] = []
    m = _argmax_level(gains, sizes, 0.0)
    q = 0.0
    while True:
        cutoff = gains[m - 1]  # score of level m hits zero here
        best_q = math.inf
        best_next = None
        for j in range(m + 1, len(sizes) + 1):
            if sizes[j - 1] == sizes[m - 1] or gains[j - 1] <= gains[m - 1]:
                # equal-gain lines only meet at the cutoff itself; a
                # bigger size can never win strictly below it
                continue
            # crossing point of score lines m and j
            qx = (sizes[j - 1] * gains[m - 1] - sizes[m - 1] * gains[j - 1]) / (
                sizes[j - 1] - sizes[m - 1]
            )
            if qx > q + 1e-12 and qx < best_q:
                best_q = qx
                best_next = j
        if best_next is not None and best_q < cutoff:
            switches.append((best_q, m, best_next))
            q = best_q
            m = best_next
        else:
            return switches, cutoff


def _argmax_level(gains, sizes, q: float) -> int:
    best_m = 1
    best_s = -math.inf
    for i, (g, size) in enumerate(zip(gains, sizes)):
        s = (g - q) / size
        if s > best_s:
            best_s = s
            best_m = i + 1
    return best_m


def aggregate_size(decision: DecisionVector, ladder: BitrateLadder) -> float:
    """Total megabits a decision vector downloads."""
    return sum(ladder[m].size_mbits for m in decision if m is not None)


def segment_count(decision: DecisionVector) -> int:
    return sum(1 for m in decision if m is not None)


def is_idle(decision: DecisionVector) -> bool:
    return all(m is None for m in decision)
