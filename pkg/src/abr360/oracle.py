"""Offline dynamic-programming upper bound on per-chunk QoE rate.

The oracle knows the whole bandwidth trace and head-probability matrix.
It walks chunk by chunk over sparse (wall time, buffered seconds) states
quantized to a slot length t0, trying every non-empty per-tile level
assignment.  Download times are rounded down to whole slots, which can
only improve the objective, so the result upper-bounds what any schedule
(online or not) can realize under the same quantization.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .media import VideoSpec
from .traces import BandwidthTrace, download_finish

ACTION_CAP = 4096
STATE_CAP = 10_000_000


class OracleCapacityError(RuntimeError):
    """The instance is too large for exhaustive bounding."""


@dataclass(frozen=True)
class OracleResult:
    bound: float  # max mean per-chunk reward rate
    num_chunks: int
    num_actions: int
    states_expanded: int  # states stored across all stages
    max_frontier: int  # largest single-stage state count
    final_states: int


def dp_off(
    video: VideoSpec,
    trace: BandwidthTrace,
    probs,
    t0: float,
    gamma: float,
    q_max: float,
    action_cap: int = ACTION_CAP,
    state_cap: int = STATE_CAP,
) -> OracleResult:
    """Upper bound for one session; probs is the K x D true matrix.

    Buffer state b is kept in seconds of video.  A transition downloading
    n segments of aggregate size S from state (t', b') takes T0 =
    max(T_download, b' + n*delta - q_max*delta, 0) seconds (the middle
    term waits out buffer capacity), floored to T' = floor(T0/t0)*t0.
    Rebuffering R = max(T' - b', 0) refills the clock, and the chunk
    contributes sum_d (v_d p_kd + gamma*delta) * M_k / (m_d * T') with
    M_k the sum of chosen level indices.  When flooring yields T' = 0 the
    divisor is clamped to one slot so the bound stays finite; the state
    still advances by T' = 0, which keeps the bound an upper bound.
    """
    if not t0 > 0:
        raise ValueError("t0 must be positive")
    if not q_max > 0:
        raise ValueError("q_max must be positive")
    ladder = video.ladder
    d = video.num_tiles
    m = len(ladder)
    k_total = video.num_chunks
    if len(probs) != k_total:
        raise ValueError(f"probability matrix has {len(probs)} rows, video has {k_total} chunks")
    num_actions = (m + 1) ** d - 1
    if (m + 1) ** d > action_cap:
        raise OracleCapacityError(
            f"(M+1)^D = {(m + 1) ** d} exceeds the action cap {action_cap}"
        )
    sizes = ladder.sizes
    utils = ladder.utilities
    delta = video.chunk_duration
    options = (None,) + tuple(range(1, m + 1))
    actions = []
    for vector in itertools.product(options, repeat=d):
        tiles = tuple((i, lv) for i, lv in enumerate(vector) if lv is not None)
        if not tiles:
            continue  # skipping every tile is never allowed
        agg = sum(sizes[lv - 1] for _, lv in tiles)
        mk = sum(lv for _, lv in tiles)
        actions.append((tiles, agg, len(tiles), mk))

    # Per-chunk gain of each action, leaving only the 1/T' factor to the
    # state loop below.
    gains: list[list[float]] = []
    for k in range(k_total):
        row = probs[k]
        per_action = []
        for tiles, _agg, _n, mk in actions:
            g = 0.0
            for tile, lv in tiles:
                g += (utils[lv - 1] * row[tile] + gamma * delta) * mk / lv
            per_action.append(g)
        gains.append(per_action)

    cap_s = q_max * delta
    states: dict[tuple[float, float], float] = {(0.0, 0.0): 0.0}
    expanded = 1
    max_frontier = 1
    for k in range(k_total):
        nxt: dict[tuple[float, float], float] = {}
        gain_row = gains[k]
        for (t_prev, b_prev), reward in states.items():
            for idx, (tiles, agg, n, _mk) in enumerate(actions):
                t_dl = download_finish(t_prev, agg, trace) - t_prev
                t0_full = max(t_dl, b_prev + n * delta - cap_s, 0.0)
                slots = math.floor(t0_full / t0 + 1e-9)
                t_q = slots * t0
                rebuf = max(t_q - b_prev, 0.0)
                t_new = t_prev + t_q
                b_new = b_prev - t_q + rebuf + n * delta
                denom = t_q if t_q > 0 else t0
                value = reward + gain_row[idx] / denom
                key = (round(t_new, 9), round(b_new, 9))
                if nxt.get(key, -math.inf) < value:
                    nxt[key] = value
        states = nxt
        expanded += len(states)
        max_frontier = max(max_frontier, len(states))
        if expanded > state_cap:
            raise OracleCapacityError(
                f"state count {expanded} exceeds the cap {state_cap} after chunk {k + 1}"
            )
    bound = max(states.values()) / k_total
    return OracleResult(
        bound=bound,
        num_chunks=k_total,
        num_actions=num_actions,
        states_expanded=expanded,
        max_frontier=max_frontier,
        final_states=len(states),
    )


def dominance_check(oracle_bound: float, realized_qoe: float, tol: float = 1e-9) -> bool:
    """True when the offline bound dominates a realized session QoE."""
    return oracle_bound >= realized_qoe - tol
