"""Practical wrappers around the core rule: placeholder startup (PL),
in-buffer replacement (REP) and probability amplification (PA)."""
from __future__ import annotations

from dataclasses import dataclass

from .bola import (
    BolaParams,
    DecisionVector,
    aggregate_size,
    decide_chunk,
    is_idle,
    reactivation_threshold,
)
from .media import BitrateLadder

PL_SCAN_STEP = 0.1  # virtual-buffer scan grid, in segments


def pl_virtual_buffer(
    buffer_segments: float,
    q_avl_s: float,
    w_p: float,
    probs,
    ladder: BitrateLadder,
    params: BolaParams,
    chunk_duration: float,
    mode: str = "aggregate",
) -> float:

    """Smallest virtual buffer level whose decision respects the size cap.

    During startup the true buffer is tiny and the plain rule grabs the
    largest levels; scanning Q' upward from Q on a 0.1-segment grid finds
    the first point where the decision at Q' fits the cap (aggregate mode:
    total size <= q_avl * w_p / 2; per-tile mode: each tile's size under
    an equal share of the same cap).  Returns Q unchanged when the plain
    decision already fits, or when no non-empty decision on the grid fits
    (the cap is then ignored rather than downloading nothing).
    """
    if mode not in ("aggregate", "per-tile"):
        raise ValueError(f"unknown cap mode {mode!r}")
    cap = q_avl_s * w_p / 2.0
    num_tiles = len(probs)

    def fits(decision: DecisionVector) -> bool:
        if mode == "aggregate":
            return aggregate_size(decision, ladder) <= cap
        share = cap / num_tiles
        return all(m is None or ladder[m].size_mbits <= share for m in decision)

    limit = reactivation_threshold(params, ladder, chunk_duration, probs)
    q = buffer_segments
    while q <= limit + PL_SCAN_STEP:
        decision = decide_chunk(q, probs, ladder, params, chunk_duration)
        if is_idle(decision):
            break
        if fits(decision):
            return q
        q += PL_SCAN_STEP
    return buffer_segments


@dataclass(frozen=True)
class ReplacementPlan:
    """Upgrade order for an already-buffered segment (tile is 0-based)."""

    chunk: int
    tile: int
    old_level: int
    new_level: int


@dataclass(frozen=True)
class StoredChunk:
    """A buffered, not-yet-played chunk as the replacement scan sees it."""

    chunk: int
    levels: tuple  # tuple[int | None, ...], stored level per tile
    probs: tuple  # current-time probability estimate for this chunk


REP_DANGER_S = 2.0  # buffer lead, in chunk durations, below which REP never replaces
REP_MIN_GAP = 2  # smallest level shortfall worth re-downloading


def rep_scan(
    stored,
    buffer_segments: float,
    ladder: BitrateLadder,
    params: BolaParams,
    chunk_duration: float,
) -> ReplacementPlan | None:
    """First worthwhile upgrade among buffered chunks, else None.

    Chunks are scanned in playback order, tiles in index order; a stored
    segment qualifies when the level the rule would pick right now (at the
    current buffer and that chunk's probabilities) exceeds it by at least
    REP_MIN_GAP.  Replacements only ever raise the level.
    """
    for sc in stored:
        picks = decide_chunk(buffer_segments, sc.probs, ladder, params, chunk_duration)
        for tile, (have, want) in enumerate(zip(sc.levels, picks)):
            if have is None or want is None:
                continue
            if want - have >= REP_MIN_GAP:
                return ReplacementPlan(sc.chunk, tile, have, want)
    return None


PA_GRID_STEP = 0.25


def pa_factor_grid(num_tiles: int) -> tuple[float, ...]:
    """Amplification factors 1, 1.25, ... up to the tile count."""
    grid = []
    f = 1.0
    while f <= num_tiles + 1e-9:
        grid.append(round(f, 2))
        f += PA_GRID_STEP
    return tuple(grid)


def pa_decide(
    buffer_segments: float,
    q_avl_s: float,
    probs,
    w_p: float,
    ladder: BitrateLadder,
    params: BolaParams,
    chunk_duration: float,
) -> DecisionVector:
    """Decide with amplified probabilities min(1, F * p).

    Larger factors wake up more tiles at higher levels; the largest factor
    whose decision's aggregate size stays within 0.5 * w_p * q_avl wins.
    F = 1 (the plain rule) is the fallback even when it violates the cap.
    """
    cap = 0.5 * w_p * q_avl_s
    plain = None
    for f in reversed(pa_factor_grid(len(probs))):
        scaled = tuple(min(1.0, f * p) for p in probs)
        decision = decide_chunk(buffer_segments, scaled, ladder, params, chunk_duration)
        if f == 1.0:
            plain = decision
        if aggregate_size(decision, ladder) <= cap:
            return decision
    if plain is None:
        plain = decide_chunk(buffer_segments, probs, ladder, params, chunk_duration)
    return plain
