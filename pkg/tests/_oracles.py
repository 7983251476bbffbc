"""Independent reference computations the tests grade the package against.

Everything here is written from the problem definitions alone and on
purpose shares no code with abr360 beyond plain data types (ladders are
read through their public fields).  Slow is fine; these only run on tiny
instances.
"""
from __future__ import annotations

import itertools
import math


def tile_score(level_1based, prob, q, ladder, v, gamma, delta):
    lv = ladder[level_1based]
    return (v * (lv.utility * prob + gamma * delta) - q) / lv.size_mbits


def best_tile_choice(prob, q, ladder, v, gamma, delta):
    """(level or None, score) maximizing the per-tile score, ties to the
    smaller level, None when nothing scores above zero."""
    best = (None, 0.0)
    for m in range(1, len(ladder) + 1):
        s = tile_score(m, prob, q, ladder, v, gamma, delta)
        if s > best[1]:
            best = (m, s)
    return best


def brute_force_value(q, probs, ladder, v, gamma, delta):
    """Max over all (M+1)^D decision vectors of the summed tile scores."""
    m = len(ladder)
    options = (None,) + tuple(range(1, m + 1))
    best = -math.inf
    for vector in itertools.product(options, repeat=len(probs)):
        total = 0.0
        for p, lv in zip(probs, vector):
            if lv is not None:
                total += tile_score(lv, p, q, ladder, v, gamma, delta)
        best = max(best, total)
    return best


def decision_value(decision, q, probs, ladder, v, gamma, delta):
    total = 0.0
    for p, lv in zip(probs, decision):
        if lv is not None:
            total += tile_score(lv, p, q, ladder, v, gamma, delta)
    return total


def staircase_by_bisection(prob, ladder, v, gamma, delta, q_hi, tol=1e-12):
    """Switch points of the per-tile choice as the buffer rises.

    Returns ([(q_switch, level_below, level_above), ...], cutoff) found by
    scanning a fine grid and bisecting every change point.  The cutoff is
    where the choice turns None for good.
    """

    def choice(q):
        return best_tile_choice(prob, q, ladder, v, gamma, delta)[0]

    switches = []
    steps = 4000
    prev_q, prev_c = 0.0, choice(0.0)
    cutoff = None
    for i in range(1, steps + 1):
        q = q_hi * i / steps
        c = choice(q)
        if c != prev_c:
            lo, hi = prev_q, q
            while hi - lo > tol:
                mid = (lo + hi) / 2.0
                if choice(mid) == prev_c:
                    lo = mid
                else:
                    hi = mid
            if c is None:
                cutoff = hi
            else:
                switches.append((hi, prev_c, c))
        prev_q, prev_c = q, c
    return switches, cutoff


def lookahead_reward(vector, probs, ladder, w_p, gamma, delta, beta=0.0):
    """Expected reward per download second of one decision vector."""
    agg = 0.0
    n = 0
    gain = 0.0
    for p, lv in zip(probs, vector):
        if lv is None:
            gain -= p * beta
            continue
        agg += ladder[lv].size_mbits
        n += 1
        gain += ladder[lv].utility * p
    if n == 0:
        return -math.inf
    return (gamma * n * delta + gain) / (agg / w_p)


def best_lookahead_reward(probs, ladder, w_p, gamma, delta, beta=0.0):
    options = (None,) + tuple(range(1, len(ladder) + 1))
    return max(
        lookahead_reward(vec, probs, ladder, w_p, gamma, delta, beta)
        for vec in itertools.product(options, repeat=len(probs))
    )


def numeric_download_finish(start, size, trace, step=1e-4):
    """Riemann-sum the trace until `size` megabits accumulate.

    Accurate to roughly step * rate; only used to cross-check the exact
    integrator on short downloads.
    """
    if size == 0:
        return start
    acc = 0.0
    t = start
    while acc < size:
        acc += trace.rate_at(t) * step
        t += step
        if t > start + 1e7:
            raise RuntimeError("numeric integration ran away")
    return t


def enumerate_paths_bound(video, trace, probs, t0, gamma, q_max):
    """Offline bound by exhaustive search over whole action sequences.

    Mirrors the quantized transition arithmetic from the recurrence
    definition but never merges states, so agreement with a DP result is
    meaningful evidence the DP explored everything.
    """
    from abr360.traces import download_finish

    ladder = video.ladder
    sizes = [lv.size_mbits for lv in ladder.levels]
    utils = [lv.utility for lv in ladder.levels]
    delta = video.chunk_duration
    d = video.num_tiles
    m = len(ladder)
    cap_s = q_max * delta
    options = (None,) + tuple(range(1, m + 1))
    actions = [
        vec for vec in itertools.product(options, repeat=d)
        if any(x is not None for x in vec)
    ]

    def walk(k, t_prev, b_prev, acc):
        if k == video.num_chunks:
            return acc
        best = -math.inf
        row = probs[k]
        for vec in actions:
            tiles = [(i, lv) for i, lv in enumerate(vec) if lv is not None]
            agg = sum(sizes[lv - 1] for _, lv in tiles)
            n = len(tiles)
            mk = sum(lv for _, lv in tiles)
            t_dl = download_finish(t_prev, agg, trace) - t_prev
            t0_full = max(t_dl, b_prev + n * delta - cap_s, 0.0)
            slots = math.floor(t0_full / t0 + 1e-9)
            t_q = slots * t0
            rebuf = max(t_q - b_prev, 0.0)
            gain = sum(
                (utils[lv - 1] * row[i] + gamma * delta) * mk / lv for i, lv in tiles
            )
            denom = t_q if t_q > 0 else t0
            best = max(
                best,
                walk(k + 1, t_prev + t_q, b_prev - t_q + rebuf + n * delta, acc + gain / denom),
            )
        return best

    return walk(0, 0.0, 0.0, 0.0) / video.num_chunks
