"""Continuous-time playback/download simulation of one streaming session.

The downloader is the master process: it decides chunk k, waits out idle
or buffer-capacity delays, then downloads the selected segments back to
back.  Playback runs alongside: chunk renders are pinned as soon as their
inputs are known (render start = max(previous render end, chunk ready
time)), so buffer levels at any time, including projections into the
future, follow from the piecewise-linear drain over the fixed renders.

Buffer accounting matches the segment-count dynamics exactly: while a
chunk with n downloaded segments plays, the buffer drains at n / delta
segments per second, and every segment deposits at its download finish.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .baselines import DownloadSample, PredictorConfig, predict_bandwidth
from .bola import WaitPolicy, is_idle, v_upper_bound
from .headmodel import HeadModel, noisy_probs, sample_viewed_sequence
from .heuristics import StoredChunk
from .media import BitrateLadder, VideoSpec, validate_video
from .policy import (
    ALGORITHM_IDS,
    Download,
    Observation,
    Policy,
    Replace,
    Skip,
    bola_params_from_options,
    make_policy,
)
from .traces import BandwidthTrace, download_finish

_EPS = 1e-12


class ConfigError(ValueError):
    """A session or experiment configuration is unusable."""


class SimulationError(RuntimeError):
    """The session cannot proceed (deadlock, impossible admission, ...)."""


@dataclass(frozen=True)
class SessionConfig:
    video: VideoSpec
    trace: BandwidthTrace
    head: HeadModel
    algorithm: str
    q_max: float
    gamma: float
    seed: int = 0
    noise_rate: float = 0.0
    predictor: PredictorConfig = PredictorConfig()
    algo_options: dict = field(default_factory=dict)


BOLA_FAMILY = ("bola360", "bola360-pl", "bola360-rep", "bola360-pa")


def shared_violations(config: SessionConfig) -> list[str]:
    """Problems independent of the algorithm choice."""
    problems = validate_video(config.video)
    if not config.q_max > 0:
        problems.append(f"q_max must be positive, got {config.q_max}")
    if config.q_max < config.video.num_tiles:
        problems.append(
            f"q_max={config.q_max} cannot admit a full chunk of {config.video.num_tiles} tiles"
        )
    if not config.gamma > 0:
        problems.append(f"gamma must be positive, got {config.gamma}")
    if config.noise_rate < 0:
        problems.append(f"noise_rate must be nonnegative, got {config.noise_rate}")
    if config.head.num_chunks != config.video.num_chunks:
        problems.append(
            f"head model covers {config.head.num_chunks} chunks, video has {config.video.num_chunks}"
        )
    if config.head.num_tiles != config.video.num_tiles:
        problems.append(
            f"head model has {config.head.num_tiles} tiles, video has {config.video.num_tiles}"
        )
    return problems


def algorithm_violations(
    algo_id: str, options: dict, video: VideoSpec, gamma: float, q_max: float
) -> list[str]:
    """Problems specific to one algorithm entry (id, options, V bound)."""
    if algo_id not in ALGORITHM_IDS:
        return [f"unknown algorithm {algo_id!r}; known: {', '.join(ALGORITHM_IDS)}"]
    if algo_id not in BOLA_FAMILY or len(video.ladder) == 0:
        return []
    try:
        params = bola_params_from_options(options, video, gamma, q_max)
    except ValueError as exc:
        return [f"{algo_id}: {exc}"]
    ceiling = v_upper_bound(
        q_max, video.num_tiles, video.ladder.max_utility, gamma, video.chunk_duration
    )
    if not 0 < params.v < ceiling:
        return [f"V={params.v:.6g} outside (0, {ceiling:.6g}) required by q_max={q_max}"]
    return []


def validate_session_config(config: SessionConfig) -> list[str]:
    """Collect violations; an empty list means the session may run."""
    problems = shared_violations(config)
    problems.extend(
        algorithm_violations(
            config.algorithm, config.algo_options, config.video, config.gamma, config.q_max
        )
    )
    return problems


@dataclass(frozen=True)
class SegmentRecord:
    """One finished download; tile is 0-based, level 1-based."""

    chunk: int
    tile: int
    level: int
    start: float
    finish: float
    replacement: bool = False


@dataclass(frozen=True)
class DecisionRecord:
    chunk: int
    time: float  # epoch at which the final action was taken
    buffer: float  # Q at that epoch
    levels: tuple | None  # None when the chunk was skipped outright
    skipped: bool
    top_tile: int  # argmax of decision-time probabilities
    attempts: tuple  # ((time, buffer), ...) for every policy call this chunk
    idle_s: float
    download_start: float | None
    download_end: float | None


@dataclass(frozen=True)
class RenderRecord:
    chunk: int
    viewed_tile: int
    level: int | None  # None renders blank
    bitrate_mbps: float
    start: float
    ready: float | None


@dataclass(frozen=True)
class SessionLog:
    num_chunks: int
    num_tiles: int
    chunk_duration: float
    decisions: tuple
    segments: tuple
    renders: tuple
    effective_levels: tuple  # per chunk: level-or-None per tile at render start
    stalls: tuple  # non-overlapping (start, end) rebuffering intervals
    playback_start: float
    t_end: float
    viewed: tuple

    def to_dict(self) -> dict:
        return {
            "num_chunks": self.num_chunks,
            "num_tiles": self.num_tiles,
            "chunk_duration": self.chunk_duration,
            "playback_start": self.playback_start,
            "t_end": self.t_end,
            "viewed": list(self.viewed),
            "stalls": [list(s) for s in self.stalls],
            "decisions": [
                {
                    "chunk": d.chunk,
                    "time": d.time,
                    "buffer": d.buffer,
                    "levels": list(d.levels) if d.levels is not None else None,
                    "skipped": d.skipped,
                    "top_tile": d.top_tile,
                    "attempts": [list(a) for a in d.attempts],
                    "idle_s": d.idle_s,
                    "download_start": d.download_start,
                    "download_end": d.download_end,
                }
                for d in self.decisions
            ],
            "segments": [
                {
                    "chunk": s.chunk,
                    "tile": s.tile,
                    "level": s.level,
                    "start": s.start,
                    "finish": s.finish,
                    "replacement": s.replacement,
                }
                for s in self.segments
            ],
            "renders": [
                {
                    "chunk": r.chunk,
                    "viewed_tile": r.viewed_tile,
                    "level": r.level,
                    "bitrate_mbps": r.bitrate_mbps,
                    "start": r.start,
                    "ready": r.ready,
                }
                for r in self.renders
            ],
            "effective_levels": [list(row) for row in self.effective_levels],
        }


@dataclass(frozen=True)
class SessionMetrics:
    utility_rate: float  # expected rendered utility per second (U)
    smoothness_rate: float  # downloaded playback seconds per second (R)
    qoe: float  # U + gamma * R
    rebuffer_ratio: float
    playing_bitrate_mbps: float
    playback_delay_s: float
    oscillation_mbps: float
    reaction_time_s: float

    FIELDS = (
        "utility_rate",
        "smoothness_rate",
        "qoe",
        "rebuffer_ratio",
        "playing_bitrate_mbps",
        "playback_delay_s",
        "oscillation_mbps",
        "reaction_time_s",
    )


class _Session:
    def __init__(self, config: SessionConfig, policy: Policy):
        self.config = config
        self.video = config.video
        self.ladder: BitrateLadder = config.video.ladder
        self.delta = config.video.chunk_duration
        self.K = config.video.num_chunks
        self.D = config.video.num_tiles
        self.trace: BandwidthTrace = config.trace
        self.head = config.head
        self.policy = policy
        self.viewed = (
            config.head.viewed
            if config.head.viewed is not None
            else sample_viewed_sequence(config.head, config.seed)
        )
        self.history: list[DownloadSample] = []
        self.segments: list[SegmentRecord] = []
        self.decisions: list[DecisionRecord] = []
        # per-chunk state, 1-based indices
        self.seg_by_tile: dict[tuple[int, int], list[SegmentRecord]] = {}
        self.n_seg = [0] * (self.K + 1)
        self.render_start: list[float | None] = [None] * (self.K + 1)
        self.ready: list[float | None] = [None] * (self.K + 1)
        self.finalized = 0  # chunks whose render start is pinned

    # ------------------------------------------------------------------
    # buffer bookkeeping over the pinned renders

    def buffer_level(self, t: float) -> float:
        """Undrained segments at time t (records minus fractional drain)."""
        q = 0.0
        for c in range(1, self.finalized + 1):
            n = self._deposited(c, t)
            if n == 0:
                continue
            rs = self.render_start[c]
            end = rs + self.delta
            if end <= t:
                continue
            if rs <= t:
                q += n * (end - t) / self.delta
            else:
                q += n
        return q

    def buffered_seconds(self, t: float) -> float:
        """Playable video ahead of the playhead, in seconds."""
        s = 0.0
        for c in range(1, self.finalized + 1):
            if self._deposited(c, t) == 0:
                continue
            rs = self.render_start[c]
            end = rs + self.delta
            if end <= t:
                continue
            s += end - t if rs <= t else self.delta
        return s

    def _deposited(self, chunk: int, t: float) -> int:
        n = 0
        for tile in range(self.D):
            recs = self.seg_by_tile.get((chunk, tile))
            if recs and recs[0].finish <= t:
                n += 1
        return n

    def playing_chunk(self, t: float) -> int:
        played = 0
        for c in range(1, self.finalized + 1):
            if self.render_start[c] + self.delta <= t:
                played += 1
            else:
                break
        return min(self.K, played + 1)

    def earliest_buffer_at_most(self, target: float, t_from: float) -> float:
        """First time >= t_from at which the buffer is down to target.

        Only drain is considered (no downloads are in flight while this is
        asked), so the level is nonincreasing and piecewise linear.
        """
        if target < -_EPS:
            raise SimulationError(f"buffer can never reach negative target {target}")
        t = t_from
        while True:
            q = self.buffer_level(t)
            if q <= target + 1e-9:
                return t
            nxt = None
            for c in range(1, self.finalized + 1):
                rs = self.render_start[c]
                end = rs + self.delta
                if end <= t:
                    continue
                nxt = c
                break
            if nxt is None:
                return t  # buffer already empty; q <= target held above
            rs = self.render_start[nxt]
            if rs > t:
                t = rs  # playhead stalled until the next render; Q constant
                continue
            n = self._deposited(nxt, t)
            end = rs + self.delta
            if n == 0:
                t = end
                continue
            dt = (q - target) * self.delta / n
            if t + dt <= end + _EPS:
                return t + dt
            t = end

    # ------------------------------------------------------------------
    # render pinning

    def _finalize(self, chunk: int, ready: float) -> None:
        self.ready[chunk] = ready
        if chunk == 1:
            self.render_start[1] = ready
        else:
            self.render_start[chunk] = max(self.render_start[chunk - 1] + self.delta, ready)
        self.finalized = chunk

    # ------------------------------------------------------------------
    # one chunk of the download loop

    def run(self) -> SessionLog:
        now = 0.0
        for k in range(1, self.K + 1):
            now = self._step(k, now)
        return self._build_log()

    def _step(self, k: int, now: float) -> float:
        attempts: list[tuple[float, float]] = []
        idle_s = 0.0
        while True:
            q = self.buffer_level(now)
            obs = self._observe(k, now, q)
            attempts.append((now, q))
            action = self.policy.decide(obs)
            if isinstance(action, Skip):
                self._finalize(k, now)
                top = max(range(self.D), key=lambda i: (obs.probs[i], -i))
                self.decisions.append(
                    DecisionRecord(k, now, q, None, True, top, tuple(attempts), idle_s, None, None)
                )
                return now
            if isinstance(action, Replace):
                now = self._replace(action, now)
                continue
            if not isinstance(action, Download):
                raise SimulationError(f"policy returned unknown action {action!r}")
            levels = tuple(action.levels)
            self._check_levels(levels)
            if is_idle(levels):
                if q <= _EPS:
                    raise SimulationError(
                        f"chunk {k}: policy idles on an empty buffer; the session cannot progress"
                    )
                wake = self._idle_until(obs, now)
                if wake <= now + _EPS:
                    wake = now + self.delta / 2.0  # defensive: force progress
                idle_s += wake - now
                now = wake
                continue
            return self._download(k, now, q, levels, tuple(attempts), idle_s, obs)

    def _observe(self, k: int, now: float, q: float) -> Observation:
        probs = noisy_probs(self.head, self.playing_chunk(now), k, self.config.noise_rate)
        return Observation(
            chunk=k,
            now=now,
            buffer_segments=q,
            buffer_seconds=self.buffered_seconds(now),
            probs=tuple(probs),
            predicted_bandwidth=predict_bandwidth(self.history, now, self.config.predictor),
            stored=self._stored_view(now),
        )

    def _stored_view(self, now: float) -> tuple:
        stored = []
        j = self.playing_chunk(now)
        for c in range(1, self.finalized + 1):
            if self.render_start[c] <= now or self.n_seg[c] == 0:
                continue
            levels = []
            for tile in range(self.D):
                recs = self.seg_by_tile.get((c, tile))
                levels.append(recs[-1].level if recs else None)
            probs = noisy_probs(self.head, j, c, self.config.noise_rate)
            stored.append(StoredChunk(c, tuple(levels), tuple(probs)))
        return tuple(stored)

    def _check_levels(self, levels: tuple) -> None:
        if len(levels) != self.D:
            raise SimulationError(f"decision has {len(levels)} tiles, video has {self.D}")
        for m in levels:
            if m is not None and not 1 <= m <= len(self.ladder):
                raise SimulationError(f"level {m} outside ladder 1..{len(self.ladder)}")

    def _idle_until(self, obs: Observation, now: float) -> float:
        wait: WaitPolicy = getattr(self.policy, "wait", WaitPolicy("fixed", None))
        if wait.kind == "fixed":
            return now + (wait.delta_s if wait.delta_s is not None else self.delta / 2.0)
        target = self.policy.idle_target(obs)
        if target is None:
            return now + self.delta / 2.0
        # wake strictly below the reactivation point so a tile scores > 0
        return self.earliest_buffer_at_most(max(0.0, target - 1e-9), now)

    def _download(
        self,
        k: int,
        decided_at: float,
        q_at_decision: float,
        levels: tuple,
        attempts: tuple,
        idle_s: float,
        obs: Observation,
    ) -> float:
        n = sum(1 for m in levels if m is not None)
        if n > self.config.q_max + _EPS:
            raise SimulationError(
                f"chunk {k}: decision downloads {n} segments, q_max={self.config.q_max} can never admit it"
            )
        start = self.earliest_buffer_at_most(self.config.q_max - n, decided_at)
        cursor = start
        viewed_tile = self.viewed[k - 1]
        viewed_finish: float | None = None
        for tile in range(self.D):
            m = levels[tile]
            if m is None:
                continue
            size = self.ladder[m].size_mbits
            finish = download_finish(cursor, size, self.trace)
            rec = SegmentRecord(k, tile, m, cursor, finish)
            self.segments.append(rec)
            self.seg_by_tile.setdefault((k, tile), []).append(rec)
            self.history.append(DownloadSample(cursor, finish, size))
            cursor = finish
            if tile == viewed_tile:
                viewed_finish = finish
        self.n_seg[k] = n
        if k == 1:
            ready = cursor  # playback starts once the whole first chunk is in
        elif viewed_finish is not None:
            ready = viewed_finish
        else:
            ready = decided_at  # known blank from the decision onward
        self._finalize(k, ready)
        self.decisions.append(
            DecisionRecord(
                k,
                decided_at,
                q_at_decision,
                levels,
                False,
                max(range(self.D), key=lambda i: (obs.probs[i], -i)),
                attempts,
                idle_s,
                start,
                cursor,
            )
        )
        return cursor

    def _replace(self, action: Replace, now: float) -> float:
        c, tile, level = action.chunk, action.tile, action.level
        if not 1 <= c <= self.finalized:
            raise SimulationError(f"replacement targets undecided chunk {c}")
        if self.render_start[c] <= now:
            raise SimulationError(f"replacement targets chunk {c} already at or past its render")
        recs = self.seg_by_tile.get((c, tile))
        if not recs:
            raise SimulationError(f"replacement targets empty slot (chunk {c}, tile {tile})")
        if level <= recs[-1].level:
            raise SimulationError(
                f"replacement must raise the level: stored {recs[-1].level}, proposed {level}"
            )
        size = self.ladder[level].size_mbits
        finish = download_finish(now, size, self.trace)
        rec = SegmentRecord(c, tile, level, now, finish, replacement=True)
        self.segments.append(rec)
        recs.append(rec)
        self.history.append(DownloadSample(now, finish, size))
        return finish

    # ------------------------------------------------------------------

    def _build_log(self) -> SessionLog:
        renders = []
        effective: list[tuple] = []
        for c in range(1, self.K + 1):
            rs = self.render_start[c]
            row = []
            for tile in range(self.D):
                level = None
                best_finish = -1.0
                for rec in self.seg_by_tile.get((c, tile), ()):
                    # newest version completed before the render wins
                    if rec.finish <= rs + _EPS and rec.finish >= best_finish:
                        level = rec.level
                        best_finish = rec.finish
                row.append(level)
            effective.append(tuple(row))
            viewed_tile = self.viewed[c - 1]
            lvl = effective[-1][viewed_tile]
            ready = None
            if lvl is not None:
                for rec in self.seg_by_tile[(c, viewed_tile)]:
                    if rec.finish <= rs + _EPS:
                        ready = rec.finish if ready is None else max(ready, rec.finish)
            renders.append(
                RenderRecord(
                    c,
                    viewed_tile,
                    lvl,
                    self.ladder[lvl].bitrate_mbps if lvl is not None else 0.0,
                    rs,
                    ready,
                )
            )
        stalls = []
        for c in range(2, self.K + 1):
            gap_start = self.render_start[c - 1] + self.delta
            gap = self.render_start[c] - gap_start
            if gap > 1e-12:
                stalls.append((gap_start, self.render_start[c]))
        return SessionLog(
            num_chunks=self.K,
            num_tiles=self.D,
            chunk_duration=self.delta,
            decisions=tuple(self.decisions),
            segments=tuple(self.segments),
            renders=tuple(renders),
            effective_levels=tuple(effective),
            stalls=tuple(stalls),
            playback_start=self.render_start[1],
            t_end=self.render_start[self.K] + self.delta,
            viewed=tuple(self.viewed),
        )


def run_session(config: SessionConfig, policy: Policy | None = None) -> SessionLog:
    """Simulate one session; raises ConfigError on invalid input."""
    problems = validate_session_config(config) if policy is None else validate_video(config.video)
    if problems:
        raise ConfigError("; ".join(problems))
    if policy is None:
        policy = make_policy(
            config.algorithm, config.video, config.gamma, config.q_max, config.algo_options
        )
    policy.reset()
    return _Session(config, policy).run()


def compute_metrics(log: SessionLog, head: HeadModel, ladder: BitrateLadder, gamma: float) -> SessionMetrics:
    """Session-level quality summary from a finished log.

    The utility term weighs every downloaded tile by its true viewing
    probability (the expectation over where the user looks), while
    bitrate, delay and oscillation follow the realized viewed tiles.
    """
    k = log.num_chunks
    delta = log.chunk_duration
    t_end = log.t_end
    utils = ladder.utilities
    u = 0.0
    for c in range(k):
        probs = head.row(c + 1)
        for tile, level in enumerate(log.effective_levels[c]):
            if level is not None:
                u += probs[tile] * utils[level - 1]
    u /= t_end
    # One playback credit per buffer slot; a replacement rewrites its
    # slot's selection rather than adding a second one.
    slots = {(s.chunk, s.tile) for s in log.segments}
    r = delta * len(slots) / t_end
    blanks = sum(1 for rr in log.renders if rr.level is None)
    stall_s = sum(b - a for a, b in log.stalls)
    rendered = [rr for rr in log.renders if rr.level is not None]
    delay = (
        sum(rr.start - rr.ready for rr in rendered) / len(rendered) if rendered else 0.0
    )
    bitrates = [rr.bitrate_mbps for rr in log.renders]
    oscillation = (
        sum(abs(b - a) for a, b in zip(bitrates, bitrates[1:])) / (k - 1) if k > 1 else 0.0
    )
    return SessionMetrics(
        utility_rate=u,
        smoothness_rate=r,
        qoe=u + gamma * r,
        rebuffer_ratio=(stall_s + blanks * delta) / (k * delta),
        playing_bitrate_mbps=sum(bitrates) / k,
        playback_delay_s=delay,
        oscillation_mbps=oscillation,
        reaction_time_s=_reaction_time(log),
    )


def _reaction_time(log: SessionLog) -> float:
    first_request = None
    for d in log.decisions:
        if d.download_start is not None:
            first_request = d.download_start
            break
    if first_request is None:
        first_request = log.decisions[0].time if log.decisions else 0.0
    picks = [
        (d.time, (d.levels[d.top_tile] if d.levels is not None else None))
        for d in log.decisions
    ]
    for i in range(len(picks) - 2):
        if picks[i][1] == picks[i + 1][1] == picks[i + 2][1]:
            return picks[i + 2][0] - first_request
    return log.t_end - first_request
