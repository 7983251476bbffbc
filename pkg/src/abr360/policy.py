"""Uniform policy interface between algorithms and the session engine.

A policy sees one Observation per decision epoch and answers with an
action: Download (a level per tile, possibly all None to request an idle
wait), Replace (re-download one buffered segment at a higher level), or
Skip (give up on the chunk; used by test stubs, never by the shipped
algorithms).
"""
from __future__ import annotations

from dataclasses import dataclass

from . import baselines, heuristics
from .bola import (
    BolaParams,
    WaitPolicy,
    decide_chunk,
    is_idle,
    reactivation_threshold,
    v_upper_bound,
)
from .media import VideoSpec

ALGORITHM_IDS = (
    "bola360",
    "bola360-pl",
    "bola360-rep",
    "bola360-pa",
    "dp-on",
    "top-x",
    "va360",
    "probdash",
    "salient-vr",
)


@dataclass(frozen=True)
class Observation:
    """Everything a policy may look at when deciding chunk `chunk`."""

    chunk: int  # 1-based index of the chunk to decide
    now: float
    buffer_segments: float  # Q(t), undrained segment count
    buffer_seconds: float  # length of buffered unplayed video
    probs: tuple  # decision-time viewing probabilities for `chunk`
    predicted_bandwidth: float  # shared sliding-window estimate, Mbps
    stored: tuple = ()  # StoredChunk views of buffered unplayed chunks


@dataclass(frozen=True)
class Download:
    levels: tuple  # tuple[int | None, ...]


@dataclass(frozen=True)
class Replace:
    chunk: int
    tile: int
    level: int


@dataclass(frozen=True)
class Skip:
    pass


class Policy:
    """Base policy: stateless, never idles, must be subclassed."""

    #: engine behaviour when a Download selects nothing anywhere
    wait: WaitPolicy = WaitPolicy("fixed", None)

    def reset(self) -> None:
        """Clear per-session state; called once before every session."""

    def decide(self, obs: Observation):
        raise NotImplementedError

    def idle_target(self, obs: Observation) -> float | None:
        """Buffer level at which an idling policy wakes up, if known."""
        return None


class Bola360Policy(Policy):
    """The plain buffer-threshold rule."""

    def __init__(self, params: BolaParams, video: VideoSpec):
        self.params = params
        self.video = video
        self.wait = params.wait

    def decide(self, obs: Observation) -> Download:
        return Download(
            decide_chunk(
                obs.buffer_segments, obs.probs, self.video.ladder, self.params, self.video.chunk_duration
            )
        )

    def idle_target(self, obs: Observation) -> float:
        return reactivation_threshold(
            self.params, self.video.ladder, self.video.chunk_duration, obs.probs
        )


class BolaPlPolicy(Bola360Policy):
    """Startup placeholder: decide at a virtual buffer while the session
    is young, then fall back to the plain rule for good."""

    def __init__(self, params: BolaParams, video: VideoSpec, cap_mode: str = "aggregate"):
        super().__init__(params, video)
        self.cap_mode = cap_mode
        self.reset()

    def reset(self) -> None:
        self._startup = True
        self._recent_picks: list = []

    def decide(self, obs: Observation) -> Download:
        ladder = self.video.ladder
        delta = self.video.chunk_duration
        plain = decide_chunk(obs.buffer_segments, obs.probs, ladder, self.params, delta)
        if is_idle(plain):
            return Download(plain)
        if self._startup:
            steady = (
                self.params.v
                * (ladder.max_utility + self.params.gamma * delta)
                * delta
                / self.video.num_tiles
            )
            if obs.buffer_seconds >= steady:
                self._startup = False
        if not self._startup:
            return Download(plain)
        virtual_q = heuristics.pl_virtual_buffer(
            obs.buffer_segments,
            obs.buffer_seconds,
            obs.predicted_bandwidth,
            obs.probs,
            ladder,
            self.params,
            delta,
            self.cap_mode,
        )
        decision = decide_chunk(virtual_q, obs.probs, ladder, self.params, delta)
        if is_idle(decision):
            decision = plain
        top = max(range(len(obs.probs)), key=lambda i: (obs.probs[i], -i))
        self._recent_picks.append(decision[top])
        if len(self._recent_picks) >= 3 and len(set(self._recent_picks[-3:])) == 1:
            self._startup = False
        return Download(decision)


class BolaRepPolicy(Bola360Policy):
    """Opportunistic upgrades of buffered segments when the lead is safe."""

    def decide(self, obs: Observation):
        delta = self.video.chunk_duration
        if obs.buffer_seconds >= heuristics.REP_DANGER_S * delta:
            plan = heuristics.rep_scan(
                obs.stored, obs.buffer_segments, self.video.ladder, self.params, delta
            )
            if plan is not None:
                return Replace(plan.chunk, plan.tile, plan.new_level)
        return super().decide(obs)


class BolaPaPolicy(Bola360Policy):
    """Probability amplification for sparse attention maps."""

    def decide(self, obs: Observation) -> Download:
        return Download(
            heuristics.pa_decide(
                obs.buffer_segments,
                obs.buffer_seconds,
                obs.probs,
                obs.predicted_bandwidth,
                self.video.ladder,
                self.params,
                self.video.chunk_duration,
            )
        )

    def idle_target(self, obs: Observation) -> float:
        f_max = float(len(obs.probs))
        boosted = tuple(min(1.0, f_max * p) for p in obs.probs)
        return reactivation_threshold(
            self.params, self.video.ladder, self.video.chunk_duration, boosted
        )


class DpOnPolicy(Policy):
    def __init__(self, video: VideoSpec, gamma: float, beta: float = 0.0,
                 enum_cap: int = baselines.DP_ON_ENUM_CAP):
        self.video = video
        self.gamma = gamma
        self.beta = beta
        self.enum_cap = enum_cap

    def decide(self, obs: Observation) -> Download:
        return Download(
            baselines.dp_on_decide(
                obs.probs,
                obs.predicted_bandwidth,
                self.video.ladder,
                self.gamma,
                self.video.chunk_duration,
                self.beta,
                self.enum_cap,
            )
        )


class TopXPolicy(Policy):
    def __init__(self, video: VideoSpec, x: int | None = None):
        self.video = video
        self.x = x if x is not None else video.num_tiles

    def decide(self, obs: Observation) -> Download:
        return Download(
            baselines.top_x_decide(
                obs.probs, obs.predicted_bandwidth, self.video.ladder,
                self.video.chunk_duration, self.x,
            )
        )


class Va360Policy(Policy):
    def __init__(self, video: VideoSpec):
        self.video = video

    def decide(self, obs: Observation) -> Download:
        return Download(
            baselines.va360_decide(obs.probs, obs.predicted_bandwidth, self.video.ladder)
        )


class ProbDashPolicy(Policy):
    def __init__(self, video: VideoSpec, params: baselines.ProbDashParams):
        self.video = video
        self.params = params

    def decide(self, obs: Observation) -> Download:
        return Download(
            baselines.probdash_decide(
                obs.probs,
                obs.predicted_bandwidth,
                obs.buffer_seconds,
                self.video.ladder,
                self.video.chunk_duration,
                self.params,
            )
        )


class SalientVrPolicy(Policy):
    def __init__(self, video: VideoSpec, params: baselines.SalientParams):
        self.video = video
        self.params = params

    def decide(self, obs: Observation) -> Download:
        return Download(
            baselines.salient_vr_decide(
                obs.probs,
                obs.predicted_bandwidth,
                obs.buffer_seconds,
                self.video.ladder,
                self.video.chunk_duration,
                self.params,
            )
        )


def _wait_policy_from(options: dict) -> WaitPolicy:
    wait = options.get("wait", "dynamic")
    if isinstance(wait, WaitPolicy):
        return wait
    if isinstance(wait, str):
        return WaitPolicy(wait, None)
    if isinstance(wait, dict):
        return WaitPolicy(wait.get("kind", "fixed"), wait.get("delta_s"))
    raise ValueError(f"cannot parse wait policy from {wait!r}")


def bola_params_from_options(options: dict, video: VideoSpec, gamma: float, q_max: float) -> BolaParams:
    v = options.get("v", "auto")
    if v == "auto":
        # leave a margin below the admissible ceiling
        v = 0.9 * v_upper_bound(
            q_max, video.num_tiles, video.ladder.max_utility, gamma, video.chunk_duration
        )
    return BolaParams(float(v), gamma, _wait_policy_from(options))


def make_policy(
    algo_id: str, video: VideoSpec, gamma: float, q_max: float, options: dict | None = None
) -> Policy:
    """Instantiate an algorithm by its command-line id."""
    options = dict(options or {})
    if algo_id == "bola360":
        return Bola360Policy(bola_params_from_options(options, video, gamma, q_max), video)
    if algo_id == "bola360-pl":
        return BolaPlPolicy(
            bola_params_from_options(options, video, gamma, q_max),
            video,
            options.get("cap_mode", "aggregate"),
        )
    if algo_id == "bola360-rep":
        return BolaRepPolicy(bola_params_from_options(options, video, gamma, q_max), video)
    if algo_id == "bola360-pa":
        return BolaPaPolicy(bola_params_from_options(options, video, gamma, q_max), video)
    if algo_id == "dp-on":
        return DpOnPolicy(video, gamma, float(options.get("beta", 0.0)))
    if algo_id == "top-x":
        x = options.get("x")
        return TopXPolicy(video, int(x) if x is not None else None)
    if algo_id == "va360":
        return Va360Policy(video)
    if algo_id == "probdash":
        return ProbDashPolicy(
            video,
            baselines.ProbDashParams(
                q_target_s=float(options.get("q_target_s", 10.0)),
                clamp_lo=float(options.get("clamp_lo", 0.25)),
                clamp_hi=float(options.get("clamp_hi", 2.0)),
            ),
        )
    if algo_id == "salient-vr":
        q_thr = options.get("q_thr_s")
        return SalientVrPolicy(
            video, baselines.SalientParams(float(q_thr) if q_thr is not None else None)
        )
    raise ValueError(f"unknown algorithm id {algo_id!r}; known: {', '.join(ALGORITHM_IDS)}")
