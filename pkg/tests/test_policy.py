"""Policy wrappers: option parsing, the replacement gate, startup exit."""
import pytest

from abr360.bola import BolaParams, WaitPolicy, decide_chunk, reactivation_threshold, v_upper_bound
from abr360.heuristics import StoredChunk, pa_decide
from abr360.media import VideoSpec, ladder_from_bitrates
from abr360.policy import (
    ALGORITHM_IDS,
    Bola360Policy,
    BolaPaPolicy,
    BolaPlPolicy,
    BolaRepPolicy,
    Download,
    Observation,
    Replace,
    bola_params_from_options,
    make_policy,
)

SIX = ladder_from_bitrates((0.2, 0.4, 0.6, 0.8, 1.0, 1.5), 5.0)
VIDEO = VideoSpec(num_chunks=50, num_tiles=6, chunk_duration=5.0, ladder=SIX)
PARAMS = BolaParams(v=1.66, gamma=0.1)
HOT_COLD = (0.5, 0.1, 0.1, 0.1, 0.1, 0.1)


def obs(buffer_segments=0.0, buffer_seconds=0.0, probs=HOT_COLD, w_p=2.0, stored=()):
    return Observation(
        chunk=3,
        now=12.0,
        buffer_segments=buffer_segments,
        buffer_seconds=buffer_seconds,
        probs=probs,
        predicted_bandwidth=w_p,
        stored=stored,
    )


# --- construction ----------------------------------------------------------

def test_every_advertised_id_constructs():
    for algo_id in ALGORITHM_IDS:
        policy = make_policy(algo_id, VIDEO, gamma=0.1, q_max=64)
        action = policy.decide(obs(w_p=1.0))
        assert isinstance(action, Download)


def test_unknown_id_is_rejected_with_the_roster():
    with pytest.raises(ValueError, match="bola360-pa"):
        make_policy("bola", VIDEO, gamma=0.1, q_max=64)


def test_auto_v_leaves_a_margin_below_the_ceiling():
    params = bola_params_from_options({}, VIDEO, gamma=0.3, q_max=64)
    ceiling = v_upper_bound(64, 6, SIX.max_utility, 0.3, 5.0)
    assert params.v == pytest.approx(0.9 * ceiling)
    pinned = bola_params_from_options({"v": 2.5}, VIDEO, gamma=0.3, q_max=64)
    assert pinned.v == 2.5


def test_wait_policy_parsing():
    assert bola_params_from_options({}, VIDEO, 0.1, 64).wait == WaitPolicy("dynamic", None)
    assert bola_params_from_options({"wait": "fixed"}, VIDEO, 0.1, 64).wait.kind == "fixed"
    parsed = bola_params_from_options(
        {"wait": {"kind": "fixed", "delta_s": 2.0}}, VIDEO, 0.1, 64
    )
    assert parsed.wait == WaitPolicy("fixed", 2.0)
    existing = WaitPolicy("fixed", 1.0)
    assert bola_params_from_options({"wait": existing}, VIDEO, 0.1, 64).wait is existing
    with pytest.raises(ValueError):
        bola_params_from_options({"wait": 3}, VIDEO, 0.1, 64)


# --- plain rule ---------------------------------------------------------------

def test_plain_policy_delegates():
    policy = Bola360Policy(PARAMS, VIDEO)
    o = obs(buffer_segments=1.0)
    assert policy.decide(o).levels == decide_chunk(1.0, HOT_COLD, SIX, PARAMS, 5.0)
    assert policy.idle_target(o) == reactivation_threshold(PARAMS, SIX, 5.0, HOT_COLD)


# --- replacement gate -----------------------------------------------------------

def test_replacement_waits_for_a_safe_lead():
    policy = BolaRepPolicy(PARAMS, VIDEO)
    stored = (StoredChunk(chunk=2, levels=(1,) * 6, probs=(1.0,) + (0.0,) * 5),)
    # the rule wants level 3 for the hot tile, a gap of 2
    risky = obs(buffer_segments=1.0, buffer_seconds=9.99, stored=stored)
    assert isinstance(policy.decide(risky), Download)
    safe = obs(buffer_segments=1.0, buffer_seconds=10.0, stored=stored)
    action = policy.decide(safe)
    assert action == Replace(chunk=2, tile=0, level=3)


def test_replacement_falls_through_without_candidates():
    policy = BolaRepPolicy(PARAMS, VIDEO)
    action = policy.decide(obs(buffer_segments=1.0, buffer_seconds=30.0, stored=()))
    assert isinstance(action, Download)


# --- amplification --------------------------------------------------------------

def test_amplified_policy_delegates_and_boosts_wakeup():
    policy = BolaPaPolicy(PARAMS, VIDEO)
    o = obs(buffer_segments=2.0, buffer_seconds=10.0, probs=(0.25,) * 4, w_p=100.0)
    assert policy.decide(o).levels == pa_decide(
        2.0, 10.0, (0.25,) * 4, 100.0, SIX, PARAMS, 5.0
    )
    # a factor of D=4 saturates every probability to 1
    assert policy.idle_target(o) == pytest.approx(1.66 * (SIX.max_utility + 0.5))


# --- startup placeholder -----------------------------------------------------------

def test_placeholder_decides_at_the_virtual_buffer():
    policy = BolaPlPolicy(PARAMS, VIDEO)
    o = obs(buffer_segments=0.0, buffer_seconds=3.0, w_p=8.0 / 3.0)
    assert policy.decide(o).levels == (4, None, None, None, None, None)


def test_placeholder_retires_on_a_full_buffer():
    policy = BolaPlPolicy(PARAMS, VIDEO)
    # steady threshold: V * (u_max + gamma * delta) * delta / D ~ 3.479 s
    o = obs(buffer_segments=0.0, buffer_seconds=3.5, w_p=8.0 / 3.0)
    assert policy.decide(o).levels == (1, 1, 1, 1, 1, 1)
    # and stays retired even when the buffer drains again
    drained = obs(buffer_segments=0.0, buffer_seconds=3.0, w_p=8.0 / 3.0)
    assert policy.decide(drained).levels == (1, 1, 1, 1, 1, 1)


def test_placeholder_retires_after_three_stable_picks():
    policy = BolaPlPolicy(PARAMS, VIDEO)
    o = obs(buffer_segments=0.0, buffer_seconds=3.0, w_p=8.0 / 3.0)
    for _ in range(3):
        assert policy.decide(o).levels[0] == 4
    assert policy.decide(o).levels == (1, 1, 1, 1, 1, 1)
    policy.reset()
    assert policy.decide(o).levels == (4, None, None, None, None, None)


def test_placeholder_passes_idle_through():
    policy = BolaPlPolicy(PARAMS, VIDEO)
    # far above every cutoff the plain rule wants to wait
    o = obs(buffer_segments=10.0, buffer_seconds=3.0, w_p=8.0 / 3.0)
    assert policy.decide(o).levels == (None,) * 6
