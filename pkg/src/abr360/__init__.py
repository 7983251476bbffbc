"""Trace-driven simulation lab for adaptive streaming of tiled 360-degree video.

The package bundles a buffer-occupancy tile scheduler and its practical
variants, a set of published comparison algorithms, a discrete-event
playback engine, an offline dynamic-programming bound, and an experiment
harness with delimited and graphical reports.
"""
from .bola import (
    BolaParams,
    WaitPolicy,
    decide_chunk,
    idle_threshold,
    level_thresholds,
    max_buffer_bound,
    reactivation_threshold,
    score,
    v_upper_bound,
)
from .engine import (
    ConfigError,
    SessionConfig,
    SessionLog,
    SessionMetrics,
    SimulationError,
    compute_metrics,
    run_session,
    validate_session_config,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    TrialResultRow,
    load_experiment_config,
    run_experiment,
    summarize,
    validate_experiment_config,
    write_outputs,
)
from .headmodel import (
    HeadModel,
    ProfileSpec,
    head_model_from_profile,
    linear_base,
    load_prob_matrix,
    load_viewed_trace,
    noisy_probs,
    profile_probs,
    realize_fov,
    sample_viewed_sequence,
    table_profiles,
    uniform_head_model,
)
from .media import (
    BitrateLadder,
    BitrateLevel,
    VideoSpec,
    ladder_from_bitrates,
    ladder_from_sizes,
    log_utilities,
    validate_video,
)
from .oracle import OracleCapacityError, OracleResult, dominance_check, dp_off
from .policy import ALGORITHM_IDS, make_policy
from .traces import (
    BandwidthTrace,
    StalledDownloadError,
    constant_trace,
    download_finish,
    load_bandwidth_trace,
    ramp_trace,
    square_trace,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHM_IDS",
    "BandwidthTrace",
    "BitrateLadder",
    "BitrateLevel",
    "BolaParams",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentResult",
    "HeadModel",
    "OracleCapacityError",
    "OracleResult",
    "ProfileSpec",
    "SessionConfig",
    "SessionLog",
    "SessionMetrics",
    "SimulationError",
    "StalledDownloadError",
    "TrialResultRow",
    "VideoSpec",
    "WaitPolicy",
    "compute_metrics",
    "constant_trace",
    "decide_chunk",
    "dominance_check",
    "download_finish",
    "dp_off",
    "head_model_from_profile",
    "idle_threshold",
    "ladder_from_bitrates",
    "ladder_from_sizes",
    "level_thresholds",
    "linear_base",
    "load_bandwidth_trace",
    "load_experiment_config",
    "load_prob_matrix",
    "load_viewed_trace",
    "log_utilities",
    "make_policy",
    "max_buffer_bound",
    "noisy_probs",
    "profile_probs",
    "ramp_trace",
    "reactivation_threshold",
    "realize_fov",
    "run_experiment",
    "run_session",
    "sample_viewed_sequence",
    "score",
    "square_trace",
    "summarize",
    "table_profiles",
    "uniform_head_model",
    "v_upper_bound",
    "validate_experiment_config",
    "validate_session_config",
    "validate_video",
    "write_outputs",
]
