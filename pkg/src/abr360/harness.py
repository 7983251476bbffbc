"""Experiment configuration, paired-trial execution and result emission.

One YAML file describes a whole experiment: the video, the QoE weight,
the buffer capacity, the algorithms (with per-algorithm options), one or
more bandwidth traces, the head-movement source, and run controls.  Every
algorithm sees the same realized viewing sequence within a trial, so
comparisons are paired by construction.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .baselines import PredictorConfig
from .engine import (
    ConfigError,
    SessionConfig,
    SessionMetrics,
    algorithm_violations,
    compute_metrics,
    run_session,
    shared_violations,
)
from .headmodel import (
    HeadModel,
    ProfileSpec,
    head_model_from_profile,
    load_prob_matrix,
    load_viewed_trace,
    sample_viewed_sequence,
    table_profiles,
    uniform_head_model,
)
from .media import VideoSpec, ladder_from_bitrates, ladder_from_sizes
from .policy import ALGORITHM_IDS
from .traces import (
    BandwidthTrace,
    constant_trace,
    load_bandwidth_trace,
    ramp_trace,
    square_trace,
)

log = logging.getLogger("abr360")

SCHEMA_VERSION = 1
CDF_METRICS = ("qoe", "playing_bitrate_mbps", "rebuffer_ratio")


@dataclass(frozen=True)
class AlgoSpec:
    label: str
    algo_id: str
    options: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentConfig:
    video: VideoSpec
    gamma: float
    q_max: float
    algorithms: tuple
    traces: tuple  # ((trace_id, BandwidthTrace), ...)
    head: HeadModel
    head_id: str
    noise_rate: float
    trials: int
    base_seed: int
    output_dir: str
    formats: tuple
    figures: bool
    buffer_series: bool
    predictor: PredictorConfig


@dataclass(frozen=True)
class TrialResultRow:
    algorithm: str
    trace: str
    head: str
    trial: int
    seed: int
    utility_rate: float
    smoothness_rate: float
    qoe: float
    rebuffer_ratio: float
    playing_bitrate_mbps: float
    playback_delay_s: float
    oscillation_mbps: float
    reaction_time_s: float


ROW_FIELDS = tuple(f.name for f in dataclasses.fields(TrialResultRow))


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ConfigError(f"{context}: missing required key {key!r}")
    return mapping[key]


def _build_video(section: dict) -> VideoSpec:
    num_chunks = int(_require(section, "num_chunks", "video"))
    num_tiles = int(_require(section, "num_tiles", "video"))
    delta = float(_require(section, "chunk_duration_s", "video"))
    utilities = section.get("utilities")
    if "bitrates_mbps" in section:
        ladder = ladder_from_bitrates(section["bitrates_mbps"], delta, utilities)
    elif "sizes_mbits" in section:
        ladder = ladder_from_sizes(section["sizes_mbits"], delta, utilities)
    else:
        raise ConfigError("video: needs bitrates_mbps or sizes_mbits")
    return VideoSpec(num_chunks, num_tiles, delta, ladder)


def _build_trace(entry: dict, base_dir: str) -> tuple[str, BandwidthTrace]:
    kind = _require(entry, "kind", "trace")
    trace_id = str(entry.get("id", kind))
    if kind == "constant":
        return trace_id, constant_trace(float(_require(entry, "bandwidth_mbps", "trace")))
    if kind == "square":
        return trace_id, square_trace(
            float(_require(entry, "low_mbps", "trace")),
            float(_require(entry, "high_mbps", "trace")),
            float(_require(entry, "period_s", "trace")),
            float(entry.get("duration_s", 600.0)),
        )
    if kind == "ramp":
        return trace_id, ramp_trace(
            float(_require(entry, "start_mbps", "trace")),
            float(_require(entry, "stop_mbps", "trace")),
            float(entry.get("duration_s", 600.0)),
            int(entry.get("steps", 20)),
        )
    if kind == "file":
        path = os.path.join(base_dir, str(_require(entry, "path", "trace")))
        return trace_id, load_bandwidth_trace(path)
    raise ConfigError(f"trace: unknown kind {kind!r}")


def _build_head(section: dict, video: VideoSpec, base_dir: str) -> tuple[str, HeadModel]:
    kind = section.get("kind", "uniform")
    k, d = video.num_chunks, video.num_tiles
    if kind == "uniform":
        head = uniform_head_model(k, d)
        head_id = "uniform"
    elif kind == "profile":
        index = int(_require(section, "profile", "head"))
        stock = table_profiles()
        if not 1 <= index <= len(stock):
            raise ConfigError(f"head: profile must lie in 1..{len(stock)}")
        head = head_model_from_profile(
            stock[index - 1], k, d,
            rotate=bool(section.get("rotate", False)),
            seed=int(section.get("rotate_seed", 0)),
        )
        head_id = f"profile{index}"
    elif kind == "custom":
        spec = ProfileSpec(
            int(_require(section, "d_pos", "head")),
            float(_require(section, "alpha", "head")),
            float(_require(section, "r_min", "head")),
        )
        head = head_model_from_profile(
            spec, k, d,
            rotate=bool(section.get("rotate", False)),
            seed=int(section.get("rotate_seed", 0)),
        )
        head_id = f"custom{spec.d_pos}a{spec.alpha:g}"
    elif kind == "matrix":
        path = os.path.join(base_dir, str(_require(section, "path", "head")))
        head = load_prob_matrix(path)
        head_id = os.path.splitext(os.path.basename(path))[0]
    else:
        raise ConfigError(f"head: unknown kind {kind!r}")
    if "viewed" in section:
        path = os.path.join(base_dir, str(section["viewed"]))
        head = dataclasses.replace(head, viewed=load_viewed_trace(path, head.num_tiles))
    return head_id, head


def load_experiment_config(path: str) -> ExperimentConfig:
    """Parse and cross-validate one experiment file."""
    try:
        return _load_experiment_config(path)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError, yaml.YAMLError) as exc:
        # Constructor invariants double as config validation.
        raise ConfigError(f"{path}: {exc}") from exc


def _load_experiment_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    base_dir = os.path.dirname(os.path.abspath(path))
    video = _build_video(_require(raw, "video", path))
    gamma = float(_require(raw, "gamma", path))
    q_max = float(_require(raw, "q_max", path))

    algo_section = _require(raw, "algorithms", path)
    if not isinstance(algo_section, list) or not algo_section:
        raise ConfigError("algorithms: need a nonempty list")
    algorithms = []
    labels = set()
    for entry in algo_section:
        if isinstance(entry, str):
            entry = {"id": entry}
        options = dict(entry)
        algo_id = str(_require(options, "id", "algorithms"))
        options.pop("id")
        label = str(options.pop("label", algo_id))
        if label in labels:
            raise ConfigError(f"algorithms: duplicate label {label!r}; set explicit labels")
        labels.add(label)
        algorithms.append(AlgoSpec(label, algo_id, options))

    trace_section = _require(raw, "traces", path)
    if not isinstance(trace_section, list) or not trace_section:
        raise ConfigError("traces: need a nonempty list")
    traces = []
    trace_ids = set()
    for entry in trace_section:
        trace_id, trace = _build_trace(entry, base_dir)
        if trace_id in trace_ids:
            raise ConfigError(f"traces: duplicate id {trace_id!r}")
        trace_ids.add(trace_id)
        traces.append((trace_id, trace))

    head_section = raw.get("head", {"kind": "uniform"})
    head_id, head = _build_head(head_section, video, base_dir)
    noise_rate = float(head_section.get("noise_rate", 0.0))

    run = raw.get("run", {})
    predictor_section = run.get("predictor", {})
    predictor = PredictorConfig(
        window_s=float(predictor_section.get("window_s", 5.0)),
        bootstrap_mbps=float(predictor_section.get("bootstrap_mbps", 1.0)),
    )
    formats = tuple(run.get("formats", ("csv", "json")))
    for fmt in formats:
        if fmt not in ("csv", "json"):
            raise ConfigError(f"run.formats: unknown format {fmt!r}")
    config = ExperimentConfig(
        video=video,
        gamma=gamma,
        q_max=q_max,
        algorithms=tuple(algorithms),
        traces=tuple(traces),
        head=head,
        head_id=head_id,
        noise_rate=noise_rate,
        trials=int(run.get("trials", 1)),
        base_seed=int(run.get("base_seed", 0)),
        output_dir=os.path.join(base_dir, str(run.get("output_dir", "out"))),
        formats=formats,
        figures=bool(run.get("figures", False)),
        buffer_series=bool(run.get("buffer_series", False)),
        predictor=predictor,
    )
    problems = validate_experiment_config(config)
    if problems:
        raise ConfigError("; ".join(problems))
    return config


def validate_experiment_config(config: ExperimentConfig) -> list[str]:
    problems: list[str] = []
    if config.trials < 1:
        problems.append(f"run.trials must be >= 1, got {config.trials}")
    if not config.algorithms:
        problems.append("algorithms: need a nonempty list")
    if not config.traces:
        problems.append("traces: need a nonempty list")
        return problems
    shared = SessionConfig(
        video=config.video,
        trace=config.traces[0][1],
        head=config.head,
        algorithm="bola360",
        q_max=config.q_max,
        gamma=config.gamma,
        noise_rate=config.noise_rate,
        predictor=config.predictor,
    )
    problems.extend(shared_violations(shared))
    for algo in config.algorithms:
        for problem in algorithm_violations(
            algo.algo_id, algo.options, config.video, config.gamma, config.q_max
        ):
            problems.append(f"{algo.label}: {problem}")
    return problems


@dataclass(frozen=True)
class ExperimentResult:
    rows: tuple
    summary: dict
    buffer_series: tuple  # (algorithm, trace, chunk, time_s, buffer_segments)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run algorithms x traces x trials with paired viewing sequences."""
    rows: list[TrialResultRow] = []
    series: list[tuple] = []
    for trial in range(config.trials):
        seed = config.base_seed + trial
        viewed = (
            config.head.viewed
            if config.head.viewed is not None
            else sample_viewed_sequence(config.head, seed)
        )
        pinned = dataclasses.replace(config.head, viewed=viewed)
        for trace_id, trace in config.traces:
            for algo in config.algorithms:
                session = SessionConfig(
                    video=config.video,
                    trace=trace,
                    head=pinned,
                    algorithm=algo.algo_id,
                    q_max=config.q_max,
                    gamma=config.gamma,
                    seed=seed,
                    noise_rate=config.noise_rate,
                    predictor=config.predictor,
                    algo_options=algo.options,
                )
                session_log = run_session(session)
                metrics = compute_metrics(
                    session_log, config.head, config.video.ladder, config.gamma
                )
                rows.append(
                    TrialResultRow(
                        algo.label, trace_id, config.head_id, trial, seed,
                        *(getattr(metrics, name) for name in SessionMetrics.FIELDS),
                    )
                )
                if config.buffer_series and trial == 0:
                    for dec in session_log.decisions:
                        series.append((algo.label, trace_id, dec.chunk, dec.time, dec.buffer))
        log.info("trial %d/%d done", trial + 1, config.trials)
    rows.sort(key=lambda r: (r.algorithm, r.trace, r.trial))
    series.sort(key=lambda s: (s[0], s[1], s[2]))
    return ExperimentResult(tuple(rows), summarize(rows), tuple(series))


def summarize(rows) -> dict:
    """Per-algorithm mean/std plus 1..99 percentile CDF samples."""
    by_algo: dict[str, list[TrialResultRow]] = {}
    for row in rows:
        by_algo.setdefault(row.algorithm, []).append(row)
    summary: dict = {"schema_version": SCHEMA_VERSION, "algorithms": {}}
    for algo in sorted(by_algo):
        block: dict = {}
        for metric in CDF_METRICS:
            values = np.array([getattr(r, metric) for r in by_algo[algo]], dtype=float)
            block[metric] = {
                "mean": float(values.mean()),
                "std": float(values.std()),
                "percentiles": [float(np.percentile(values, p)) for p in range(1, 100)],
            }
        summary["algorithms"][algo] = block
    return summary


# ----------------------------------------------------------------------
# emission

def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _round6(value: float) -> float:
    if isinstance(value, float) and math.isfinite(value):
        return float(f"{value:.6g}")
    return value


def emit_rows(rows, fmt: str, path: str) -> None:
    """Write trial rows as CSV or JSON with 6-significant-digit floats."""
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(ROW_FIELDS)
            for row in rows:
                writer.writerow([_fmt(getattr(row, name)) for name in ROW_FIELDS])
    elif fmt == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "rows": [
                {name: _round6(getattr(row, name)) for name in ROW_FIELDS} for row in rows
            ],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        raise ConfigError(f"unknown emit format {fmt!r}")


def read_rows(path: str) -> tuple:
    """Read rows back from either emitted format."""
    if path.endswith(".json"):
        with open(path) as fh:
            payload = json.load(fh)
        raw_rows = payload["rows"]
    else:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            raw_rows = list(reader)
    rows = []
    for raw in raw_rows:
        rows.append(
            TrialResultRow(
                algorithm=str(raw["algorithm"]),
                trace=str(raw["trace"]),
                head=str(raw["head"]),
                trial=int(raw["trial"]),
                seed=int(raw["seed"]),
                **{name: float(raw[name]) for name in SessionMetrics.FIELDS},
            )
        )
    return tuple(rows)


def emit_summary(summary: dict, fmt: str, path: str) -> None:
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump(_round_tree(summary), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return
    if fmt != "csv":
        raise ConfigError(f"unknown emit format {fmt!r}")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("algorithm", "metric", "stat", "value"))
        for algo in sorted(summary["algorithms"]):
            block = summary["algorithms"][algo]
            for metric in CDF_METRICS:
                writer.writerow((algo, metric, "mean", _fmt(block[metric]["mean"])))
                writer.writerow((algo, metric, "std", _fmt(block[metric]["std"])))
                for p, value in enumerate(block[metric]["percentiles"], start=1):
                    writer.writerow((algo, metric, f"p{p:02d}", _fmt(value)))


def _round_tree(node):
    if isinstance(node, float):
        return _round6(node)
    if isinstance(node, dict):
        return {k: _round_tree(v) for k, v in node.items()}
    if isinstance(node, (list, tuple)):
        return [_round_tree(v) for v in node]
    return node


def emit_buffer_series(series, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("algorithm", "trace", "chunk", "time_s", "buffer_segments"))
        for algo, trace_id, chunk, t, q in series:
            writer.writerow((algo, trace_id, chunk, _fmt(t), _fmt(q)))


def write_outputs(config: ExperimentConfig, result: ExperimentResult) -> list[str]:
    """Write all requested artifacts; returns the paths written."""
    os.makedirs(config.output_dir, exist_ok=True)
    written = []
    for fmt in config.formats:
        rows_path = os.path.join(config.output_dir, f"results.{fmt}")
        emit_rows(result.rows, fmt, rows_path)
        written.append(rows_path)
        summary_path = os.path.join(config.output_dir, f"summary.{fmt}")
        emit_summary(result.summary, fmt, summary_path)
        written.append(summary_path)
    if config.buffer_series:
        series_path = os.path.join(config.output_dir, "buffer_series.csv")
        emit_buffer_series(result.buffer_series, series_path)
        written.append(series_path)
    if config.figures:
        from .figures import render_report_figures

        written.extend(render_report_figures(result, config.output_dir))
    return written
