"""Piecewise-constant bandwidth traces and exact download timing."""
from __future__ import annotations

import bisect
import csv
import io
from dataclasses import dataclass


class StalledDownloadError(RuntimeError):
    """Raised when a download can never finish (zero bandwidth forever)."""


@dataclass(frozen=True)
class BandwidthTrace:
    """Bandwidth as a step function of time.

    rate_mbps[i] holds on [time_s[i], time_s[i+1]); the last value extends
    to infinity.  Times must start at 0 and strictly increase; rates are
    nonnegative and not all zero.
    """

    time_s: tuple[float, ...]
    rate_mbps: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.time_s) == 0 or len(self.time_s) != len(self.rate_mbps):
            raise ValueError("trace needs matching, nonempty time and rate arrays")
        if self.time_s[0] != 0:
            raise ValueError("trace must start at time 0")
        if any(b <= a for a, b in zip(self.time_s, self.time_s[1:])):
            raise ValueError("trace times must strictly increase")
        if any(r < 0 for r in self.rate_mbps):
            raise ValueError("trace rates must be nonnegative")
        if all(r == 0 for r in self.rate_mbps):
            raise ValueError("trace cannot be zero everywhere")

    def rate_at(self, t: float) -> float:
        if t < 0:
            raise ValueError("time before trace start")
        i = bisect.bisect_right(self.time_s, t) - 1
        return self.rate_mbps[i]


def download_finish(start: float, size_mbits: float, trace: BandwidthTrace) -> float:
    """Exact finish time of a download of size_mbits starting at start.

    Integrates the step function piece by piece, so results on synthetic
    traces are exact up to float arithmetic.
    """
    if start < 0:
        raise ValueError("download cannot start before time 0")
    if size_mbits < 0:
        raise ValueError("size must be nonnegative")
    if size_mbits == 0:
        return start
    remaining = size_mbits
    t = start
    i = bisect.bisect_right(trace.time_s, t) - 1
    n = len(trace.time_s)
    while True:
        rate = trace.rate_mbps[i]
        if i + 1 < n:
            span = trace.time_s[i + 1] - t
            if rate > 0:
                need = remaining / rate
                if need <= span:
                    return t + need
                remaining -= rate * span
            t = trace.time_s[i + 1]
            i += 1
        else:
            # final piece extends forever
            if rate <= 0:
                raise StalledDownloadError(
                    f"download of {size_mbits} Mb stalls at t={t}: bandwidth is zero from here on"
                )
            return t + remaining / rate


def constant_trace(rate_mbps: float) -> BandwidthTrace:
    return BandwidthTrace((0.0,), (float(rate_mbps),))


def square_trace(low_mbps: float, high_mbps: float, period_s: float, duration_s: float) -> BandwidthTrace:
    """Square wave alternating high/low every half period, high first."""
    if period_s <= 0 or duration_s <= 0:
        raise ValueError("period and duration must be positive")
    times: list[float] = []
    rates: list[float] = []
    t = 0.0
    high = True
    while t < duration_s:
        times.append(t)
        rates.append(float(high_mbps if high else low_mbps))
        t += period_s / 2.0
        high = not high
    return BandwidthTrace(tuple(times), tuple(rates))


def ramp_trace(start_mbps: float, stop_mbps: float, duration_s: float, steps: int = 20) -> BandwidthTrace:
    """Staircase approximation of a linear ramp over duration_s."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    times = tuple(i * duration_s / steps for i in range(steps))
    if steps == 1:
        rates: tuple[float, ...] = (float(start_mbps),)
    else:
        rates = tuple(
            start_mbps + (stop_mbps - start_mbps) * i / (steps - 1) for i in range(steps)
        )
    return BandwidthTrace(times, rates)


TRACE_HEADER = ("time_s", "bandwidth_mbps")


def load_bandwidth_trace(path_or_file) -> BandwidthTrace:
    """Read a trace CSV with header time_s,bandwidth_mbps."""
    if hasattr(path_or_file, "read"):
        return _parse_trace_csv(path_or_file)
    with open(path_or_file, newline="") as fh:
        return _parse_trace_csv(fh)


def _parse_trace_csv(fh) -> BandwidthTrace:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != TRACE_HEADER:
        raise ValueError(f"trace CSV must start with header {','.join(TRACE_HEADER)}")
    times: list[float] = []
    rates: list[float] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ValueError(f"trace CSV line {lineno}: expected 2 fields, got {row}")
        try:
            t, r = float(row[0]), float(row[1])
        except ValueError:
            raise ValueError(f"trace CSV line {lineno}: non-numeric field in {row}") from None
        if times and t <= times[-1]:
            raise ValueError(f"trace CSV line {lineno}: time {t:g} not after {times[-1]:g}")
        if r < 0:
            raise ValueError(f"trace CSV line {lineno}: negative rate {r:g}")
        times.append(t)
        rates.append(r)
    if not times:
        raise ValueError("trace CSV has no data rows")
    return BandwidthTrace(tuple(times), tuple(rates))


def dump_bandwidth_trace(trace: BandwidthTrace, fh) -> None:
    """Write a trace as CSV with the canonical header."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for t, r in zip(trace.time_s, trace.rate_mbps):
        writer.writerow([f"{t:.6g}", f"{r:.6g}"])


def trace_to_csv_text(trace: BandwidthTrace) -> str:
    buf = io.StringIO()
    dump_bandwidth_trace(trace, buf)
    return buf.getvalue()
