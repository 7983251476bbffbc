"""Trace construction, exact download timing, and the CSV wire format."""
import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abr360.traces import (
    BandwidthTrace,
    StalledDownloadError,
    constant_trace,
    download_finish,
    dump_bandwidth_trace,
    load_bandwidth_trace,
    ramp_trace,
    square_trace,
    trace_to_csv_text,
)
from _oracles import numeric_download_finish


def test_constant_trace_is_single_piece():
    tr = constant_trace(10.0)
    assert tr.time_s == (0.0,)
    assert tr.rate_mbps == (10.0,)
    assert tr.rate_at(12345.0) == 10.0


def test_square_trace_alternates_high_first():
    tr = square_trace(2.0, 10.0, 20.0, 60.0)
    assert tr.time_s == (0.0, 10.0, 20.0, 30.0, 40.0, 50.0)
    assert tr.rate_mbps == (10.0, 2.0, 10.0, 2.0, 10.0, 2.0)


def test_ramp_trace_staircase_endpoints():
    tr = ramp_trace(1.0, 5.0, 50.0, steps=5)
    assert tr.time_s == (0.0, 10.0, 20.0, 30.0, 40.0)
    assert tr.rate_mbps[0] == 1.0
    assert tr.rate_mbps[-1] == 5.0


def test_trace_validation():
    with pytest.raises(ValueError):
        BandwidthTrace((1.0,), (5.0,))  # must start at 0
    with pytest.raises(ValueError):
        BandwidthTrace((0.0, 0.0), (5.0, 5.0))  # strictly increasing
    with pytest.raises(ValueError):
        BandwidthTrace((0.0,), (-1.0,))
    with pytest.raises(ValueError):
        BandwidthTrace((0.0,), (0.0,))  # zero everywhere is useless


def test_download_finish_constant():
    assert download_finish(0.0, 20.0, constant_trace(10.0)) == pytest.approx(2.0)


def test_download_finish_two_pieces():
    # 5 Mb in the first second, the remaining 5 Mb at 10 Mbps
    tr = BandwidthTrace((0.0, 1.0), (5.0, 10.0))
    assert download_finish(0.0, 10.0, tr) == pytest.approx(1.5)


def test_download_finish_zero_size_returns_start():
    assert download_finish(3.25, 0.0, constant_trace(1.0)) == 3.25


def test_download_finish_stalls_on_zero_tail():
    tr = BandwidthTrace((0.0, 1.0), (5.0, 0.0))
    with pytest.raises(StalledDownloadError):
        download_finish(0.0, 6.0, tr)
    # but a later nonzero piece rescues it
    tr2 = BandwidthTrace((0.0, 1.0, 11.0), (5.0, 0.0, 5.0))
    assert download_finish(0.0, 10.0, tr2) == pytest.approx(12.0)


@settings(max_examples=60, deadline=None)
@given(
    pieces=st.lists(
        st.one_of(st.just(0.0), st.floats(0.5, 20.0)), min_size=1, max_size=6
    ),
    size=st.floats(0.1, 30.0),
    start=st.floats(0.0, 5.0),
)
def test_download_finish_matches_numeric_integration(pieces, size, start):
    if pieces[-1] < 0.5:
        pieces = pieces[:-1] + [5.0]  # keep the tail downloadable
    times = tuple(float(i) * 2.0 for i in range(len(pieces)))
    tr = BandwidthTrace(times, tuple(float(r) for r in pieces))
    exact = download_finish(start, size, tr)
    step = 1e-3
    approx = numeric_download_finish(start, size, tr, step=step)
    # each boundary-straddling step miscounts up to step * max_rate megabits,
    # which stretches to step * max_rate / min_rate seconds when the finish
    # lands in a slow piece; one more step of plain quantization on top
    ratio = max(pieces) / min(r for r in pieces if r > 0)
    assert abs(approx - exact) <= step * (2 + (len(pieces) + 1) * ratio)


def test_csv_round_trip_and_header():
    tr = square_trace(2.0, 10.0, 20.0, 60.0)
    text = trace_to_csv_text(tr)
    assert text.splitlines()[0] == "time_s,bandwidth_mbps"
    back = load_bandwidth_trace(io.StringIO(text))
    assert back == tr


def test_load_two_piece_literal():
    tr = load_bandwidth_trace(io.StringIO("time_s,bandwidth_mbps\n0,10\n30,5\n"))
    assert tr.time_s == (0.0, 30.0)
    assert tr.rate_mbps == (10.0, 5.0)


def test_load_single_row_is_constant():
    tr = load_bandwidth_trace(io.StringIO("time_s,bandwidth_mbps\n0,16\n"))
    assert tr == constant_trace(16.0)


def test_load_rejects_unsorted_with_line_number():
    bad = "time_s,bandwidth_mbps\n0,10\n30,5\n20,7\n"
    with pytest.raises(ValueError, match="line 4"):
        load_bandwidth_trace(io.StringIO(bad))


def test_load_rejects_negative_rate_with_line_number():
    with pytest.raises(ValueError, match="line 2"):
        load_bandwidth_trace(io.StringIO("time_s,bandwidth_mbps\n0,-1\n"))


def test_load_rejects_missing_header_and_empty_body():
    with pytest.raises(ValueError, match="header"):
        load_bandwidth_trace(io.StringIO("t,bw\n0,1\n"))
    with pytest.raises(ValueError, match="no data"):
        load_bandwidth_trace(io.StringIO("time_s,bandwidth_mbps\n"))


def test_dump_is_loadable_and_deterministic(tmp_path):
    # values exactly representable at the emitted 6-digit precision
    tr = square_trace(1.5, 4.25, 20.0, 60.0)
    out = tmp_path / "trace.csv"
    with open(out, "w", newline="") as fh:
        dump_bandwidth_trace(tr, fh)
    first = out.read_bytes()
    with open(out, "w", newline="") as fh:
        dump_bandwidth_trace(tr, fh)
    assert out.read_bytes() == first
    assert load_bandwidth_trace(str(out)) == tr
