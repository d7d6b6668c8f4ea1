import io
import struct
from fractions import Fraction

import pytest

from netload.analyzer import Tolerance, measure, read_pcap, verify
from netload.engine import BurstFeature, DurationFeature, FramesFeature, make_plan
from netload.errors import (
    EmptyCaptureError,
    NonMonotoneTimestampsError,
    PcapError,
    TruncatedRecordError,
)
from netload.frames import LineRate, VlanTag, build_frame
from netload.wire import execute, write_pcap
from tests.conftest import mk_frame, mk_spec

R100 = LineRate.MBPS_100


def sim_report(spec, **measure_kwargs):
    plan = make_plan(spec)
    trace = execute(plan, spec.frame)
    return plan, measure(trace.captured(), spec.rate, **measure_kwargs)


class TestMeasure:
    def test_case1_exact_period_and_load(self, case1_spec):
        _plan, report = sim_report(case1_spec)
        assert report.measured_period_ns == 492_160
        assert report.measured_load == Fraction(1, 4)
        assert report.gaps.min_ns == report.gaps.max_ns == 492_160
        assert report.gaps.stddev_ns == 0.0

    def test_case2_count_and_elapsed(self, case2_spec):
        _plan, report = sim_report(case2_spec)
        assert report.frame_count == 744
        assert report.elapsed_ns == 19_998_720

    def test_single_frame_degenerate_contract(self):
        spec = mk_spec(mk_frame(p=60), 25, FramesFeature(1))
        _plan, report = sim_report(spec)
        assert report.measured_period_ns is None
        assert report.gaps is None
        assert report.measured_load == 1
        assert report.elapsed_ns == 6_720  # its own slot

    def test_burst_segmentation(self):
        spec = mk_spec(
            mk_frame(p=1020, vlan=VlanTag(7, 0, 0)),
            50,
            BurstFeature(burst_count=4, burst_interval_ns=10**7, sleep_interval_ns=10**7),
        )
        plan, report = sim_report(spec)
        assert len(report.bursts) == 4
        assert [b.frames for b in report.bursts] == [b.frames_in_burst for b in plan.bursts]

    def test_vlan_overhead_attribution(self):
        # slot accounting for tagged frames adds 28 bytes over P
        spec = mk_spec(mk_frame(p=1020, vlan=VlanTag(7, 0, 0)), 50, FramesFeature(5))
        _plan, report = sim_report(spec)
        assert report.measured_load == Fraction(1, 2)

    def test_load_window_property(self):
        # over k whole periods the measured load is exactly the planned one
        spec = mk_spec(mk_frame(p=1514), 25, FramesFeature(2))
        plan = make_plan(spec)
        for k in (1, 2, 3, 7, 50):
            trace = execute(
                make_plan(mk_spec(mk_frame(p=1514), 25, FramesFeature(k + 1))), spec.frame
            )
            report = measure(trace.captured(), R100)
            assert report.measured_load == plan.achieved_load

    def test_empty_capture_rejected(self):
        with pytest.raises(EmptyCaptureError):
            measure([], R100)

    def test_non_monotone_rejected(self):
        frame = build_frame(mk_frame(p=60), 0)
        with pytest.raises(NonMonotoneTimestampsError):
            measure([(100, frame), (50, frame)], R100)

    def test_explicit_split_threshold(self):
        # single-frame bursts have no period; an explicit threshold segments them
        frame = build_frame(mk_frame(p=60), 0)
        events = [(k * 10**6, frame) for k in range(3)]
        report = measure(events, R100, split_threshold_ns=500_000)
        assert len(report.bursts) == 3
        assert report.measured_period_ns is None


class TestVerify:
    def test_self_consistency_zero_tolerance(self, case1_spec, case2_spec):
        for spec in (case1_spec, case2_spec):
            plan, report = sim_report(spec)
            verdict = verify(report, plan)
            assert verdict.ok, verdict.checks

    def test_burst_trace_verifies(self):
        spec = mk_spec(
            mk_frame(p=256),
            40,
            BurstFeature(burst_count=3, burst_interval_ns=10**6, sleep_interval_ns=10**6),
        )
        plan, report = sim_report(spec)
        assert verify(report, plan).ok

    def test_deleted_frame_fails_count_and_reports_gap(self, case1_spec):
        plan = make_plan(case1_spec)
        trace = execute(plan, case1_spec.frame)
        events = trace.captured()
        del events[17]
        verdict = verify(measure(events, R100), plan)
        assert not verdict.ok
        assert not verdict.check("frame_count").passed
        assert not verdict.check("sequence").passed
        assert "1 missing" in verdict.check("sequence").measured

    def test_wrong_load_expectation_fails(self, case2_spec):
        plan_50 = make_plan(mk_spec(mk_frame(p=60), 50, DurationFeature(20_000_000)))
        _plan, report = sim_report(case2_spec)
        verdict = verify(report, plan_50)
        assert not verdict.ok
        assert not verdict.check("load").passed

    def test_single_frame_plan_passes_vacuously(self):
        spec = mk_spec(mk_frame(p=60), 25, FramesFeature(1))
        plan, report = sim_report(spec)
        verdict = verify(report, plan)
        assert verdict.ok
        assert "no period" in verdict.check("period").expected

    def test_tolerance_band(self, case1_spec):
        plan, report = sim_report(case1_spec)
        jittered = [(ts + (7 if i % 2 else 0), data) for i, (ts, data) in
                    enumerate(execute(plan, case1_spec.frame).captured())]
        noisy = measure(jittered, R100)
        assert not verify(noisy, plan).ok
        assert verify(noisy, plan, Tolerance(period_ns=Fraction(10), load=Fraction(1, 100))).ok


def make_pcap(endian: str, magic: int, records: list[tuple[int, int, bytes]]) -> bytes:
    buf = struct.pack(endian + "IHHiIII", magic, 2, 4, 0, 0, 0x7FFFFFFF, 1)
    for sec, sub, data in records:
        buf += struct.pack(endian + "IIII", sec, sub, len(data), len(data)) + data
    return buf


class TestReadPcap:
    def test_round_trip(self, case1_spec):
        plan = make_plan(case1_spec)
        trace = execute(plan, case1_spec.frame)
        sink = io.BytesIO()
        write_pcap(trace, sink)
        assert read_pcap(io.BytesIO(sink.getvalue())) == trace.captured()

    def test_microsecond_magic_scales_to_ns(self):
        frame = build_frame(mk_frame(p=60), 0)
        raw = make_pcap("<", 0xA1B2C3D4, [(1, 250, frame)])
        events = read_pcap(io.BytesIO(raw))
        assert events == [(10**9 + 250_000, frame)]

    def test_big_endian_nanosecond(self):
        frame = build_frame(mk_frame(p=60), 0)
        raw = make_pcap(">", 0xA1B23C4D, [(2, 7, frame)])
        assert read_pcap(io.BytesIO(raw)) == [(2 * 10**9 + 7, frame)]

    def test_big_endian_microsecond(self):
        frame = build_frame(mk_frame(p=60), 0)
        raw = make_pcap(">", 0xA1B2C3D4, [(0, 1, frame)])
        assert read_pcap(io.BytesIO(raw)) == [(1_000, frame)]

    def test_bad_magic(self):
        with pytest.raises(PcapError):
            read_pcap(io.BytesIO(b"\xde\xad\xbe\xef" + bytes(20)))

    def test_short_file(self):
        with pytest.raises(PcapError):
            read_pcap(io.BytesIO(b"\x4d\x3c\xb2\xa1"))

    def test_truncated_record_names_index(self):
        frame = build_frame(mk_frame(p=60), 0)
        raw = make_pcap("<", 0xA1B23C4D, [(0, 0, frame), (0, 1, frame)])
        with pytest.raises(TruncatedRecordError) as err:
            read_pcap(io.BytesIO(raw[:-10]))
        assert err.value.record_index == 1

    def test_truncated_record_header(self):
        frame = build_frame(mk_frame(p=60), 0)
        raw = make_pcap("<", 0xA1B23C4D, [(0, 0, frame)])
        with pytest.raises(TruncatedRecordError) as err:
            read_pcap(io.BytesIO(raw + b"\x00\x01"))
        assert err.value.record_index == 1
