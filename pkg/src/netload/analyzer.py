"""Capture measurement and plan verification.

measure() plays the role instruments play on a physical rig: it takes a
timestamped frame list (from the simulator or a pcap file), recomputes
per-frame slot occupancy from the overhead rule, and reports period, load,
burst structure and sequence health. verify() then compares a report
against a TransmissionPlan metric by metric; simulator traces are held to
zero tolerance, live captures to caller-supplied tolerances.

Load bookkeeping matches the planner's so the two sides are commensurable:
a frame's slot includes its minimum interframe gap, and measured load is
slot time over whole-period windows (frame count times the mean observed
period, sleep intervals excluded). The whole-period window is what makes a
k-period capture measure exactly the planned load; the span from first
start to last frame end would under-count the final frame's gap share.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import BinaryIO, Sequence

from ._util import bulk_allocation
from .engine import TransmissionPlan
from .errors import (
    EmptyCaptureError,
    NonMonotoneTimestampsError,
    PcapError,
    TruncatedRecordError,
)
from .frames import LineRate, overhead_for, parse_frame_header
from .wire import PCAP_MAGIC_NS, PCAP_MAGIC_US

MISSING_SEQ_SAMPLE_LIMIT = 20


@dataclass(frozen=True, slots=True)
class GapStats:
    """Consecutive start-delta statistics within transmit windows."""

    min_ns: int
    max_ns: int
    mean_ns: Fraction
    stddev_ns: float


@dataclass(frozen=True, slots=True)
class BurstStat:
    frames: int
    first_start_ns: int
    last_start_ns: int


@dataclass(frozen=True, slots=True)
class SequenceStats:
    first_seq: int
    last_seq: int
    missing_count: int
    reordered_count: int
    duplicate_count: int
    missing_sample: tuple[int, ...]

    @property
    def clean(self) -> bool:
        return self.missing_count == 0 and self.reordered_count == 0 and self.duplicate_count == 0


@dataclass(frozen=True, slots=True)
class CaptureReport:
    """Measured statistics for one capture."""

    frame_count: int
    elapsed_ns: Fraction
    gaps: GapStats | None
    measured_period_ns: Fraction | None
    measured_load: Fraction
    bursts: tuple[BurstStat, ...]
    sequence: SequenceStats
    rate: LineRate


def measure(
    events: Sequence[tuple[int, bytes]],
    rate: LineRate,
    split_threshold_ns: int | None = None,
) -> CaptureReport:
    """Measure a time-ordered (timestamp, frame bytes) list.

    Bursts are segmented wherever a start delta exceeds the threshold;
    by default that is twice the smallest observed delta, which recovers
    the burst structure whenever sleep intervals exceed the frame period.
    Captures where every burst holds a single frame have no period to
    observe, so the threshold default cannot split them; pass an explicit
    threshold when analyzing such a capture.
    """
    if len(events) == 0:
        raise EmptyCaptureError("capture holds no frames")

    starts = [ts for ts, _ in events]
    for i in range(1, len(starts)):
        if starts[i] < starts[i - 1]:
            raise NonMonotoneTimestampsError(
                f"timestamp {starts[i]} at index {i} precedes {starts[i - 1]}"
            )

    slot_occ = []
    seqs = []
    for _, data in events:
        p_len, tagged, seq = parse_frame_header(data)
        slot_occ.append((p_len + overhead_for(tagged)) * rate.byte_time_ns)
        seqs.append(seq)

    deltas = [starts[i] - starts[i - 1] for i in range(1, len(starts))]
    threshold = split_threshold_ns if split_threshold_ns is not None else (
        2 * min(deltas) if deltas else None
    )

    # Segment into bursts, then pool the within-burst deltas.
    burst_bounds = [0]
    for i, delta in enumerate(deltas):
        if threshold is not None and delta > threshold:
            burst_bounds.append(i + 1)
    burst_bounds.append(len(events))
    bursts = tuple(
        BurstStat(
            frames=hi - lo,
            first_start_ns=starts[lo],
            last_start_ns=starts[hi - 1],
        )
        for lo, hi in zip(burst_bounds, burst_bounds[1:])
    )

    within = [
        deltas[i]
        for lo, hi in zip(burst_bounds, burst_bounds[1:])
        for i in range(lo, hi - 1)
    ]

    gaps = None
    period = None
    if within:
        n = len(within)
        total = sum(within)
        period = Fraction(total, n)
        # population stddev via integers: var = sum((d*n - total)^2) / n^3
        sq = sum((d * n - total) ** 2 for d in within)
        gaps = GapStats(
            min_ns=min(within),
            max_ns=max(within),
            mean_ns=period,
            stddev_ns=math.sqrt(sq / n**3),
        )

    total_occupancy = sum(slot_occ)
    if period is not None:
        elapsed = Fraction(starts[-1] - starts[0]) + period
        load = Fraction(total_occupancy) / (len(events) * period)
    else:
        # Degenerate single-frame-per-window capture: each frame fills
        # exactly its own slot, so load over its own span is 1.
        elapsed = Fraction(starts[-1] - starts[0] + slot_occ[-1])
        load = Fraction(total_occupancy, int(elapsed))

    return CaptureReport(
        frame_count=len(events),
        elapsed_ns=elapsed,
        gaps=gaps,
        measured_period_ns=period,
        measured_load=load,
        bursts=bursts,
        sequence=_sequence_stats(seqs),
        rate=rate,
    )


def _sequence_stats(seqs: list[int]) -> SequenceStats:
    reordered = sum(1 for i in range(1, len(seqs)) if seqs[i] < seqs[i - 1])
    seen = set(seqs)
    duplicates = len(seqs) - len(seen)
    lo, hi = min(seqs), max(seqs)
    missing_count = (hi - lo + 1) - len(seen)
    sample = []
    if missing_count:
        for s in range(lo, hi + 1):
            if s not in seen:
                sample.append(s)
                if len(sample) == MISSING_SEQ_SAMPLE_LIMIT:
                    break
    return SequenceStats(
        first_seq=seqs[0],
        last_seq=seqs[-1],
        missing_count=missing_count,
        reordered_count=reordered,
        duplicate_count=duplicates,
        missing_sample=tuple(sample),
    )


@dataclass(frozen=True, slots=True)
class Tolerance:
    """Acceptable deviations for verify(); zero for simulator traces."""

    period_ns: Fraction = Fraction(0)
    load: Fraction = Fraction(0)

    @classmethod
    def exact(cls) -> "Tolerance":
        return cls()


@dataclass(frozen=True, slots=True)
class VerifyCheck:
    name: str
    passed: bool
    expected: str
    measured: str


@dataclass(frozen=True, slots=True)
class Verdict:
    ok: bool
    checks: tuple[VerifyCheck, ...]

    def check(self, name: str) -> VerifyCheck:
        return next(c for c in self.checks if c.name == name)


def verify(report: CaptureReport, plan: TransmissionPlan, tol: Tolerance | None = None) -> Verdict:
    """Compare a measurement against a plan; failures are verdict content.

    A capture whose transmit windows each hold a single frame exhibits no
    period, so the period and load checks pass vacuously when the plan
    predicts exactly that; they fail if a period was expected but not seen.
    """
    tol = tol or Tolerance.exact()
    checks = []

    checks.append(
        VerifyCheck(
            name="frame_count",
            passed=report.frame_count == plan.frames_total,
            expected=str(plan.frames_total),
            measured=str(report.frame_count),
        )
    )

    period_expected = any(b.frames_in_burst >= 2 for b in plan.bursts)
    if report.measured_period_ns is None:
        checks.append(
            VerifyCheck(
                name="period",
                passed=not period_expected,
                expected=f"{plan.period_ns} ns" if period_expected else "no period observable",
                measured="no period observable",
            )
        )
        checks.append(
            VerifyCheck(
                name="load",
                passed=not period_expected,
                expected=str(plan.achieved_load),
                measured="not measurable without a period",
            )
        )
    else:
        period_err = abs(report.measured_period_ns - plan.period_ns)
        checks.append(
            VerifyCheck(
                name="period",
                passed=period_err <= tol.period_ns,
                expected=f"{plan.period_ns} ns",
                measured=f"{float(report.measured_period_ns):.3f} ns",
            )
        )
        load_err = abs(report.measured_load - plan.achieved_load)
        checks.append(
            VerifyCheck(
                name="load",
                passed=load_err <= tol.load,
                expected=str(plan.achieved_load),
                measured=str(report.measured_load),
            )
        )

    expected_shape = [b.frames_in_burst for b in plan.bursts]
    measured_shape = [b.frames for b in report.bursts]
    checks.append(
        VerifyCheck(
            name="bursts",
            passed=expected_shape == measured_shape,
            expected=_shape(expected_shape),
            measured=_shape(measured_shape),
        )
    )

    seq = report.sequence
    checks.append(
        VerifyCheck(
            name="sequence",
            passed=seq.clean,
            expected="contiguous, in order",
            measured=(
                "clean"
                if seq.clean
                else f"{seq.missing_count} missing, {seq.reordered_count} reordered, "
                f"{seq.duplicate_count} duplicated"
                + (f", first missing {list(seq.missing_sample[:5])}" if seq.missing_sample else "")
            ),
        )
    )

    return Verdict(ok=all(c.passed for c in checks), checks=tuple(checks))


def _shape(counts: list[int]) -> str:
    if len(counts) <= 6:
        return f"{len(counts)} burst(s) {counts}"
    return f"{len(counts)} burst(s) [{counts[0]}, {counts[1]}, ... {counts[-1]}]"


# --- pcap reading ------------------------------------------------------------

_GLOBAL_HEADER_LEN = 24
_RECORD_HEADER_LEN = 16


def read_pcap(source: BinaryIO) -> list[tuple[int, bytes]]:
    """Read a pcap capture into (timestamp_ns, frame bytes) events.

    Accepts microsecond and nanosecond magic in either endianness and
    normalizes all timestamps to nanoseconds.
    """
    header = source.read(_GLOBAL_HEADER_LEN)
    if len(header) < _GLOBAL_HEADER_LEN:
        raise PcapError(f"file too short for a pcap global header ({len(header)} bytes)")
    magic_le = struct.unpack_from("<I", header)[0]
    magic_be = struct.unpack_from(">I", header)[0]
    if magic_le in (PCAP_MAGIC_NS, PCAP_MAGIC_US):
        endian, magic = "<", magic_le
    elif magic_be in (PCAP_MAGIC_NS, PCAP_MAGIC_US):
        endian, magic = ">", magic_be
    else:
        raise PcapError(f"bad pcap magic {magic_le:#010x}")
    subsecond_scale = 1 if magic == PCAP_MAGIC_NS else 1000

    events = []
    index = 0
    with bulk_allocation():
        while True:
            rec = source.read(_RECORD_HEADER_LEN)
            if len(rec) == 0:
                return events
            if len(rec) < _RECORD_HEADER_LEN:
                raise TruncatedRecordError(
                    f"record {index}: header truncated at {len(rec)} bytes", record_index=index
                )
            sec, sub, incl_len, _orig_len = struct.unpack(endian + "IIII", rec)
            data = source.read(incl_len)
            if len(data) < incl_len:
                raise TruncatedRecordError(
                    f"record {index}: {incl_len} data bytes expected, {len(data)} present",
                    record_index=index,
                )
            events.append((sec * 10**9 + sub * subsecond_scale, data))
            index += 1
