"""Load equations and deterministic transmission planning.

Given a frame, a line rate and a requested load fraction L, three features
turn into a schedule:

  * fixed frame count F: pace frames with an extra gap I_L = ceil(S*(1/L - 1))
    bytes beyond the minimum 12-byte interframe gap, so each frame occupies
    one period E_L = (S + I_L) * byte_time;
  * fixed duration T: send as many whole periods as fit, F = floor(T/E_L),
    finishing at T' = F * E_L <= T with a deficit TD = T - T' smaller than
    one period;
  * bursts: run the duration computation per burst interval, then sleep,
    repeating for the requested number of bursts.

All arithmetic is exact: loads are rationals, times are integer
nanoseconds, and byte times are integral at both supported line rates.
Gap rounding goes up (the achieved load never exceeds the request) and
frame-count rounding goes down (the elapsed time never exceeds the
request); the exposed achieved_load records what the rounding landed on.
Floats appear only at presentation boundaries.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import EmptyPlanError, OvershootError, ValidationError
from .frames import MIN_IFG_BYTES, FrameSpec, LineRate, WireSlot, slot_size

NS_PER_UNIT = {
    "h": 3_600_000_000_000,
    "min": 60_000_000_000,
    "s": 1_000_000_000,
    "ms": 1_000_000,
    "us": 1_000,
    "µs": 1_000,
    "ns": 1,
}

_DURATION_RE = re.compile(r"^\s*([0-9]+(?:\.[0-9]+)?)\s*([a-zµ]+)\s*$")


def parse_duration_ns(value: int | str, field: str = "duration") -> int:
    """Convert a duration to integer nanoseconds, exactly.

    Accepts a bare integer (already nanoseconds) or a string with an
    h/min/s/ms/us/ns suffix; decimal values are fine as long as the result
    is a whole number of nanoseconds.
    """
    if isinstance(value, bool):
        raise ValidationError(f"duration must be ns or a suffixed string, got {value!r}", field)
    if isinstance(value, int):
        if value < 0:
            raise ValidationError(f"duration {value} ns is negative", field)
        return value
    match = _DURATION_RE.match(value.lower())
    if not match:
        raise ValidationError(f"bad duration {value!r} (examples: 20ms, 1.5s, 300us)", field)
    number, unit = match.groups()
    if unit not in NS_PER_UNIT:
        raise ValidationError(f"unknown duration unit {unit!r} in {value!r}", field)
    ns = Fraction(number) * NS_PER_UNIT[unit]
    if ns.denominator != 1:
        raise ValidationError(f"duration {value!r} is not a whole number of nanoseconds", field)
    return int(ns)


def format_duration_ns(ns: int | Fraction) -> str:
    """Render nanoseconds at a readable scale; exact input, lossy display."""
    value = float(ns)
    for unit, factor in (("s", 1e9), ("ms", 1e6), ("us", 1e3)):
        if value >= factor:
            return f"{value / factor:g} {unit}"
    return f"{value:g} ns"


@dataclass(frozen=True, slots=True)
class LoadFraction:
    """Requested load as an exact rational in (0, 1]."""

    fraction: Fraction

    def __post_init__(self):
        if not 0 < self.fraction <= 1:
            raise ValidationError(
                f"load {self.fraction} outside (0, 1]", field="load_percent"
            )

    @classmethod
    def from_percent(cls, percent: int | float | str | Fraction) -> "LoadFraction":
        """Parse a percentage; strings are read as exact decimals or fractions."""
        try:
            value = Fraction(str(percent)) if isinstance(percent, float) else Fraction(percent)
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"bad load percent {percent!r}", field="load_percent") from None
        return cls(value / 100)

    @property
    def percent(self) -> Fraction:
        return self.fraction * 100

    def __str__(self) -> str:
        pct = self.percent
        return f"{pct}%" if pct.denominator == 1 else f"{float(pct):g}%"


@dataclass(frozen=True, slots=True)
class FramesFeature:
    """Send a fixed number of frames."""

    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValidationError(f"frame count {self.count} must be >= 1", field="feature.frames")


@dataclass(frozen=True, slots=True)
class DurationFeature:
    """Generate load for a fixed time window."""

    duration_ns: int

    def __post_init__(self):
        if self.duration_ns < 0:
            raise ValidationError("duration must be >= 0", field="feature.duration")


@dataclass(frozen=True, slots=True)
class BurstFeature:
    """Repeated transmit windows separated by sleep gaps."""

    burst_count: int
    burst_interval_ns: int
    sleep_interval_ns: int

    def __post_init__(self):
        if self.burst_count < 1:
            raise ValidationError("burst count must be >= 1", field="feature.bursts")
        if self.burst_interval_ns < 0:
            raise ValidationError("burst interval must be >= 0", field="feature.burst_interval")
        if self.sleep_interval_ns < 0:
            raise ValidationError("sleep interval must be >= 0", field="feature.sleep_interval")


Feature = FramesFeature | DurationFeature | BurstFeature


@dataclass(frozen=True, slots=True)
class LoadSpec:
    """A full run request: what to send, how fast, at what load, where."""

    frame: FrameSpec
    rate: LineRate
    load: LoadFraction
    feature: Feature
    port: str = "loop0"


@dataclass(frozen=True, slots=True)
class BurstLayout:
    frames_in_burst: int
    start_offset_ns: int


@dataclass(frozen=True, slots=True)
class TransmissionPlan:
    """The computed schedule; sufficient to execute deterministically.

    For non-burst plans `bursts` is a singleton starting at offset 0, so the
    executor treats every plan the same way. achieved_load is the exact
    rational S/(S + I_L) the integer gap actually maintains.
    """

    slot: WireSlot
    rate: LineRate
    extra_gap_bytes: int
    frames_total: int
    period_ns: int
    occupancy_ns: int
    elapsed_ns: int
    bursts: tuple[BurstLayout, ...]
    achieved_load: Fraction
    requested_load: Fraction
    time_deficit_ns: int | None = None
    burst_interval_ns: int | None = None
    sleep_interval_ns: int | None = None

    @property
    def total_gap_bytes(self) -> int:
        return total_gap(self.extra_gap_bytes)

    @property
    def structure_span_ns(self) -> int:
        """Span of the burst structure: n transmit windows with n-1 sleeps
        between them; the trailing sleep after the last burst is not counted.
        Equals the elapsed transmit time for non-burst plans."""
        if self.burst_interval_ns is None or self.sleep_interval_ns is None:
            return self.elapsed_ns
        n = len(self.bursts)
        return n * self.burst_interval_ns + (n - 1) * self.sleep_interval_ns


def extra_gap(slot_bytes: int, load: LoadFraction) -> int:
    """Additional interframe gap I_L in bytes to hold a load at a slot size.

    The exact value S*(1/L - 1) is rounded up so the achieved load never
    exceeds the request; it is exact whenever S*(1/L - 1) is integral.
    """
    if slot_bytes < 84:
        raise ValidationError(f"slot size {slot_bytes} below the 84-byte minimum")
    return math.ceil(slot_bytes * (1 - load.fraction) / load.fraction)


def total_gap(extra_gap_bytes: int) -> int:
    """Full interframe gap I: the minimum 12 bytes plus the load gap I_L."""
    if extra_gap_bytes < 0:
        raise ValidationError(f"extra gap {extra_gap_bytes} is negative")
    return MIN_IFG_BYTES + extra_gap_bytes


def occupancy(slot_bytes: int, rate: LineRate) -> int:
    """Slot occupancy E_R = S*8/R, exact in integer nanoseconds."""
    return slot_bytes * rate.byte_time_ns


def period(slot_bytes: int, extra_gap_bytes: int, rate: LineRate) -> int:
    """Frame-to-frame period E_L = (S + I_L) * byte_time.

    With the exact (unrounded) gap this equals E_R / L.
    """
    return (slot_bytes + extra_gap_bytes) * rate.byte_time_ns


def frames_for_duration(
    rate: LineRate, slot_bytes: int, load: LoadFraction, duration_ns: int
) -> int:
    """Frame count F = R/(S*8) * L * T, rounded down.

    The floor is taken against the integer-gap pacing period rather than
    the exact rate formula: the two agree whenever S*(1/L - 1) is whole,
    and where they differ the period is what the sender actually paces at,
    so this floor is the one that keeps the elapsed time F * E_L within
    the requested duration.
    """
    if duration_ns < 0:
        raise ValidationError(f"duration {duration_ns} ns is negative")
    return duration_ns // period(slot_bytes, extra_gap(slot_bytes, load), rate)


def elapsed(frames: int, period_ns: int) -> int:
    """Elapsed transmit time T' = F * E_L."""
    if frames < 0:
        raise ValidationError(f"frame count {frames} is negative")
    return frames * period_ns


def time_deficit(duration_ns: int, elapsed_ns: int, period_ns: int) -> int:
    """Deficit TD = T - T', with the feasibility check that one more frame
    would overshoot: T' + E_L must exceed T, otherwise F was under-computed."""
    if elapsed_ns > duration_ns:
        raise OvershootError(
            f"elapsed {elapsed_ns} ns exceeds the requested {duration_ns} ns"
        )
    if elapsed_ns + period_ns <= duration_ns:
        raise OvershootError(
            f"one more frame still fits: {elapsed_ns} + {period_ns} <= {duration_ns}"
        )
    return duration_ns - elapsed_ns


def make_plan(spec: LoadSpec) -> TransmissionPlan:
    """Turn a load request into a deterministic schedule.

    Raises EmptyPlanError when the requested duration or burst interval is
    too short to fit a single frame; an empty schedule is reported, never
    silently produced.
    """
    slot = slot_size(spec.frame)
    s = slot.slot_bytes
    gap = extra_gap(s, spec.load)
    period_ns = period(s, gap, spec.rate)
    occupancy_ns = occupancy(s, spec.rate)
    achieved = Fraction(s, s + gap)
    feature = spec.feature

    deficit: int | None = None
    burst_interval: int | None = None
    sleep_interval: int | None = None
    if isinstance(feature, FramesFeature):
        frames = feature.count
        bursts = (BurstLayout(frames_in_burst=frames, start_offset_ns=0),)
        total_elapsed = elapsed(frames, period_ns)
    elif isinstance(feature, DurationFeature):
        frames = frames_for_duration(spec.rate, s, spec.load, feature.duration_ns)
        if frames == 0:
            raise EmptyPlanError(
                f"duration {feature.duration_ns} ns is shorter than one "
                f"{period_ns} ns frame period at this load"
            )
        bursts = (BurstLayout(frames_in_burst=frames, start_offset_ns=0),)
        total_elapsed = elapsed(frames, period_ns)
        deficit = time_deficit(feature.duration_ns, total_elapsed, period_ns)
    elif isinstance(feature, BurstFeature):
        per_burst = frames_for_duration(spec.rate, s, spec.load, feature.burst_interval_ns)
        if per_burst == 0:
            raise EmptyPlanError(
                f"burst interval {feature.burst_interval_ns} ns is shorter than one "
                f"{period_ns} ns frame period at this load"
            )
        stride = feature.burst_interval_ns + feature.sleep_interval_ns
        bursts = tuple(
            BurstLayout(frames_in_burst=per_burst, start_offset_ns=k * stride)
            for k in range(feature.burst_count)
        )
        frames = per_burst * feature.burst_count
        total_elapsed = bursts[-1].start_offset_ns + elapsed(per_burst, period_ns)
        burst_interval = feature.burst_interval_ns
        sleep_interval = feature.sleep_interval_ns
    else:  # pragma: no cover - exhaustive over Feature
        raise ValidationError(f"unknown feature {feature!r}", field="feature")

    return TransmissionPlan(
        slot=slot,
        rate=spec.rate,
        extra_gap_bytes=gap,
        frames_total=frames,
        period_ns=period_ns,
        occupancy_ns=occupancy_ns,
        elapsed_ns=total_elapsed,
        bursts=bursts,
        achieved_load=achieved,
        requested_load=spec.load.fraction,
        time_deficit_ns=deficit,
        burst_interval_ns=burst_interval,
        sleep_interval_ns=sleep_interval,
    )
