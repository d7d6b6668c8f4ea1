"""Canonical JSON encodings for specs, plans, reports and verdicts.

The service and the CLI both go through these functions, so a plan
rendered by either is byte-identical for the same spec. Exact rationals
are encoded as "num/den" strings; durations as integer nanoseconds.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any

from .analyzer import CaptureReport, Tolerance, Verdict
from .engine import (
    BurstFeature,
    DurationFeature,
    Feature,
    FramesFeature,
    LoadFraction,
    LoadSpec,
    TransmissionPlan,
    parse_duration_ns,
)
from .errors import FeatureConflictError, ValidationError
from .frames import (
    ConstantFill,
    Fill,
    FrameSpec,
    IncrementFill,
    LineRate,
    MacAddress,
    RandomFill,
    RawFill,
    VlanTag,
)

_FEATURE_KEYS = {
    "frames": {"frames"},
    "duration": {"duration"},
    "burst": {"bursts", "burst_interval", "sleep_interval"},
}


def frac_str(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else (
        f"{value.numerator}/{value.denominator}"
    )


def _number_or_frac(value: Fraction) -> Any:
    return int(value) if value.denominator == 1 else frac_str(value)


def _require(obj: dict, key: str) -> Any:
    if key not in obj or obj[key] is None:
        raise ValidationError(f"missing field {key!r}", field=key)
    return obj[key]


def fill_from_json(obj: Any) -> Fill:
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValidationError("payload_fill must be an object with a type", field="payload_fill")
    kind = obj["type"]
    if kind == "constant":
        return ConstantFill(int(obj.get("value", 0)))
    if kind == "increment":
        return IncrementFill()
    if kind == "random":
        return RandomFill(int(obj.get("seed", 0)))
    if kind == "raw":
        return RawFill(bytes.fromhex(obj.get("data", "")))
    raise ValidationError(f"unknown payload fill {kind!r}", field="payload_fill")


def fill_to_json(fill: Fill) -> dict:
    if isinstance(fill, ConstantFill):
        return {"type": "constant", "value": fill.value}
    if isinstance(fill, IncrementFill):
        return {"type": "increment"}
    if isinstance(fill, RandomFill):
        return {"type": "random", "seed": fill.seed}
    return {"type": "raw", "data": fill.data.hex()}


def feature_from_json(obj: Any) -> Feature:
    if not isinstance(obj, dict):
        raise ValidationError("feature must be an object", field="feature")
    kind = _require(obj, "type")
    if kind not in _FEATURE_KEYS:
        raise ValidationError(
            f"unknown feature type {kind!r} (frames, duration or burst)", field="feature.type"
        )
    foreign = {
        key
        for other, keys in _FEATURE_KEYS.items()
        if other != kind
        for key in keys
        if key in obj
    }
    if foreign:
        raise FeatureConflictError(
            f"feature {kind!r} cannot carry {sorted(foreign)}: only one feature at a time",
            field="feature",
        )
    unknown = set(obj) - _FEATURE_KEYS[kind] - {"type"}
    if unknown:
        raise ValidationError(f"unknown feature fields {sorted(unknown)}", field="feature")
    if kind == "frames":
        count = _require(obj, "frames")
        if not isinstance(count, int) or isinstance(count, bool):
            raise ValidationError("frames must be an integer", field="feature.frames")
        return FramesFeature(count)
    if kind == "duration":
        return DurationFeature(parse_duration_ns(_require(obj, "duration"), "feature.duration"))
    return BurstFeature(
        burst_count=int(_require(obj, "bursts")),
        burst_interval_ns=parse_duration_ns(
            _require(obj, "burst_interval"), "feature.burst_interval"
        ),
        sleep_interval_ns=parse_duration_ns(
            _require(obj, "sleep_interval"), "feature.sleep_interval"
        ),
    )


def feature_to_json(feature: Feature) -> dict:
    if isinstance(feature, FramesFeature):
        return {"type": "frames", "frames": feature.count}
    if isinstance(feature, DurationFeature):
        return {"type": "duration", "duration": feature.duration_ns}
    return {
        "type": "burst",
        "bursts": feature.burst_count,
        "burst_interval": feature.burst_interval_ns,
        "sleep_interval": feature.sleep_interval_ns,
    }


def spec_from_json(obj: dict) -> tuple[LoadSpec, Feature]:
    """Parse the canonical LoadSpec JSON; raises field-tagged errors."""
    if not isinstance(obj, dict):
        raise ValidationError("spec must be a JSON object")
    vlan = None
    if obj.get("vlan") is not None:
        v = obj["vlan"]
        if not isinstance(v, dict):
            raise ValidationError("vlan must be an object {pcp, cfi, vid}", field="vlan")
        vlan = VlanTag(
            priority=int(v.get("pcp", 0)), cfi=int(v.get("cfi", 0)), vid=int(v.get("vid", 0))
        )
    ethertype = obj.get("ethertype", "0x8892")
    if isinstance(ethertype, str):
        try:
            ethertype = int(ethertype, 16)
        except ValueError:
            raise ValidationError(
                f"bad ethertype {obj['ethertype']!r}", field="ethertype"
            ) from None
    frame = FrameSpec(
        src=MacAddress.parse(_require(obj, "src_mac")),
        dst=MacAddress.parse(_require(obj, "dst_mac")),
        frame_len_p=int(_require(obj, "frame_len_p")),
        ethertype=ethertype,
        vlan=vlan,
        payload_fill=fill_from_json(obj["payload_fill"]) if "payload_fill" in obj
        else ConstantFill(),
    )
    feature = feature_from_json(_require(obj, "feature"))
    spec = LoadSpec(
        frame=frame,
        rate=LineRate.parse(str(_require(obj, "line_rate"))),
        load=LoadFraction.from_percent(_require(obj, "load_percent")),
        feature=feature,
        port=str(obj.get("port", "loop0")),
    )
    return spec, feature


def spec_to_json(spec: LoadSpec) -> dict:
    frame = spec.frame
    return {
        "load_percent": _number_or_frac(spec.load.percent),
        "src_mac": str(frame.src),
        "dst_mac": str(frame.dst),
        "ethertype": f"0x{frame.ethertype:04x}",
        "vlan": (
            {"pcp": frame.vlan.priority, "cfi": frame.vlan.cfi, "vid": frame.vlan.vid}
            if frame.vlan
            else None
        ),
        "frame_len_p": frame.frame_len_p,
        "payload_fill": fill_to_json(frame.payload_fill),
        "line_rate": str(spec.rate),
        "port": spec.port,
        "feature": feature_to_json(spec.feature),
    }


def plan_to_json(plan: TransmissionPlan) -> dict:
    return {
        "p_bytes": plan.slot.p_bytes,
        "overhead_bytes": plan.slot.overhead_bytes,
        "slot_bytes": plan.slot.slot_bytes,
        "extra_gap_bytes": plan.extra_gap_bytes,
        "total_gap_bytes": plan.total_gap_bytes,
        "frames_total": plan.frames_total,
        "occupancy_ns": plan.occupancy_ns,
        "period_ns": plan.period_ns,
        "elapsed_ns": plan.elapsed_ns,
        "time_deficit_ns": plan.time_deficit_ns,
        "line_rate": str(plan.rate),
        "achieved_load": frac_str(plan.achieved_load),
        "achieved_load_percent": float(plan.achieved_load * 100),
        "requested_load": frac_str(plan.requested_load),
        "burst_interval_ns": plan.burst_interval_ns,
        "sleep_interval_ns": plan.sleep_interval_ns,
        "structure_span_ns": plan.structure_span_ns,
        "bursts": [
            {"frames_in_burst": b.frames_in_burst, "start_offset_ns": b.start_offset_ns}
            for b in plan.bursts
        ],
    }


def report_to_json(report: CaptureReport) -> dict:
    return {
        "frame_count": report.frame_count,
        "elapsed_ns": _number_or_frac(report.elapsed_ns),
        "measured_period_ns": (
            _number_or_frac(report.measured_period_ns)
            if report.measured_period_ns is not None
            else None
        ),
        "measured_load": frac_str(report.measured_load),
        "measured_load_percent": float(report.measured_load * 100),
        "line_rate": str(report.rate),
        "gaps": (
            {
                "min_ns": report.gaps.min_ns,
                "max_ns": report.gaps.max_ns,
                "mean_ns": _number_or_frac(report.gaps.mean_ns),
                "stddev_ns": report.gaps.stddev_ns,
            }
            if report.gaps
            else None
        ),
        "bursts": [
            {
                "frames": b.frames,
                "first_start_ns": b.first_start_ns,
                "last_start_ns": b.last_start_ns,
            }
            for b in report.bursts
        ],
        "sequence": {
            "first_seq": report.sequence.first_seq,
            "last_seq": report.sequence.last_seq,
            "missing_count": report.sequence.missing_count,
            "reordered_count": report.sequence.reordered_count,
            "duplicate_count": report.sequence.duplicate_count,
            "missing_sample": list(report.sequence.missing_sample),
        },
    }


def verdict_to_json(verdict: Verdict) -> dict:
    return {
        "ok": verdict.ok,
        "checks": [
            {
                "name": c.name,
                "passed": c.passed,
                "expected": c.expected,
                "measured": c.measured,
            }
            for c in verdict.checks
        ],
    }


def tolerance_from_json(obj: dict | None) -> Tolerance:
    if not obj:
        return Tolerance.exact()
    try:
        return Tolerance(
            period_ns=Fraction(str(obj.get("period_ns", 0))),
            load=Fraction(str(obj.get("load", 0))),
        )
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"bad tolerance {obj!r}", field="tolerance") from None
