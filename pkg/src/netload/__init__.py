"""Deterministic Ethernet/Profinet load generation and verification toolkit."""

from .analyzer import CaptureReport, Tolerance, Verdict, measure, read_pcap, verify
from .engine import (
    BurstFeature,
    DurationFeature,
    FramesFeature,
    LoadFraction,
    LoadSpec,
    TransmissionPlan,
    elapsed,
    extra_gap,
    frames_for_duration,
    make_plan,
    occupancy,
    parse_duration_ns,
    period,
    time_deficit,
    total_gap,
)
from .frames import (
    ConstantFill,
    FrameSpec,
    IncrementFill,
    LineRate,
    MacAddress,
    RandomFill,
    VlanTag,
    WireSlot,
    build_frame,
    parse_frame,
    slot_size,
)
from .wire import FrameEvent, LoopbackPort, Trace, execute, open_port, transmit, write_pcap

__version__ = "0.1.0"

__all__ = [
    "BurstFeature",
    "CaptureReport",
    "ConstantFill",
    "DurationFeature",
    "FrameEvent",
    "FrameSpec",
    "FramesFeature",
    "IncrementFill",
    "LineRate",
    "LoadFraction",
    "LoadSpec",
    "LoopbackPort",
    "MacAddress",
    "RandomFill",
    "Tolerance",
    "Trace",
    "TransmissionPlan",
    "Verdict",
    "VlanTag",
    "WireSlot",
    "build_frame",
    "elapsed",
    "execute",
    "extra_gap",
    "frames_for_duration",
    "make_plan",
    "measure",
    "occupancy",
    "open_port",
    "parse_duration_ns",
    "parse_frame",
    "period",
    "read_pcap",
    "slot_size",
    "time_deficit",
    "total_gap",
    "transmit",
    "verify",
    "write_pcap",
]
