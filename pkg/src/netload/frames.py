"""Ethernet/Profinet frame model: validation, on-wire accounting, serialization.

The user-visible frame length P counts destination MAC through end of
payload (FCS excluded). On-wire accounting adds the fixed overhead O:
preamble (7) + start delimiter (1) + FCS (4) + minimum interframe gap (12)
= 24 bytes, plus 4 when a VLAN tag is present. The slot size S = P + O is
the wire time one frame occupies including its minimum gap.

Accounting and serialization differ deliberately: the VLAN tag is counted
in O, yet the serialized frame is P + 4 bytes long (the tag sits between
the source MAC and the Ethertype). Preamble and FCS are never serialized;
capture files conventionally store frames without them and the analyzer
only needs timing.
"""

from __future__ import annotations

import random
import re
import struct
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

from .errors import FrameLengthError, TruncatedFrameError, ValidationError

PROFINET_ETHERTYPE = 0x8892
VLAN_TPID = 0x8100

PREAMBLE_BYTES = 7
START_DELIMITER_BYTES = 1
FCS_BYTES = 4
MIN_IFG_BYTES = 12
BASE_OVERHEAD_BYTES = PREAMBLE_BYTES + START_DELIMITER_BYTES + FCS_BYTES + MIN_IFG_BYTES
VLAN_TAG_BYTES = 4

MIN_FRAME_LEN = 60
MAX_FRAME_LEN = 1514
HEADER_LEN = 14  # dst(6) + src(6) + ethertype(2), VLAN excluded
SEQ_LEN = 4

# Preset P values commonly used for load sweeps; any P in [60, 1514] is legal.
FRAME_LEN_PRESETS = (60, 128, 256, 512, 1020, 1514)

_MAC_RE = re.compile(r"^([0-9a-fA-F]{2}:){5}[0-9a-fA-F]{2}$")


@dataclass(frozen=True, slots=True)
class MacAddress:
    """Six-octet MAC address; canonical form is lowercase colon-separated hex."""

    octets: bytes

    def __post_init__(self):
        if len(self.octets) != 6:
            raise ValidationError(f"MAC address needs 6 octets, got {len(self.octets)}")

    @classmethod
    def parse(cls, text: str) -> "MacAddress":
        if not _MAC_RE.match(text):
            raise ValidationError(f"bad MAC address {text!r}, expected aa:bb:cc:dd:ee:ff")
        return cls(bytes(int(part, 16) for part in text.split(":")))

    def __str__(self) -> str:
        return ":".join(f"{b:02x}" for b in self.octets)


@dataclass(frozen=True, slots=True)
class VlanTag:
    """802.1Q tag fields. Serializes to TPID 0x8100 + PCP|CFI|VID, 4 bytes."""

    priority: int
    cfi: int
    vid: int

    def __post_init__(self):
        if not 0 <= self.priority <= 7:
            raise ValidationError(f"vlan priority {self.priority} outside [0,7]", field="vlan.pcp")
        if self.cfi not in (0, 1):
            raise ValidationError(f"vlan cfi {self.cfi} must be 0 or 1", field="vlan.cfi")
        if not 0 <= self.vid <= 4094:
            raise ValidationError(f"vlan vid {self.vid} outside [0,4094]", field="vlan.vid")

    def to_bytes(self) -> bytes:
        tci = (self.priority << 13) | (self.cfi << 12) | self.vid
        return struct.pack("!HH", VLAN_TPID, tci)

    @classmethod
    def from_tci(cls, tci: int) -> "VlanTag":
        return cls(priority=(tci >> 13) & 0x7, cfi=(tci >> 12) & 0x1, vid=tci & 0xFFF)

    def __str__(self) -> str:
        return f"{self.priority}.{self.cfi}.{self.vid}"

    @classmethod
    def parse(cls, text: str) -> "VlanTag":
        parts = text.split(".")
        if len(parts) != 3:
            raise ValidationError(f"bad vlan {text!r}, expected pcp.cfi.vid", field="vlan")
        try:
            pcp, cfi, vid = (int(p) for p in parts)
        except ValueError:
            raise ValidationError(f"bad vlan {text!r}, expected integers", field="vlan") from None
        return cls(pcp, cfi, vid)


# --- payload fills -----------------------------------------------------------
#
# A fill renders the payload region after the 4-byte sequence number. The
# seeded pseudo-random fill embeds its seed in the first 4 rendered bytes so
# captures are self-describing and parse_frame can invert it.


@dataclass(frozen=True, slots=True)
class ConstantFill:
    value: int = 0

    def __post_init__(self):
        if not 0 <= self.value <= 255:
            raise ValidationError(f"fill byte {self.value} outside [0,255]", field="payload_fill")

    def render(self, length: int) -> bytes:
        return bytes([self.value]) * length


@dataclass(frozen=True, slots=True)
class IncrementFill:
    def render(self, length: int) -> bytes:
        return bytes(i & 0xFF for i in range(length))


@dataclass(frozen=True, slots=True)
class RandomFill:
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.seed <= 0xFFFFFFFF:
            raise ValidationError(f"fill seed {self.seed} outside 32-bit range", field="payload_fill")

    def render(self, length: int) -> bytes:
        if length < 4:
            raise ValidationError("random fill needs at least 4 bytes for its seed")
        return self.seed.to_bytes(4, "big") + random.Random(self.seed).randbytes(length - 4)


@dataclass(frozen=True, slots=True)
class RawFill:
    """Verbatim payload bytes; parse_frame falls back to this for foreign frames."""

    data: bytes = b""

    def render(self, length: int) -> bytes:
        if len(self.data) != length:
            raise ValidationError(
                f"raw fill holds {len(self.data)} bytes but payload region is {length}"
            )
        return self.data


Fill = ConstantFill | IncrementFill | RandomFill | RawFill


class LineRate(Enum):
    """Transmit line rate; byte time is exact in integer nanoseconds."""

    MBPS_100 = 100_000_000
    GBPS_1 = 1_000_000_000

    @property
    def bits_per_second(self) -> int:
        return self.value

    @property
    def byte_time_ns(self) -> int:
        # 80 ns/byte at 100 Mbps, 8 ns/byte at 1 Gbps
        return 8 * 10**9 // self.value

    @classmethod
    def parse(cls, text: str) -> "LineRate":
        key = text.strip().lower().removesuffix("bps").removesuffix("b")
        if key in ("100m", "100"):
            return cls.MBPS_100
        if key in ("1g", "1000m"):
            return cls.GBPS_1
        raise ValidationError(f"unsupported line rate {text!r} (use 100M or 1G)", field="line_rate")

    def __str__(self) -> str:
        return "100M" if self is LineRate.MBPS_100 else "1G"


@dataclass(frozen=True, slots=True)
class FrameSpec:
    """User-facing frame definition. frame_len_p is P: dst MAC through payload end."""

    src: MacAddress
    dst: MacAddress
    frame_len_p: int
    ethertype: int = PROFINET_ETHERTYPE
    vlan: VlanTag | None = None
    payload_fill: Fill = field(default_factory=ConstantFill)

    def __post_init__(self):
        if not MIN_FRAME_LEN <= self.frame_len_p <= MAX_FRAME_LEN:
            raise FrameLengthError(
                f"frame length {self.frame_len_p} outside [{MIN_FRAME_LEN},{MAX_FRAME_LEN}]",
                field="frame_len_p",
            )
        if not 0 <= self.ethertype <= 0xFFFF:
            raise ValidationError(f"ethertype {self.ethertype:#x} not 16-bit", field="ethertype")

    @property
    def payload_len(self) -> int:
        return self.frame_len_p - HEADER_LEN

    @property
    def wire_len(self) -> int:
        """Serialized length: P plus the 4-byte VLAN tag when present."""
        return self.frame_len_p + (VLAN_TAG_BYTES if self.vlan else 0)


@dataclass(frozen=True, slots=True)
class WireSlot:
    """On-wire accounting for one frame: P, overhead O and slot S = P + O."""

    p_bytes: int
    overhead_bytes: int

    @property
    def slot_bytes(self) -> int:
        return self.p_bytes + self.overhead_bytes

    def occupancy_ns(self, rate: LineRate) -> int:
        """Slot occupancy E_R at the given line rate, minimum gap included."""
        return self.slot_bytes * rate.byte_time_ns


def overhead_for(vlan_tagged: bool) -> int:
    return BASE_OVERHEAD_BYTES + (VLAN_TAG_BYTES if vlan_tagged else 0)


def slot_size(spec: FrameSpec) -> WireSlot:
    """Compute the on-wire slot for a frame spec. Pure and deterministic."""
    return WireSlot(p_bytes=spec.frame_len_p, overhead_bytes=overhead_for(spec.vlan is not None))


@lru_cache(maxsize=256)
def _frame_parts(spec: FrameSpec) -> tuple[bytes, bytes]:
    """Per-spec constant prefix (headers) and fill region; only seq varies per frame."""
    prefix = spec.dst.octets + spec.src.octets
    if spec.vlan:
        prefix += spec.vlan.to_bytes()
    prefix += struct.pack("!H", spec.ethertype)
    fill_region = spec.payload_fill.render(spec.payload_len - SEQ_LEN)
    return prefix, fill_region


def build_frame(spec: FrameSpec, seq: int) -> bytes:
    """Serialize one frame: headers, 4-byte big-endian sequence, then fill.

    The result is the capture-file representation: no preamble, no FCS;
    length equals P, plus 4 when VLAN tagged.
    """
    if not 0 <= seq <= 0xFFFFFFFF:
        raise ValidationError(f"sequence {seq} outside 32-bit range")
    prefix, fill_region = _frame_parts(spec)
    return b"".join((prefix, seq.to_bytes(SEQ_LEN, "big"), fill_region))


def _detect_fill(region: bytes) -> Fill:
    if len(region) >= 4:
        seed = int.from_bytes(region[:4], "big")
        if RandomFill(seed).render(len(region)) == region:
            return RandomFill(seed)
    if region == IncrementFill().render(len(region)):
        return IncrementFill()
    if region and region == bytes([region[0]]) * len(region):
        return ConstantFill(region[0])
    return RawFill(region)


def parse_frame(data: bytes) -> tuple[FrameSpec, int]:
    """Invert build_frame: recover the spec and sequence number.

    Foreign frames parse too: an unrecognized payload pattern comes back as
    a RawFill, and a TPID other than 0x8100 means the frame is untagged.
    """
    if len(data) < MIN_FRAME_LEN:
        raise TruncatedFrameError(f"frame is {len(data)} bytes, need at least {MIN_FRAME_LEN}")
    dst = MacAddress(data[0:6])
    src = MacAddress(data[6:12])
    vlan = None
    offset = 12
    if struct.unpack_from("!H", data, 12)[0] == VLAN_TPID:
        vlan = VlanTag.from_tci(struct.unpack_from("!H", data, 14)[0])
        offset = 16
    ethertype = struct.unpack_from("!H", data, offset)[0]
    payload = data[offset + 2 :]
    p_len = len(data) - (VLAN_TAG_BYTES if vlan else 0)
    if not MIN_FRAME_LEN <= p_len <= MAX_FRAME_LEN:
        raise FrameLengthError(f"frame length {p_len} outside [{MIN_FRAME_LEN},{MAX_FRAME_LEN}]")
    seq = int.from_bytes(payload[:SEQ_LEN], "big")
    spec = FrameSpec(
        src=src,
        dst=dst,
        frame_len_p=p_len,
        ethertype=ethertype,
        vlan=vlan,
        payload_fill=_detect_fill(payload[SEQ_LEN:]),
    )
    return spec, seq


def parse_frame_header(data: bytes) -> tuple[int, bool, int]:
    """Light parse for measurement: (P, vlan_tagged, seq). No fill detection."""
    if len(data) < MIN_FRAME_LEN:
        raise TruncatedFrameError(f"frame is {len(data)} bytes, need at least {MIN_FRAME_LEN}")
    tagged = struct.unpack_from("!H", data, 12)[0] == VLAN_TPID
    offset = 16 if tagged else 12
    seq = int.from_bytes(data[offset + 2 : offset + 2 + SEQ_LEN], "big")
    return len(data) - (VLAN_TAG_BYTES if tagged else 0), tagged, seq
