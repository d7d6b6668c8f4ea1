"""Virtual-wire execution, transmit ports and the pcap writer.

execute() is a pure function: it lays a plan out on an idealized wire
(no collisions, zero propagation delay) with byte-exact integer-nanosecond
timestamps. The same plan can drive a real port through transmit(), which
paces frames on a best-effort OS clock; the core never needs raw-socket
privileges because loopback ports satisfy the same contract.
"""

from __future__ import annotations

import struct
import threading
import time
from dataclasses import dataclass, field

from ._util import bulk_allocation
from .engine import TransmissionPlan
from .errors import PortUnavailableError, SendFailureError
from .frames import SEQ_LEN, FrameSpec, LineRate, _frame_parts, build_frame

PCAP_MAGIC_NS = 0xA1B23C4D
PCAP_MAGIC_US = 0xA1B2C3D4
PCAP_LINKTYPE_ETHERNET = 1


@dataclass(frozen=True, slots=True)
class FrameEvent:
    """One frame on the wire; start_ns marks the first preamble byte."""

    seq: int
    start_ns: int
    end_ns: int
    burst_index: int
    wire_bytes: bytes


@dataclass(frozen=True, slots=True)
class Trace:
    plan: TransmissionPlan
    rate: LineRate
    events: tuple[FrameEvent, ...]

    def captured(self) -> list[tuple[int, bytes]]:
        """The (timestamp, bytes) view the analyzer consumes."""
        return [(e.start_ns, e.wire_bytes) for e in self.events]


def execute(plan: TransmissionPlan, frame: FrameSpec, t0: int = 0) -> Trace:
    """Run a plan on the virtual wire; deterministic in (plan, frame, t0).

    Within a burst, consecutive frame starts are exactly one period apart;
    burst k starts at its planned offset from t0. Sequence numbers run
    continuously across bursts.
    """
    events = []
    occupancy = plan.occupancy_ns
    period = plan.period_ns
    # per-frame only the sequence number varies; mutate one template buffer
    prefix, fill_region = _frame_parts(frame)
    template = bytearray(prefix + bytes(SEQ_LEN) + fill_region)
    seq_at = len(prefix)
    pack_seq = struct.Struct(">I").pack_into
    append = events.append
    seq = 0
    with bulk_allocation():
        for burst_index, burst in enumerate(plan.bursts):
            start = t0 + burst.start_offset_ns
            for _ in range(burst.frames_in_burst):
                pack_seq(template, seq_at, seq)
                append(
                    FrameEvent(
                        seq=seq,
                        start_ns=start,
                        end_ns=start + occupancy,
                        burst_index=burst_index,
                        wire_bytes=bytes(template),
                    )
                )
                seq += 1
                start += period
    return Trace(plan=plan, rate=plan.rate, events=tuple(events))


_WRITE_CHUNK = 1 << 20


def write_pcap(trace: Trace, sink) -> int:
    """Write a nanosecond-resolution little-endian pcap; returns bytes written.

    One record per event, timestamp split into s/ns fields; captured length
    equals the frame length (no preamble, no FCS).
    """
    written = sink.write(
        struct.pack("<IHHiIII", PCAP_MAGIC_NS, 2, 4, 0, 0, 0x7FFFFFFF, PCAP_LINKTYPE_ETHERNET)
    )
    chunk = bytearray()
    for event in trace.events:
        sec, nsec = divmod(event.start_ns, 10**9)
        length = len(event.wire_bytes)
        chunk += struct.pack("<IIII", sec, nsec, length, length)
        chunk += event.wire_bytes
        if len(chunk) >= _WRITE_CHUNK:
            written += sink.write(chunk)
            chunk.clear()
    if chunk:
        written += sink.write(chunk)
    return written


# --- transmit ports ----------------------------------------------------------
#
# Port adapter contract: open happens at construction (or open()),
# send(data, not_before_ns) blocks until the scheduled monotonic time and
# puts the frame on the wire, close() releases the device.


class LoopbackPort:
    """In-memory port: records (monotonic ns, bytes) for every send."""

    def __init__(self, port_id: str = "loop0"):
        self.port_id = port_id
        self.records: list[tuple[int, bytes]] = []
        self.closed = False

    def send(self, data: bytes, not_before_ns: int) -> None:
        if self.closed:
            raise SendFailureError(f"port {self.port_id} is closed")
        _sleep_until(not_before_ns)
        self.records.append((time.monotonic_ns(), data))

    def close(self) -> None:
        self.closed = True


class RawSocketPort:
    """AF_PACKET adapter for a real interface; needs CAP_NET_RAW."""

    def __init__(self, interface: str):
        import socket

        self.port_id = interface
        try:
            self._sock = socket.socket(socket.AF_PACKET, socket.SOCK_RAW)
            self._sock.bind((interface, 0))
        except (OSError, AttributeError) as exc:
            raise PortUnavailableError(f"cannot open port {interface!r}: {exc}") from exc

    def send(self, data: bytes, not_before_ns: int) -> None:
        _sleep_until(not_before_ns)
        try:
            self._sock.send(data)
        except OSError as exc:
            raise SendFailureError(f"send on {self.port_id} failed: {exc}") from exc

    def close(self) -> None:
        self._sock.close()


def open_port(port_id: str):
    """Map a port identifier to an adapter: loop* is virtual, anything else
    is treated as an OS interface name."""
    if port_id.startswith("loop"):
        return LoopbackPort(port_id)
    return RawSocketPort(port_id)


_SPIN_NS = 500_000  # sleep coarsely, then spin the last half millisecond


def _sleep_until(target_ns: int) -> None:
    while True:
        remaining = target_ns - time.monotonic_ns()
        if remaining <= 0:
            return
        if remaining > _SPIN_NS:
            time.sleep((remaining - _SPIN_NS) / 1e9)


@dataclass
class LiveRun:
    """Handle for an asynchronous transmission; observers read snapshots."""

    plan: TransmissionPlan
    port: object
    _thread: threading.Thread | None = None
    _stop: threading.Event = field(default_factory=threading.Event)
    _frames_sent: int = 0
    _started_ns: int = 0
    _ended_ns: int | None = None
    _error: Exception | None = None

    @property
    def frames_sent(self) -> int:
        return self._frames_sent

    @property
    def elapsed_ns(self) -> int:
        if self._started_ns == 0:
            return 0
        end = self._ended_ns if self._ended_ns is not None else time.monotonic_ns()
        return end - self._started_ns

    @property
    def done(self) -> bool:
        return self._thread is not None and not self._thread.is_alive()

    @property
    def error(self) -> Exception | None:
        return self._error

    @property
    def stop_requested(self) -> bool:
        return self._stop.is_set()

    @property
    def completed(self) -> bool:
        """True once every planned frame went out, even if a stop raced the end."""
        return self.done and self._error is None and self._frames_sent == self.plan.frames_total

    def stop(self) -> None:
        """Ask the sender to stop after the frame in flight; idempotent."""
        self._stop.set()

    def join(self, timeout: float | None = None) -> None:
        if self._thread is not None:
            self._thread.join(timeout)

    def _run(self, frame: FrameSpec) -> None:
        t0 = time.monotonic_ns()
        self._started_ns = t0
        seq = 0
        try:
            for burst in self.plan.bursts:
                target = t0 + burst.start_offset_ns
                for _ in range(burst.frames_in_burst):
                    # coarse wait here so stop() interrupts promptly; the
                    # port only spins the final sub-millisecond slice
                    remaining = target - time.monotonic_ns() - _SPIN_NS
                    if remaining > 0 and self._stop.wait(remaining / 1e9):
                        return
                    if self._stop.is_set():
                        return
                    self.port.send(build_frame(frame, seq), target)
                    seq += 1
                    self._frames_sent = seq
                    target += self.plan.period_ns
        except Exception as exc:  # surface via the handle, thread must not die loud
            self._error = exc
        finally:
            self._ended_ns = time.monotonic_ns()


def transmit(plan: TransmissionPlan, frame: FrameSpec, port) -> LiveRun:
    """Start pacing a plan onto an open port; returns immediately.

    The caller holds exclusive port ownership for the lifetime of the run.
    """
    run = LiveRun(plan=plan, port=port)
    thread = threading.Thread(target=run._run, args=(frame,), daemon=True)
    run._thread = thread
    thread.start()
    return run
