"""Command-line entry point: plan, generate, analyze, serve.

Exit codes are fixed for scripting: 0 success (or verification pass),
1 verification fail, 2 validation error or malformed input, 3 transmit
port failure, 4 service bind failure.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
from fractions import Fraction

from . import analyzer, wire
from .engine import (
    BurstFeature,
    DurationFeature,
    FramesFeature,
    LoadFraction,
    LoadSpec,
    TransmissionPlan,
    format_duration_ns,
    make_plan,
    parse_duration_ns,
)
from .errors import NetloadError, PortUnavailableError, SendFailureError, ValidationError
from .frames import (
    FRAME_LEN_PRESETS,
    ConstantFill,
    FrameSpec,
    IncrementFill,
    LineRate,
    MacAddress,
    RandomFill,
    VlanTag,
)
from .serialize import plan_to_json, report_to_json, spec_to_json, verdict_to_json

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_VALIDATION = 2
EXIT_PORT_FAILURE = 3
EXIT_BIND_FAILURE = 4

DEFAULT_SRC_MAC = "02:00:00:00:00:01"
DEFAULT_DST_MAC = "02:00:00:00:00:02"


def _add_spec_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--load", required=True, metavar="PERCENT",
                        help="target load as a percentage, e.g. 25 or 12.5")
    parser.add_argument("--frame-size", required=True, type=int, metavar="P",
                        help=f"frame bytes dst MAC through payload, 60-1514 "
                             f"(presets: {', '.join(map(str, FRAME_LEN_PRESETS))})")
    parser.add_argument("--rate", default="100M", metavar="RATE",
                        help="line rate: 100M or 1G (default 100M)")
    parser.add_argument("--src-mac", default=DEFAULT_SRC_MAC)
    parser.add_argument("--dst-mac", default=DEFAULT_DST_MAC)
    parser.add_argument("--ethertype", default="0x8892",
                        help="hex ethertype (default 0x8892)")
    parser.add_argument("--vlan", default=None, metavar="PCP.CFI.VID",
                        help="VLAN tag as pcp.cfi.vid, e.g. 7.0.0")
    parser.add_argument("--fill", default="constant:0", metavar="FILL",
                        help="payload fill: constant:BYTE, increment, random:SEED")
    parser.add_argument("--frames", type=int, default=None,
                        help="feature: send exactly this many frames")
    parser.add_argument("--duration", default=None, metavar="TIME",
                        help="feature: generate load for this long (20ms, 1.5s, ...)")
    parser.add_argument("--bursts", type=int, default=None,
                        help="feature: number of bursts")
    parser.add_argument("--burst-interval", default=None, metavar="TIME",
                        help="transmit window per burst")
    parser.add_argument("--sleep-interval", default=None, metavar="TIME",
                        help="idle gap between bursts")


def _parse_fill(text: str):
    kind, _, arg = text.partition(":")
    if kind == "constant":
        return ConstantFill(int(arg or "0", 0))
    if kind == "increment":
        return IncrementFill()
    if kind == "random":
        return RandomFill(int(arg or "0", 0))
    raise ValidationError(f"unknown fill {text!r}", field="fill")


def _spec_from_args(args: argparse.Namespace, port: str | None = None) -> LoadSpec:
    chosen = [
        name
        for name, value in (
            ("frames", args.frames),
            ("duration", args.duration),
            ("bursts", args.bursts),
        )
        if value is not None
    ]
    if len(chosen) != 1:
        raise ValidationError(
            f"exactly one feature required (--frames, --duration or --bursts), got {chosen or 'none'}",
            field="feature",
        )
    if chosen[0] == "frames":
        feature = FramesFeature(args.frames)
    elif chosen[0] == "duration":
        feature = DurationFeature(parse_duration_ns(args.duration))
    else:
        if args.burst_interval is None or args.sleep_interval is None:
            raise ValidationError(
                "--bursts needs --burst-interval and --sleep-interval", field="feature"
            )
        feature = BurstFeature(
            burst_count=args.bursts,
            burst_interval_ns=parse_duration_ns(args.burst_interval, "burst_interval"),
            sleep_interval_ns=parse_duration_ns(args.sleep_interval, "sleep_interval"),
        )
    try:
        ethertype = int(args.ethertype, 16)
    except ValueError:
        raise ValidationError(f"bad ethertype {args.ethertype!r}", field="ethertype") from None
    frame = FrameSpec(
        src=MacAddress.parse(args.src_mac),
        dst=MacAddress.parse(args.dst_mac),
        frame_len_p=args.frame_size,
        ethertype=ethertype,
        vlan=VlanTag.parse(args.vlan) if args.vlan else None,
        payload_fill=_parse_fill(args.fill),
    )
    return LoadSpec(
        frame=frame,
        rate=LineRate.parse(args.rate),
        load=LoadFraction.from_percent(args.load),
        feature=feature,
        port=port or getattr(args, "port", None) or "loop0",
    )


def _plan_table(plan: TransmissionPlan) -> str:
    rows = [
        ("frame bytes P", f"{plan.slot.p_bytes} B"),
        ("overhead O", f"{plan.slot.overhead_bytes} B"),
        ("slot size S", f"{plan.slot.slot_bytes} B"),
        ("extra gap I_L", f"{plan.extra_gap_bytes} B"),
        ("total gap I", f"{plan.total_gap_bytes} B"),
        ("frames F", str(plan.frames_total)),
        ("occupancy E_R", f"{plan.occupancy_ns} ns ({format_duration_ns(plan.occupancy_ns)})"),
        ("period E_L", f"{plan.period_ns} ns ({format_duration_ns(plan.period_ns)})"),
        ("elapsed T'", f"{plan.elapsed_ns} ns ({format_duration_ns(plan.elapsed_ns)})"),
    ]
    if plan.time_deficit_ns is not None:
        rows.append(
            ("deficit TD",
             f"{plan.time_deficit_ns} ns ({format_duration_ns(plan.time_deficit_ns)})")
        )
    if plan.burst_interval_ns is not None:
        rows.append(("bursts", f"{len(plan.bursts)} x {plan.bursts[0].frames_in_burst} frames"))
        rows.append(("burst span", format_duration_ns(plan.structure_span_ns)))
    rows.append(
        ("achieved load",
         f"{float(plan.achieved_load * 100):.6g}% ({plan.achieved_load.numerator}"
         f"/{plan.achieved_load.denominator})")
    )
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def _report_table(report: analyzer.CaptureReport) -> str:
    rows = [
        ("frames", str(report.frame_count)),
        ("elapsed", f"{float(report.elapsed_ns):.0f} ns "
                    f"({format_duration_ns(report.elapsed_ns)})"),
        ("mean period", (
            f"{float(report.measured_period_ns):.1f} ns "
            f"({format_duration_ns(report.measured_period_ns)})"
            if report.measured_period_ns is not None else "n/a (single frame per window)")),
        ("measured load", f"{float(report.measured_load * 100):.6g}%"),
        ("bursts", str(len(report.bursts))),
    ]
    if report.gaps:
        rows.append(
            ("gap min/max/stddev",
             f"{report.gaps.min_ns} / {report.gaps.max_ns} / {report.gaps.stddev_ns:.1f} ns")
        )
    seq = report.sequence
    rows.append(
        ("sequence", "clean" if seq.clean else
         f"{seq.missing_count} missing, {seq.reordered_count} reordered")
    )
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def cmd_plan(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    plan = make_plan(spec)
    if args.format == "json":
        print(json.dumps({"spec": spec_to_json(spec), "plan": plan_to_json(plan)},
                         indent=2, sort_keys=True))
    else:
        print(_plan_table(plan))
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    plan = make_plan(spec)
    if args.mode in ("sim", "pcap"):
        trace = wire.execute(plan, spec.frame)
        if args.mode == "pcap":
            if not args.out:
                raise ValidationError("--mode pcap needs --out", field="out")
            with open(args.out, "wb") as fh:
                written = wire.write_pcap(trace, fh)
            print(f"wrote {len(trace.events)} records ({written} bytes) to {args.out}")
        report = analyzer.measure(trace.captured(), spec.rate)
        if args.format == "json":
            print(json.dumps({"plan": plan_to_json(plan), "report": report_to_json(report)},
                             indent=2, sort_keys=True))
        else:
            print(_report_table(report))
        return EXIT_OK

    # live mode
    try:
        port = wire.open_port(spec.port)
    except PortUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PORT_FAILURE
    run = wire.transmit(plan, spec.frame, port)
    run.join()
    port.close()
    if run.error is not None:
        print(f"error: {run.error}", file=sys.stderr)
        print(f"sent {run.frames_sent} of {plan.frames_total} frames", file=sys.stderr)
        return EXIT_PORT_FAILURE
    actual = run.elapsed_ns
    print(f"sent {run.frames_sent} of {plan.frames_total} frames in "
          f"{format_duration_ns(actual)} (planned {format_duration_ns(plan.elapsed_ns)})")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    try:
        with open(args.pcap, "rb") as fh:
            events = analyzer.read_pcap(fh)
        rate = LineRate.parse(args.rate)
        report = analyzer.measure(events, rate)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NetloadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    expects = any(
        getattr(args, name) is not None
        for name in ("expect_load", "expect_frame_size", "expect_frames",
                     "expect_duration", "expect_bursts")
    )
    if not expects:
        if args.format == "json":
            print(json.dumps({"report": report_to_json(report)}, indent=2, sort_keys=True))
        else:
            print(_report_table(report))
        return EXIT_OK

    if args.expect_load is None or args.expect_frame_size is None:
        raise ValidationError("--expect-load and --expect-frame-size go together",
                              field="expect")
    expect_ns = argparse.Namespace(
        load=args.expect_load, frame_size=args.expect_frame_size, rate=args.rate,
        src_mac=args.expect_src_mac, dst_mac=args.expect_dst_mac,
        ethertype=args.expect_ethertype, vlan=args.expect_vlan, fill=args.expect_fill,
        frames=args.expect_frames, duration=args.expect_duration,
        bursts=args.expect_bursts, burst_interval=args.expect_burst_interval,
        sleep_interval=args.expect_sleep_interval,
    )
    plan = make_plan(_spec_from_args(expect_ns))
    tol = analyzer.Tolerance(
        period_ns=Fraction(str(args.tol_period_ns)),
        load=Fraction(str(args.tol_load)) / 100,
    )
    verdict = analyzer.verify(report, plan, tol)
    if args.format == "json":
        print(json.dumps({"report": report_to_json(report),
                          "verdict": verdict_to_json(verdict)}, indent=2, sort_keys=True))
    else:
        print(_report_table(report))
        print()
        for check in verdict.checks:
            mark = "pass" if check.passed else "FAIL"
            print(f"{mark}  {check.name}: expected {check.expected}, measured {check.measured}")
    return EXIT_OK if verdict.ok else EXIT_VERIFY_FAILED


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app, load_service_config

    config = load_service_config(args.config)
    if args.listen:
        config.listen = args.listen
    if args.data_dir:
        config.data_dir = args.data_dir
    # Probe the socket first: uvicorn's own bind failure is awkward to map
    # onto an exit code.
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((config.host, config.port))
    except OSError as exc:
        print(f"error: cannot bind {config.listen}: {exc}", file=sys.stderr)
        return EXIT_BIND_FAILURE
    finally:
        probe.close()

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netload",
        description="Deterministic Ethernet/Profinet load generation and verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    plan_p = sub.add_parser("plan", help="compute and print a transmission plan")
    _add_spec_flags(plan_p)
    plan_p.add_argument("--format", choices=("table", "json"), default="table")
    plan_p.set_defaults(func=cmd_plan)

    gen_p = sub.add_parser("generate", help="execute a plan: simulate, write pcap, or transmit")
    _add_spec_flags(gen_p)
    gen_p.add_argument("--mode", choices=("sim", "pcap", "live"), default="sim")
    gen_p.add_argument("--out", default=None, help="pcap output path (pcap mode)")
    gen_p.add_argument("--port", default=None, help="transmit port (live mode), e.g. loop0")
    gen_p.add_argument("--format", choices=("table", "json"), default="table")
    gen_p.set_defaults(func=cmd_generate)

    ana_p = sub.add_parser("analyze", help="measure a pcap capture, optionally verify")
    ana_p.add_argument("--pcap", required=True)
    ana_p.add_argument("--rate", default="100M")
    ana_p.add_argument("--format", choices=("table", "json"), default="table")
    ana_p.add_argument("--expect-load", default=None, metavar="PERCENT")
    ana_p.add_argument("--expect-frame-size", type=int, default=None, metavar="P")
    ana_p.add_argument("--expect-src-mac", default=DEFAULT_SRC_MAC)
    ana_p.add_argument("--expect-dst-mac", default=DEFAULT_DST_MAC)
    ana_p.add_argument("--expect-ethertype", default="0x8892")
    ana_p.add_argument("--expect-vlan", default=None, metavar="PCP.CFI.VID")
    ana_p.add_argument("--expect-fill", default="constant:0")
    ana_p.add_argument("--expect-frames", type=int, default=None)
    ana_p.add_argument("--expect-duration", default=None)
    ana_p.add_argument("--expect-bursts", type=int, default=None)
    ana_p.add_argument("--expect-burst-interval", default=None)
    ana_p.add_argument("--expect-sleep-interval", default=None)
    ana_p.add_argument("--tol-period-ns", default=0,
                       help="period tolerance in ns (default 0: exact)")
    ana_p.add_argument("--tol-load", default=0,
                       help="load tolerance in percent points (default 0: exact)")
    ana_p.set_defaults(func=cmd_analyze)

    serve_p = sub.add_parser("serve", help="run the HTTP control service")
    serve_p.add_argument("--config", default=None, help="JSON config file")
    serve_p.add_argument("--listen", default=None, help="host:port override")
    serve_p.add_argument("--data-dir", default=None)
    serve_p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags, matching our validation exit code
        return exc.code if isinstance(exc.code, int) else EXIT_VALIDATION
    try:
        return args.func(args)
    except SendFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PORT_FAILURE
    except NetloadError as exc:
        field = getattr(exc, "field", None)
        where = f" ({field})" if field else ""
        print(f"error{where}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
