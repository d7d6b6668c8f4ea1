// Wire formats of the run-control HTTP API. The HMI renders these numbers
// verbatim: every displayed plan/report figure originates from the service.

export interface VlanJson {
    pcp: number;
    cfi: number;
    vid: number;
}

export type FeatureJson =
    | { type: "frames"; frames: number }
    | { type: "duration"; duration: number | string }
    | { type: "burst"; bursts: number; burst_interval: number | string; sleep_interval: number | string };

export interface LoadSpecJson {
    load_percent: number | string;
    src_mac: string;
    dst_mac: string;
    ethertype: string;
    vlan: VlanJson | null;
    frame_len_p: number;
    line_rate: string;
    port: string;
    feature: FeatureJson;
}

export interface BurstLayoutJson {
    frames_in_burst: number;
    start_offset_ns: number;
}

export interface PlanJson {
    p_bytes: number;
    overhead_bytes: number;
    slot_bytes: number;
    extra_gap_bytes: number;
    total_gap_bytes: number;
    frames_total: number;
    occupancy_ns: number;
    period_ns: number;
    elapsed_ns: number;
    time_deficit_ns: number | null;
    line_rate: string;
    achieved_load: string;
    achieved_load_percent: number;
    requested_load: string;
    burst_interval_ns: number | null;
    sleep_interval_ns: number | null;
    structure_span_ns: number;
    bursts: BurstLayoutJson[];
}

export interface ReportJson {
    frame_count: number;
    elapsed_ns: number | string;
    measured_period_ns: number | string | null;
    measured_load: string;
    measured_load_percent: number;
    line_rate: string;
    gaps: { min_ns: number; max_ns: number; mean_ns: number | string; stddev_ns: number } | null;
    bursts: { frames: number; first_start_ns: number; last_start_ns: number }[];
    sequence: {
        first_seq: number;
        last_seq: number;
        missing_count: number;
        reordered_count: number;
        duplicate_count: number;
        missing_sample: number[];
    };
}

export interface VerdictJson {
    ok: boolean;
    checks: { name: string; passed: boolean; expected: string; measured: string }[];
}

export type RunState = "planned" | "running" | "completed" | "failed" | "stopped";

export interface RunRecord {
    run_id: string;
    created_at: string;
    spec: LoadSpecJson;
    plan: PlanJson;
    state: RunState;
    mode: string | null;
    frames_sent: number;
    started_at: string | null;
    ended_at: string | null;
    report: ReportJson | null;
    verdict: VerdictJson | null;
    error: string | null;
    capture_file: string | null;
    elapsed_so_far_ns?: number;
    actual_elapsed_ns?: number;
}

export interface ApiErrorBody {
    error: string;
    message?: string;
    field?: string;
}

export const TERMINAL_STATES: ReadonlySet<RunState> = new Set(["completed", "failed", "stopped"]);
