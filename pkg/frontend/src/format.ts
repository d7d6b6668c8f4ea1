import type { PlanJson, RunRecord, RunState } from "./types";

// Pure string builders so the rendering is testable without a DOM. All
// figures come straight from API payloads; only unit scaling happens here.

export function formatNs(ns: number | string | null): string {
    if (ns === null) return "n/a";
    const value = typeof ns === "string" ? fractionToNumber(ns) : ns;
    if (value >= 1e9) return `${trim(value / 1e9)} s`;
    if (value >= 1e6) return `${trim(value / 1e6)} ms`;
    if (value >= 1e3) return `${trim(value / 1e3)} us`;
    return `${trim(value)} ns`;
}

function trim(value: number): string {
    return Number(value.toPrecision(6)).toString();
}

// exact rationals arrive as "num/den" strings
function fractionToNumber(text: string): number {
    const [num, den] = text.split("/");
    return den ? Number(num) / Number(den) : Number(num);
}

export function escapeHtml(text: string): string {
    return text
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;");
}

export function stateBadge(state: RunState): string {
    return `<span class="badge badge-${state}">${state}</span>`;
}

export function planSummary(plan: PlanJson): string {
    const rows: [string, string][] = [
        ["slot size S", `${plan.slot_bytes} B (P ${plan.p_bytes} + O ${plan.overhead_bytes})`],
        ["extra gap I_L", `${plan.extra_gap_bytes} B`],
        ["total gap I", `${plan.total_gap_bytes} B`],
        ["frames F", `${plan.frames_total}`],
        ["occupancy E_R", formatNs(plan.occupancy_ns)],
        ["period E_L", formatNs(plan.period_ns)],
        ["elapsed T'", formatNs(plan.elapsed_ns)],
    ];
    if (plan.time_deficit_ns !== null) {
        rows.push(["deficit TD", formatNs(plan.time_deficit_ns)]);
    }
    if (plan.burst_interval_ns !== null) {
        rows.push(["bursts", `${plan.bursts.length} × ${plan.bursts[0]?.frames_in_burst ?? 0} frames`]);
        rows.push(["burst span", formatNs(plan.structure_span_ns)]);
    }
    rows.push(["achieved load", `${plan.achieved_load_percent}% (${plan.achieved_load})`]);
    const cells = rows
        .map(([k, v]) => `<div class="k">${escapeHtml(k)}</div><div class="v">${escapeHtml(v)}</div>`)
        .join("");
    return `<div class="plan-grid">${cells}</div>`;
}

export function burstProgress(record: RunRecord): string {
    const layout = record.plan.bursts;
    if (layout.length <= 1 || record.plan.burst_interval_ns === null) return "";
    const perBurst = layout[0]?.frames_in_burst ?? 1;
    const finished = Math.min(layout.length, Math.floor(record.frames_sent / perBurst));
    const active = Math.min(layout.length, finished + (record.state === "running" ? 1 : 0));
    const shown = record.state === "running" ? active : finished;
    return `<span class="burst-progress">burst ${shown}/${layout.length}</span>`;
}

export function counters(record: RunRecord): string {
    const elapsed =
        record.state === "running"
            ? record.elapsed_so_far_ns ?? null
            : record.actual_elapsed_ns ?? record.plan.elapsed_ns;
    const parts = [
        `<span class="counter">frames ${record.frames_sent}/${record.plan.frames_total}</span>`,
        `<span class="counter">elapsed ${formatNs(elapsed)}</span>`,
    ];
    const burst = burstProgress(record);
    if (burst) parts.push(burst);
    return parts.join(" ");
}

export function reportSummary(record: RunRecord): string {
    const report = record.report;
    if (!report) return "";
    const verdict = record.verdict;
    const rows: [string, string][] = [
        ["measured frames", `${report.frame_count}`],
        ["measured period", formatNs(report.measured_period_ns)],
        ["measured load", `${report.measured_load_percent}%`],
        ["elapsed", formatNs(report.elapsed_ns)],
    ];
    const cells = rows
        .map(([k, v]) => `<div class="k">${escapeHtml(k)}</div><div class="v">${escapeHtml(v)}</div>`)
        .join("");
    const badge = verdict
        ? `<span class="badge badge-${verdict.ok ? "pass" : "fail"}">${verdict.ok ? "pass" : "fail"}</span>`
        : "";
    const failed = (verdict?.checks ?? [])
        .filter((c) => !c.passed)
        .map((c) => `<div class="check-fail">${escapeHtml(c.name)}: expected ${escapeHtml(c.expected)}, measured ${escapeHtml(c.measured)}</div>`)
        .join("");
    return `<div class="report">verdict ${badge}<div class="plan-grid">${cells}</div>${failed}</div>`;
}
