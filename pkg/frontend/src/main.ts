import { ApiClient, ApiError } from "./api";
import { FormState, type FeatureTab, type FormFields } from "./form";
import { counters, escapeHtml, planSummary, reportSummary, stateBadge } from "./format";
import { RunPoller } from "./poller";
import type { RunRecord } from "./types";

const form = new FormState();
let api = new ApiClient("");
const pollers = new Map<string, RunPoller>();

function el<T extends HTMLElement>(selector: string): T {
    const node = document.querySelector(selector);
    if (!node) throw new Error(`missing element ${selector}`);
    return node as T;
}

function showAlert(message: string): void {
    const box = document.createElement("div");
    box.className = "alert";
    box.innerHTML = `<span>${escapeHtml(message)}</span><button>dismiss</button>`;
    box.querySelector("button")!.addEventListener("click", () => box.remove());
    el("#alerts").appendChild(box);
}

// --- connection -------------------------------------------------------------

async function connect(): Promise<void> {
    const base = el<HTMLInputElement>("#base-url").value.trim().replace(/\/$/, "");
    const token = el<HTMLInputElement>("#token").value.trim() || null;
    api = new ApiClient(base, token);
    const status = el("#conn-status");
    try {
        await api.checkHealth();
        status.textContent = "online";
        status.className = "badge badge-online";
        await refreshRuns();
    } catch (err) {
        status.textContent = "offline";
        status.className = "badge badge-off";
        showAlert(err instanceof ApiError ? `connect failed: ${err.message}` : String(err));
    }
}

// --- form wiring --------------------------------------------------------------

function syncValidation(): void {
    const errors = form.validate();
    document.querySelectorAll<HTMLElement>("[data-err]").forEach((node) => {
        const field = node.dataset.err as keyof FormFields;
        node.textContent = errors[field] ?? "";
    });
    el<HTMLButtonElement>("#submit-btn").disabled = !form.isValid();
}

function syncFeaturePanes(): void {
    document.querySelectorAll<HTMLButtonElement>("#feature-tabs .tab").forEach((btn) => {
        btn.classList.toggle("active", btn.dataset.tab === form.activeTab);
    });
    document.querySelectorAll<HTMLElement>(".tab-pane").forEach((pane) => {
        pane.hidden = pane.dataset.pane !== form.activeTab;
    });
    // cleared inputs of the inactive tabs must also look cleared
    for (const field of form.inactiveFeatureFields()) {
        const input = document.querySelector<HTMLInputElement>(`[data-field="${field}"]`);
        if (input) input.value = form.fields[field] as string;
    }
}

function bindForm(): void {
    document.querySelectorAll<HTMLInputElement | HTMLSelectElement>("[data-field]").forEach(
        (input) => {
            input.addEventListener("input", () => {
                form.setField(input.dataset.field as keyof FormFields, input.value as never);
                if (input.dataset.field === "frameLenP") {
                    input.value = form.fields.frameLenP; // show the clamped value
                }
                syncValidation();
            });
        },
    );
    el<HTMLInputElement>("#f-vlanEnabled").addEventListener("change", (event) => {
        const enabled = (event.target as HTMLInputElement).checked;
        form.setField("vlanEnabled", enabled);
        ["#f-vlanPcp", "#f-vlanCfi", "#f-vlanVid"].forEach((sel) => {
            el<HTMLInputElement>(sel).disabled = !enabled;
        });
        syncValidation();
    });
    document.querySelectorAll<HTMLButtonElement>("#feature-tabs .tab").forEach((btn) => {
        btn.addEventListener("click", () => {
            form.setTab(btn.dataset.tab as FeatureTab);
            syncFeaturePanes();
            syncValidation();
        });
    });
    el<HTMLFormElement>("#load-form").addEventListener("submit", (event) => {
        event.preventDefault();
        void submit();
    });
}

async function submit(): Promise<void> {
    if (!form.isValid()) return;
    const button = el<HTMLButtonElement>("#submit-btn");
    button.disabled = true;
    try {
        const created = await api.createRun(form.toSpec());
        renderRun(created); // plan visible before the run starts
        const started = await api.startRun(created.run_id, form.fields.mode);
        renderRun(started);
        watch(started);
    } catch (err) {
        if (err instanceof ApiError && err.field) {
            const node = document.querySelector<HTMLElement>(`[data-err="${jsField(err.field)}"]`);
            if (node) node.textContent = err.message;
            else showAlert(`${err.field}: ${err.message}`);
        } else {
            showAlert(err instanceof Error ? err.message : String(err));
        }
    } finally {
        button.disabled = !form.isValid();
    }
}

// API field names are snake_case; inline error slots use the form's names
function jsField(apiField: string): string {
    const map: Record<string, string> = {
        load_percent: "loadPercent",
        src_mac: "srcMac",
        dst_mac: "dstMac",
        frame_len_p: "frameLenP",
        "feature.frames": "frames",
        "feature.duration": "duration",
        "feature.bursts": "bursts",
        "feature.burst_interval": "burstInterval",
        "feature.sleep_interval": "sleepInterval",
        "vlan.pcp": "vlanPcp",
        "vlan.cfi": "vlanCfi",
        "vlan.vid": "vlanVid",
    };
    return map[apiField] ?? apiField;
}

// --- run cards ----------------------------------------------------------------

function runCard(runId: string): HTMLElement {
    const existing = document.getElementById(`run-${runId}`);
    if (existing) return existing;
    const card = document.createElement("div");
    card.className = "run";
    card.id = `run-${runId}`;
    el("#runs").prepend(card);
    return card;
}

function renderRun(record: RunRecord): void {
    const card = runCard(record.run_id);
    const stoppable = record.state === "running";
    card.innerHTML = `
      <div class="run-head">
        <span class="run-id">${escapeHtml(record.run_id)}</span>
        ${stateBadge(record.state)}
        <span class="mode">${escapeHtml(record.mode ?? "")}</span>
        <button class="stop-btn" ${stoppable ? "" : "disabled"}>stop</button>
      </div>
      <div class="run-counters">${counters(record)}</div>
      ${planSummary(record.plan)}
      ${record.error ? `<div class="check-fail">${escapeHtml(record.error)}</div>` : ""}
      ${reportSummary(record)}
    `;
    card.querySelector<HTMLButtonElement>(".stop-btn")!.addEventListener("click", () => {
        void stopRun(record.run_id);
    });
}

async function stopRun(runId: string): Promise<void> {
    try {
        const record = await api.stopRun(runId);
        renderRun(record);
    } catch (err) {
        if (err instanceof ApiError && err.kind === "not-running") {
            showAlert(`run ${runId} is not running`);
        } else {
            showAlert(err instanceof Error ? err.message : String(err));
        }
    }
}

function watch(record: RunRecord): void {
    if (record.state !== "running") return;
    let poller = pollers.get(record.run_id);
    if (!poller) {
        poller = new RunPoller(api, {
            onUpdate: renderRun,
            onError: (err) =>
                showAlert(err instanceof Error ? `poll failed: ${err.message}` : String(err)),
        });
        pollers.set(record.run_id, poller);
    }
    poller.start(record.run_id);
}

async function refreshRuns(): Promise<void> {
    const runs = await api.listRuns();
    el("#runs").innerHTML = "";
    for (const record of runs) {
        renderRun(record);
        watch(record);
    }
}

document.addEventListener("DOMContentLoaded", () => {
    bindForm();
    syncFeaturePanes();
    syncValidation();
    el("#connect-btn").addEventListener("click", () => void connect());
    void connect(); // same-origin deployment works with no configuration
});
