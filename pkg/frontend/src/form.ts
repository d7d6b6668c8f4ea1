import type { FeatureJson, LoadSpecJson } from "./types";

// One feature at a time: the active tab decides which inputs are live, and
// switching tabs clears the inputs of the tabs being left.
export type FeatureTab = "burst" | "time" | "frame";

export const FRAME_LEN_PRESETS = [60, 128, 256, 512, 1020, 1514] as const;
export const FRAME_LEN_MIN = 60;
export const FRAME_LEN_MAX = 1514;

const MAC_RE = /^([0-9a-fA-F]{2}:){5}[0-9a-fA-F]{2}$/;
const ETHERTYPE_RE = /^0x[0-9a-fA-F]{1,4}$/;
const DURATION_RE = /^\d+(\.\d+)?\s*(h|min|s|ms|us|ns)$/;

export interface FormFields {
    loadPercent: string;
    srcMac: string;
    dstMac: string;
    ethertype: string;
    vlanEnabled: boolean;
    vlanPcp: string;
    vlanCfi: string;
    vlanVid: string;
    frameLenP: string;
    lineRate: "100M" | "1G";
    port: string;
    mode: "simulate" | "pcap" | "live";
    frames: string;
    duration: string;
    bursts: string;
    burstInterval: string;
    sleepInterval: string;
}

const FEATURE_FIELDS: Record<FeatureTab, (keyof FormFields)[]> = {
    frame: ["frames"],
    time: ["duration"],
    burst: ["bursts", "burstInterval", "sleepInterval"],
};

export function defaultFields(): FormFields {
    return {
        loadPercent: "25",
        srcMac: "02:00:00:00:00:01",
        dstMac: "02:00:00:00:00:02",
        ethertype: "0x8892",
        vlanEnabled: false,
        vlanPcp: "0",
        vlanCfi: "0",
        vlanVid: "0",
        frameLenP: "60",
        lineRate: "100M",
        port: "loop0",
        mode: "simulate",
        frames: "",
        duration: "",
        bursts: "",
        burstInterval: "",
        sleepInterval: "",
    };
}

function intIn(text: string, lo: number, hi: number): number | null {
    if (!/^\d+$/.test(text.trim())) return null;
    const value = Number(text.trim());
    return value >= lo && value <= hi ? value : null;
}

function validDuration(text: string): boolean {
    return DURATION_RE.test(text.trim()) || /^\d+$/.test(text.trim());
}

export class FormState {
    fields: FormFields = defaultFields();
    activeTab: FeatureTab = "frame";

    setTab(tab: FeatureTab): void {
        if (tab === this.activeTab) return;
        for (const other of Object.keys(FEATURE_FIELDS) as FeatureTab[]) {
            if (other === tab) continue;
            for (const field of FEATURE_FIELDS[other]) {
                (this.fields[field] as string) = "";
            }
        }
        this.activeTab = tab;
    }

    setField<K extends keyof FormFields>(name: K, value: FormFields[K]): void {
        if (name === "frameLenP" && typeof value === "string" && /^\d+$/.test(value.trim())) {
            // free entry is clamped into the legal range
            const clamped = Math.min(FRAME_LEN_MAX, Math.max(FRAME_LEN_MIN, Number(value)));
            (this.fields[name] as string) = String(clamped);
            return;
        }
        this.fields[name] = value;
    }

    /** Inputs belonging to tabs that are not active; they stay cleared. */
    inactiveFeatureFields(): (keyof FormFields)[] {
        return (Object.keys(FEATURE_FIELDS) as FeatureTab[])
            .filter((tab) => tab !== this.activeTab)
            .flatMap((tab) => FEATURE_FIELDS[tab]);
    }

    validate(): Partial<Record<keyof FormFields, string>> {
        const errors: Partial<Record<keyof FormFields, string>> = {};
        const f = this.fields;
        const load = Number(f.loadPercent);
        if (!f.loadPercent.trim() || !Number.isFinite(load) || load <= 0 || load > 100) {
            errors.loadPercent = "load must be in (0, 100]";
        }
        if (!MAC_RE.test(f.srcMac)) errors.srcMac = "use aa:bb:cc:dd:ee:ff";
        if (!MAC_RE.test(f.dstMac)) errors.dstMac = "use aa:bb:cc:dd:ee:ff";
        if (!ETHERTYPE_RE.test(f.ethertype)) errors.ethertype = "use a hex value like 0x8892";
        if (intIn(f.frameLenP, FRAME_LEN_MIN, FRAME_LEN_MAX) === null) {
            errors.frameLenP = `frame bytes must be ${FRAME_LEN_MIN}-${FRAME_LEN_MAX}`;
        }
        if (f.vlanEnabled) {
            if (intIn(f.vlanPcp, 0, 7) === null) errors.vlanPcp = "0-7";
            if (intIn(f.vlanCfi, 0, 1) === null) errors.vlanCfi = "0 or 1";
            if (intIn(f.vlanVid, 0, 4094) === null) errors.vlanVid = "0-4094";
        }
        if (!f.port.trim()) errors.port = "port is required";

        if (this.activeTab === "frame") {
            if (intIn(f.frames, 1, 1_000_000_000) === null) errors.frames = "need a count >= 1";
        } else if (this.activeTab === "time") {
            if (!validDuration(f.duration)) errors.duration = "like 20ms, 1.5s or ns";
        } else {
            if (intIn(f.bursts, 1, 1_000_000) === null) errors.bursts = "need a count >= 1";
            if (!validDuration(f.burstInterval)) errors.burstInterval = "like 1s or 10ms";
            if (!validDuration(f.sleepInterval)) errors.sleepInterval = "like 1s or 10ms";
        }
        return errors;
    }

    isValid(): boolean {
        return Object.keys(this.validate()).length === 0;
    }

    private feature(): FeatureJson {
        const f = this.fields;
        if (this.activeTab === "frame") {
            return { type: "frames", frames: Number(f.frames) };
        }
        if (this.activeTab === "time") {
            return { type: "duration", duration: f.duration.trim() };
        }
        return {
            type: "burst",
            bursts: Number(f.bursts),
            burst_interval: f.burstInterval.trim(),
            sleep_interval: f.sleepInterval.trim(),
        };
    }

    /** The exact JSON the service expects; only the active feature is sent. */
    toSpec(): LoadSpecJson {
        const f = this.fields;
        return {
            load_percent: f.loadPercent.trim(),
            src_mac: f.srcMac.trim().toLowerCase(),
            dst_mac: f.dstMac.trim().toLowerCase(),
            ethertype: f.ethertype.trim(),
            vlan: f.vlanEnabled
                ? { pcp: Number(f.vlanPcp), cfi: Number(f.vlanCfi), vid: Number(f.vlanVid) }
                : null,
            frame_len_p: Number(f.frameLenP),
            line_rate: f.lineRate,
            port: f.port.trim(),
            feature: this.feature(),
        };
    }
}
