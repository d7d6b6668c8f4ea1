import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { RunPoller, type RunFetcher } from "../src/poller";
import type { RunRecord, RunState } from "../src/types";

function record(runId: string, state: RunState, framesSent: number): RunRecord {
    return {
        run_id: runId,
        created_at: "",
        spec: {} as RunRecord["spec"],
        plan: { frames_total: 2000 } as RunRecord["plan"],
        state,
        mode: "live",
        frames_sent: framesSent,
        started_at: null,
        ended_at: null,
        report: null,
        verdict: null,
        error: null,
        capture_file: null,
    };
}

class ScriptedApi implements RunFetcher {
    calls = 0;
    constructor(private script: (call: number, runId: string) => Promise<RunRecord>) {}
    getRun(runId: string): Promise<RunRecord> {
        this.calls += 1;
        return this.script(this.calls, runId);
    }
}

describe("RunPoller", () => {
    beforeEach(() => vi.useFakeTimers());
    afterEach(() => vi.useRealTimers());

    it("polls at the interval and reports updates", async () => {
        const api = new ScriptedApi(async (call, id) => record(id, "running", call * 10));
        const seen: number[] = [];
        const poller = new RunPoller(api, { onUpdate: (r) => seen.push(r.frames_sent) }, 1000);
        poller.start("r1");
        await vi.advanceTimersByTimeAsync(0);
        await vi.advanceTimersByTimeAsync(1000);
        await vi.advanceTimersByTimeAsync(1000);
        expect(seen).toEqual([10, 20, 30]);
        expect(seen).toEqual([...seen].sort((a, b) => a - b)); // nondecreasing
        poller.stop();
    });

    it("stops on terminal state and freezes counters", async () => {
        const api = new ScriptedApi(async (call, id) =>
            call < 3 ? record(id, "running", call * 10) : record(id, "stopped", 23),
        );
        const seen: RunRecord[] = [];
        const poller = new RunPoller(api, { onUpdate: (r) => seen.push(r) }, 1000);
        poller.start("r1");
        await vi.advanceTimersByTimeAsync(0);
        await vi.advanceTimersByTimeAsync(5000);
        expect(api.calls).toBe(3); // no polls after the terminal record
        expect(poller.active).toBe(false);
        expect(seen.at(-1)?.state).toBe("stopped");
        expect(seen.at(-1)?.frames_sent).toBe(23);
        await vi.advanceTimersByTimeAsync(5000);
        expect(api.calls).toBe(3);
    });

    it("discards stale responses after a restart", async () => {
        let releaseFirst: (r: RunRecord) => void = () => {};
        const api = new ScriptedApi((call, id) => {
            if (call === 1) {
                return new Promise((resolve) => {
                    releaseFirst = resolve;
                });
            }
            return Promise.resolve(record(id, "running", 99));
        });
        const seen: string[] = [];
        const poller = new RunPoller(api, { onUpdate: (r) => seen.push(r.run_id) }, 1000);
        poller.start("old");
        await vi.advanceTimersByTimeAsync(0);
        poller.start("new"); // supersedes the in-flight request
        await vi.advanceTimersByTimeAsync(0);
        releaseFirst(record("old", "running", 1)); // late arrival
        await vi.advanceTimersByTimeAsync(0);
        expect(seen).toEqual(["new"]);
        poller.stop();
    });

    it("skips a tick while a request is still in flight", async () => {
        let release: (r: RunRecord) => void = () => {};
        const api = new ScriptedApi((call, id) => {
            if (call === 1) {
                return new Promise((resolve) => {
                    release = resolve;
                });
            }
            return Promise.resolve(record(id, "running", call));
        });
        const poller = new RunPoller(api, { onUpdate: () => {} }, 1000);
        poller.start("r1");
        await vi.advanceTimersByTimeAsync(0);
        await vi.advanceTimersByTimeAsync(3000); // three intervals pass unanswered
        expect(api.calls).toBe(1);
        release(record("r1", "running", 1));
        await vi.advanceTimersByTimeAsync(1000);
        expect(api.calls).toBe(2);
        poller.stop();
    });

    it("surfaces polling errors and stops", async () => {
        const api = new ScriptedApi(async () => {
            throw new Error("unknown-run");
        });
        const errors: unknown[] = [];
        const poller = new RunPoller(api, { onUpdate: () => {}, onError: (e) => errors.push(e) }, 1000);
        poller.start("gone");
        await vi.advanceTimersByTimeAsync(0);
        expect(errors).toHaveLength(1);
        expect(poller.active).toBe(false);
    });
});
