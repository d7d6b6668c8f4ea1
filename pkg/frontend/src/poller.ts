import type { RunRecord } from "./types";
import { TERMINAL_STATES } from "./types";

export interface RunFetcher {
    getRun(runId: string): Promise<RunRecord>;
}

export interface PollerHooks {
    onUpdate: (record: RunRecord) => void;
    onError?: (err: unknown) => void;
}

/**
 * Polls one run at a fixed interval until it reaches a terminal state.
 * At most one request is in flight; responses belonging to a superseded
 * target (run switched or poller restarted) are discarded by generation.
 */
export class RunPoller {
    private generation = 0;
    private timer: ReturnType<typeof setInterval> | null = null;
    private inFlight = false;
    private runId: string | null = null;

    constructor(
        private api: RunFetcher,
        private hooks: PollerHooks,
        private intervalMs = 1000,
    ) {}

    start(runId: string): void {
        this.stop();
        this.runId = runId;
        this.generation += 1;
        void this.tick(this.generation);
        this.timer = setInterval(() => void this.tick(this.generation), this.intervalMs);
    }

    stop(): void {
        this.generation += 1;
        this.inFlight = false;
        if (this.timer !== null) {
            clearInterval(this.timer);
            this.timer = null;
        }
    }

    get active(): boolean {
        return this.timer !== null;
    }

    private async tick(generation: number): Promise<void> {
        if (this.inFlight || this.runId === null) return;
        this.inFlight = true;
        try {
            const record = await this.api.getRun(this.runId);
            if (generation !== this.generation) return; // stale response
            this.hooks.onUpdate(record);
            if (TERMINAL_STATES.has(record.state)) this.stop();
        } catch (err) {
            if (generation !== this.generation) return;
            this.stop();
            this.hooks.onError?.(err);
        } finally {
            if (generation === this.generation) this.inFlight = false;
        }
    }
}
