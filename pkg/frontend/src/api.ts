import type { ApiErrorBody, LoadSpecJson, RunRecord } from "./types";

export class ApiError extends Error {
    constructor(
        public readonly kind: string,
        message: string,
        public readonly field?: string,
        public readonly status?: number,
    ) {
        super(message);
    }
}

/** Thin client for the run-control API; the token rides an X-Auth-Token header. */
export class ApiClient {
    constructor(
        public baseUrl: string = "",
        public token: string | null = null,
        private fetchFn: typeof fetch = fetch,
    ) {}

    private async request<T>(method: string, path: string): Promise<T>;
    private async request<T>(method: string, path: string, body: unknown): Promise<T>;
    private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
        const headers: Record<string, string> = {};
        if (body !== undefined) headers["Content-Type"] = "application/json";
        if (this.token) headers["X-Auth-Token"] = this.token;
        let resp: Response;
        try {
            resp = await this.fetchFn(this.baseUrl + path, {
                method,
                headers,
                body: body === undefined ? null : JSON.stringify(body),
            });
        } catch (err) {
            throw new ApiError("network", `cannot reach service: ${String(err)}`);
        }
        let payload: unknown = null;
        try {
            payload = await resp.json();
        } catch {
            /* non-JSON body falls through to the status check */
        }
        if (!resp.ok) {
            const err = (payload ?? {}) as ApiErrorBody;
            throw new ApiError(
                err.error ?? `http-${resp.status}`,
                err.message ?? resp.statusText,
                err.field,
                resp.status,
            );
        }
        return payload as T;
    }

    createRun(spec: LoadSpecJson): Promise<RunRecord> {
        return this.request("POST", "/api/runs", spec);
    }

    startRun(runId: string, mode: string): Promise<RunRecord> {
        return this.request("POST", `/api/runs/${runId}/start?mode=${encodeURIComponent(mode)}`);
    }

    stopRun(runId: string): Promise<RunRecord> {
        return this.request("POST", `/api/runs/${runId}/stop`);
    }

    getRun(runId: string): Promise<RunRecord> {
        return this.request("GET", `/api/runs/${runId}`);
    }

    listRuns(): Promise<RunRecord[]> {
        return this.request("GET", "/api/runs");
    }

    /** Resolves when the service answers; used by the login panel. */
    async checkHealth(): Promise<boolean> {
        await this.request("GET", "/api/health");
        return true;
    }
}
