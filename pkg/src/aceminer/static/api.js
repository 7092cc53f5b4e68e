import { validateDecision, } from "./types.js";
/** The server rejected a decision (HTTP 422); carries its reason. */
export class RejectedDecisionError extends Error {
    constructor(reason) {
        super(reason);
        this.name = "RejectedDecisionError";
    }
}
/** Thin typed client over the four service endpoints. */
export class CurationApi {
    constructor(baseUrl = "", fetchImpl = (input, init) => fetch(input, init)) {
        this.baseUrl = baseUrl;
        this.fetchImpl = fetchImpl;
    }
    async getJson(path) {
        const response = await this.fetchImpl(this.baseUrl + path);
        if (!response.ok) {
            throw new Error(`GET ${path} failed: ${response.status}`);
        }
        return (await response.json());
    }
    async candidates(status = "all") {
        const payload = await this.getJson(`/api/candidates?status=${status}`);
        return payload.rows;
    }
    async progress() {
        return this.getJson("/api/progress");
    }
    async preview() {
        return this.getJson("/api/terminology/preview");
    }
    /** Validates locally, then POSTs. Resolves to the server's new progress.
     * Throws RejectedDecisionError on 422 and plain Error on transport
     * failure, so the caller can distinguish "fix the card" from "retry". */
    async submit(decision) {
        const problems = validateDecision(decision);
        if (problems.length > 0) {
            throw new RejectedDecisionError(problems.join("; "));
        }
        const response = await this.fetchImpl(this.baseUrl + "/api/decisions", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(decision),
        });
        if (response.status === 422) {
            const body = (await response.json());
            throw new RejectedDecisionError(body.error ?? "decision rejected");
        }
        if (!response.ok) {
            throw new Error(`POST /api/decisions failed: ${response.status}`);
        }
        const body = (await response.json());
        return body.progress;
    }
}
