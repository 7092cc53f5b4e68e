import {
  ApiRow,
  Decision,
  Progress,
  TerminologyPreview,
  validateDecision,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** The server rejected a decision (HTTP 422); carries its reason. */
export class RejectedDecisionError extends Error {
  constructor(reason: string) {
    super(reason);
    this.name = "RejectedDecisionError";
  }
}

/** Thin typed client over the four service endpoints. */
export class CurationApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path);
    if (!response.ok) {
      throw new Error(`GET ${path} failed: ${response.status}`);
    }
    return (await response.json()) as T;
  }

  async candidates(status: "unresolved" | "accepted" | "rejected" | "all" = "all"): Promise<ApiRow[]> {
    const payload = await this.getJson<{ rows: ApiRow[] }>(`/api/candidates?status=${status}`);
    return payload.rows;
  }

  async progress(): Promise<Progress> {
    return this.getJson<Progress>("/api/progress");
  }

  async preview(): Promise<TerminologyPreview> {
    return this.getJson<TerminologyPreview>("/api/terminology/preview");
  }

  /** Validates locally, then POSTs. Resolves to the server's new progress.
   * Throws RejectedDecisionError on 422 and plain Error on transport
   * failure, so the caller can distinguish "fix the card" from "retry". */
  async submit(decision: Decision): Promise<Progress> {
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
      const body = (await response.json()) as { error?: string };
      throw new RejectedDecisionError(body.error ?? "decision rejected");
    }
    if (!response.ok) {
      throw new Error(`POST /api/decisions failed: ${response.status}`);
    }
    const body = (await response.json()) as { progress: Progress };
    return body.progress;
  }
}
