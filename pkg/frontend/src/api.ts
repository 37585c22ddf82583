/**
 * Thin typed client over the /api/v1 review endpoints.
 *
 * No state is kept here: the server is the source of truth and every
 * displayed number comes back from it verbatim.
 */

import type {
  AgreementResponse,
  DisagreementsResponse,
  NextResponse,
  ProgressResponse,
  SubmitResponse,
  VerdictPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`API error ${status}: ${detail}`);
  }
}

type FetchLike = typeof fetch;

export class ReviewApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const detail =
        typeof body === "object" && body !== null && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : resp.statusText;
      throw new ApiError(resp.status, detail);
    }
    return body as T;
  }

  next(reviewerId: string): Promise<NextResponse> {
    return this.request(`/api/v1/reviewers/${encodeURIComponent(reviewerId)}/next`);
  }

  submit(payload: VerdictPayload, supersede = false): Promise<SubmitResponse> {
    const path = supersede ? "/api/v1/verdicts/supersede" : "/api/v1/verdicts";
    return this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  progress(): Promise<ProgressResponse> {
    return this.request("/api/v1/progress");
  }

  agreement(): Promise<AgreementResponse> {
    return this.request("/api/v1/agreement");
  }

  disagreements(): Promise<DisagreementsResponse> {
    return this.request("/api/v1/disagreements");
  }
}
