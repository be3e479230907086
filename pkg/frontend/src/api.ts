// HTTP client for the session service. The UI talks to these four
// endpoints and touches no files directly.

import { parseSession, RatingsSubmission, SessionPayload } from "./types.js";

export type FetchLike = (
  input: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
  arrayBuffer(): Promise<ArrayBuffer>;
}>;

export type SubmitOutcome =
  | { kind: "stored" }
  | { kind: "duplicate" }
  | { kind: "rejected"; reason: string }
  | { kind: "network"; reason: string };

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch as unknown as FetchLike,
  ) {}

  async loadSession(slot: string): Promise<SessionPayload> {
    const resp = await this.fetchImpl(`${this.baseUrl}/api/session/${encodeURIComponent(slot)}`);
    if (!resp.ok) {
      throw new Error(`session request failed with status ${resp.status}`);
    }
    return parseSession(await resp.json());
  }

  async fetchStimulus(id: string): Promise<ArrayBuffer> {
    const resp = await this.fetchImpl(`${this.baseUrl}/api/stimulus/${encodeURIComponent(id)}`);
    if (!resp.ok) {
      throw new Error(`stimulus ${id} failed with status ${resp.status}`);
    }
    return resp.arrayBuffer();
  }

  async submitRatings(submission: RatingsSubmission): Promise<SubmitOutcome> {
    let resp;
    try {
      resp = await this.fetchImpl(`${this.baseUrl}/api/ratings`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(submission),
      });
    } catch (err) {
      return { kind: "network", reason: err instanceof Error ? err.message : String(err) };
    }
    if (resp.ok) {
      return { kind: "stored" };
    }
    if (resp.status === 409) {
      return { kind: "duplicate" };
    }
    let reason = `status ${resp.status}`;
    try {
      const body = (await resp.json()) as { error?: string };
      if (body.error) reason = body.error;
    } catch {
      // keep the status-based reason
    }
    return { kind: "rejected", reason };
  }
}
