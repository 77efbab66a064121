/**
 * Thin typed wrapper over the service HTTP API.
 *
 * Every mutating call carries an Expected-Revision header so the server
 * can reject writes raced by another client of the same session. The two
 * structured 409 bodies surface as dedicated error classes; everything
 * else that is not 2xx becomes a ServiceError.
 */

import type {
  InteractionBody, PreferencesBody, SessionPayload, Viewport,
} from "./types.js";

/** A conditional mutation lost the revision race. */
export class StaleRevisionError extends Error {
  constructor(readonly revision: number) {
    super(`stale revision; server is at ${revision}`);
    this.name = "StaleRevisionError";
  }
}

/** The requested state has no feasible layout without relaxing something. */
export class InfeasibleError extends Error {
  constructor(readonly relaxation: string[], detail: string) {
    super(detail);
    this.name = "InfeasibleError";
  }
}

export class ServiceError extends Error {
  constructor(readonly status: number, detail: string,
              readonly diagnostics?: unknown[]) {
    super(detail);
    this.name = "ServiceError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base: string, fetchFn?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    // bind lazily so environments that swap the global fetch still work
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  async registerDocument(bundle: unknown): Promise<{ document_id: string }> {
    return this.request("POST", "/documents", bundle);
  }

  async openSession(documentId: string, viewport: Viewport): Promise<SessionPayload> {
    return this.request("POST", "/sessions", {
      document_id: documentId,
      viewport: { width: viewport.width, height: viewport.height },
    });
  }

  async putViewport(sessionId: string, viewport: Viewport,
                    expectedRevision: number): Promise<SessionPayload> {
    return this.request("PUT", `/sessions/${sessionId}/viewport`,
                        { width: viewport.width, height: viewport.height },
                        expectedRevision);
  }

  async putPreferences(sessionId: string, prefs: PreferencesBody,
                       expectedRevision: number): Promise<SessionPayload> {
    return this.request("PUT", `/sessions/${sessionId}/preferences`,
                        prefs, expectedRevision);
  }

  async postInteraction(sessionId: string, interaction: InteractionBody,
                        expectedRevision: number): Promise<SessionPayload> {
    return this.request("POST", `/sessions/${sessionId}/interactions`,
                        interaction, expectedRevision);
  }

  async getSolution(sessionId: string): Promise<SessionPayload> {
    return this.request("GET", `/sessions/${sessionId}/solution`);
  }

  /** Absolute URL for a solved image asset hash. */
  assetUrl(hash: string): string {
    return `${this.base}/assets/${hash}`;
  }

  private async request(method: string, path: string, body?: unknown,
                        expectedRevision?: number): Promise<any> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (expectedRevision !== undefined) {
      headers["Expected-Revision"] = String(expectedRevision);
    }
    const response = await this.fetchFn(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    let payload: any = null;
    if (text) {
      try {
        payload = JSON.parse(text);
      } catch {
        payload = null;
      }
    }
    if (response.ok) return payload;
    if (response.status === 409 && payload?.error === "stale-revision") {
      throw new StaleRevisionError(payload.revision);
    }
    if (response.status === 409 && payload?.error === "infeasible") {
      throw new InfeasibleError(payload.relaxation ?? [],
                                payload.detail ?? "no feasible layout");
    }
    const detail = payload?.detail ?? payload?.error
      ?? `request failed with status ${response.status}`;
    throw new ServiceError(response.status, detail, payload?.diagnostics);
  }
}
