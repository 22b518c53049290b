/** Thin client for the query service HTTP API. */

import type { IndexStats, PlayPayload, QueryRequest, QueryResponse } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function throwOnError(resp: Response): Promise<void> {
  if (resp.ok) return;
  let detail = `${resp.status}`;
  try {
    const body = await resp.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    /* non-JSON error body */
  }
  throw new ServiceError(resp.status, detail);
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async query(req: QueryRequest, signal?: AbortSignal): Promise<QueryResponse> {
    const resp = await this.fetchImpl(`${this.baseUrl}/query`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
      signal,
    });
    await throwOnError(resp);
    return (await resp.json()) as QueryResponse;
  }

  async getPlay(playId: string): Promise<PlayPayload> {
    const resp = await this.fetchImpl(
      `${this.baseUrl}/plays/${encodeURIComponent(playId)}`,
    );
    await throwOnError(resp);
    return (await resp.json()) as PlayPayload;
  }

  async stats(): Promise<IndexStats> {
    const resp = await this.fetchImpl(`${this.baseUrl}/index/stats`);
    await throwOnError(resp);
    return (await resp.json()) as IndexStats;
  }
}
