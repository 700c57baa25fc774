/** Typed HTTP + SSE client for the policy-compass session service. */

import type {
  ErrorEnvelope,
  EventDoc,
  Mutation,
  MutationResponse,
  SessionState,
  TableDoc,
  ConfigDoc,
  WhatifResponse,
} from "./types.js";

/** Non-2xx response, carrying the server's error envelope. */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly envelope: ErrorEnvelope;

  constructor(status: number, envelope: ErrorEnvelope) {
    super(`${envelope.error}: ${envelope.message}`);
    this.name = "ApiError";
    this.status = status;
    this.code = envelope.error;
    this.envelope = envelope;
  }
}

export interface SseFrame {
  /** Event kind from the `event:` field. */
  event: string;
  /** Event version from the `id:` field. */
  id: number;
  /** Raw `data:` payload. */
  data: string;
}

/**
 * Incremental server-sent-events parser.  Feed it raw text chunks exactly as
 * they arrive off the wire — frames split across chunk boundaries are
 * reassembled, `: keep-alive` comment blocks are dropped.
 */
export class SseParser {
  private buffer = "";

  push(chunk: string): SseFrame[] {
    this.buffer += chunk;
    const frames: SseFrame[] = [];
    for (;;) {
      const cut = this.buffer.indexOf("\n\n");
      if (cut < 0) break;
      const block = this.buffer.slice(0, cut);
      this.buffer = this.buffer.slice(cut + 2);
      const frame = parseBlock(block);
      if (frame !== null) frames.push(frame);
    }
    return frames;
  }
}

function parseBlock(block: string): SseFrame | null {
  let event = "";
  let id = -1;
  const data: string[] = [];
  for (const line of block.split("\n")) {
    if (line.startsWith(":") || line === "") continue; // comment / padding
    const sep = line.indexOf(":");
    const field = sep < 0 ? line : line.slice(0, sep);
    let value = sep < 0 ? "" : line.slice(sep + 1);
    if (value.startsWith(" ")) value = value.slice(1);
    if (field === "event") event = value;
    else if (field === "id") id = Number(value);
    else if (field === "data") data.push(value);
  }
  if (event === "" && id < 0 && data.length === 0) return null;
  return { event, id, data: data.join("\n") };
}

export interface CreateSessionBody {
  id: string;
  table?: TableDoc | { institution: string; indicators: unknown[] };
  tables?: unknown[];
  config?: Partial<ConfigDoc>;
}

export interface RenderParams {
  stage?: string;
  sphere?: string;
  size?: number;
}

export interface StreamOptions {
  after?: number;
  limit?: number;
  signal?: AbortSignal;
}

type FetchLike = typeof fetch;

export class SessionClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl: FetchLike = fetch) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.fetchImpl(this.base + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) {
      const envelope = (await res.json()) as ErrorEnvelope;
      throw new ApiError(res.status, envelope);
    }
    return (await res.json()) as T;
  }

  healthz(): Promise<{ status: string; sessions: number }> {
    return this.request("GET", "/healthz");
  }

  createSession(body: CreateSessionBody): Promise<SessionState> {
    return this.request("POST", "/sessions", body);
  }

  getState(sessionId: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}`);
  }

  mutate(sessionId: string, expectedVersion: number, mutation: Mutation): Promise<MutationResponse> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/mutations`, {
      expected_version: expectedVersion,
      mutation,
    });
  }

  whatif(sessionId: string, mutations: Mutation | Mutation[]): Promise<WhatifResponse> {
    const body = Array.isArray(mutations) ? { mutations } : { mutation: mutations };
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/whatif`, body);
  }

  async renderSvg(sessionId: string, params: RenderParams = {}): Promise<string> {
    const query = new URLSearchParams();
    if (params.stage !== undefined) query.set("stage", params.stage);
    if (params.sphere !== undefined) query.set("sphere", params.sphere);
    if (params.size !== undefined) query.set("size", String(params.size));
    const suffix = query.size > 0 ? `?${query.toString()}` : "";
    const res = await this.fetchImpl(
      `${this.base}/sessions/${encodeURIComponent(sessionId)}/render.svg${suffix}`,
    );
    if (!res.ok) {
      const envelope = (await res.json()) as ErrorEnvelope;
      throw new ApiError(res.status, envelope);
    }
    return res.text();
  }

  /**
   * Stream `/events` frames.  `after` is the last version already seen
   * (reconnect with your `lastSeenVersion` and you get no duplicates or
   * gaps); `limit` closes the stream server-side after N frames.
   */
  async *streamEvents(sessionId: string, opts: StreamOptions = {}): AsyncGenerator<EventDoc & { sseId: number }> {
    const query = new URLSearchParams();
    if (opts.after !== undefined) query.set("after", String(opts.after));
    if (opts.limit !== undefined) query.set("limit", String(opts.limit));
    const suffix = query.size > 0 ? `?${query.toString()}` : "";
    const res = await this.fetchImpl(
      `${this.base}/sessions/${encodeURIComponent(sessionId)}/events${suffix}`,
      { signal: opts.signal },
    );
    if (!res.ok) {
      const envelope = (await res.json()) as ErrorEnvelope;
      throw new ApiError(res.status, envelope);
    }
    if (res.body === null) throw new Error("event stream has no body");
    const reader = res.body.getReader();
    const decoder = new TextDecoder();
    const parser = new SseParser();
    try {
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        for (const frame of parser.push(decoder.decode(value, { stream: true }))) {
          const doc = JSON.parse(frame.data) as EventDoc;
          yield { ...doc, sseId: frame.id };
        }
      }
    } finally {
      reader.releaseLock();
    }
  }
}
