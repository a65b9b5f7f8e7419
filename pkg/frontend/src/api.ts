/** Typed client for the gateway HTTP/JSON API. The console reaches the
 * system exclusively through these calls. */

export interface GatewayEvent {
  seq: number;
  kind:
    | "user_input"
    | "query_answer"
    | "plan"
    | "code"
    | "execution_started"
    | "signal"
    | "error"
    | "done"
    | "state_patch";
  payload: Record<string, unknown>;
  timestamp: number;
}

export interface SessionSummary {
  id: string;
  mode: string;
  cycles: number;
  done: boolean;
  scenario: string;
}

export interface DocSummary {
  id: string;
  title: string;
  kind: string;
  refs: string[];
}

export interface SearchHit {
  id: string;
  title: string;
  kind: string;
  score: number;
}

export interface DatasetPayload {
  meta: Record<string, unknown>;
  columns: Record<string, number[]>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(
  base: string,
  method: string,
  path: string,
  body?: unknown,
): Promise<T> {
  const init: RequestInit = { method, headers: {} };
  if (body !== undefined) {
    init.headers = { "Content-Type": "application/json" };
    init.body = JSON.stringify(body);
  }
  const resp = await fetch(base + path, init);
  const payload = (await resp.json()) as Record<string, unknown>;
  if (!resp.ok) {
    const err = (payload.error ?? {}) as { code?: string; message?: string };
    throw new ApiError(resp.status, err.code ?? "error", err.message ?? "");
  }
  return payload as T;
}

export class GatewayClient {
  constructor(readonly base: string) {}

  createSession(opts: {
    mode: string;
    model_ref: string;
    seed?: number;
    lab_endpoint?: string;
  }): Promise<{ id: string }> {
    return request(this.base, "POST", "/api/sessions", opts);
  }

  listSessions(): Promise<{ sessions: SessionSummary[] }> {
    return request(this.base, "GET", "/api/sessions");
  }

  listScenarios(): Promise<{ scenarios: string[] }> {
    return request(this.base, "GET", "/api/scenarios");
  }

  postInput(id: string, text: string): Promise<{ queued: boolean; done: boolean }> {
    return request(this.base, "POST", `/api/sessions/${id}/input`, { text });
  }

  events(id: string, since: number, timeoutMs = 0): Promise<{ events: GatewayEvent[] }> {
    return request(
      this.base,
      "GET",
      `/api/sessions/${id}/events?since=${since}&timeout_ms=${timeoutMs}`,
    );
  }

  state(id: string): Promise<{ state: Record<string, unknown> }> {
    return request(this.base, "GET", `/api/sessions/${id}/state`);
  }

  report(id: string): Promise<Record<string, unknown>> {
    return request(this.base, "GET", `/api/sessions/${id}/report`);
  }

  approve(id: string, step: number): Promise<{ record: Record<string, unknown>; done: boolean }> {
    return request(this.base, "POST", `/api/sessions/${id}/steps/${step}/approve`);
  }

  memorize(id: string, step: number, title: string): Promise<{ doc_id: string }> {
    return request(this.base, "POST", `/api/sessions/${id}/steps/${step}/memorize`, { title });
  }

  listDocs(): Promise<{ docs: DocSummary[] }> {
    return request(this.base, "GET", "/api/kb/docs");
  }

  addDoc(doc: {
    id: string;
    title: string;
    kind: string;
    body: string;
    refs?: string[];
  }): Promise<{ id: string }> {
    return request(this.base, "POST", "/api/kb/docs", doc);
  }

  searchDocs(task: string, k = 6): Promise<{ results: SearchHit[] }> {
    return request(this.base, "POST", "/api/kb/search", { task, k });
  }

  dataset(path: string): Promise<DatasetPayload> {
    return request(
      this.base,
      "GET",
      `/api/datasets?path=${encodeURIComponent(path)}`,
    );
  }
}

/** Incremental event cursor: each poll() long-polls past what it has seen
 * and hands back only the new events. */
export class EventCursor {
  seq = 0;

  constructor(
    private readonly client: GatewayClient,
    private readonly sessionId: string,
  ) {}

  async poll(timeoutMs = 1000): Promise<GatewayEvent[]> {
    const { events } = await this.client.events(this.sessionId, this.seq, timeoutMs);
    for (const event of events) {
      if (event.seq > this.seq) this.seq = event.seq;
    }
    return events;
  }
}
