import type { KeypointFrameMsg, ServerEvent, SessionReport } from "./types.js";

// Thin client for the motion service: REST for session lifecycle and
// reports, a newline-framed JSON stream over WebSocket for live frames.

export interface SessionOptions {
  pose_class?: string;
  re_recognize_every?: number;
}

export class ServiceClient {
  constructor(readonly baseUrl: string, private fetchFn: typeof fetch = fetch) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async health(): Promise<{ status: string; recognizer: boolean; classes: string[] }> {
    const res = await this.fetchFn(this.url("/healthz"));
    if (!res.ok) throw new Error(`health check failed: ${res.status}`);
    return res.json();
  }

  async createSession(opts: SessionOptions = {}): Promise<string> {
    const res = await this.fetchFn(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(opts),
    });
    if (!res.ok) throw new Error(`create session failed: ${res.status}`);
    const body = await res.json();
    return body.session_id;
  }

  async report(sessionId: string): Promise<SessionReport> {
    const res = await this.fetchFn(this.url(`/sessions/${sessionId}/report`));
    if (!res.ok) throw new Error(`report failed: ${res.status}`);
    return res.json();
  }

  async closeSession(sessionId: string): Promise<void> {
    const res = await this.fetchFn(this.url(`/sessions/${sessionId}/close`), { method: "POST" });
    if (!res.ok) throw new Error(`close failed: ${res.status}`);
  }

  streamUrl(sessionId: string): string {
    const ws = this.baseUrl.replace(/^http/, "ws").replace(/\/$/, "");
    return `${ws}/sessions/${sessionId}/stream`;
  }
}

// Minimal shape of the browser WebSocket we rely on, so tests can
// substitute a fake without a DOM.
export interface WsLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type WsFactory = (url: string) => WsLike;

export interface StreamHandlers {
  onEvent(ev: ServerEvent): void;
  onState?(state: StreamState): void;
}

export type StreamState = "connecting" | "open" | "reconnecting" | "closed";

export interface StreamOptions {
  wsFactory?: WsFactory;
  reconnectDelayMs?: number;
  maxReconnects?: number;
  setTimeout?: (fn: () => void, ms: number) => unknown;
}

// One session's frame stream. Frames sent before the socket opens are
// buffered; an unexpected drop surfaces as "reconnecting" and the
// stream dials again with the same session id.
export class SessionStream {
  private ws: WsLike | null = null;
  private buffer: string[] = [];
  private state_: StreamState = "connecting";
  private closedByUs = false;
  private reconnects = 0;
  private readonly factory: WsFactory;
  private readonly reconnectDelayMs: number;
  private readonly maxReconnects: number;
  private readonly schedule: (fn: () => void, ms: number) => unknown;

  constructor(
    readonly url: string,
    private handlers: StreamHandlers,
    opts: StreamOptions = {},
  ) {
    this.factory = opts.wsFactory ?? ((u) => new WebSocket(u) as unknown as WsLike);
    this.reconnectDelayMs = opts.reconnectDelayMs ?? 1000;
    this.maxReconnects = opts.maxReconnects ?? 5;
    this.schedule = opts.setTimeout ?? ((fn, ms) => setTimeout(fn, ms));
    this.dial();
  }

  get state(): StreamState {
    return this.state_;
  }

  private setState(s: StreamState): void {
    this.state_ = s;
    this.handlers.onState?.(s);
  }

  private dial(): void {
    const ws = this.factory(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.reconnects = 0;
      this.setState("open");
      for (const line of this.buffer) ws.send(line);
      this.buffer = [];
    };
    ws.onmessage = (ev) => {
      let parsed: ServerEvent;
      try {
        parsed = JSON.parse(ev.data);
      } catch {
        return; // not ours to interpret
      }
      this.handlers.onEvent(parsed);
    };
    ws.onclose = () => this.handleDrop();
    ws.onerror = () => {};
  }

  private handleDrop(): void {
    if (this.closedByUs || this.state_ === "closed") {
      this.setState("closed");
      return;
    }
    if (this.reconnects >= this.maxReconnects) {
      this.setState("closed");
      return;
    }
    this.reconnects += 1;
    this.setState("reconnecting");
    this.schedule(() => {
      if (!this.closedByUs) this.dial();
    }, this.reconnectDelayMs);
  }

  sendFrame(frame: KeypointFrameMsg): void {
    const line = JSON.stringify(frame) + "\n";
    if (this.state_ === "open" && this.ws) {
      this.ws.send(line);
    } else {
      this.buffer.push(line);
    }
  }

  close(): void {
    this.closedByUs = true;
    if (this.state_ === "open" && this.ws) {
      try {
        this.ws.send(JSON.stringify({ type: "close" }) + "\n");
      } catch {
        // socket already gone
      }
      this.ws.close();
    }
    this.setState("closed");
  }
}
