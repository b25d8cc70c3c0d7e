// Live frame feed: tolerant message parsing plus a reconnecting socket.

export interface FeedMessage {
  v?: number;
  t?: number;
  source?: "human" | "ai";
  values?: number[];
  dt?: number;
  lead?: "human" | "ai";
}

// Tolerant by contract: unknown fields are ignored, missing ones leave a
// partial message; only structurally hopeless input returns null.
export function parseFeedMessage(text: string): FeedMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) return null;
  const obj = raw as Record<string, unknown>;
  const msg: FeedMessage = {};
  if (typeof obj.v === "number") msg.v = obj.v;
  if (typeof obj.t === "number") msg.t = obj.t;
  if (obj.source === "human" || obj.source === "ai") msg.source = obj.source;
  if (obj.lead === "human" || obj.lead === "ai") msg.lead = obj.lead;
  if (typeof obj.dt === "number") msg.dt = obj.dt;
  if (Array.isArray(obj.values) && obj.values.every((v) => typeof v === "number")) {
    msg.values = obj.values as number[];
  }
  return msg;
}

export type FeedState = "connecting" | "open" | "stale";

export class FeedSocket {
  onFrame: (msg: FeedMessage) => void = () => {};
  onLead: (lead: "human" | "ai") => void = () => {};
  onState: (state: FeedState) => void = () => {};

  private url: string;
  private socket: WebSocket | null = null;
  private backoffMs = 500;
  private closed = false;

  constructor(url: string) {
    this.url = url;
  }

  start(): void {
    this.closed = false;
    this.connect();
  }

  stop(): void {
    this.closed = true;
    this.socket?.close();
  }

  private connect(): void {
    this.onState("connecting");
    const socket = new WebSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.backoffMs = 500;
      this.onState("open");
    };
    socket.onmessage = (event) => {
      const msg = parseFeedMessage(String(event.data));
      if (msg === null) return;
      if (msg.lead !== undefined) this.onLead(msg.lead);
      if (msg.values !== undefined) this.onFrame(msg);
    };
    socket.onclose = () => {
      if (this.closed) return;
      this.onState("stale");
      setTimeout(() => this.connect(), this.backoffMs);
      this.backoffMs = Math.min(this.backoffMs * 2, 10_000);
    };
    socket.onerror = () => socket.close();
  }
}
