// Live monitor: lead badge, per-dimension value bars, event counters.
// Feed messages are coalesced; the DOM repaints at most ~30 fps.

import { getStatus } from "./api.js";
import { FeedSocket, type FeedMessage, type FeedState } from "./feed.js";

export class MonitorView {
  private leadBadge: HTMLElement;
  private stateLine: HTMLElement;
  private barsBox: HTMLElement;
  private countersBox: HTMLElement;
  private bars: HTMLElement[] = [];
  private latest: FeedMessage | null = null;
  private feed: FeedSocket | null = null;
  private renderTimer: number | null = null;
  private statusTimer: number | null = null;

  constructor(root: HTMLElement) {
    this.leadBadge = document.createElement("div");
    this.leadBadge.className = "lead-badge";
    this.stateLine = document.createElement("div");
    this.stateLine.className = "feed-state";
    this.barsBox = document.createElement("div");
    this.barsBox.className = "bars";
    this.countersBox = document.createElement("div");
    this.countersBox.className = "counters";
    root.append(this.leadBadge, this.stateLine, this.barsBox, this.countersBox);
  }

  async start(): Promise<void> {
    let websocketEnabled = true;
    try {
      const status = await getStatus();
      this.applyLead(status.lead);
      this.ensureBars(status.dimension);
    } catch {
      this.stateLine.textContent = "engine unreachable";
    }
    try {
      const config = await (await fetch("/api/config")).json();
      websocketEnabled = Boolean(config?.net?.websocket_enabled ?? true);
    } catch {
      // keep the default; the monitor degrades gracefully
    }
    if (!websocketEnabled) {
      this.stateLine.textContent = "feed disabled in config";
    } else {
      const scheme = location.protocol === "https:" ? "wss" : "ws";
      this.feed = new FeedSocket(`${scheme}://${location.host}/ws`);
      this.feed.onFrame = (msg) => {
        this.latest = msg;
      };
      this.feed.onLead = (lead) => this.applyLead(lead);
      this.feed.onState = (state) => this.applyFeedState(state);
      this.feed.start();
      this.renderTimer = window.setInterval(() => this.paint(), 33);
    }
    this.statusTimer = window.setInterval(() => void this.refreshCounters(), 1000);
    void this.refreshCounters();
  }

  stop(): void {
    this.feed?.stop();
    if (this.renderTimer !== null) clearInterval(this.renderTimer);
    if (this.statusTimer !== null) clearInterval(this.statusTimer);
  }

  private applyLead(lead: "human" | "ai"): void {
    this.leadBadge.textContent = lead === "ai" ? "Ai" : "Human";
    this.leadBadge.classList.toggle("ai", lead === "ai");
  }

  private applyFeedState(state: FeedState): void {
    this.stateLine.textContent =
      state === "open" ? "live" : state === "stale" ? "feed stale, reconnecting…" : "connecting…";
    this.stateLine.classList.toggle("stale", state !== "open");
  }

  private ensureBars(count: number): void {
    if (this.bars.length === count) return;
    this.barsBox.textContent = "";
    this.bars = [];
    for (let i = 0; i < count; i++) {
      const row = document.createElement("div");
      row.className = "bar-row";
      const label = document.createElement("span");
      label.textContent = `dim ${i}`;
      const track = document.createElement("div");
      track.className = "bar-track";
      const fill = document.createElement("div");
      fill.className = "bar-fill";
      track.appendChild(fill);
      row.append(label, track);
      this.barsBox.appendChild(row);
      this.bars.push(fill);
    }
  }

  private paint(): void {
    const msg = this.latest;
    if (!msg || !msg.values) return;
    this.latest = null;
    this.ensureBars(msg.values.length);
    msg.values.forEach((value, i) => {
      const clamped = Math.max(0, Math.min(1, value));
      this.bars[i].style.width = `${(clamped * 100).toFixed(1)}%`;
      this.bars[i].classList.toggle("from-ai", msg.source === "ai");
    });
  }

  private async refreshCounters(): Promise<void> {
    try {
      const status = await getStatus();
      this.applyLead(status.lead);
      this.countersBox.textContent =
        `uptime ${status.uptime_s.toFixed(0)} s · ` +
        `human ${status.counters.human_events} · ai ${status.counters.ai_frames} · ` +
        `midi out ${status.counters.midi_out} · ` +
        `last 1 s: ${status.last_1s.human_events}/${status.last_1s.ai_frames}`;
    } catch {
      this.countersBox.textContent = "status unavailable";
    }
  }
}
