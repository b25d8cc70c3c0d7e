// Shapes of the engine's JSON documents. The server is the source of
// truth (GET /api/schema); these mirror it for editor ergonomics.

export type RouteKind = "note_on" | "control_change";
export type InteractionMode = "call_and_response" | "ai_only" | "human_only";

export interface RouteIn {
  device: string;
  kind: RouteKind;
  channel: number;
  number: number;
  dim: number;
}

export interface RouteOut extends RouteIn {
  out_lo: number;
  out_hi: number;
  velocity: number;
}

export interface ConfigDoc {
  dimension: number;
  model_file: string;
  inputs: RouteIn[];
  outputs: RouteOut[];
  interaction: {
    mode: InteractionMode;
    switchover_s: number;
    tick_hz: number;
  };
  sampling: { pi_temp: number; sigma_temp: number };
  net: {
    osc_enabled: boolean;
    osc_host: string;
    osc_port: number;
    websocket_enabled: boolean;
  };
  log_dir: string;
  rng_seed: number | null;
  dt_max: number;
  gate_s: number;
  passthrough_device: string | null;
}

export interface StatusResponse {
  state: string;
  lead: "human" | "ai";
  dimension: number;
  model_file: string;
  model_name: string;
  uptime_s: number;
  pending_events: number;
  logging_disabled: boolean;
  interaction: { mode: InteractionMode; switchover_s: number };
  counters: Record<string, number>;
  last_1s: Record<string, number>;
  routing: { matched: number; passed: number; dropped: number };
}

export interface LogFileInfo {
  session: string;
  size_bytes: number;
}
