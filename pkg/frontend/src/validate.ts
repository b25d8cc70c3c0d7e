// Client-side mirror of the engine's config rules so a form can flag
// problems inline before any PUT. The server remains authoritative;
// anything it rejects is rendered from its violations list.

import type { ConfigDoc, RouteIn, RouteOut } from "./types.js";

export interface Violation {
  path: string;
  message: string;
}

const KINDS = ["note_on", "control_change"];
const MODES = ["call_and_response", "ai_only", "human_only"];

function intIn(value: unknown, lo: number, hi: number): boolean {
  return typeof value === "number" && Number.isInteger(value) && value >= lo && value <= hi;
}

function checkRouteCommon(
  route: RouteIn,
  path: string,
  dimension: number,
  out: Violation[],
): void {
  if (!route.device) out.push({ path: `${path}.device`, message: "device is required" });
  if (!KINDS.includes(route.kind)) {
    out.push({ path: `${path}.kind`, message: `unknown kind ${route.kind}` });
  }
  if (!intIn(route.channel, 0, 15)) {
    out.push({ path: `${path}.channel`, message: "channel must be 0..15" });
  }
  if (!intIn(route.number, 0, 127)) {
    out.push({ path: `${path}.number`, message: "number must be 0..127" });
  }
  if (!intIn(route.dim, 0, dimension - 1)) {
    out.push({
      path: `${path}.dim`,
      message: `dim must be 0..${dimension - 1}`,
    });
  }
}

export function validateConfig(doc: ConfigDoc): Violation[] {
  const out: Violation[] = [];
  if (!intIn(doc.dimension, 1, 1024)) {
    out.push({ path: "dimension", message: "dimension must be a positive integer" });
  }
  if (!doc.model_file) {
    out.push({ path: "model_file", message: "model file is required" });
  }
  doc.inputs.forEach((route, i) => checkRouteCommon(route, `inputs[${i}]`, doc.dimension, out));
  const seen = new Map<string, number>();
  doc.inputs.forEach((route, i) => {
    const key = `${route.device}|${route.kind}|${route.channel}|${route.number}`;
    const first = seen.get(key);
    if (first !== undefined) {
      out.push({
        path: `inputs[${i}]`,
        message: `duplicate input route (same as inputs[${first}])`,
      });
    } else {
      seen.set(key, i);
    }
  });
  doc.outputs.forEach((route: RouteOut, i) => {
    const path = `outputs[${i}]`;
    checkRouteCommon(route, path, doc.dimension, out);
    if (!intIn(route.out_lo, 0, 127)) {
      out.push({ path: `${path}.out_lo`, message: "out_lo must be 0..127" });
    }
    if (!intIn(route.out_hi, 0, 127)) {
      out.push({ path: `${path}.out_hi`, message: "out_hi must be 0..127" });
    }
    if (intIn(route.out_lo, 0, 127) && intIn(route.out_hi, 0, 127) && route.out_lo > route.out_hi) {
      out.push({ path: `${path}.out_lo`, message: "out_lo must not exceed out_hi" });
    }
    if (!intIn(route.velocity, 1, 127)) {
      out.push({ path: `${path}.velocity`, message: "velocity must be 1..127" });
    }
  });
  if (!MODES.includes(doc.interaction.mode)) {
    out.push({ path: "interaction.mode", message: `unknown mode ${doc.interaction.mode}` });
  }
  if (!(doc.interaction.switchover_s > 0)) {
    out.push({ path: "interaction.switchover_s", message: "switchover must be > 0 seconds" });
  }
  if (!(doc.interaction.tick_hz > 0)) {
    out.push({ path: "interaction.tick_hz", message: "tick rate must be > 0" });
  }
  if (!(doc.sampling.pi_temp > 0)) {
    out.push({ path: "sampling.pi_temp", message: "pi_temp must be > 0" });
  }
  if (!(doc.sampling.sigma_temp >= 0)) {
    out.push({ path: "sampling.sigma_temp", message: "sigma_temp must be >= 0" });
  }
  if (!(doc.dt_max > 0)) out.push({ path: "dt_max", message: "dt_max must be > 0" });
  if (!(doc.gate_s > 0)) out.push({ path: "gate_s", message: "gate_s must be > 0" });
  if (!doc.log_dir) out.push({ path: "log_dir", message: "log_dir is required" });
  if (!intIn(doc.net.osc_port, 1, 65535)) {
    out.push({ path: "net.osc_port", message: "port must be 1..65535" });
  }
  return out;
}
