import { describe, expect, it } from "vitest";

import type { ConfigDoc } from "../src/types.js";
import { validateConfig } from "../src/validate.js";

function doc(): ConfigDoc {
  return {
    dimension: 2,
    model_file: "models/m.mdrn",
    inputs: [
      { device: "knobs", kind: "control_change", channel: 0, number: 1, dim: 0 },
    ],
    outputs: [
      {
        device: "synth", kind: "note_on", channel: 0, number: 0, dim: 0,
        out_lo: 0, out_hi: 127, velocity: 100,
      },
    ],
    interaction: { mode: "call_and_response", switchover_s: 2.0, tick_hz: 100 },
    sampling: { pi_temp: 1.0, sigma_temp: 1.0 },
    net: { osc_enabled: false, osc_host: "127.0.0.1", osc_port: 5005, websocket_enabled: true },
    log_dir: "logs",
    rng_seed: null,
    dt_max: 5.0,
    gate_s: 0.25,
    passthrough_device: null,
  };
}

describe("validateConfig", () => {
  it("accepts a sane document", () => {
    expect(validateConfig(doc())).toEqual([]);
  });

  it("flags out_lo above out_hi before any PUT", () => {
    const bad = doc();
    bad.outputs[0].out_lo = 50;
    bad.outputs[0].out_hi = 3;
    const violations = validateConfig(bad);
    expect(violations.some((v) => v.path === "outputs[0].out_lo")).toBe(true);
  });

  it("flags dim outside 0..D-1", () => {
    const bad = doc();
    bad.inputs[0].dim = 2;
    expect(validateConfig(bad).some((v) => v.path === "inputs[0].dim")).toBe(true);
  });

  it("flags duplicate input routes", () => {
    const bad = doc();
    bad.inputs.push({ ...bad.inputs[0], dim: 1 });
    const violations = validateConfig(bad);
    expect(violations.some((v) => v.message.includes("duplicate"))).toBe(true);
  });

  it("flags a non-positive switchover", () => {
    const bad = doc();
    bad.interaction.switchover_s = 0;
    expect(validateConfig(bad).some((v) => v.path === "interaction.switchover_s")).toBe(true);
  });

  it("accepts the 0.1 s fast-interleaving extreme", () => {
    const fast = doc();
    fast.interaction.switchover_s = 0.1;
    expect(validateConfig(fast)).toEqual([]);
  });

  it("flags bad velocity and channel ranges", () => {
    const bad = doc();
    bad.outputs[0].velocity = 0;
    bad.inputs[0].channel = 16;
    const paths = validateConfig(bad).map((v) => v.path);
    expect(paths).toContain("outputs[0].velocity");
    expect(paths).toContain("inputs[0].channel");
  });
});
