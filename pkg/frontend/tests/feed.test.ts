import { describe, expect, it } from "vitest";

import { parseFeedMessage } from "../src/feed.js";

describe("parseFeedMessage", () => {
  it("parses a frame message", () => {
    const msg = parseFeedMessage(
      '{"v":1,"t":12.5,"source":"ai","values":[0.1,0.9],"dt":0.25}',
    );
    expect(msg).toEqual({ v: 1, t: 12.5, source: "ai", values: [0.1, 0.9], dt: 0.25 });
  });

  it("parses a lead announcement", () => {
    const msg = parseFeedMessage('{"v":1,"t":3.0,"lead":"human"}');
    expect(msg?.lead).toBe("human");
    expect(msg?.values).toBeUndefined();
  });

  it("ignores unknown fields without crashing", () => {
    const msg = parseFeedMessage(
      '{"v":2,"t":1,"source":"ai","values":[0.5],"dt":0.1,"experimental":{"deep":[1]},"zzz":true}',
    );
    expect(msg?.values).toEqual([0.5]);
    expect((msg as Record<string, unknown>).experimental).toBeUndefined();
  });

  it("tolerates missing fields", () => {
    const msg = parseFeedMessage('{"t":1.0}');
    expect(msg).toEqual({ t: 1.0 });
  });

  it("rejects structurally hopeless input", () => {
    expect(parseFeedMessage("not json")).toBeNull();
    expect(parseFeedMessage("[1,2,3]")).toBeNull();
    expect(parseFeedMessage("null")).toBeNull();
  });

  it("drops malformed values arrays rather than crashing", () => {
    const msg = parseFeedMessage('{"values":[0.5,"oops"],"source":"ai"}');
    expect(msg?.values).toBeUndefined();
    expect(msg?.source).toBe("ai");
  });
});
