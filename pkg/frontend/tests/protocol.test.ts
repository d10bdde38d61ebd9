import { describe, expect, it } from "vitest";

import {
  parseServerMessage,
  validateClientMessage,
} from "../src/protocol.js";

describe("validateClientMessage", () => {
  it("accepts every well-formed client kind", () => {
    const good = [
      { v: 1, kind: "load", seq: 1, path: "/data/image.png", spacing: null },
      { v: 1, kind: "seed_move", seq: 2, x: 10.5, y: 20.25 },
      { v: 1, kind: "helper_add", seq: 3, x: 1, y: 2 },
      { v: 1, kind: "helper_clear", seq: 4 },
      { v: 1, kind: "accept", seq: 5, satisfied: false },
    ];
    for (const msg of good) {
      expect(validateClientMessage(msg)).toEqual([]);
    }
  });

  it("rejects structural problems", () => {
    expect(validateClientMessage(null)).not.toEqual([]);
    expect(validateClientMessage([1])).not.toEqual([]);
    expect(validateClientMessage({ v: 2, kind: "accept", seq: 1, satisfied: true })).not.toEqual([]);
    expect(validateClientMessage({ v: 1, kind: "explode", seq: 1 })).not.toEqual([]);
    expect(validateClientMessage({ v: 1, kind: "accept", seq: 0, satisfied: true })).not.toEqual([]);
    expect(validateClientMessage({ v: 1, kind: "accept", seq: 1.5, satisfied: true })).not.toEqual([]);
    expect(validateClientMessage({ v: 1, kind: "seed_move", seq: 1, x: "a", y: 2 })).not.toEqual([]);
    expect(validateClientMessage({ v: 1, kind: "seed_move", seq: 1, x: NaN, y: 2 })).not.toEqual([]);
    expect(validateClientMessage({ v: 1, kind: "load", seq: 1 })).not.toEqual([]);
    expect(validateClientMessage({ v: 1, kind: "accept", seq: 1 })).not.toEqual([]);
  });
});

describe("parseServerMessage", () => {
  it("parses result and error frames", () => {
    const result = parseServerMessage(
      JSON.stringify({ v: 1, kind: "result", seq: 7, payload: { answers: "seed_move" } }),
    );
    expect(result?.kind).toBe("result");
    const error = parseServerMessage(
      JSON.stringify({ v: 1, kind: "error", seq: 3, message: "seed outside image" }),
    );
    expect(error?.kind).toBe("error");
  });

  it("returns null for garbage instead of throwing", () => {
    expect(parseServerMessage("not json")).toBeNull();
    expect(parseServerMessage("42")).toBeNull();
    expect(parseServerMessage(JSON.stringify({ v: 9, kind: "result", seq: 1, payload: {} }))).toBeNull();
    expect(parseServerMessage(JSON.stringify({ v: 1, kind: "result", seq: 1 }))).toBeNull();
    expect(parseServerMessage(JSON.stringify({ v: 1, kind: "error", seq: 1 }))).toBeNull();
  });
});
