/**
 * Transcript tests: drive the UI session against recorded server frames and
 * check the protocol-client contract -- schema-valid output only, monotone
 * contour seq, no client-side computation, verbatim accept pass-through.
 */

import { beforeEach, describe, expect, it } from "vitest";

import { ClientMessage, validateClientMessage } from "../src/protocol.js";
import { UiSession } from "../src/viewstate.js";

let sent: ClientMessage[];
let session: UiSession;

beforeEach(() => {
  sent = [];
  session = new UiSession((msg) => sent.push(msg));
});

function serverResult(seq: number, payload: Record<string, unknown>): void {
  session.handleServer(JSON.stringify({ v: 1, kind: "result", seq, payload }));
}

function loadedSession(): void {
  session.loadImage("/data/image.png");
  serverResult(1, { answers: "load", width: 200, height: 200, spacing: 0.5 });
}

const contour = (scale: number): [number, number][] => [
  [100 + scale, 100],
  [100, 100 + scale],
  [100 - scale, 100],
  [100, 100 - scale],
];

describe("protocol fidelity", () => {
  it("emits only schema-valid messages with strictly increasing seq", () => {
    loadedSession();
    session.dragTo(100, 100);
    session.addHelper(120, 100);
    session.dragTo(101, 99);
    session.clearHelpers();
    serverResult(5, { answers: "seed_move", contour: contour(20) });
    session.accept();

    expect(sent.length).toBe(6);
    for (const msg of sent) {
      expect(validateClientMessage(msg)).toEqual([]);
    }
    const seqs = sent.map((m) => m.seq);
    expect(seqs).toEqual([...seqs].sort((a, b) => a - b));
    expect(new Set(seqs).size).toBe(seqs.length);
  });

  it("only ever emits the five client kinds", () => {
    loadedSession();
    session.dragTo(10, 10);
    serverResult(2, { answers: "seed_move", contour: contour(5) });
    session.addHelper(1, 1);
    session.clearHelpers();
    session.accept();
    const kinds = new Set(sent.map((m) => m.kind));
    for (const kind of kinds) {
      expect(["load", "seed_move", "helper_add", "helper_clear", "accept"]).toContain(kind);
    }
  });

  it("never invents a contour: rendering state only holds received payloads", () => {
    loadedSession();
    expect(session.state.contour).toBeNull();
    session.dragTo(100, 100); // no reply yet
    expect(session.state.contour).toBeNull();
    const received = contour(25);
    serverResult(2, { answers: "seed_move", contour: received });
    expect(session.state.contour).toEqual(received);
    expect(session.state.contourSeq).toBe(2);
  });
});

describe("monotone contour rendering", () => {
  it("ignores stale results after a newer one was displayed", () => {
    loadedSession();
    session.dragTo(1, 1);
    session.dragTo(2, 2);
    serverResult(3, { answers: "seed_move", contour: contour(30) });
    expect(session.state.contourSeq).toBe(3);
    // a stale frame (e.g. reordered by a proxy) must not move the display back
    serverResult(2, { answers: "seed_move", contour: contour(10) });
    expect(session.state.contourSeq).toBe(3);
    expect(session.state.contour).toEqual(contour(30));
    serverResult(4, { answers: "seed_move", contour: contour(12) });
    expect(session.state.contourSeq).toBe(4);
  });

  it("tracks pending state until the newest request is answered", () => {
    loadedSession();
    session.dragTo(5, 5);
    expect(session.state.pendingSeq).toBe(2);
    serverResult(2, { answers: "seed_move", contour: contour(3) });
    expect(session.state.pendingSeq).toBeNull();
  });
});

describe("gestures and state", () => {
  it("keeps the seed marker at the last user position, never server-snapped", () => {
    loadedSession();
    session.dragTo(42.5, 17.25);
    serverResult(2, { answers: "seed_move", seed: [40, 20], contour: contour(9) });
    expect(session.state.seed).toEqual({ x: 42.5, y: 17.25 });
  });

  it("helper set persists across seed drags", () => {
    loadedSession();
    session.addHelper(120, 100);
    serverResult(2, { answers: "helper_add", helpers: [[120, 100]] });
    session.dragTo(99, 101);
    serverResult(3, { answers: "seed_move", contour: contour(11) });
    expect(session.state.helpers).toEqual([{ x: 120, y: 100 }]);
    session.clearHelpers();
    expect(session.state.helpers).toEqual([]);
  });

  it("ignores gestures before an image is loaded", () => {
    session.dragTo(1, 1);
    session.addHelper(1, 1);
    expect(sent).toEqual([]);
  });
});

describe("accept flow", () => {
  it("accept with no contour shows a toast and sends nothing", () => {
    loadedSession();
    expect(session.accept()).toBe(false);
    expect(session.state.toast).toBe("no segmentation yet");
    expect(sent.filter((m) => m.kind === "accept")).toEqual([]);
  });

  it("surfaces the server's diameters unmodified", () => {
    loadedSession();
    session.dragTo(100, 100);
    serverResult(2, { answers: "seed_move", contour: contour(21) });
    expect(session.accept()).toBe(true);
    serverResult(3, {
      answers: "accept",
      diameter_a_mm: 41.237890123,
      diameter_b_mm: 39.5000001,
      satisfied: true,
      interaction_s: 6.25,
      out_dir: "/sessions/ws-0001",
    });
    expect(session.state.summary).toEqual({
      diameterAmm: 41.237890123,
      diameterBmm: 39.5000001,
      satisfied: true,
      interactionS: 6.25,
      outDir: "/sessions/ws-0001",
    });
  });

  it("carries satisfied=false into the accept message", () => {
    loadedSession();
    session.dragTo(100, 100);
    serverResult(2, { answers: "seed_move", contour: contour(21) });
    session.setSatisfied(false);
    session.accept();
    const accept = sent.find((m) => m.kind === "accept");
    expect(accept).toMatchObject({ kind: "accept", satisfied: false });
  });
});

describe("failure handling", () => {
  it("server errors become toasts, never crashes", () => {
    loadedSession();
    session.dragTo(9999, 9999);
    session.handleServer(
      JSON.stringify({ v: 1, kind: "error", seq: 2, message: "seed outside image" }),
    );
    expect(session.state.toast).toBe("seed outside image");
    expect(session.state.contour).toBeNull();
  });

  it("malformed server frames are ignored with a toast", () => {
    loadedSession();
    session.handleServer("garbage{{{");
    expect(session.state.toast).toContain("malformed");
  });

  it("disconnect disables editing", () => {
    loadedSession();
    expect(session.canEdit()).toBe(true);
    session.handleDisconnect();
    expect(session.canEdit()).toBe(false);
    const before = sent.length;
    session.dragTo(1, 1);
    session.loadImage("/other.png");
    expect(sent.length).toBe(before);
  });
});
