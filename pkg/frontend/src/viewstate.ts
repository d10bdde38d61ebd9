/**
 * View state and the single dispatch path that mutates it.
 *
 * UiSession is deliberately DOM-free: callers inject a `send` function and
 * feed incoming frames to `handleServer`. The renderer only reads `state`.
 * No segmentation or measurement ever happens here; every contour and every
 * number shown comes verbatim out of a server message.
 */

import {
  ClientMessage,
  parseServerMessage,
  ResultPayload,
  validateClientMessage,
} from "./protocol.js";

export interface Point {
  x: number;
  y: number;
}

export interface ImageInfo {
  path: string;
  width: number;
  height: number;
  spacing: number;
}

export interface AcceptSummary {
  diameterAmm: number;
  diameterBmm: number;
  satisfied: boolean;
  interactionS: number | null;
  outDir: string;
}

export interface ViewState {
  connected: boolean;
  image: ImageInfo | null;
  /** last user-set seed; never snapped by the server */
  seed: Point | null;
  helpers: Point[];
  /** newest contour actually received, image coordinates */
  contour: [number, number][] | null;
  /** seq of the displayed contour; never decreases */
  contourSeq: number;
  /** seq of the newest sent event still unanswered, or null */
  pendingSeq: number | null;
  satisfied: boolean;
  summary: AcceptSummary | null;
  toast: string | null;
}

export function initialState(): ViewState {
  return {
    connected: true,
    image: null,
    seed: null,
    helpers: [],
    contour: null,
    contourSeq: 0,
    pendingSeq: null,
    satisfied: true,
    summary: null,
    toast: null,
  };
}

export class UiSession {
  readonly state: ViewState = initialState();
  private nextSeq = 1;
  private readonly send: (msg: ClientMessage) => void;
  private readonly onChange: () => void;

  constructor(send: (msg: ClientMessage) => void, onChange: () => void = () => {}) {
    this.send = send;
    this.onChange = onChange;
  }

  /** Editing gestures are only meaningful while connected with an image. */
  canEdit(): boolean {
    return this.state.connected && this.state.image !== null;
  }

  private emit(msg: ClientMessage): void {
    const problems = validateClientMessage(msg);
    if (problems.length > 0) {
      // a schema violation here is a UI bug; never put it on the wire
      this.state.toast = `internal error: ${problems.join("; ")}`;
      this.onChange();
      return;
    }
    this.send(msg);
    this.state.pendingSeq = msg.seq;
    this.onChange();
  }

  private seq(): number {
    return this.nextSeq++;
  }

  // -- user gestures -------------------------------------------------------

  loadImage(path: string, spacing: number | null = null): void {
    if (!this.state.connected) return;
    this.lastLoadPath = path;
    this.emit({ v: 1, kind: "load", seq: this.seq(), path, spacing });
  }

  /** One seed_move per call; the caller throttles to animation frames. */
  dragTo(x: number, y: number): void {
    if (!this.canEdit()) return;
    this.state.seed = { x, y };
    this.emit({ v: 1, kind: "seed_move", seq: this.seq(), x, y });
  }

  addHelper(x: number, y: number): void {
    if (!this.canEdit()) return;
    this.state.helpers = [...this.state.helpers, { x, y }];
    this.emit({ v: 1, kind: "helper_add", seq: this.seq(), x, y });
  }

  clearHelpers(): void {
    if (!this.canEdit()) return;
    this.state.helpers = [];
    this.emit({ v: 1, kind: "helper_clear", seq: this.seq() });
  }

  setSatisfied(value: boolean): void {
    this.state.satisfied = value;
    this.onChange();
  }

  /** Returns false (with a toast) when there is nothing to accept yet. */
  accept(): boolean {
    if (this.state.contour === null) {
      this.state.toast = "no segmentation yet";
      this.onChange();
      return false;
    }
    this.emit({ v: 1, kind: "accept", seq: this.seq(), satisfied: this.state.satisfied });
    return true;
  }

  // -- server events -------------------------------------------------------

  handleServer(raw: string): void {
    const msg = parseServerMessage(raw);
    if (msg === null) {
      this.state.toast = "ignored malformed server message";
      this.onChange();
      return;
    }
    if (this.state.pendingSeq !== null && msg.seq >= this.state.pendingSeq) {
      this.state.pendingSeq = null;
    }
    if (msg.kind === "error") {
      this.state.toast = msg.message;
      this.onChange();
      return;
    }
    this.applyResult(msg.seq, msg.payload);
    this.onChange();
  }

  handleDisconnect(): void {
    this.state.connected = false;
    this.state.toast = "disconnected from session service";
    this.onChange();
  }

  private applyResult(seq: number, payload: ResultPayload): void {
    if (payload.answers === "load") {
      this.state.image = {
        path: this.lastLoadPath ?? "",
        width: payload.width ?? 0,
        height: payload.height ?? 0,
        spacing: payload.spacing ?? 1,
      };
      this.state.contour = null;
      this.state.contourSeq = 0;
      this.state.summary = null;
      return;
    }
    if (payload.answers === "accept") {
      this.state.summary = {
        diameterAmm: payload.diameter_a_mm ?? NaN,
        diameterBmm: payload.diameter_b_mm ?? NaN,
        satisfied: payload.satisfied ?? true,
        interactionS: payload.interaction_s ?? null,
        outDir: payload.out_dir ?? "",
      };
      return;
    }
    // seed_move / helper answers carry a contour; only ever move forward
    if (payload.contour !== undefined && seq > this.state.contourSeq) {
      this.state.contour = payload.contour;
      this.state.contourSeq = seq;
    }
  }

  private lastLoadPath: string | null = null;
}
