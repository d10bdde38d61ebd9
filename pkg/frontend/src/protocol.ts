/**
 * Session protocol (v1): message types and validation.
 *
 * The UI is a pure protocol client. Everything it sends is one of the
 * client kinds below; everything it renders comes out of a received
 * `result` message.
 */

export const PROTOCOL_VERSION = 1;

export type ClientKind = "load" | "seed_move" | "helper_add" | "helper_clear" | "accept";

export interface LoadMessage {
  v: typeof PROTOCOL_VERSION;
  kind: "load";
  seq: number;
  path: string;
  spacing?: number | null;
}

export interface SeedMoveMessage {
  v: typeof PROTOCOL_VERSION;
  kind: "seed_move";
  seq: number;
  x: number;
  y: number;
}

export interface HelperAddMessage {
  v: typeof PROTOCOL_VERSION;
  kind: "helper_add";
  seq: number;
  x: number;
  y: number;
}

export interface HelperClearMessage {
  v: typeof PROTOCOL_VERSION;
  kind: "helper_clear";
  seq: number;
}

export interface AcceptMessage {
  v: typeof PROTOCOL_VERSION;
  kind: "accept";
  seq: number;
  satisfied: boolean;
}

export type ClientMessage =
  | LoadMessage
  | SeedMoveMessage
  | HelperAddMessage
  | HelperClearMessage
  | AcceptMessage;

export interface ResultPayload {
  answers: ClientKind;
  width?: number;
  height?: number;
  spacing?: number;
  seed?: [number, number];
  helpers?: [number, number][];
  contour?: [number, number][];
  cut_radius_px?: number[];
  diameter_a_mm?: number;
  diameter_b_mm?: number;
  elapsed_ms?: number;
  out_dir?: string;
  files?: string[];
  satisfied?: boolean;
  interaction_s?: number | null;
}

export interface ResultMessage {
  v: typeof PROTOCOL_VERSION;
  kind: "result";
  seq: number;
  payload: ResultPayload;
}

export interface ErrorMessage {
  v: typeof PROTOCOL_VERSION;
  kind: "error";
  seq: number;
  message: string;
}

export type ServerMessage = ResultMessage | ErrorMessage;

const CLIENT_KINDS: ClientKind[] = ["load", "seed_move", "helper_add", "helper_clear", "accept"];

function isFiniteNumber(value: unknown): value is number {
  return typeof value === "number" && Number.isFinite(value);
}

/** Problems with an outgoing message; empty means schema-valid. */
export function validateClientMessage(msg: unknown): string[] {
  const problems: string[] = [];
  if (typeof msg !== "object" || msg === null || Array.isArray(msg)) {
    return ["message must be an object"];
  }
  const m = msg as Record<string, unknown>;
  if (m.v !== PROTOCOL_VERSION) problems.push(`v must be ${PROTOCOL_VERSION}`);
  if (!CLIENT_KINDS.includes(m.kind as ClientKind)) problems.push(`unknown kind ${String(m.kind)}`);
  if (!Number.isInteger(m.seq) || (m.seq as number) < 1) problems.push("seq must be a positive integer");
  switch (m.kind) {
    case "load":
      if (typeof m.path !== "string" || m.path.length === 0) problems.push("load needs a path");
      if (m.spacing !== undefined && m.spacing !== null && !isFiniteNumber(m.spacing)) {
        problems.push("spacing must be a number or null");
      }
      break;
    case "seed_move":
    case "helper_add":
      if (!isFiniteNumber(m.x)) problems.push("x must be a finite number");
      if (!isFiniteNumber(m.y)) problems.push("y must be a finite number");
      break;
    case "accept":
      if (typeof m.satisfied !== "boolean") problems.push("satisfied must be a boolean");
      break;
  }
  return problems;
}

/** Parse a server frame; returns null for anything that is not schema-valid. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof parsed !== "object" || parsed === null) return null;
  const m = parsed as Record<string, unknown>;
  if (m.v !== PROTOCOL_VERSION || !Number.isInteger(m.seq)) return null;
  if (m.kind === "error" && typeof m.message === "string") {
    return m as unknown as ErrorMessage;
  }
  if (m.kind === "result" && typeof m.payload === "object" && m.payload !== null) {
    return m as unknown as ResultMessage;
  }
  return null;
}
