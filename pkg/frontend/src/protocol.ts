/**
 * Wire schema for the telemetry websocket: state/error frames from the
 * server, input/config commands to it. Everything leaving the client is
 * validated and clamped here so the UI can never emit a malformed message.
 */

export interface StateFrame {
  type: "state";
  t: number;
  x_o: number;
  y_o: number;
  x_r: number;
  y_r: number;
  tau_est: number;
  E_in: number;
  E_out: number;
  zeta: number;
  arch: string;
  delay: number;
}

export interface ErrorFrame {
  type: "error";
  message: string;
}

export type ServerFrame = StateFrame | ErrorFrame;

export interface InputCommand {
  type: "input";
  throttle: number;
}

export interface ConfigCommand {
  type: "config";
  delay?: number;
  arch?: string;
  b?: number;
}

export const ARCHITECTURES = [
  "raw",
  "wave",
  "wave+smith",
  "wave+mj",
  "wave+pred",
] as const;

const STATE_NUMBER_FIELDS = [
  "t", "x_o", "y_o", "x_r", "y_r", "tau_est", "E_in", "E_out", "zeta", "delay",
] as const;

/** Parse one server message; null for anything that does not match the schema. */
export function parseFrame(text: string): ServerFrame | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  const msg = raw as Record<string, unknown>;
  if (msg.type === "error") {
    return typeof msg.message === "string"
      ? { type: "error", message: msg.message }
      : null;
  }
  if (msg.type !== "state") return null;
  for (const field of STATE_NUMBER_FIELDS) {
    const v = msg[field];
    if (typeof v !== "number" || !Number.isFinite(v)) return null;
  }
  if (typeof msg.arch !== "string") return null;
  return msg as unknown as StateFrame;
}

export function clampThrottle(value: number): number {
  if (!Number.isFinite(value)) return 0;
  return Math.max(-1, Math.min(1, value));
}

export function makeInput(throttle: number): InputCommand {
  return { type: "input", throttle: clampThrottle(throttle) };
}

export interface ConfigFields {
  delay?: number;
  arch?: string;
  b?: number;
}

/**
 * Build a config command, returning an error string instead when a field is
 * out of the schema's range (the caller shows it; nothing is sent).
 */
export function makeConfig(fields: ConfigFields): ConfigCommand | string {
  const cmd: ConfigCommand = { type: "config" };
  if (fields.delay !== undefined) {
    if (!Number.isFinite(fields.delay) || fields.delay < 0) {
      return `delay must be >= 0, got ${fields.delay}`;
    }
    cmd.delay = fields.delay;
  }
  if (fields.arch !== undefined) {
    if (!(ARCHITECTURES as readonly string[]).includes(fields.arch)) {
      return `unknown architecture '${fields.arch}'`;
    }
    cmd.arch = fields.arch;
  }
  if (fields.b !== undefined) {
    if (!Number.isFinite(fields.b) || fields.b <= 0) {
      return `impedance b must be > 0, got ${fields.b}`;
    }
    cmd.b = fields.b;
  }
  if (cmd.delay === undefined && cmd.arch === undefined && cmd.b === undefined) {
    return "config command carries no field";
  }
  return cmd;
}

export function serializeCommand(cmd: InputCommand | ConfigCommand): string {
  return JSON.stringify(cmd);
}
