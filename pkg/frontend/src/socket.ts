/**
 * Reconnecting websocket wrapper. The constructor takes a socket factory so
 * tests can drive it with a fake; commands are dropped (not queued) while
 * disconnected, since stale teleoperation commands are worse than none.
 */

import type { ConfigCommand, InputCommand, ServerFrame } from "./protocol.js";
import { parseFrame, serializeCommand } from "./protocol.js";
import type { ConnectionStatus } from "./session.js";
import { reconnectDelayMs } from "./session.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface CockpitSocketHandlers {
  onFrame: (frame: ServerFrame) => void;
  onStatus: (status: ConnectionStatus) => void;
}

export class CockpitSocket {
  private socket: SocketLike | null = null;
  private attempts = 0;
  private closed = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private url: string,
    private handlers: CockpitSocketHandlers,
    private factory: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
    private schedule: (fn: () => void, ms: number) => ReturnType<typeof setTimeout> = setTimeout,
  ) {}

  connect(): void {
    if (this.closed) return;
    this.handlers.onStatus("connecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempts = 0;
      this.handlers.onStatus("connected");
    };
    socket.onmessage = (ev) => {
      if (typeof ev.data !== "string") return;
      const frame = parseFrame(ev.data);
      if (frame) this.handlers.onFrame(frame);
    };
    socket.onerror = () => {
      // the close handler owns reconnection
    };
    socket.onclose = () => {
      this.socket = null;
      if (this.closed) return;
      this.handlers.onStatus("disconnected");
      const delay = reconnectDelayMs(this.attempts);
      this.attempts += 1;
      this.timer = this.schedule(() => this.connect(), delay);
    };
  }

  send(cmd: InputCommand | ConfigCommand): boolean {
    if (!this.socket) return false;
    try {
      this.socket.send(serializeCommand(cmd));
      return true;
    } catch {
      return false;
    }
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.socket?.close();
    this.socket = null;
  }
}
