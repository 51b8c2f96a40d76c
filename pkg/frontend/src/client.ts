// WebSocket session with automatic retry. The socket implementation is
// injectable so unit tests drive the client from a mocked stream and the
// live test can plug in the node 'ws' package.

import { Command, parseServerMsg, serializeCommand, ServerMsg } from './protocol';

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((err: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientHooks {
  onMessage: (msg: ServerMsg) => void;
  onStatus: (status: 'connecting' | 'connected' | 'retrying' | 'closed') => void;
}

export class SimClient {
  private socket: SocketLike | null = null;
  private closed = false;
  private retryDelayMs = 500;
  private readonly maxRetryMs = 10_000;

  constructor(
    private readonly url: string,
    private readonly hooks: ClientHooks,
    private readonly factory: SocketFactory,
    private readonly schedule: (fn: () => void, ms: number) => void =
      (fn, ms) => { setTimeout(fn, ms); },
  ) {}

  connect(): void {
    this.hooks.onStatus('connecting');
    let socket: SocketLike;
    try {
      socket = this.factory(this.url);
    } catch {
      this.scheduleRetry();
      return;
    }
    this.socket = socket;
    socket.onopen = () => {
      this.retryDelayMs = 500;
      this.hooks.onStatus('connected');
    };
    socket.onmessage = (ev) => {
      const msg = parseServerMsg(String(ev.data));
      if (msg !== null) {
        this.hooks.onMessage(msg);
      }
    };
    socket.onerror = () => { /* close follows */ };
    socket.onclose = () => {
      this.socket = null;
      if (!this.closed) {
        this.scheduleRetry();
      }
    };
  }

  private scheduleRetry(): void {
    if (this.closed) {
      return;
    }
    this.hooks.onStatus('retrying');
    const delay = this.retryDelayMs;
    this.retryDelayMs = Math.min(this.retryDelayMs * 2, this.maxRetryMs);
    this.schedule(() => {
      if (!this.closed) {
        this.connect();
      }
    }, delay);
  }

  send(cmd: Command): boolean {
    if (!this.socket) {
      return false;
    }
    this.socket.send(serializeCommand(cmd));
    return true;
  }

  close(): void {
    this.closed = true;
    this.hooks.onStatus('closed');
    if (this.socket) {
      this.socket.close();
      this.socket = null;
    }
  }
}
