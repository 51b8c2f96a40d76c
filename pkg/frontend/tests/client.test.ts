import { describe, expect, it } from 'vitest';

import { SimClient, SocketLike } from '../src/client';
import { ServerMsg } from '../src/protocol';
import { applyMessage, initialState, markStaleness, STALE_AFTER_MS } from '../src/state';

class MockSocket implements SocketLike {
  sent: string[] = [];
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: ((err: unknown) => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.onclose?.();
  }

  emit(msg: unknown): void {
    this.onmessage?.({ data: JSON.stringify(msg) });
  }
}

function makeHarness() {
  const sockets: MockSocket[] = [];
  const scheduled: Array<() => void> = [];
  const messages: ServerMsg[] = [];
  const statuses: string[] = [];
  const client = new SimClient(
    'ws://test',
    {
      onMessage: (m) => messages.push(m),
      onStatus: (s) => statuses.push(s),
    },
    () => {
      const s = new MockSocket();
      sockets.push(s);
      return s;
    },
    (fn) => scheduled.push(fn),
  );
  return { client, sockets, scheduled, messages, statuses };
}

const HELLO = {
  kind: 'hello', protocol_version: 1, tick: 0,
  map: {
    region: 'square', bounds: [0, 0, 30, 20], resolution: 0.5, width: 60,
    height: 40, obstacles: [], places: [], access_points: [],
  },
};

const SNAPSHOT = {
  kind: 'snapshot', protocol_version: 1, tick: 1, paused: false,
  robot: { x: 0, y: 0, yaw: 0 }, persons: [], tracks: [],
  attention: { records: [], selected: null }, task: null, engaged: null,
  dialogue: [], visibility_grids: [],
};

describe('mocked-stream session', () => {
  it('delivers validated messages and tracks status', () => {
    const h = makeHarness();
    h.client.connect();
    h.sockets[0].onopen?.();
    h.sockets[0].emit(HELLO);
    h.sockets[0].emit(SNAPSHOT);
    h.sockets[0].onmessage?.({ data: 'garbage' });
    expect(h.messages.map((m) => m.kind)).toEqual(['hello', 'snapshot']);
    expect(h.statuses).toEqual(['connecting', 'connected']);
  });

  it('schedules a retry after the connection drops', () => {
    const h = makeHarness();
    h.client.connect();
    h.sockets[0].onopen?.();
    h.sockets[0].onclose?.();
    expect(h.statuses.at(-1)).toBe('retrying');
    expect(h.scheduled).toHaveLength(1);
    h.scheduled[0]();
    expect(h.sockets).toHaveLength(2);
  });

  it('sends commands only while a socket exists', () => {
    const h = makeHarness();
    expect(h.client.send({ command: 'pause' })).toBe(false);
    h.client.connect();
    expect(h.client.send({ command: 'pause' })).toBe(true);
    expect(h.sockets[0].sent).toEqual(['{"command":"pause"}']);
  });
});

describe('view state over the mocked stream', () => {
  it('flags a protocol version mismatch explicitly', () => {
    let s = initialState();
    s = applyMessage(s, { ...HELLO, protocol_version: 99 } as never, 0);
    expect(s.status).toBe('incompatible');
    expect(s.lastError).toContain('v99');
    // further snapshots from the mismatched server are not rendered
    s = applyMessage(s, SNAPSHOT as never, 1);
    expect(s.snapshot).toBeNull();
  });

  it('marks the view stale after two seconds without snapshots', () => {
    let s = initialState();
    s = applyMessage(s, HELLO as never, 0);
    s = applyMessage(s, SNAPSHOT as never, 1000);
    expect(markStaleness(s, 1000 + STALE_AFTER_MS).stale).toBe(false);
    expect(markStaleness(s, 1001 + STALE_AFTER_MS).stale).toBe(true);
  });
});
