// View state: the latest validated messages plus UI selections. Pure
// reducers so rendering stays reproducible.

import {
  HelloMsg,
  PROTOCOL_VERSION,
  ServerMsg,
  SnapshotMsg,
  VisgridMsg,
} from './protocol';

export type ConnectionStatus =
  | 'connecting'
  | 'connected'
  | 'retrying'
  | 'incompatible'
  | 'closed';

export type OverlayMode =
  | { mode: 'none' }
  | { mode: 'attention' }
  | { mode: 'visibility'; landmark: string };

export interface ViewState {
  status: ConnectionStatus;
  hello: HelloMsg | null;
  snapshot: SnapshotMsg | null;
  snapshotAtMs: number | null;
  stale: boolean;
  selectedPerson: string | null;
  overlay: OverlayMode;
  visgrid: VisgridMsg | null;
  lastError: string | null;
}

export const STALE_AFTER_MS = 2000;

export function initialState(): ViewState {
  return {
    status: 'connecting',
    hello: null,
    snapshot: null,
    snapshotAtMs: null,
    stale: false,
    selectedPerson: null,
    overlay: { mode: 'none' },
    visgrid: null,
    lastError: null,
  };
}

export function applyMessage(state: ViewState, msg: ServerMsg, nowMs: number): ViewState {
  if (msg.kind === 'hello') {
    if (msg.protocol_version !== PROTOCOL_VERSION) {
      return {
        ...state,
        status: 'incompatible',
        lastError: `incompatible protocol: server speaks v${msg.protocol_version}, `
          + `this console speaks v${PROTOCOL_VERSION}`,
      };
    }
    return { ...state, status: 'connected', hello: msg };
  }
  if (state.status === 'incompatible') {
    return state; // refuse to render anything from a mismatched server
  }
  if (msg.kind === 'snapshot') {
    const selected = state.selectedPerson
      ?? (msg.persons.length > 0 ? msg.persons[0].id : null);
    return {
      ...state,
      status: 'connected',
      snapshot: msg,
      snapshotAtMs: nowMs,
      stale: false,
      selectedPerson: selected,
    };
  }
  if (msg.kind === 'visgrid') {
    return { ...state, visgrid: msg };
  }
  return { ...state, lastError: msg.message };
}

export function markStaleness(state: ViewState, nowMs: number): ViewState {
  const stale = state.snapshotAtMs !== null && nowMs - state.snapshotAtMs > STALE_AFTER_MS;
  return stale === state.stale ? state : { ...state, stale };
}

export function selectPerson(state: ViewState, person: string | null): ViewState {
  return { ...state, selectedPerson: person };
}

export function setOverlay(state: ViewState, overlay: OverlayMode): ViewState {
  const keepGrid = overlay.mode === 'visibility' && state.visgrid !== null
    && state.visgrid.landmark === overlay.landmark;
  return { ...state, overlay, visgrid: keepGrid ? state.visgrid : null };
}

export function setStatus(state: ViewState, status: ConnectionStatus): ViewState {
  return { ...state, status };
}
