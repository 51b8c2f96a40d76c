// Message types for the simulator bridge plus runtime validators.
// The console is strictly a protocol client: everything it displays comes
// from these messages, never from local recomputation.

export const PROTOCOL_VERSION = 1;

export interface RobotPose {
  x: number;
  y: number;
  yaw: number;
}

export interface MapPlace {
  id: string;
  label: string;
  footprint: number[][];
  centroid: number[];
  region: string;
}

export interface MapAccessPoint {
  id: string;
  kind: string;
  anchor: number[];
}

export interface MapGeometry {
  region: string;
  bounds: number[] | null;
  resolution: number;
  width: number;
  height: number;
  obstacles: number[][];
  places: MapPlace[];
  access_points: MapAccessPoint[];
}

export interface HelloMsg {
  kind: 'hello';
  protocol_version: number;
  tick: number;
  map: MapGeometry;
}

export interface TrackEntry {
  id: string;
  x: number;
  y: number;
  head_yaw: number;
  head_pitch: number;
  distance: number;
  azimuth: number;
  vfoa: string | null;
}

export interface AttentionEntry {
  track: string;
  p_head: number;
  p_robot_gaze: number;
  p_screen_gaze: number;
  p_dist: number;
  p_fused: number;
  distance: number;
}

export interface PersonEntry {
  id: string;
  x: number;
  y: number;
  head_yaw: number;
  speaking: boolean;
}

export interface TaskEntry {
  id: number;
  goal: { kind: string; place?: string };
  state: string;
  person: string | null;
  pending_question: string | null;
}

export interface DialogueLine {
  dir: 'in' | 'out';
  person: string | null;
  text: string;
}

export interface SnapshotMsg {
  kind: 'snapshot';
  protocol_version: number;
  tick: number;
  paused: boolean;
  robot: RobotPose;
  persons: PersonEntry[];
  tracks: TrackEntry[];
  attention: { records: AttentionEntry[]; selected: string | null };
  task: TaskEntry | null;
  engaged: string | null;
  dialogue: DialogueLine[];
  visibility_grids: string[];
}

export interface VisgridMsg {
  kind: 'visgrid';
  protocol_version: number;
  tick: number;
  landmark: string;
  origin: number[];
  resolution: number;
  width: number;
  height: number;
  values: number[];
}

export interface ErrorMsg {
  kind: 'error';
  tick: number;
  message: string;
}

export type ServerMsg = HelloMsg | SnapshotMsg | VisgridMsg | ErrorMsg;

// --- validators -------------------------------------------------------------

function isObject(v: unknown): v is Record<string, unknown> {
  return typeof v === 'object' && v !== null;
}

export function isHello(v: unknown): v is HelloMsg {
  return isObject(v) && v.kind === 'hello' && typeof v.protocol_version === 'number'
    && isObject(v.map) && Array.isArray((v.map as unknown as MapGeometry).places);
}

export function isSnapshot(v: unknown): v is SnapshotMsg {
  return isObject(v) && v.kind === 'snapshot' && typeof v.tick === 'number'
    && isObject(v.robot) && Array.isArray(v.persons) && Array.isArray(v.tracks)
    && isObject(v.attention) && Array.isArray(v.dialogue);
}

export function isVisgrid(v: unknown): v is VisgridMsg {
  return isObject(v) && v.kind === 'visgrid' && typeof v.width === 'number'
    && typeof v.height === 'number' && Array.isArray(v.values)
    && v.values.length === (v.width as number) * (v.height as number);
}

export function isError(v: unknown): v is ErrorMsg {
  return isObject(v) && v.kind === 'error' && typeof v.message === 'string';
}

export function parseServerMsg(raw: string): ServerMsg | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (isHello(data) || isSnapshot(data) || isVisgrid(data) || isError(data)) {
    return data;
  }
  return null;
}

// --- commands ----------------------------------------------------------------

export interface UtterCmd {
  command: 'utter';
  person: string;
  text: string;
}

export interface MovePersonCmd {
  command: 'move_person';
  person: string;
  pos: [number, number];
}

export interface SetHeadCmd {
  command: 'set_head';
  person: string;
  yaw?: number;
  look_at?: string;
}

export interface SetSpeakingCmd {
  command: 'set_speaking';
  person: string;
  speaking: boolean;
}

export interface SpawnPersonCmd {
  command: 'spawn_person';
  person: string;
  pos: [number, number];
}

export interface SimpleCmd {
  command: 'pause' | 'resume';
}

export interface VisgridCmd {
  command: 'visgrid';
  landmark: string;
}

export type Command =
  | UtterCmd
  | MovePersonCmd
  | SetHeadCmd
  | SetSpeakingCmd
  | SpawnPersonCmd
  | SimpleCmd
  | VisgridCmd;

const COMMAND_NAMES = new Set([
  'utter', 'move_person', 'set_head', 'set_speaking', 'spawn_person',
  'pause', 'resume', 'visgrid',
]);

export function isCommand(v: unknown): v is Command {
  if (!isObject(v) || typeof v.command !== 'string' || !COMMAND_NAMES.has(v.command)) {
    return false;
  }
  switch (v.command) {
    case 'utter':
      return typeof v.person === 'string' && typeof v.text === 'string';
    case 'move_person':
    case 'spawn_person':
      return typeof v.person === 'string' && Array.isArray(v.pos) && v.pos.length === 2
        && v.pos.every((n) => typeof n === 'number' && Number.isFinite(n));
    case 'set_head':
      return typeof v.person === 'string'
        && (typeof v.yaw === 'number' || typeof v.look_at === 'string');
    case 'set_speaking':
      return typeof v.person === 'string' && typeof v.speaking === 'boolean';
    case 'visgrid':
      return typeof v.landmark === 'string';
    default:
      return true;
  }
}

export function serializeCommand(cmd: Command): string {
  return JSON.stringify(cmd);
}

export function parseCommand(raw: string): Command | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  return isCommand(data) ? data : null;
}
