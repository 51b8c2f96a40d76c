// Pure scene construction: ViewState -> ordered draw primitives. Rendering
// identical state twice yields deeply equal scenes (tested), which keeps the
// canvas layer trivial.

import { ViewState } from './state';

export type SceneNode =
  | { kind: 'poly'; points: number[][]; fill: string; stroke?: string; label?: string }
  | { kind: 'rect'; x0: number; y0: number; x1: number; y1: number; fill: string }
  | { kind: 'circle'; x: number; y: number; r: number; fill: string; label?: string; halo?: boolean }
  | { kind: 'arrow'; x: number; y: number; yaw: number; len: number; color: string }
  | { kind: 'heatcell'; x0: number; y0: number; x1: number; y1: number; value: number }
  | { kind: 'text'; x: number; y: number; text: string; color: string };

const PLACE_FILL = '#2b3a55';
const OBSTACLE_FILL = '#555566';
const ROBOT_FILL = '#4fc3f7';
const PERSON_FILL = '#ffb74d';
const TRACK_STROKE = '#81c784';

export function buildScene(state: ViewState): SceneNode[] {
  const scene: SceneNode[] = [];
  const hello = state.hello;
  if (!hello) {
    return scene;
  }
  const map = hello.map;

  if (state.overlay.mode === 'visibility' && state.visgrid) {
    const g = state.visgrid;
    for (let iy = 0; iy < g.height; iy += 1) {
      for (let ix = 0; ix < g.width; ix += 1) {
        const v = g.values[iy * g.width + ix];
        scene.push({
          kind: 'heatcell',
          x0: g.origin[0] + ix * g.resolution,
          y0: g.origin[1] + iy * g.resolution,
          x1: g.origin[0] + (ix + 1) * g.resolution,
          y1: g.origin[1] + (iy + 1) * g.resolution,
          value: v,
        });
      }
    }
  }

  for (const place of map.places) {
    if (place.region !== map.region) {
      continue;
    }
    scene.push({
      kind: 'poly', points: place.footprint, fill: PLACE_FILL,
      stroke: '#8899bb', label: place.label,
    });
  }
  for (const ob of map.obstacles) {
    scene.push({ kind: 'rect', x0: ob[0], y0: ob[1], x1: ob[2], y1: ob[3], fill: OBSTACLE_FILL });
  }
  for (const ap of map.access_points) {
    scene.push({
      kind: 'circle', x: ap.anchor[0], y: ap.anchor[1], r: 0.4,
      fill: '#9575cd', label: `${ap.id} (${ap.kind})`,
    });
  }

  const snap = state.snapshot;
  if (!snap) {
    return scene;
  }
  for (const person of snap.persons) {
    scene.push({
      kind: 'circle', x: person.x, y: person.y, r: 0.3, fill: PERSON_FILL,
      label: person.id, halo: person.id === state.selectedPerson,
    });
    scene.push({ kind: 'arrow', x: person.x, y: person.y, yaw: person.head_yaw, len: 0.9, color: PERSON_FILL });
    if (person.speaking) {
      scene.push({ kind: 'text', x: person.x + 0.4, y: person.y + 0.5, text: '~', color: '#ffffff' });
    }
  }
  for (const track of snap.tracks) {
    scene.push({ kind: 'circle', x: track.x, y: track.y, r: 0.42, fill: 'transparent', label: undefined });
    scene.push({ kind: 'arrow', x: track.x, y: track.y, yaw: track.head_yaw, len: 0.6, color: TRACK_STROKE });
  }
  scene.push({ kind: 'circle', x: snap.robot.x, y: snap.robot.y, r: 0.35, fill: ROBOT_FILL, label: 'robot' });
  scene.push({ kind: 'arrow', x: snap.robot.x, y: snap.robot.y, yaw: snap.robot.yaw, len: 1.0, color: ROBOT_FILL });

  if (state.overlay.mode === 'attention') {
    for (const rec of snap.attention.records) {
      const track = snap.tracks.find((t) => t.id === rec.track);
      if (track) {
        scene.push({
          kind: 'text', x: track.x + 0.4, y: track.y - 0.4,
          text: rec.p_fused.toFixed(2),
          color: rec.track === snap.attention.selected ? '#ffff00' : '#bbbbbb',
        });
      }
    }
  }
  return scene;
}
