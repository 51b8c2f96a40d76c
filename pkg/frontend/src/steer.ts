// Operator gestures -> command messages. Screen coordinates go through the
// inverse of the render transform, so a click lands where it points.

import { Command } from './protocol';
import { screenToWorld, ViewTransform } from './transform';

export function clickToMove(
  person: string,
  screenX: number,
  screenY: number,
  t: ViewTransform,
): Command {
  const [x, y] = screenToWorld(t, screenX, screenY);
  return { command: 'move_person', person, pos: [x, y] };
}

export function dragToHead(
  person: string,
  personWorld: [number, number],
  screenX: number,
  screenY: number,
  t: ViewTransform,
): Command {
  const [x, y] = screenToWorld(t, screenX, screenY);
  const yaw = Math.atan2(y - personWorld[1], x - personWorld[0]);
  return { command: 'set_head', person, yaw };
}

export function utter(person: string, text: string): Command {
  return { command: 'utter', person, text };
}

export function toggleSpeaking(person: string, speaking: boolean): Command {
  return { command: 'set_speaking', person, speaking };
}

export function spawnAt(person: string, x: number, y: number): Command {
  return { command: 'spawn_person', person, pos: [x, y] };
}

export function requestVisgrid(landmark: string): Command {
  return { command: 'visgrid', landmark };
}
