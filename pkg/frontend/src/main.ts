// Entry point: wires the protocol client, state, canvas and panels into the
// page. Configuration comes from URL query parameters:
//   ?endpoint=ws://127.0.0.1:8765&person=op1

import { drawScene } from './canvas';
import { SimClient } from './client';
import { attentionRows, dialogueRows, taskRows } from './panels';
import { buildScene } from './scene';
import {
  applyMessage,
  initialState,
  markStaleness,
  selectPerson,
  setOverlay,
  setStatus,
  ViewState,
} from './state';
import { clickToMove, dragToHead, requestVisgrid, spawnAt, toggleSpeaking, utter } from './steer';
import { fitTransform, ViewTransform, worldToScreen } from './transform';

const params = new URLSearchParams(window.location.search);
const endpoint = params.get('endpoint') ?? 'ws://127.0.0.1:8765';
const operatorPerson = params.get('person') ?? 'op1';

const canvas = document.getElementById('map') as HTMLCanvasElement;
const ctx = canvas.getContext('2d')!;
const banner = document.getElementById('banner')!;
const tickEl = document.getElementById('tick')!;
const attentionEl = document.getElementById('attention')!;
const taskEl = document.getElementById('task')!;
const dialogueEl = document.getElementById('dialogue')!;
const utterInput = document.getElementById('utter') as HTMLInputElement;
const speakToggle = document.getElementById('speaking') as HTMLInputElement;
const overlaySelect = document.getElementById('overlay') as HTMLSelectElement;

let state: ViewState = initialState();
let transform: ViewTransform | null = null;
let spawned = false;
let dragging = false;

const client = new SimClient(
  endpoint,
  {
    onMessage: (msg) => {
      state = applyMessage(state, msg, Date.now());
      if (msg.kind === 'hello') {
        const b = msg.map.bounds ?? [0, 0, 30, 20];
        transform = fitTransform([b[0], b[1], b[2], b[3]], canvas.width, canvas.height);
        for (const place of msg.map.places) {
          if (place.region !== msg.map.region) continue;
          const opt = document.createElement('option');
          opt.value = place.id;
          opt.textContent = `visibility: ${place.label}`;
          overlaySelect.appendChild(opt);
        }
        for (const ap of msg.map.access_points) {
          const opt = document.createElement('option');
          opt.value = ap.id;
          opt.textContent = `visibility: ${ap.id}`;
          overlaySelect.appendChild(opt);
        }
      }
      if (msg.kind === 'snapshot' && !spawned) {
        spawned = true;
        client.send(spawnAt(operatorPerson, msg.robot.x + 2.0, msg.robot.y));
        client.send({ command: 'set_head', person: operatorPerson, look_at: 'robot' });
        state = selectPerson(state, operatorPerson);
      }
      render();
    },
    onStatus: (status) => {
      state = setStatus(state, status);
      render();
    },
  },
  (url) => new WebSocket(url) as never,
);

function render(): void {
  state = markStaleness(state, Date.now());
  if (state.status === 'incompatible') {
    banner.textContent = state.lastError ?? 'incompatible protocol version';
    banner.className = 'banner error';
  } else if (state.status !== 'connected') {
    banner.textContent = `${state.status}... (${endpoint})`;
    banner.className = 'banner warn';
  } else if (state.stale) {
    banner.textContent = 'connection stale: no snapshot for over 2 s';
    banner.className = 'banner warn';
  } else {
    banner.textContent = `connected to ${endpoint}`;
    banner.className = 'banner ok';
  }
  tickEl.textContent = state.snapshot
    ? `tick ${state.snapshot.tick}${state.snapshot.paused ? ' (paused)' : ''}`
    : 'tick -';
  if (transform) {
    drawScene(ctx, buildScene(state), transform, canvas.width, canvas.height);
  }
  attentionEl.textContent = attentionRows(state.snapshot).join('\n');
  taskEl.textContent = taskRows(state.snapshot).join('\n');
  dialogueEl.textContent = dialogueRows(state.snapshot).join('\n');
  dialogueEl.scrollTop = dialogueEl.scrollHeight;
}

canvas.addEventListener('click', (ev) => {
  if (!transform || !state.selectedPerson) return;
  const rect = canvas.getBoundingClientRect();
  client.send(clickToMove(state.selectedPerson, ev.clientX - rect.left, ev.clientY - rect.top, transform));
});

canvas.addEventListener('mousedown', (ev) => {
  if (ev.shiftKey) dragging = true;
});
canvas.addEventListener('mousemove', (ev) => {
  if (!dragging || !transform || !state.selectedPerson || !state.snapshot) return;
  const person = state.snapshot.persons.find((p) => p.id === state.selectedPerson);
  if (!person) return;
  const rect = canvas.getBoundingClientRect();
  client.send(dragToHead(state.selectedPerson, [person.x, person.y],
    ev.clientX - rect.left, ev.clientY - rect.top, transform));
});
window.addEventListener('mouseup', () => { dragging = false; });

utterInput.addEventListener('keydown', (ev) => {
  if (ev.key === 'Enter' && utterInput.value.trim() && state.selectedPerson) {
    client.send(toggleSpeaking(state.selectedPerson, true));
    client.send(utter(state.selectedPerson, utterInput.value.trim()));
    utterInput.value = '';
    window.setTimeout(() => {
      if (state.selectedPerson && !speakToggle.checked) {
        client.send(toggleSpeaking(state.selectedPerson, false));
      }
    }, 500);
  }
});

speakToggle.addEventListener('change', () => {
  if (state.selectedPerson) {
    client.send(toggleSpeaking(state.selectedPerson, speakToggle.checked));
  }
});

overlaySelect.addEventListener('change', () => {
  const v = overlaySelect.value;
  if (v === 'none' || v === 'attention') {
    state = setOverlay(state, { mode: v });
  } else {
    state = setOverlay(state, { mode: 'visibility', landmark: v });
    client.send(requestVisgrid(v));
  }
  render();
});

client.connect();
window.setInterval(render, 500);
