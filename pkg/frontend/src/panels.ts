// Side panels as pure snapshot -> rows functions. The console never derives
// attention values, routes or task state itself; it formats the fields the
// simulator sent.

import { SnapshotMsg } from './protocol';

export function attentionRows(snap: SnapshotMsg | null): string[] {
  if (!snap) {
    return [];
  }
  const rows = snap.attention.records.map((r) => {
    const mark = r.track === snap.attention.selected ? '>' : ' ';
    return `${mark} ${r.track}  head=${r.p_head.toFixed(2)} robot=${r.p_robot_gaze.toFixed(0)} `
      + `screen=${r.p_screen_gaze.toFixed(0)} dist=${r.p_dist.toFixed(2)} fused=${r.p_fused.toFixed(2)}`;
  });
  if (rows.length === 0) {
    rows.push('(no tracks)');
  }
  return rows;
}

export function taskRows(snap: SnapshotMsg | null): string[] {
  if (!snap) {
    return [];
  }
  const rows: string[] = [];
  rows.push(`engaged: ${snap.engaged ?? '-'}`);
  if (snap.task) {
    const goal = snap.task.goal.place
      ? `${snap.task.goal.kind} -> ${snap.task.goal.place}`
      : snap.task.goal.kind;
    rows.push(`task #${snap.task.id}: ${goal} [${snap.task.state}]`);
    if (snap.task.pending_question) {
      rows.push(`waiting: ${snap.task.pending_question}`);
    }
  } else {
    rows.push('task: none');
  }
  return rows;
}

export function dialogueRows(snap: SnapshotMsg | null): string[] {
  if (!snap) {
    return [];
  }
  return snap.dialogue.map((line) => {
    const who = line.dir === 'in' ? (line.person ?? '?') : 'robot';
    return `${who}: ${line.text}`;
  });
}
