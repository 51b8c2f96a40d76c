// Map-frame <-> screen-frame conversion. The y axis flips: map y grows
// north, canvas y grows down.

export interface ViewTransform {
  scale: number; // pixels per metre
  offsetX: number; // screen x of map x=0
  offsetY: number; // screen y of map y=0
}

export function fitTransform(
  bounds: [number, number, number, number],
  canvasWidth: number,
  canvasHeight: number,
  margin = 20,
): ViewTransform {
  const [x0, y0, x1, y1] = bounds;
  const w = x1 - x0;
  const h = y1 - y0;
  const scale = Math.min((canvasWidth - 2 * margin) / w, (canvasHeight - 2 * margin) / h);
  return {
    scale,
    offsetX: margin - x0 * scale,
    offsetY: canvasHeight - margin + y0 * scale,
  };
}

export function worldToScreen(t: ViewTransform, x: number, y: number): [number, number] {
  return [t.offsetX + x * t.scale, t.offsetY - y * t.scale];
}

export function screenToWorld(t: ViewTransform, sx: number, sy: number): [number, number] {
  return [(sx - t.offsetX) / t.scale, (t.offsetY - sy) / t.scale];
}
