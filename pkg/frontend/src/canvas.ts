// Thin canvas layer: walks the scene list and issues 2D draw calls.

import { SceneNode } from './scene';
import { ViewTransform, worldToScreen } from './transform';

function heatColor(v: number): string {
  // dark blue (0) to warm yellow (1)
  const r = Math.round(40 + 215 * v);
  const g = Math.round(40 + 180 * v);
  const b = Math.round(90 - 50 * v);
  return `rgba(${r},${g},${b},0.55)`;
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  scene: SceneNode[],
  t: ViewTransform,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = '#1b2430';
  ctx.fillRect(0, 0, width, height);
  ctx.font = '12px sans-serif';
  for (const node of scene) {
    switch (node.kind) {
      case 'heatcell': {
        const [x0, y0] = worldToScreen(t, node.x0, node.y1);
        const [x1, y1] = worldToScreen(t, node.x1, node.y0);
        ctx.fillStyle = heatColor(node.value);
        ctx.fillRect(x0, y0, x1 - x0, y1 - y0);
        break;
      }
      case 'rect': {
        const [x0, y0] = worldToScreen(t, node.x0, node.y1);
        const [x1, y1] = worldToScreen(t, node.x1, node.y0);
        ctx.fillStyle = node.fill;
        ctx.fillRect(x0, y0, x1 - x0, y1 - y0);
        break;
      }
      case 'poly': {
        ctx.beginPath();
        node.points.forEach(([px, py], i) => {
          const [sx, sy] = worldToScreen(t, px, py);
          if (i === 0) {
            ctx.moveTo(sx, sy);
          } else {
            ctx.lineTo(sx, sy);
          }
        });
        ctx.closePath();
        ctx.fillStyle = node.fill;
        ctx.fill();
        if (node.stroke) {
          ctx.strokeStyle = node.stroke;
          ctx.stroke();
        }
        if (node.label) {
          const [lx, ly] = worldToScreen(t, node.points[0][0], node.points[0][1]);
          ctx.fillStyle = '#ccd6e8';
          ctx.fillText(node.label, lx + 4, ly - 4);
        }
        break;
      }
      case 'circle': {
        const [sx, sy] = worldToScreen(t, node.x, node.y);
        ctx.beginPath();
        ctx.arc(sx, sy, node.r * t.scale, 0, 2 * Math.PI);
        if (node.fill !== 'transparent') {
          ctx.fillStyle = node.fill;
          ctx.fill();
        } else {
          ctx.strokeStyle = '#81c784';
          ctx.stroke();
        }
        if (node.halo) {
          ctx.beginPath();
          ctx.arc(sx, sy, node.r * t.scale + 4, 0, 2 * Math.PI);
          ctx.strokeStyle = '#ffffff';
          ctx.stroke();
        }
        if (node.label) {
          ctx.fillStyle = '#ccd6e8';
          ctx.fillText(node.label, sx + node.r * t.scale + 3, sy + 3);
        }
        break;
      }
      case 'arrow': {
        const [sx, sy] = worldToScreen(t, node.x, node.y);
        const [ex, ey] = worldToScreen(
          t, node.x + node.len * Math.cos(node.yaw), node.y + node.len * Math.sin(node.yaw));
        ctx.beginPath();
        ctx.moveTo(sx, sy);
        ctx.lineTo(ex, ey);
        ctx.strokeStyle = node.color;
        ctx.stroke();
        break;
      }
      case 'text': {
        const [sx, sy] = worldToScreen(t, node.x, node.y);
        ctx.fillStyle = node.color;
        ctx.fillText(node.text, sx, sy);
        break;
      }
    }
  }
}
