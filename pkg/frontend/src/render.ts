/** Immediate-mode canvas rendering. The drawing surface is a structural
 * subset of CanvasRenderingContext2D so tests can count draw calls on a
 * mock. */

import { ScreenPoint, worldToScreen } from './camera.js';
import { colorAssignment } from './palette.js';
import { ViewState, pointLabels } from './state.js';

export interface DrawSurface {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  globalAlpha: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  closePath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  fill(): void;
  stroke(): void;
}

export const POINT_RADIUS_PX = 2.5;

/** Draw every visible point; returns the number of marks drawn. */
export function renderScene(
  state: ViewState,
  ctx: DrawSurface,
  lasso: ScreenPoint[] | null = null,
): number {
  const { width, height } = state.viewport;
  ctx.globalAlpha = 1;
  ctx.fillStyle = '#ffffff';
  ctx.clearRect(0, 0, width, height);
  ctx.fillRect(0, 0, width, height);

  const labels = pointLabels(state);
  const colors = colorAssignment(labels);
  const points = state.bundle.points;
  let drawn = 0;
  ctx.globalAlpha = 0.8;
  for (let i = 0; i < points.length; i++) {
    if (state.hiddenLabels.has(labels[i])) {
      continue;
    }
    const s = worldToScreen(state.camera, state.viewport, points[i].x, points[i].y);
    ctx.fillStyle = colors.get(labels[i]) ?? '#000000';
    ctx.beginPath();
    ctx.arc(s.x, s.y, POINT_RADIUS_PX, 0, Math.PI * 2);
    ctx.fill();
    drawn++;
    if (state.selection.has(points[i].id) || state.hoveredId === points[i].id) {
      ctx.globalAlpha = 1;
      ctx.strokeStyle = '#222222';
      ctx.lineWidth = state.hoveredId === points[i].id ? 2 : 1;
      ctx.beginPath();
      ctx.arc(s.x, s.y, POINT_RADIUS_PX + 2, 0, Math.PI * 2);
      ctx.stroke();
      ctx.globalAlpha = 0.8;
    }
  }

  if (lasso && lasso.length >= 2) {
    ctx.globalAlpha = 1;
    ctx.strokeStyle = '#555555';
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(lasso[0].x, lasso[0].y);
    for (let i = 1; i < lasso.length; i++) {
      ctx.lineTo(lasso[i].x, lasso[i].y);
    }
    ctx.closePath();
    ctx.stroke();
  }
  ctx.globalAlpha = 1;
  return drawn;
}
