/** Cursor-to-point resolution: nearest visible mark within a fixed screen
 * radius; distance ties go to the lower bundle index. */

import { ScreenPoint, worldToScreen } from './camera.js';
import { ViewState, visibleIndices } from './state.js';

export const HIT_RADIUS_PX = 8;

export function hitTest(state: ViewState, cursor: ScreenPoint): string | null {
  const points = state.bundle.points;
  let bestIndex = -1;
  let bestD2 = HIT_RADIUS_PX * HIT_RADIUS_PX;
  for (const i of visibleIndices(state)) {
    const s = worldToScreen(state.camera, state.viewport, points[i].x, points[i].y);
    const dx = s.x - cursor.x;
    const dy = s.y - cursor.y;
    const d2 = dx * dx + dy * dy;
    if (d2 < bestD2 || (d2 === bestD2 && bestIndex === -1)) {
      bestD2 = d2;
      bestIndex = i;
    }
  }
  return bestIndex === -1 ? null : points[bestIndex].id;
}
