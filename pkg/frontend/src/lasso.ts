/** Lasso selection: even-odd point-in-polygon over projected positions. */

import { ScreenPoint, worldToScreen } from './camera.js';
import { ViewState, visibleIndices } from './state.js';

export function pointInPolygon(polygon: ScreenPoint[], pt: ScreenPoint): boolean {
  let inside = false;
  const n = polygon.length;
  for (let i = 0; i < n; i++) {
    const a = polygon[i];
    const b = polygon[(i + 1) % n];
    if ((a.y > pt.y) !== (b.y > pt.y)) {
      const xCross = a.x + ((pt.y - a.y) / (b.y - a.y)) * (b.x - a.x);
      if (pt.x < xCross) {
        inside = !inside;
      }
    }
  }
  return inside;
}

/** Ids of visible points whose projected positions fall inside the
 * screen-space polygon. Fewer than 3 vertices is a degenerate lasso and
 * selects nothing. */
export function selectRegion(state: ViewState, polygon: ScreenPoint[]): Set<string> {
  const selected = new Set<string>();
  if (polygon.length < 3) {
    return selected;
  }
  const points = state.bundle.points;
  for (const i of visibleIndices(state)) {
    const s = worldToScreen(state.camera, state.viewport, points[i].x, points[i].y);
    if (pointInPolygon(polygon, s)) {
      selected.add(points[i].id);
    }
  }
  return selected;
}
