/** Pan/zoom camera: an affine map between world (embedding) coordinates
 * and screen pixels. World y grows upward, screen y grows downward. */

export interface Viewport {
  width: number;
  height: number;
}

export interface Camera {
  /** world units -> pixels; always > 0 */
  scale: number;
  /** world point shown at the viewport center */
  centerX: number;
  centerY: number;
}

export interface ScreenPoint {
  x: number;
  y: number;
}

export function fitToBounds(
  xs: number[], ys: number[], viewport: Viewport, padding = 0.9,
): Camera {
  if (xs.length === 0) {
    return { scale: 1, centerX: 0, centerY: 0 };
  }
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const extentX = xMax - xMin;
  const extentY = yMax - yMin;
  const candidates: number[] = [];
  if (extentX > 0) candidates.push(viewport.width / extentX);
  if (extentY > 0) candidates.push(viewport.height / extentY);
  const scale = candidates.length ? Math.min(...candidates) * padding : 1;
  return { scale, centerX: (xMin + xMax) / 2, centerY: (yMin + yMax) / 2 };
}

export function worldToScreen(
  camera: Camera, viewport: Viewport, wx: number, wy: number,
): ScreenPoint {
  return {
    x: viewport.width / 2 + (wx - camera.centerX) * camera.scale,
    y: viewport.height / 2 - (wy - camera.centerY) * camera.scale,
  };
}

export function screenToWorld(
  camera: Camera, viewport: Viewport, sx: number, sy: number,
): ScreenPoint {
  return {
    x: camera.centerX + (sx - viewport.width / 2) / camera.scale,
    y: camera.centerY - (sy - viewport.height / 2) / camera.scale,
  };
}

/** Shift the view by a screen-space delta (e.g. a mouse drag). */
export function pan(camera: Camera, dxPx: number, dyPx: number): Camera {
  return {
    scale: camera.scale,
    centerX: camera.centerX - dxPx / camera.scale,
    centerY: camera.centerY + dyPx / camera.scale,
  };
}

/** Zoom by a factor, keeping the world point under the anchor pixel fixed. */
export function zoom(
  camera: Camera, viewport: Viewport, factor: number, anchor: ScreenPoint,
): Camera {
  if (factor <= 0) {
    throw new Error('zoom factor must be positive');
  }
  const fixed = screenToWorld(camera, viewport, anchor.x, anchor.y);
  const scale = camera.scale * factor;
  return {
    scale,
    centerX: fixed.x - (anchor.x - viewport.width / 2) / scale,
    centerY: fixed.y + (anchor.y - viewport.height / 2) / scale,
  };
}
