/** Viewer state and the operations the UI calls. Bundle data is
 * read-only: every operation returns a new state (or a new field value)
 * and never mutates point coordinates. */

import { Camera, Viewport, fitToBounds } from './camera.js';
import { colorAssignment } from './palette.js';
import { MapBundle, labelOf, parseBundle } from './types.js';

export interface ViewState {
  bundle: MapBundle;
  camera: Camera;
  viewport: Viewport;
  activeScheme: string;
  hiddenLabels: Set<string>;
  selection: Set<string>;
  hoveredId: string | null;
  /** free-text notes attached to selections, keyed by note id */
  annotations: Map<string, { note: string; ids: string[] }>;
}

/** Parse and validate bundle JSON, fit the camera, activate the first
 * listed scheme. */
export function loadBundle(raw: unknown, viewport: Viewport): ViewState {
  const bundle = parseBundle(raw);
  const camera = fitToBounds(
    bundle.points.map((pt) => pt.x),
    bundle.points.map((pt) => pt.y),
    viewport,
  );
  return {
    bundle,
    camera,
    viewport,
    activeScheme: bundle.schemes[0].name,
    hiddenLabels: new Set(),
    selection: new Set(),
    hoveredId: null,
    annotations: new Map(),
  };
}

export function activeScheme(state: ViewState) {
  const scheme = state.bundle.schemes.find((s) => s.name === state.activeScheme);
  if (!scheme) {
    throw new Error(`unknown scheme '${state.activeScheme}'`);
  }
  return scheme;
}

/** One label per point under the active scheme, in bundle order. */
export function pointLabels(state: ViewState): string[] {
  const scheme = activeScheme(state);
  return state.bundle.points.map((pt) => labelOf(pt, scheme));
}

/** Legend entries: label, color, point count and visibility. */
export function legend(state: ViewState) {
  const labels = pointLabels(state);
  const colors = colorAssignment(labels);
  const counts = new Map<string, number>();
  for (const lab of labels) {
    counts.set(lab, (counts.get(lab) ?? 0) + 1);
  }
  return [...colors.entries()].map(([label, color]) => ({
    label,
    color,
    count: counts.get(label) ?? 0,
    visible: !state.hiddenLabels.has(label),
  }));
}

/** Switch the coloring scheme. Coordinates, camera and selection are
 * untouched; visibility toggles reset because labels change meaning. */
export function recolor(state: ViewState, schemeName: string): ViewState {
  if (!state.bundle.schemes.some((s) => s.name === schemeName)) {
    throw new Error(`unknown scheme '${schemeName}'`);
  }
  return { ...state, activeScheme: schemeName, hiddenLabels: new Set() };
}

export function toggleLabel(state: ViewState, label: string): ViewState {
  const hidden = new Set(state.hiddenLabels);
  if (hidden.has(label)) {
    hidden.delete(label);
  } else {
    hidden.add(label);
  }
  return { ...state, hiddenLabels: hidden };
}

/** Indices of points currently visible under the label toggles. */
export function visibleIndices(state: ViewState): number[] {
  const labels = pointLabels(state);
  const out: number[] = [];
  for (let i = 0; i < labels.length; i++) {
    if (!state.hiddenLabels.has(labels[i])) {
      out.push(i);
    }
  }
  return out;
}

export function setSelection(state: ViewState, ids: Iterable<string>): ViewState {
  const known = new Set(state.bundle.points.map((pt) => pt.id));
  const selection = new Set<string>();
  for (const id of ids) {
    if (known.has(id)) {
      selection.add(id);
    }
  }
  return { ...state, selection };
}

/** Selection as newline-separated ids, in bundle order. */
export function exportSelection(state: ViewState): string {
  return state.bundle.points
    .filter((pt) => state.selection.has(pt.id))
    .map((pt) => pt.id)
    .join('\n');
}

export function annotateSelection(state: ViewState, noteId: string, note: string): ViewState {
  const annotations = new Map(state.annotations);
  annotations.set(noteId, { note, ids: [...state.selection].sort() });
  return { ...state, annotations };
}
