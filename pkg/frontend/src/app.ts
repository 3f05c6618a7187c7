/** DOM wiring for the viewer: file loading, canvas interaction (drag to
 * pan, wheel to zoom, shift-drag to lasso), legend, tooltip and the
 * selection side panel. All map logic lives in the pure modules. */

import { pan, zoom, ScreenPoint } from './camera.js';
import { hitTest } from './hittest.js';
import { selectRegion } from './lasso.js';
import { renderScene } from './render.js';
import {
  ViewState,
  annotateSelection,
  exportSelection,
  legend,
  loadBundle,
  recolor,
  setSelection,
  toggleLabel,
} from './state.js';
import { BundleFormatError, labelOf } from './types.js';

let state: ViewState | null = null;
let lassoPath: ScreenPoint[] | null = null;
let frameRequested = false;

const canvas = document.getElementById('map') as HTMLCanvasElement;
const ctx = canvas.getContext('2d')!;
const fileInput = document.getElementById('bundle-file') as HTMLInputElement;
const schemeSelect = document.getElementById('scheme') as HTMLSelectElement;
const legendBox = document.getElementById('legend')!;
const tooltip = document.getElementById('tooltip')!;
const statusBox = document.getElementById('status')!;
const selectionBox = document.getElementById('selection-list')!;
const exportButton = document.getElementById('export-selection') as HTMLButtonElement;
const noteInput = document.getElementById('note') as HTMLTextAreaElement;
const noteButton = document.getElementById('save-note') as HTMLButtonElement;
const notesBox = document.getElementById('notes')!;

function scheduleFrame(): void {
  if (frameRequested) {
    return;
  }
  frameRequested = true;
  requestAnimationFrame(() => {
    frameRequested = false;
    if (state) {
      renderScene(state, ctx as never, lassoPath);
    } else {
      ctx.clearRect(0, 0, canvas.width, canvas.height);
    }
  });
}

function refreshLegend(): void {
  if (!state) {
    return;
  }
  legendBox.innerHTML = '';
  for (const entry of legend(state)) {
    const row = document.createElement('div');
    row.className = 'legend-row' + (entry.visible ? '' : ' hidden-label');
    const swatch = document.createElement('span');
    swatch.className = 'swatch';
    swatch.style.background = entry.color;
    const text = document.createElement('span');
    text.textContent = `${entry.label} (${entry.count})`;
    row.append(swatch, text);
    row.addEventListener('click', () => {
      if (state) {
        state = toggleLabel(state, entry.label);
        refreshLegend();
        scheduleFrame();
      }
    });
    legendBox.append(row);
  }
}

function refreshSelection(): void {
  if (!state) {
    return;
  }
  const points = state.bundle.points.filter((pt) => state!.selection.has(pt.id));
  selectionBox.innerHTML = '';
  const header = document.createElement('div');
  header.textContent = `${points.length} selected`;
  selectionBox.append(header);
  const scheme = state.bundle.schemes.find((s) => s.name === state!.activeScheme)!;
  for (const pt of points.slice(0, 200)) {
    const row = document.createElement('div');
    row.className = 'selection-row';
    row.textContent = `${pt.id} [${labelOf(pt, scheme)}] ${pt.snippet.slice(0, 80)}`;
    selectionBox.append(row);
  }
  if (points.length > 200) {
    const more = document.createElement('div');
    more.textContent = `… and ${points.length - 200} more`;
    selectionBox.append(more);
  }
}

function refreshNotes(): void {
  if (!state) {
    return;
  }
  notesBox.innerHTML = '';
  for (const [noteId, entry] of state.annotations) {
    const row = document.createElement('div');
    row.className = 'note-row';
    row.textContent = `${noteId} (${entry.ids.length} docs): ${entry.note}`;
    notesBox.append(row);
  }
}

fileInput.addEventListener('change', async () => {
  const file = fileInput.files?.[0];
  if (!file) {
    return;
  }
  try {
    const parsed: unknown = JSON.parse(await file.text());
    state = loadBundle(parsed, { width: canvas.width, height: canvas.height });
    schemeSelect.innerHTML = '';
    for (const scheme of state.bundle.schemes) {
      const option = document.createElement('option');
      option.value = scheme.name;
      option.textContent = scheme.name;
      schemeSelect.append(option);
    }
    schemeSelect.value = state.activeScheme;
    statusBox.textContent = state.bundle.points.length
      ? `${state.bundle.points.length} documents, created ${state.bundle.created}`
      : 'bundle has no points';
    refreshLegend();
    refreshSelection();
    refreshNotes();
    scheduleFrame();
  } catch (error) {
    state = null;
    statusBox.textContent = error instanceof BundleFormatError
      ? `bundle rejected at ${error.field}: ${error.message}`
      : `could not read bundle: ${String(error)}`;
    scheduleFrame();
  }
});

schemeSelect.addEventListener('change', () => {
  if (state) {
    state = recolor(state, schemeSelect.value);
    refreshLegend();
    refreshSelection();
    scheduleFrame();
  }
});

let dragging = false;
let lastPointer: ScreenPoint | null = null;

function cursorOf(event: MouseEvent): ScreenPoint {
  const rect = canvas.getBoundingClientRect();
  return { x: event.clientX - rect.left, y: event.clientY - rect.top };
}

canvas.addEventListener('mousedown', (event) => {
  if (!state) {
    return;
  }
  if (event.shiftKey) {
    lassoPath = [cursorOf(event)];
  } else {
    dragging = true;
    lastPointer = cursorOf(event);
  }
});

canvas.addEventListener('mousemove', (event) => {
  if (!state) {
    return;
  }
  const cursor = cursorOf(event);
  if (lassoPath) {
    lassoPath.push(cursor);
    scheduleFrame();
    return;
  }
  if (dragging && lastPointer) {
    state = { ...state, camera: pan(state.camera, cursor.x - lastPointer.x, cursor.y - lastPointer.y) };
    lastPointer = cursor;
    scheduleFrame();
    return;
  }
  const hovered = hitTest(state, cursor);
  if (hovered !== state.hoveredId) {
    state = { ...state, hoveredId: hovered };
    if (hovered) {
      const pt = state.bundle.points.find((p) => p.id === hovered)!;
      const scheme = state.bundle.schemes.find((s) => s.name === state!.activeScheme)!;
      tooltip.textContent =
        `${pt.id} [${labelOf(pt, scheme)}] keywords: ${pt.keywords.join(', ') || '-'}\n${pt.snippet}`;
    } else {
      tooltip.textContent = '';
    }
    scheduleFrame();
  }
});

window.addEventListener('mouseup', () => {
  if (lassoPath && state) {
    state = setSelection(state, selectRegion(state, lassoPath));
    lassoPath = null;
    refreshSelection();
    scheduleFrame();
  }
  dragging = false;
  lastPointer = null;
});

canvas.addEventListener('wheel', (event) => {
  if (!state) {
    return;
  }
  event.preventDefault();
  const factor = event.deltaY < 0 ? 1.15 : 1 / 1.15;
  state = {
    ...state,
    camera: zoom(state.camera, state.viewport, factor, cursorOf(event as MouseEvent)),
  };
  scheduleFrame();
});

exportButton.addEventListener('click', () => {
  if (!state || state.selection.size === 0) {
    return;
  }
  const blob = new Blob([exportSelection(state) + '\n'], { type: 'text/plain' });
  const link = document.createElement('a');
  link.href = URL.createObjectURL(blob);
  link.download = 'selection-ids.txt';
  link.click();
  URL.revokeObjectURL(link.href);
});

noteButton.addEventListener('click', () => {
  if (!state || !noteInput.value.trim() || state.selection.size === 0) {
    return;
  }
  const noteId = `note-${state.annotations.size + 1}`;
  state = annotateSelection(state, noteId, noteInput.value.trim());
  noteInput.value = '';
  refreshNotes();
});

scheduleFrame();
