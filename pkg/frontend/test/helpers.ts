import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import type { Viewport } from '../src/camera.js';
import type { DrawSurface } from '../src/render.js';

const here = dirname(fileURLToPath(import.meta.url));

export const VIEWPORT: Viewport = { width: 900, height: 640 };

export function loadFixture(name: string): unknown {
  return JSON.parse(readFileSync(join(here, 'fixtures', name), 'utf-8'));
}

/** Counts draw calls; a stand-in for CanvasRenderingContext2D. */
export class MockSurface implements DrawSurface {
  fillStyle = '';
  strokeStyle = '';
  lineWidth = 1;
  globalAlpha = 1;
  filledArcs = 0;
  strokedPaths = 0;
  clearCalls = 0;
  usedFillColors = new Set<string>();

  private pendingArc = false;

  clearRect(): void {
    this.clearCalls++;
  }

  fillRect(): void {}

  beginPath(): void {
    this.pendingArc = false;
  }

  arc(): void {
    this.pendingArc = true;
  }

  closePath(): void {}

  moveTo(): void {}

  lineTo(): void {}

  fill(): void {
    if (this.pendingArc) {
      this.filledArcs++;
      this.usedFillColors.add(this.fillStyle);
    }
  }

  stroke(): void {
    this.strokedPaths++;
  }
}

export function tinyBundle(points: Array<Partial<Record<string, unknown>>> = []): unknown {
  return {
    points: points.map((pt, i) => ({
      id: `d${i}`,
      x: 0,
      y: 0,
      institution: 'CommonCourt',
      keywords: [],
      snippet: 'snippet',
      ...pt,
    })),
    schemes: [
      { kind: 'institution', name: 'institution' },
      { kind: 'keyword', name: 'keyword', keywords: ['pension', 'lease'] },
    ],
    config: { method: 'tsne' },
    metrics: {},
    created: '2015-06-01T12:00:00Z',
  };
}
