/** Deterministic label colors, identical to the SVG renderer's rule:
 * distinct labels sorted, colors cycled from a fixed 10-color palette,
 * "unlabeled" always gray. */

import { UNLABELED } from './types.js';

export const PALETTE = [
  '#1f77b4', '#ff7f0e', '#2ca02c', '#d62728', '#9467bd',
  '#8c564b', '#e377c2', '#7f7f7f', '#bcbd22', '#17becf',
] as const;

export const UNLABELED_COLOR = '#999999';

export function colorAssignment(labels: Iterable<string>): Map<string, string> {
  const all = [...labels];
  const distinct = [...new Set(all.filter((lab) => lab !== UNLABELED))].sort();
  const colors = new Map<string, string>();
  distinct.forEach((lab, i) => colors.set(lab, PALETTE[i % PALETTE.length]));
  if (all.includes(UNLABELED)) {
    colors.set(UNLABELED, UNLABELED_COLOR);
  }
  return colors;
}
