/** Map bundle schema and validation. The bundle file is the only contract
 * between the pipeline and this viewer. */

export interface BundlePoint {
  id: string;
  x: number;
  y: number;
  institution: string;
  keywords: string[];
  snippet: string;
}

export interface SchemeDescriptor {
  kind: 'institution' | 'keyword';
  name: string;
  keywords?: string[];
}

export interface MapBundle {
  points: BundlePoint[];
  schemes: SchemeDescriptor[];
  config: Record<string, unknown>;
  metrics: Record<string, Record<string, number>>;
  created: string;
}

export const UNLABELED = 'unlabeled';

export class BundleFormatError extends Error {
  /** Dotted path of the first field that failed validation. */
  readonly field: string;

  constructor(field: string, message: string) {
    super(`${field}: ${message}`);
    this.field = field;
    this.name = 'BundleFormatError';
  }
}

function requireKey(obj: Record<string, unknown>, key: string, where: string): unknown {
  if (!(key in obj)) {
    throw new BundleFormatError(where ? `${where}.${key}` : key, 'missing field');
  }
  return obj[key];
}

function asObject(value: unknown, where: string): Record<string, unknown> {
  if (typeof value !== 'object' || value === null || Array.isArray(value)) {
    throw new BundleFormatError(where, 'expected an object');
  }
  return value as Record<string, unknown>;
}

function asArray(value: unknown, where: string): unknown[] {
  if (!Array.isArray(value)) {
    throw new BundleFormatError(where, 'expected an array');
  }
  return value;
}

function asString(value: unknown, where: string): string {
  if (typeof value !== 'string') {
    throw new BundleFormatError(where, 'expected a string');
  }
  return value;
}

function asFiniteNumber(value: unknown, where: string): number {
  if (typeof value !== 'number' || !Number.isFinite(value)) {
    throw new BundleFormatError(where, 'expected a finite number');
  }
  return value;
}

function parsePoint(value: unknown, where: string): BundlePoint {
  const obj = asObject(value, where);
  const keywords = asArray(requireKey(obj, 'keywords', where), `${where}.keywords`)
    .map((kw, i) => asString(kw, `${where}.keywords[${i}]`));
  return {
    id: asString(requireKey(obj, 'id', where), `${where}.id`),
    x: asFiniteNumber(requireKey(obj, 'x', where), `${where}.x`),
    y: asFiniteNumber(requireKey(obj, 'y', where), `${where}.y`),
    institution: asString(requireKey(obj, 'institution', where), `${where}.institution`),
    keywords,
    snippet: asString(requireKey(obj, 'snippet', where), `${where}.snippet`),
  };
}

function parseScheme(value: unknown, where: string): SchemeDescriptor {
  const obj = asObject(value, where);
  const kind = asString(requireKey(obj, 'kind', where), `${where}.kind`);
  if (kind !== 'institution' && kind !== 'keyword') {
    throw new BundleFormatError(`${where}.kind`, `unknown scheme kind '${kind}'`);
  }
  const scheme: SchemeDescriptor = {
    kind,
    name: asString(requireKey(obj, 'name', where), `${where}.name`),
  };
  if (kind === 'keyword') {
    scheme.keywords = asArray(requireKey(obj, 'keywords', where), `${where}.keywords`)
      .map((kw, i) => asString(kw, `${where}.keywords[${i}]`));
  }
  return scheme;
}

/** Validate a parsed JSON value as a MapBundle; the error names the first
 * offending field. */
export function parseBundle(raw: unknown): MapBundle {
  const obj = asObject(raw, 'bundle');
  const points = asArray(requireKey(obj, 'points', ''), 'points')
    .map((pt, i) => parsePoint(pt, `points[${i}]`));
  const schemes = asArray(requireKey(obj, 'schemes', ''), 'schemes')
    .map((s, i) => parseScheme(s, `schemes[${i}]`));
  if (schemes.length === 0) {
    throw new BundleFormatError('schemes', 'at least one label scheme required');
  }
  const seen = new Set<string>();
  for (let i = 0; i < points.length; i++) {
    if (seen.has(points[i].id)) {
      throw new BundleFormatError(`points[${i}].id`, `duplicate id '${points[i].id}'`);
    }
    seen.add(points[i].id);
  }
  return {
    points,
    schemes,
    config: asObject(requireKey(obj, 'config', ''), 'config'),
    metrics: asObject(requireKey(obj, 'metrics', ''), 'metrics') as
      Record<string, Record<string, number>>,
    created: asString(requireKey(obj, 'created', ''), 'created'),
  };
}

/** Label of a point under a scheme: institution name, or the first listed
 * keyword the point carries, or "unlabeled". Mirrors the pipeline's rule. */
export function labelOf(point: BundlePoint, scheme: SchemeDescriptor): string {
  if (scheme.kind === 'institution') {
    return point.institution;
  }
  const carried = new Set(point.keywords);
  for (const kw of scheme.keywords ?? []) {
    if (carried.has(kw)) {
      return kw;
    }
  }
  return UNLABELED;
}
