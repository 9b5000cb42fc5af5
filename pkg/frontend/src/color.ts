/**
 * Color scales for the choropleth layers.
 *
 * Blue encodes cell accessibility, green encodes site reachability,
 * red encodes impact severity (hardest-hit cells are darkest).  Bounds
 * always come from the current payload, never from constants, so any
 * synthetic city renders on a sensible scale.  A degenerate value
 * range (min == max) paints everything neutral.
 */

export interface ScaleBounds {
  min: number;
  max: number;
}

export const NEUTRAL_FILL = '#e8e8e8';

export function boundsOf(values: number[]): ScaleBounds | null {
  const finite = values.filter((v) => Number.isFinite(v));
  if (finite.length === 0) return null;
  const min = Math.min(...finite);
  const max = Math.max(...finite);
  if (!(min < max)) return null;
  return { min, max };
}

function unit(value: number, bounds: ScaleBounds): number {
  const t = (value - bounds.min) / (bounds.max - bounds.min);
  return Math.max(0, Math.min(1, t));
}

function ramp(t: number, from: [number, number, number], to: [number, number, number]): string {
  const channel = (i: number) => Math.round(from[i]! + (to[i]! - from[i]!) * t);
  return `rgb(${channel(0)}, ${channel(1)}, ${channel(2)})`;
}

/** Light to dark blue: the darker, the more accessible. */
export function blueScale(value: number, bounds: ScaleBounds | null): string {
  if (bounds === null) return NEUTRAL_FILL;
  return ramp(unit(value, bounds), [239, 243, 255], [8, 48, 107]);
}

/** Light to dark green: the darker, the more reachable. */
export function greenScale(value: number, bounds: ScaleBounds | null): string {
  if (bounds === null) return NEUTRAL_FILL;
  return ramp(unit(value, bounds), [229, 245, 224], [0, 68, 27]);
}

/**
 * Impact scale: most negative residual (hardest hit) renders darkest
 * red, the least affected end fades to near white.
 */
export function redScale(value: number, bounds: ScaleBounds | null): string {
  if (bounds === null) return NEUTRAL_FILL;
  return ramp(1 - unit(value, bounds), [255, 245, 240], [103, 0, 13]);
}

export const REJECTED_FILL = '#c81b1b';
export const ACCEPTED_FILL = '#f2f0ec';
