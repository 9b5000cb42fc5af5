/**
 * Wire types for the accessibility service payloads.
 *
 * The UI is a pure view over these documents: every number it renders
 * comes straight from a payload field, never from client-side
 * accessibility arithmetic.
 */

export interface CellFeature {
  type: 'Feature';
  geometry: { type: 'Polygon'; coordinates: number[][][] };
  properties: {
    cell_id: string;
    population: number;
    accessibility?: number;
    [key: string]: unknown;
  };
}

export interface SiteFeature {
  type: 'Feature';
  geometry: { type: 'Point'; coordinates: number[] };
  properties: {
    site_id: string;
    label: string;
    reachability?: number;
    [key: string]: unknown;
  };
}

export interface FeatureCollection<F> {
  type: 'FeatureCollection';
  coordinate_space: 'geographic' | 'planar_km';
  features: F[];
}

export interface Parameters {
  gamma: number;
  tau_km: number;
  timestamp?: string | null;
  [key: string]: unknown;
}

export interface GridPayload {
  parameters: Parameters;
  cells: FeatureCollection<CellFeature>;
  sites: FeatureCollection<SiteFeature>;
}

export interface ArPayload {
  parameters: Parameters;
  cells: FeatureCollection<CellFeature>;
  sites: FeatureCollection<SiteFeature>;
}

export interface ShockCell {
  cell_id: string;
  accessibility: number;
  shocked_accessibility: number;
  impact: number;
}

export interface ShockPayload {
  parameters: Parameters;
  saturated_sites: string[];
  cells: ShockCell[];
  regression: { intercept: number; slope: number; r_squared: number } | null;
  reachability: Record<string, number>;
}

export interface TestCell {
  cell_id: string;
  t: number;
  df: number;
  p: number;
  adjusted: Record<string, number>;
  rejected: Record<string, boolean>;
  rejected_selected: boolean;
}

export interface TestPayload {
  parameters: Record<string, unknown>;
  method: string;
  m: number;
  rejection_counts: Record<string, number>;
  cells: TestCell[];
  skipped: [string, string][];
}

export type Layer = 'accessibility' | 'reachability' | 'impact' | 'test_flags';
export type TestMethod = 'none' | 'bonferroni' | 'bh';

export class ServiceError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}
