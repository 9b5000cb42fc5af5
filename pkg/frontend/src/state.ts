/**
 * View state and the pure painting derivation.
 *
 * The rendered map is a function of (timestamp, toggled sites, layer)
 * plus the service payloads fetched for that state: `paint` performs
 * no accessibility arithmetic, it only maps payload values through the
 * layer's color scale.
 */

import {
  ACCEPTED_FILL,
  NEUTRAL_FILL,
  REJECTED_FILL,
  ScaleBounds,
  blueScale,
  boundsOf,
  greenScale,
  redScale,
} from './color.js';
import { ArPayload, GridPayload, Layer, ShockPayload, TestMethod, TestPayload } from './types.js';

export interface ViewState {
  timestamp: string;
  toggled: ReadonlySet<string>;
  layer: Layer;
  testMethod: TestMethod;
}

export interface DataBundle {
  grid: GridPayload | null;
  ar: ArPayload | null;
  shock: ShockPayload | null;
  test: TestPayload | null;
}

export function initialState(timestamp: string): ViewState {
  return { timestamp, toggled: new Set(), layer: 'accessibility', testMethod: 'none' };
}

/** Toggling twice returns the original set (involution). */
export function toggleSite(state: ViewState, siteId: string): ViewState {
  const toggled = new Set(state.toggled);
  if (toggled.has(siteId)) {
    toggled.delete(siteId);
  } else {
    toggled.add(siteId);
  }
  return { ...state, toggled };
}

export function selectLayer(state: ViewState, layer: Layer): ViewState {
  return { ...state, layer };
}

export function selectTimestamp(state: ViewState, timestamp: string): ViewState {
  return { ...state, timestamp };
}

export function selectTestMethod(state: ViewState, testMethod: TestMethod): ViewState {
  return { ...state, testMethod };
}

export interface Painting {
  cellFills: Map<string, string>;
  siteFills: Map<string, string>;
  toggledSites: ReadonlySet<string>;
  legend: { label: string; bounds: ScaleBounds | null };
}

function shockActive(state: ViewState, data: DataBundle): ShockPayload | null {
  return state.toggled.size > 0 ? data.shock : null;
}

export function paint(state: ViewState, data: DataBundle): Painting {
  const cellFills = new Map<string, string>();
  const siteFills = new Map<string, string>();
  const cells = data.grid?.cells.features ?? [];
  const sites = data.grid?.sites.features ?? [];
  for (const cell of cells) cellFills.set(cell.properties.cell_id, NEUTRAL_FILL);
  for (const site of sites) siteFills.set(site.properties.site_id, NEUTRAL_FILL);

  let legend: Painting['legend'] = { label: 'no data', bounds: null };
  const shock = shockActive(state, data);

  if (state.layer === 'accessibility') {
    const values = new Map<string, number>();
    if (shock) {
      for (const cell of shock.cells) values.set(cell.cell_id, cell.shocked_accessibility);
      legend = { label: 'post-shock accessibility', bounds: boundsOf([...values.values()]) };
    } else if (data.ar) {
      for (const cell of data.ar.cells.features) {
        values.set(cell.properties.cell_id, cell.properties.accessibility ?? NaN);
      }
      legend = { label: 'accessibility', bounds: boundsOf([...values.values()]) };
    }
    for (const [cellId, value] of values) cellFills.set(cellId, blueScale(value, legend.bounds));
  } else if (state.layer === 'impact') {
    if (shock) {
      const values = new Map(shock.cells.map((c) => [c.cell_id, c.impact]));
      legend = { label: 'impact (residual)', bounds: boundsOf([...values.values()]) };
      for (const [cellId, value] of values) cellFills.set(cellId, redScale(value, legend.bounds));
    } else {
      legend = { label: 'impact: toggle a site', bounds: null };
    }
  } else if (state.layer === 'test_flags') {
    if (data.test) {
      for (const cell of data.test.cells) {
        const rejected = cell.rejected[state.testMethod] ?? false;
        cellFills.set(cell.cell_id, rejected ? REJECTED_FILL : ACCEPTED_FILL);
      }
      legend = { label: `weekend drop rejected (${state.testMethod})`, bounds: null };
    } else {
      legend = { label: 'test flags: loading report', bounds: null };
    }
  }

  // Site markers always carry reachability (green), taken verbatim
  // from the base payload for the selected timestamp.
  if (data.ar) {
    const reach = new Map<string, number>();
    for (const site of data.ar.sites.features) {
      reach.set(site.properties.site_id, site.properties.reachability ?? NaN);
    }
    const siteBounds = boundsOf([...reach.values()]);
    for (const [siteId, value] of reach) siteFills.set(siteId, greenScale(value, siteBounds));
    if (state.layer === 'reachability') {
      legend = { label: 'reachability', bounds: siteBounds };
      for (const cellId of cellFills.keys()) cellFills.set(cellId, NEUTRAL_FILL);
    }
  }

  return { cellFills, siteFills, toggledSites: state.toggled, legend };
}
