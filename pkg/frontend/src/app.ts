/**
 * Controller: owns the view state, orchestrates fetches, and repaints.
 *
 * Shock state lives entirely client-side; the service is never
 * mutated, so a refresh resets the scenario.  In-flight requests carry
 * a token and stale responses are dropped (last write wins), so rapid
 * toggling stays consistent.
 */

import { Api, TestQuery } from './api.js';
import { MapView, renderLegend, showBanner, showToast } from './render.js';
import {
  DataBundle,
  ViewState,
  initialState,
  paint,
  selectLayer,
  selectTestMethod,
  selectTimestamp,
  toggleSite,
} from './state.js';
import { Layer, ServiceError, TestMethod } from './types.js';

export interface AppElements {
  map: HTMLElement;
  legend: HTMLElement;
  banner: HTMLElement;
  toast: HTMLElement;
  siteList: HTMLElement;
  status: HTMLElement;
}

export interface TestWindow {
  from: string;
  to: string;
  slot: string;
}

export class ShockExplorerApp {
  state: ViewState;
  data: DataBundle = { grid: null, ar: null, shock: null, test: null };
  view: MapView | null = null;
  private token = 0;

  constructor(
    private readonly elements: AppElements,
    private readonly api: Api,
    timestamp: string,
    private readonly testWindow: TestWindow,
  ) {
    this.state = initialState(timestamp);
  }

  /** Fetch the base map and the first accessibility layer. */
  async start(): Promise<void> {
    showBanner(this.elements.banner, null);
    try {
      this.data.grid = await this.api.grid();
      this.data.ar = await this.api.ar(this.state.timestamp);
    } catch (error) {
      showBanner(this.elements.banner, `service unreachable: ${describe(error)}`);
      return;
    }
    this.view = new MapView(this.elements.map, this.data.grid, (siteId) => {
      void this.handleToggle(siteId);
    });
    this.renderSiteList();
    this.repaint();
  }

  repaint(): void {
    if (!this.view) return;
    const painting = paint(this.state, this.data);
    this.view.apply(painting);
    renderLegend(this.elements.legend, painting);
    this.renderStatus();
    this.syncSiteList();
  }

  /** Toggle a site in or out of the saturated set (involution). */
  async handleToggle(siteId: string): Promise<void> {
    const next = toggleSite(this.state, siteId);
    const token = ++this.token;
    if (next.toggled.size === 0) {
      this.state = next;
      this.data.shock = null;
      this.repaint();
      return;
    }
    try {
      const shock = await this.api.shock(next.timestamp, [...next.toggled].sort());
      if (token !== this.token) return; // superseded by a newer toggle
      this.state = next;
      this.data.shock = shock;
      this.repaint();
    } catch (error) {
      if (token !== this.token) return;
      showToast(this.elements.toast, `shock request failed: ${describe(error)}`);
    }
  }

  async handleLayer(layer: Layer): Promise<void> {
    this.state = selectLayer(this.state, layer);
    if (layer === 'test_flags' && this.data.test === null) {
      await this.fetchTestReport();
    }
    this.repaint();
  }

  async handleTestMethod(method: TestMethod): Promise<void> {
    this.state = selectTestMethod(this.state, method);
    this.repaint();
  }

  /** Switch instants; toggled shocks persist across timestamps. */
  async handleTimestamp(timestamp: string): Promise<void> {
    const next = selectTimestamp(this.state, timestamp);
    const token = ++this.token;
    try {
      const ar = await this.api.ar(timestamp);
      const shock =
        next.toggled.size > 0
          ? await this.api.shock(timestamp, [...next.toggled].sort())
          : null;
      if (token !== this.token) return;
      this.state = next;
      this.data.ar = ar;
      this.data.shock = shock;
      this.repaint();
    } catch (error) {
      if (token !== this.token) return;
      if (error instanceof ServiceError && error.status === 409) {
        showToast(this.elements.toast, 'insufficient data at this time');
      } else {
        showToast(this.elements.toast, `timestamp change failed: ${describe(error)}`);
      }
    }
  }

  private async fetchTestReport(): Promise<void> {
    const query: TestQuery = { ...this.testWindow, method: 'bh' };
    try {
      this.data.test = await this.api.test(query);
    } catch (error) {
      if (error instanceof ServiceError && error.status === 409) {
        showToast(this.elements.toast, 'insufficient data at this time');
      } else {
        showToast(this.elements.toast, `test report failed: ${describe(error)}`);
      }
    }
  }

  private renderSiteList(): void {
    const sites = this.data.grid?.sites.features ?? [];
    this.elements.siteList.replaceChildren(
      ...sites.map((site) => {
        const id = site.properties.site_id;
        const item = document.createElement('label');
        item.className = 'site-item';
        const box = document.createElement('input');
        box.type = 'checkbox';
        box.setAttribute('data-site-toggle', id);
        box.addEventListener('change', () => void this.handleToggle(id));
        const text = document.createElement('span');
        text.textContent = site.properties.label || id;
        item.append(box, text);
        return item;
      }),
    );
  }

  private syncSiteList(): void {
    for (const box of this.elements.siteList.querySelectorAll('input[data-site-toggle]')) {
      const input = box as HTMLInputElement;
      input.checked = this.state.toggled.has(input.getAttribute('data-site-toggle') ?? '');
    }
  }

  private renderStatus(): void {
    const saturated = [...this.state.toggled].sort().join(', ') || 'none';
    const ts = this.data.ar?.parameters.timestamp ?? this.state.timestamp;
    this.elements.status.textContent =
      `layer: ${this.state.layer} | data instant: ${ts} | saturated: ${saturated}`;
  }
}

function describe(error: unknown): string {
  if (error instanceof ServiceError) return `${error.status} ${error.message}`;
  return error instanceof Error ? error.message : String(error);
}
