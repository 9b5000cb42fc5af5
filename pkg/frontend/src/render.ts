/**
 * SVG renderer: builds the map once from the grid payload, then
 * repaints fills from a Painting on every state change.
 */

import { Painting } from './state.js';
import { CellFeature, GridPayload, SiteFeature } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

interface Extent {
  minX: number;
  minY: number;
  maxX: number;
  maxY: number;
}

function extentOf(grid: GridPayload): Extent {
  const extent: Extent = { minX: Infinity, minY: Infinity, maxX: -Infinity, maxY: -Infinity };
  for (const cell of grid.cells.features) {
    for (const [x, y] of cell.geometry.coordinates[0] ?? []) {
      extent.minX = Math.min(extent.minX, x!);
      extent.maxX = Math.max(extent.maxX, x!);
      extent.minY = Math.min(extent.minY, y!);
      extent.maxY = Math.max(extent.maxY, y!);
    }
  }
  return extent;
}

/** Map data coordinates to SVG space (y axis flipped: north is up). */
function projector(extent: Extent, width: number, height: number) {
  const spanX = extent.maxX - extent.minX || 1;
  const spanY = extent.maxY - extent.minY || 1;
  return (x: number, y: number): [number, number] => [
    ((x - extent.minX) / spanX) * width,
    height - ((y - extent.minY) / spanY) * height,
  ];
}

export class MapView {
  private cellNodes = new Map<string, SVGPathElement>();
  private siteNodes = new Map<string, SVGCircleElement>();
  readonly width = 720;
  readonly height: number;
  private readonly svg: SVGSVGElement;

  constructor(
    container: HTMLElement,
    grid: GridPayload,
    onSiteClick: (siteId: string) => void,
  ) {
    const extent = extentOf(grid);
    const aspect = (extent.maxY - extent.minY) / (extent.maxX - extent.minX || 1);
    this.height = Math.round(this.width * (aspect || 1));
    const project = projector(extent, this.width, this.height);

    this.svg = document.createElementNS(SVG_NS, 'svg');
    this.svg.setAttribute('viewBox', `0 0 ${this.width} ${this.height}`);
    this.svg.classList.add('map');
    container.replaceChildren(this.svg);

    for (const cell of grid.cells.features) {
      this.svg.appendChild(this.cellNode(cell, project));
    }
    for (const site of grid.sites.features) {
      this.svg.appendChild(this.siteNode(site, project, onSiteClick));
    }
  }

  private cellNode(cell: CellFeature, project: (x: number, y: number) => [number, number]): SVGPathElement {
    const path = document.createElementNS(SVG_NS, 'path');
    const ring = cell.geometry.coordinates[0] ?? [];
    const d = ring
      .map(([x, y], i) => {
        const [px, py] = project(x!, y!);
        return `${i === 0 ? 'M' : 'L'}${px.toFixed(2)},${py.toFixed(2)}`;
      })
      .join(' ');
    path.setAttribute('d', `${d} Z`);
    path.setAttribute('data-cell-id', cell.properties.cell_id);
    path.classList.add('cell');
    const title = document.createElementNS(SVG_NS, 'title');
    title.textContent = cell.properties.cell_id;
    path.appendChild(title);
    this.cellNodes.set(cell.properties.cell_id, path);
    return path;
  }

  private siteNode(
    site: SiteFeature,
    project: (x: number, y: number) => [number, number],
    onClick: (siteId: string) => void,
  ): SVGCircleElement {
    const circle = document.createElementNS(SVG_NS, 'circle');
    const [x, y] = site.geometry.coordinates;
    const [px, py] = project(x!, y!);
    circle.setAttribute('cx', px.toFixed(2));
    circle.setAttribute('cy', py.toFixed(2));
    circle.setAttribute('r', '9');
    circle.setAttribute('data-site-id', site.properties.site_id);
    circle.classList.add('site');
    circle.addEventListener('click', () => onClick(site.properties.site_id));
    const title = document.createElementNS(SVG_NS, 'title');
    title.textContent = site.properties.label || site.properties.site_id;
    circle.appendChild(title);
    this.siteNodes.set(site.properties.site_id, circle);
    return circle;
  }

  apply(painting: Painting): void {
    for (const [cellId, node] of this.cellNodes) {
      node.setAttribute('fill', painting.cellFills.get(cellId) ?? '#e8e8e8');
    }
    for (const [siteId, node] of this.siteNodes) {
      node.setAttribute('fill', painting.siteFills.get(siteId) ?? '#e8e8e8');
      node.classList.toggle('saturated', painting.toggledSites.has(siteId));
    }
  }

  /** Serialized fills: lets tests compare two renderings structurally. */
  snapshot(): Record<string, string> {
    const out: Record<string, string> = {};
    for (const [cellId, node] of this.cellNodes) {
      out[`cell:${cellId}`] = node.getAttribute('fill') ?? '';
    }
    for (const [siteId, node] of this.siteNodes) {
      out[`site:${siteId}`] = `${node.getAttribute('fill') ?? ''}|${node.classList.contains('saturated')}`;
    }
    return out;
  }

  cellFill(cellId: string): string {
    return this.cellNodes.get(cellId)?.getAttribute('fill') ?? '';
  }
}

export function renderLegend(element: HTMLElement, painting: Painting): void {
  const { label, bounds } = painting.legend;
  element.textContent = bounds
    ? `${label}: ${bounds.min.toPrecision(3)} to ${bounds.max.toPrecision(3)}`
    : label;
}

export function showBanner(element: HTMLElement, message: string | null): void {
  element.textContent = message ?? '';
  element.classList.toggle('hidden', message === null);
}

export function showToast(element: HTMLElement, message: string): void {
  element.textContent = message;
  element.classList.remove('hidden');
  window.setTimeout(() => element.classList.add('hidden'), 4000);
}
