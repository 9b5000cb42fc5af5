/**
 * Bootstrap: wire the controls to a ShockExplorerApp against the
 * service that serves this bundle (same origin).
 */

import { ApiClient } from './api.js';
import { ShockExplorerApp } from './app.js';
import { Layer, TestMethod } from './types.js';

const DEFAULT_TIMESTAMP = '2022-03-16T08:00:00Z';
const DEFAULT_TEST_WINDOW = {
  from: '2022-03-07T00:00:00Z',
  to: '2022-03-21T00:00:00Z',
  slot: '19-20',
};

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function boot(): void {
  const app = new ShockExplorerApp(
    {
      map: byId('map'),
      legend: byId('legend'),
      banner: byId('banner'),
      toast: byId('toast'),
      siteList: byId('site-list'),
      status: byId('status'),
    },
    new ApiClient(''),
    DEFAULT_TIMESTAMP,
    DEFAULT_TEST_WINDOW,
  );

  const timestampInput = byId<HTMLInputElement>('timestamp');
  timestampInput.value = DEFAULT_TIMESTAMP;
  byId<HTMLButtonElement>('timestamp-go').addEventListener('click', () => {
    void app.handleTimestamp(timestampInput.value);
  });
  for (const button of document.querySelectorAll('button[data-preset]')) {
    button.addEventListener('click', () => {
      const ts = button.getAttribute('data-preset') ?? DEFAULT_TIMESTAMP;
      timestampInput.value = ts;
      void app.handleTimestamp(ts);
    });
  }
  for (const button of document.querySelectorAll('button[data-layer]')) {
    button.addEventListener('click', () => {
      void app.handleLayer(button.getAttribute('data-layer') as Layer);
    });
  }
  for (const button of document.querySelectorAll('button[data-method]')) {
    button.addEventListener('click', () => {
      void app.handleTestMethod(button.getAttribute('data-method') as TestMethod);
    });
  }
  byId<HTMLButtonElement>('retry').addEventListener('click', () => void app.start());

  void app.start();
}

boot();
