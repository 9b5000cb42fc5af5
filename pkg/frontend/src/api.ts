/**
 * Thin typed client for the accessibility service endpoints.
 */

import {
  ArPayload,
  GridPayload,
  ServiceError,
  ShockPayload,
  TestMethod,
  TestPayload,
} from './types.js';

export interface TestQuery {
  from: string;
  to: string;
  slot: string;
  method: TestMethod;
}

/** Surface the app depends on; tests substitute a mocked service. */
export interface Api {
  grid(): Promise<GridPayload>;
  ar(at: string): Promise<ArPayload>;
  shock(at: string, saturatedSites: string[]): Promise<ShockPayload>;
  test(query: TestQuery): Promise<TestPayload>;
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ServiceError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient implements Api {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  async grid(): Promise<GridPayload> {
    return asJson(await this.fetchFn(`${this.baseUrl}/grid`));
  }

  async ar(at: string): Promise<ArPayload> {
    const query = new URLSearchParams({ at });
    return asJson(await this.fetchFn(`${this.baseUrl}/ar?${query}`));
  }

  async shock(at: string, saturatedSites: string[]): Promise<ShockPayload> {
    return asJson(
      await this.fetchFn(`${this.baseUrl}/shock`, {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ at, saturated_sites: saturatedSites }),
      }),
    );
  }

  async test(query: TestQuery): Promise<TestPayload> {
    const params = new URLSearchParams(query as unknown as Record<string, string>);
    return asJson(await this.fetchFn(`${this.baseUrl}/test?${params}`));
  }
}
