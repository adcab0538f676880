/** Typed client for the case-workbench HTTP API. */

import type { ArticlesDoc, CaseDoc, DagDoc, ScenariosDoc, TreeDoc } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseDetail(res: Response): Promise<string> {
  try {
    const body = await res.json();
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body.detail ?? body);
  } catch {
    return res.statusText;
  }
}

export class ApiClient {
  constructor(public base: string, private fetchImpl: typeof fetch = fetch) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<T> {
    const res = await this.fetchImpl(this.base + path, {
      method,
      headers: body !== undefined ? { "Content-Type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
      signal,
    });
    if (!res.ok) {
      throw new ApiError(res.status, await parseDetail(res));
    }
    if (res.status === 204) return undefined as T;
    return (await res.json()) as T;
  }

  articles(): Promise<ArticlesDoc> {
    return this.request("GET", "/kb/articles");
  }

  async createCase(): Promise<string> {
    const doc = await this.request<CaseDoc>("POST", "/cases");
    return doc.id;
  }

  deleteCase(id: string): Promise<void> {
    return this.request("DELETE", `/cases/${id}`);
  }

  addFacts(id: string, facts: string[]): Promise<CaseDoc> {
    return this.request("POST", `/cases/${id}/facts`, { facts });
  }

  removeFact(id: string, fact: string): Promise<CaseDoc> {
    return this.request("DELETE", `/cases/${id}/facts?fact=${encodeURIComponent(fact)}`);
  }

  addConstraint(id: string, text: string): Promise<CaseDoc> {
    return this.request("POST", `/cases/${id}/constraints`, { text });
  }

  scenarios(id: string, signal?: AbortSignal): Promise<ScenariosDoc> {
    return this.request("GET", `/cases/${id}/scenarios`, undefined, signal);
  }

  explanationDag(id: string, scenario: number): Promise<DagDoc> {
    return this.request("GET", `/cases/${id}/scenarios/${scenario}/explanation?format=dag`);
  }

  explanationTree(id: string, scenario: number, query: string): Promise<TreeDoc> {
    return this.request(
      "GET",
      `/cases/${id}/scenarios/${scenario}/explanation?format=tree&query=${encodeURIComponent(query)}`,
    );
  }
}
