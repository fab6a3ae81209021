/** HTTP client for the summary service; later calls cancel in-flight ones. */

import type { FilterSpecDoc, FilterView, SubsetDoc, SummaryDoc } from "./types";

export interface ServiceClient {
  getSummary(): Promise<SummaryDoc>;
  postFilter(spec: FilterSpecDoc): Promise<FilterView>;
  postSubset(
    rowCluster: number,
    colCluster: number | null,
    threshold: number
  ): Promise<SubsetDoc>;
}

export class HttpServiceClient implements ServiceClient {
  private controller: AbortController | null = null;

  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = fetch
  ) {}

  private async request<T>(path: string, body?: unknown): Promise<T> {
    // a new interaction supersedes whatever is still pending
    this.controller?.abort();
    this.controller = new AbortController();
    const res = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: body === undefined ? "GET" : "POST",
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
      signal: this.controller.signal,
    });
    if (!res.ok) {
      const text = await res.text();
      throw new Error(`service replied ${res.status}: ${text}`);
    }
    return (await res.json()) as T;
  }

  getSummary(): Promise<SummaryDoc> {
    return this.request<SummaryDoc>("/summary");
  }

  postFilter(spec: FilterSpecDoc): Promise<FilterView> {
    return this.request<FilterView>("/filter", spec);
  }

  postSubset(
    rowCluster: number,
    colCluster: number | null,
    threshold: number
  ): Promise<SubsetDoc> {
    return this.request<SubsetDoc>("/subset", {
      row_cluster: rowCluster,
      col_cluster: colCluster,
      threshold,
    });
  }
}
