// Thin REST client. Every platform interaction goes through these calls;
// the UI has no privileged channel.

import type { Databag, Prediction, RunView, Solution } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public details: string[] = [],
  ) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private token: string,
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown, form?: FormData): Promise<T> {
    const headers: Record<string, string> = { Authorization: `Bearer ${this.token}` };
    let payload: BodyInit | undefined;
    if (form) {
      payload = form;
    } else if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      payload = JSON.stringify(body);
    }
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, { method, headers, body: payload });
    if (resp.status === 204) return undefined as T;
    const text = await resp.text();
    let parsed: unknown = null;
    try {
      parsed = text ? JSON.parse(text) : null;
    } catch {
      parsed = null;
    }
    if (!resp.ok) {
      const err = (parsed ?? {}) as { code?: string; message?: string; details?: string[] };
      throw new ApiError(resp.status, err.code ?? "error", err.message ?? resp.statusText, err.details ?? []);
    }
    return parsed as T;
  }

  health(): Promise<{ status: string; version: string }> {
    return this.request("GET", "/healthz");
  }

  listDatabags(): Promise<Databag[]> {
    return this.request("GET", "/api/v1/databags");
  }

  uploadDatabag(name: string, file: File): Promise<Databag> {
    const form = new FormData();
    form.append("name", name);
    form.append("file", file, file.name || "upload.csv");
    return this.request("POST", "/api/v1/databags", undefined, form);
  }

  getDatabag(id: string): Promise<Databag> {
    return this.request("GET", `/api/v1/databags/${id}`);
  }

  deleteDatabag(id: string): Promise<void> {
    return this.request("DELETE", `/api/v1/databags/${id}`);
  }

  createSolution(req: {
    databag_id: string;
    target: string;
    name?: string;
    overrides?: Record<string, unknown>;
    trials?: number;
  }): Promise<Solution> {
    return this.request("POST", "/api/v1/solutions", req);
  }

  listSolutions(): Promise<Solution[]> {
    return this.request("GET", "/api/v1/solutions");
  }

  getSolution(id: string): Promise<Solution> {
    return this.request("GET", `/api/v1/solutions/${id}`);
  }

  getRun(id: string): Promise<RunView> {
    return this.request("GET", `/api/v1/runs/${id}`);
  }

  predict(solutionId: string, rows: Record<string, unknown>[]): Promise<{ predictions: Prediction[] }> {
    return this.request("POST", `/api/v1/solutions/${solutionId}/predict`, { rows });
  }

  modelUrl(solutionId: string): string {
    return `${this.baseUrl}/api/v1/solutions/${solutionId}/model`;
  }
}
