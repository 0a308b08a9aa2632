import type {
  ConflictJson,
  CurationTaskJson,
  DecisionRequest,
  TaskListJson,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message?: string,
  ) {
    super(message ?? `${code} (HTTP ${status})`);
    this.name = "ApiError";
  }
}

export type DecisionOutcome =
  | { kind: "decided"; task: CurationTaskJson }
  | { kind: "conflict"; conflict: ConflictJson };

async function errorCode(response: Response): Promise<string> {
  try {
    const body = await response.json();
    const detail = body?.detail ?? body;
    return typeof detail?.code === "string" ? detail.code : "http_error";
  } catch {
    return "http_error";
  }
}

/** Thin client over the curation service; the only integration point
 * between this frontend and the backend. */
export class CurationClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  async listTasks(
    options: { status?: string; page?: number; pageSize?: number } = {},
  ): Promise<TaskListJson> {
    const params = new URLSearchParams();
    if (options.status) params.set("status", options.status);
    if (options.page) params.set("page", String(options.page));
    if (options.pageSize) params.set("page_size", String(options.pageSize));
    const query = params.toString();
    const response = await this.fetchFn(
      `${this.baseUrl}/tasks${query ? `?${query}` : ""}`,
    );
    if (!response.ok) throw new ApiError(response.status, await errorCode(response));
    return response.json();
  }

  async getTask(taskId: string): Promise<CurationTaskJson> {
    const response = await this.fetchFn(
      `${this.baseUrl}/tasks/${encodeURIComponent(taskId)}`,
    );
    if (!response.ok) throw new ApiError(response.status, await errorCode(response));
    return response.json();
  }

  /** A 409 is an expected outcome (another curator won the race), not an
   * error: the existing decision comes back for read-only display. */
  async postDecision(
    taskId: string,
    body: DecisionRequest,
    curatorId: string,
  ): Promise<DecisionOutcome> {
    const response = await this.fetchFn(
      `${this.baseUrl}/tasks/${encodeURIComponent(taskId)}/decision`,
      {
        method: "POST",
        headers: {
          "Content-Type": "application/json",
          "X-Curator-Id": curatorId,
        },
        body: JSON.stringify(body),
      },
    );
    if (response.status === 409) {
      return { kind: "conflict", conflict: await response.json() };
    }
    if (!response.ok) throw new ApiError(response.status, await errorCode(response));
    return { kind: "decided", task: await response.json() };
  }

  async stats(): Promise<Record<string, number>> {
    const response = await this.fetchFn(`${this.baseUrl}/stats`);
    if (!response.ok) throw new ApiError(response.status, await errorCode(response));
    return response.json();
  }
}
