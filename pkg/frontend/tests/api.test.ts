import { describe, expect, it, vi } from "vitest";
import { ApiError, CurationClient } from "../src/api.js";
import { decision, jsonResponse, task } from "./fixtures.js";

function clientWith(mock: ReturnType<typeof vi.fn>): CurationClient {
  return new CurationClient("http://api.test", mock as unknown as typeof fetch);
}

describe("listTasks", () => {
  it("passes filter and pagination as query parameters", async () => {
    const mock = vi.fn().mockResolvedValue(
      jsonResponse({ tasks: [task()], total: 41, page: 3, page_size: 20 }),
    );
    const list = await clientWith(mock).listTasks({
      status: "pending",
      page: 3,
      pageSize: 20,
    });
    expect(mock).toHaveBeenCalledWith(
      "http://api.test/tasks?status=pending&page=3&page_size=20",
    );
    expect(list.total).toBe(41);
    expect(list.tasks[0].task_id).toBe("ct-0001");
  });

  it("omits the query string when no options are given", async () => {
    const mock = vi.fn().mockResolvedValue(
      jsonResponse({ tasks: [], total: 0, page: 1, page_size: 20 }),
    );
    await clientWith(mock).listTasks();
    expect(mock).toHaveBeenCalledWith("http://api.test/tasks");
  });
});

describe("getTask", () => {
  it("returns the task body", async () => {
    const mock = vi.fn().mockResolvedValue(jsonResponse(task()));
    const got = await clientWith(mock).getTask("ct-0001");
    expect(mock).toHaveBeenCalledWith("http://api.test/tasks/ct-0001");
    expect(got.clusters).toHaveLength(2);
  });

  it("raises ApiError with the backend code on 404", async () => {
    const mock = vi.fn().mockResolvedValue(
      jsonResponse({ detail: { code: "task_not_found" } }, 404),
    );
    const err = await clientWith(mock).getTask("nope").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(404);
    expect(err.code).toBe("task_not_found");
  });
});

describe("postDecision", () => {
  it("sends the curator id header and JSON body", async () => {
    const decided = task({ status: "decided", decision: decision() });
    const mock = vi.fn().mockResolvedValue(jsonResponse(decided));
    const outcome = await clientWith(mock).postDecision(
      "ct-0001",
      { verdict: "accept", cluster_id: "c1" },
      "alice",
    );
    expect(mock).toHaveBeenCalledWith("http://api.test/tasks/ct-0001/decision", {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        "X-Curator-Id": "alice",
      },
      body: JSON.stringify({ verdict: "accept", cluster_id: "c1" }),
    });
    expect(outcome.kind).toBe("decided");
    if (outcome.kind === "decided") {
      expect(outcome.task.status).toBe("decided");
    }
  });

  it("treats 409 as a conflict outcome carrying the winning decision", async () => {
    const mock = vi.fn().mockResolvedValue(
      jsonResponse({ code: "already_decided", decision: decision() }, 409),
    );
    const outcome = await clientWith(mock).postDecision(
      "ct-0001",
      { verdict: "reject_all" },
      "alice",
    );
    expect(outcome.kind).toBe("conflict");
    if (outcome.kind === "conflict") {
      expect(outcome.conflict.decision.curator_id).toBe("bob");
    }
  });

  it("raises ApiError on validation failures", async () => {
    const mock = vi.fn().mockResolvedValue(
      jsonResponse({ detail: { code: "bad_value", message: "unknown kind" } }, 422),
    );
    const err = await clientWith(mock)
      .postDecision("ct-0001", { verdict: "amend" }, "alice")
      .catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("bad_value");
  });

  it("URL-encodes task ids", async () => {
    const mock = vi.fn().mockResolvedValue(jsonResponse(task()));
    await clientWith(mock).postDecision("ct 1/x", { verdict: "reject_all" }, "alice");
    expect(mock.mock.calls[0][0]).toBe("http://api.test/tasks/ct%201%2Fx/decision");
  });
});
