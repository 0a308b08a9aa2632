import { CurationClient } from "./api.js";
import { parseAmendedValue } from "./format.js";
import {
  renderConflict,
  renderError,
  renderTaskDetail,
  renderTaskList,
} from "./render.js";
import type { CurationTaskJson, DecisionRequest } from "./types.js";

const PAGE_SIZE = 20;

interface UiState {
  status: string; // "" | "pending" | "decided"
  page: number;
  current: CurationTaskJson | null;
}

export function bootstrap(root: HTMLElement, client: CurationClient): void {
  const state: UiState = { status: "pending", page: 1, current: null };
  root.innerHTML =
    `<header><h1>Curation queue</h1>` +
    `<label>Status <select data-role="status-filter">` +
    `<option value="pending" selected>pending</option>` +
    `<option value="decided">decided</option>` +
    `<option value="">all</option>` +
    `</select></label>` +
    `<label>Curator <input type="text" data-role="curator" value="curator"></label>` +
    `</header>` +
    `<main><div data-role="list"></div><div data-role="detail"></div></main>`;

  const listEl = root.querySelector<HTMLElement>('[data-role="list"]')!;
  const detailEl = root.querySelector<HTMLElement>('[data-role="detail"]')!;
  const curatorEl = root.querySelector<HTMLInputElement>('[data-role="curator"]')!;

  async function refreshList(): Promise<void> {
    try {
      const list = await client.listTasks({
        status: state.status || undefined,
        page: state.page,
        pageSize: PAGE_SIZE,
      });
      listEl.innerHTML = renderTaskList(list);
    } catch (err) {
      listEl.innerHTML = renderError(String(err));
    }
  }

  async function openTask(taskId: string): Promise<void> {
    try {
      state.current = await client.getTask(taskId);
      detailEl.innerHTML = renderTaskDetail(state.current);
    } catch (err) {
      detailEl.innerHTML = renderError(String(err));
    }
  }

  async function submit(request: DecisionRequest): Promise<void> {
    const task = state.current;
    if (!task) return;
    const outcome = await client.postDecision(
      task.task_id,
      request,
      curatorEl.value || "anonymous",
    );
    if (outcome.kind === "conflict") {
      // lost the race: show the winning decision read-only
      state.current = await client.getTask(task.task_id);
      detailEl.innerHTML =
        renderConflict(outcome.conflict.decision) + renderTaskDetail(state.current);
    } else {
      state.current = outcome.task;
      detailEl.innerHTML = renderTaskDetail(outcome.task);
    }
    await refreshList();
  }

  root.querySelector<HTMLSelectElement>('[data-role="status-filter"]')!.addEventListener(
    "change",
    (ev) => {
      state.status = (ev.target as HTMLSelectElement).value;
      state.page = 1;
      void refreshList();
    },
  );

  listEl.addEventListener("click", (ev) => {
    const target = ev.target as HTMLElement;
    const row = target.closest<HTMLElement>(".task-row");
    if (row?.dataset.taskId) {
      void openTask(row.dataset.taskId);
      return;
    }
    const action = target.dataset.action;
    if (action === "prev" && state.page > 1) {
      state.page -= 1;
      void refreshList();
    } else if (action === "next") {
      state.page += 1;
      void refreshList();
    }
  });

  detailEl.addEventListener("click", (ev) => {
    const target = ev.target as HTMLElement;
    const action = target.dataset.action;
    const task = state.current;
    if (!action || !task) return;
    ev.preventDefault();
    if (action === "accept") {
      const selected = detailEl.querySelector<HTMLInputElement>(
        'input[name="cluster"]:checked',
      );
      if (selected) void submit({ verdict: "accept", cluster_id: selected.value });
    } else if (action === "reject") {
      void submit({ verdict: "reject_all" });
    } else if (action === "amend") {
      const input = detailEl.querySelector<HTMLInputElement>(
        '[data-role="amend-input"]',
      );
      const template = task.clusters[0]?.value;
      if (!input || !template) return;
      const value = parseAmendedValue(input.value, template);
      if (value === null) {
        input.classList.add("invalid");
        return;
      }
      void submit({ verdict: "amend", amended_value: value });
    }
  });

  void refreshList();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  bootstrap(document.getElementById("app")!, new CurationClient(""));
}
