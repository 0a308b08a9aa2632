import { escapeHtml, formatValue } from "./format.js";
import type { CurationTaskJson, DecisionJson, TaskListJson } from "./types.js";

/** Pure HTML renderers: every view is a string so it can be unit-tested
 * without a browser. */

export function renderTaskRow(task: CurationTaskJson): string {
  const best = task.clusters[0];
  const preview = best ? formatValue(best.value) : "(no candidates)";
  return (
    `<tr class="task-row" data-task-id="${escapeHtml(task.task_id)}">` +
    `<td>${escapeHtml(task.subject_name)}</td>` +
    `<td>${escapeHtml(task.predicate)}</td>` +
    `<td>${escapeHtml(preview)}</td>` +
    `<td>${task.clusters.length}</td>` +
    `<td><span class="status status-${task.status}">${task.status}</span></td>` +
    `</tr>`
  );
}

export function renderTaskList(list: TaskListJson): string {
  const rows = list.tasks.map(renderTaskRow).join("");
  const pages = Math.max(1, Math.ceil(list.total / list.page_size));
  return (
    `<table class="tasks"><thead><tr>` +
    `<th>Subject</th><th>Predicate</th><th>Top value</th>` +
    `<th>Options</th><th>Status</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>` +
    `<nav class="pager" data-page="${list.page}" data-pages="${pages}">` +
    `<button data-action="prev" ${list.page <= 1 ? "disabled" : ""}>Prev</button>` +
    `<span>page ${list.page} / ${pages} (${list.total} tasks)</span>` +
    `<button data-action="next" ${list.page >= pages ? "disabled" : ""}>Next</button>` +
    `</nav>`
  );
}

export function renderDecision(decision: DecisionJson): string {
  const detail =
    decision.verdict === "accept"
      ? `accepted ${escapeHtml(decision.cluster_id ?? "")}`
      : decision.verdict === "amend"
        ? `amended to ${escapeHtml(decision.amended_value ? formatValue(decision.amended_value) : "")}`
        : "rejected all candidates";
  return (
    `<div class="decision">` +
    `<strong>Decided</strong>: ${detail} ` +
    `by ${escapeHtml(decision.curator_id)} at ${escapeHtml(decision.decided_at)}` +
    `</div>`
  );
}

export function renderTaskDetail(task: CurationTaskJson): string {
  const decided = task.status === "decided";
  const clusters = task.clusters
    .map((c) => {
      const snippets = c.snippets
        .map((s) => `<blockquote>${escapeHtml(s)}</blockquote>`)
        .join("");
      return (
        `<label class="cluster">` +
        `<input type="radio" name="cluster" value="${escapeHtml(c.cluster_id)}" ` +
        `${c.rank === 1 ? "checked" : ""} ${decided ? "disabled" : ""}>` +
        `<span class="value">${escapeHtml(formatValue(c.value))}</span>` +
        `<span class="meta">score ${c.score.toFixed(3)}, ${c.support} source${c.support === 1 ? "" : "s"}</span>` +
        snippets +
        `</label>`
      );
    })
    .join("");
  const controls = decided
    ? renderDecision(task.decision!)
    : `<div class="controls">` +
      `<button data-action="accept">Accept selected</button>` +
      `<input type="text" data-role="amend-input" placeholder="corrected value">` +
      `<button data-action="amend">Amend</button>` +
      `<button data-action="reject" class="danger">Reject all</button>` +
      `</div>`;
  return (
    `<section class="detail" data-task-id="${escapeHtml(task.task_id)}">` +
    `<h2>${escapeHtml(task.subject_name)} — ${escapeHtml(task.predicate)}</h2>` +
    `<p class="subject-meta">${escapeHtml(task.subject_id)}` +
    (task.subject_aliases.length
      ? ` (also: ${escapeHtml(task.subject_aliases.join(", "))})`
      : "") +
    `</p>` +
    `<form class="clusters">${clusters}</form>` +
    controls +
    `</section>`
  );
}

export function renderConflict(decision: DecisionJson): string {
  return (
    `<div class="conflict">Another curator decided this task first.</div>` +
    renderDecision(decision)
  );
}

export function renderError(message: string): string {
  return `<div class="error">${escapeHtml(message)}</div>`;
}
