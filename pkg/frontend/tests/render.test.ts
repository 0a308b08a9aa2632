import { describe, expect, it } from "vitest";
import {
  renderConflict,
  renderDecision,
  renderTaskDetail,
  renderTaskList,
  renderTaskRow,
} from "../src/render.js";
import { decision, task } from "./fixtures.js";

describe("renderTaskRow", () => {
  it("shows subject, predicate, top value and option count", () => {
    const html = renderTaskRow(task());
    expect(html).toContain('data-task-id="ct-0001"');
    expect(html).toContain("Amara Okafor");
    expect(html).toContain("P2048");
    expect(html).toContain("213 cm");
    expect(html).toContain("<td>2</td>");
    expect(html).toContain("status-pending");
  });

  it("escapes hostile subject names", () => {
    const html = renderTaskRow(task({ subject_name: "<script>x</script>" }));
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("renderTaskList", () => {
  it("computes the page count and disables impossible navigation", () => {
    const html = renderTaskList({
      tasks: [task()],
      total: 41,
      page: 1,
      page_size: 20,
    });
    expect(html).toContain('data-pages="3"');
    expect(html).toContain('<button data-action="prev" disabled>');
    expect(html).toContain('<button data-action="next" >');
  });

  it("disables next on the last page", () => {
    const html = renderTaskList({ tasks: [], total: 41, page: 3, page_size: 20 });
    expect(html).toContain('<button data-action="next" disabled>');
  });
});

describe("renderTaskDetail", () => {
  it("pre-selects the rank-1 cluster and offers all verdicts", () => {
    const html = renderTaskDetail(task());
    expect(html).toContain('value="c1" checked');
    expect(html).toContain('value="c2" ');
    expect(html).toContain('data-action="accept"');
    expect(html).toContain('data-action="amend"');
    expect(html).toContain('data-action="reject"');
    expect(html).toContain("listed height of 2.13 m");
  });

  it("renders decided tasks read-only", () => {
    const html = renderTaskDetail(
      task({ status: "decided", decision: decision() }),
    );
    expect(html).toContain("disabled");
    expect(html).not.toContain('data-action="accept"');
    expect(html).toContain("accepted c1");
    expect(html).toContain("by bob");
  });
});

describe("renderDecision / renderConflict", () => {
  it("describes amendments with the amended value", () => {
    const html = renderDecision(
      decision({
        verdict: "amend",
        cluster_id: null,
        amended_value: { kind: "quantity", amount: 211, unit: "cm" },
      }),
    );
    expect(html).toContain("amended to 211 cm");
  });

  it("marks conflicts and embeds the winning decision", () => {
    const html = renderConflict(decision());
    expect(html).toContain("Another curator decided this task first.");
    expect(html).toContain("accepted c1");
  });
});
