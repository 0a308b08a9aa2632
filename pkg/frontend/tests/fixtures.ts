import type { ClusterOptionJson, CurationTaskJson, DecisionJson } from "../src/types.js";

export function cluster(overrides: Partial<ClusterOptionJson> = {}): ClusterOptionJson {
  return {
    cluster_id: "c1",
    value: { kind: "quantity", amount: 213, unit: "cm" },
    score: 0.633,
    rank: 1,
    support: 2,
    snippets: ["listed height of 2.13 m"],
    fact: {
      subject: "Q100001",
      predicate: "P2048",
      object: { kind: "quantity", amount: 213, unit: "cm" },
      confidence: 0.633,
      provenance: [
        {
          source_url: "https://source0.example/bio",
          revision_id: "r1",
          span: "infobox:0:0:6",
          extractor_id: "pattern:en:0",
          extracted_at: "2024-01-01T00:00:00Z",
        },
      ],
      status: "needs_curation",
    },
    ...overrides,
  };
}

export function task(overrides: Partial<CurationTaskJson> = {}): CurationTaskJson {
  return {
    task_id: "ct-0001",
    subject_id: "Q100001",
    subject_name: "Amara Okafor",
    subject_aliases: ["A. Okafor"],
    subject_types: ["Q5"],
    context_facts: [],
    predicate: "P2048",
    clusters: [
      cluster(),
      cluster({
        cluster_id: "c2",
        value: { kind: "quantity", amount: 205, unit: "cm" },
        score: 0.317,
        rank: 2,
        support: 1,
        snippets: [],
      }),
    ],
    status: "pending",
    created_at: "2024-01-02T00:00:00Z",
    decision: null,
    ...overrides,
  };
}

export function decision(overrides: Partial<DecisionJson> = {}): DecisionJson {
  return {
    task_id: "ct-0001",
    verdict: "accept",
    curator_id: "bob",
    decided_at: "2024-01-02T10:00:00Z",
    cluster_id: "c1",
    amended_value: null,
    ...overrides,
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
