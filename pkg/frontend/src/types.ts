/** JSON shapes exchanged with the curation HTTP API. */

export interface EntityRefJson {
  kind: "entity_ref";
  entity_id: string;
}

export interface QuantityJson {
  kind: "quantity";
  amount: number;
  unit: string;
}

export interface DateJson {
  kind: "date";
  iso: string;
  precision: "year" | "month" | "day";
}

export interface MoneyJson {
  kind: "money";
  amount_minor: number;
  currency: string;
}

export interface TextJson {
  kind: "string";
  text: string;
}

export interface ExternalIdJson {
  kind: "external_id";
  scheme: string;
  identifier: string;
}

export type ValueJson =
  | EntityRefJson
  | QuantityJson
  | DateJson
  | MoneyJson
  | TextJson
  | ExternalIdJson;

export interface ProvenanceJson {
  source_url: string;
  revision_id: string;
  span: string;
  extractor_id: string;
  extracted_at: string;
}

export interface FactJson {
  subject: string;
  predicate: string;
  object: ValueJson;
  confidence: number;
  provenance: ProvenanceJson[];
  status: string;
}

export interface ClusterOptionJson {
  cluster_id: string;
  value: ValueJson;
  score: number;
  rank: number;
  support: number;
  snippets: string[];
  fact: FactJson;
}

export interface DecisionJson {
  task_id: string;
  verdict: "accept" | "reject_all" | "amend";
  curator_id: string;
  decided_at: string;
  cluster_id: string | null;
  amended_value: ValueJson | null;
}

export interface CurationTaskJson {
  task_id: string;
  subject_id: string;
  subject_name: string;
  subject_aliases: string[];
  subject_types: string[];
  context_facts: Record<string, unknown>[];
  predicate: string;
  clusters: ClusterOptionJson[];
  status: "pending" | "decided";
  created_at: string;
  decision: DecisionJson | null;
}

export interface TaskListJson {
  tasks: CurationTaskJson[];
  total: number;
  page: number;
  page_size: number;
}

export interface DecisionRequest {
  verdict: "accept" | "reject_all" | "amend";
  cluster_id?: string;
  amended_value?: ValueJson;
}

export interface ConflictJson {
  code: "already_decided";
  decision: DecisionJson;
}
