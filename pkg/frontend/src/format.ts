import type { ValueJson } from "./types.js";

/** Human-readable rendering of a fact value, one branch per kind. */
export function formatValue(value: ValueJson): string {
  switch (value.kind) {
    case "quantity":
      return `${value.amount} ${value.unit}`;
    case "date": {
      const [year, month, day] = value.iso.split("-");
      if (value.precision === "year") return year;
      if (value.precision === "month") return `${year}-${month}`;
      return `${year}-${month}-${day}`;
    }
    case "money": {
      const major = value.amount_minor / 100;
      return `${major.toLocaleString("en-US")} ${value.currency}`;
    }
    case "entity_ref":
      return value.entity_id;
    case "external_id":
      return `${value.scheme}:${value.identifier}`;
    case "string":
      return value.text;
  }
}

/** Parse curator input back into a value of the same kind as a template.
 * Returns null when the input cannot be parsed for that kind. */
export function parseAmendedValue(input: string, template: ValueJson): ValueJson | null {
  const trimmed = input.trim();
  if (trimmed === "") return null;
  switch (template.kind) {
    case "quantity": {
      const amount = Number(trimmed);
      if (!Number.isFinite(amount)) return null;
      return { kind: "quantity", amount, unit: template.unit };
    }
    case "date": {
      if (!/^\d{4}-\d{2}-\d{2}$/.test(trimmed)) return null;
      return { kind: "date", iso: trimmed, precision: "day" };
    }
    case "money": {
      const major = Number(trimmed.replace(/,/g, ""));
      if (!Number.isFinite(major)) return null;
      return {
        kind: "money",
        amount_minor: Math.round(major * 100),
        currency: template.currency,
      };
    }
    case "entity_ref":
      if (!/^(Q\d+|odke:\d+)$/.test(trimmed)) return null;
      return { kind: "entity_ref", entity_id: trimmed };
    case "external_id":
      return { kind: "external_id", scheme: template.scheme, identifier: trimmed };
    case "string":
      return { kind: "string", text: trimmed };
  }
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
