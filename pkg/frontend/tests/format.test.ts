import { describe, expect, it } from "vitest";
import { escapeHtml, formatValue, parseAmendedValue } from "../src/format.js";
import type { ValueJson } from "../src/types.js";

describe("formatValue", () => {
  const cases: Array<[ValueJson, string]> = [
    [{ kind: "quantity", amount: 184, unit: "cm" }, "184 cm"],
    [{ kind: "date", iso: "1942-11-20", precision: "day" }, "1942-11-20"],
    [{ kind: "date", iso: "1942-11-01", precision: "month" }, "1942-11"],
    [{ kind: "date", iso: "1942-01-01", precision: "year" }, "1942"],
    [{ kind: "money", amount_minor: 150_000_000_000, currency: "USD" }, "1,500,000,000 USD"],
    [{ kind: "entity_ref", entity_id: "Q9001" }, "Q9001"],
    [{ kind: "external_id", scheme: "youtube", identifier: "UCabc" }, "youtube:UCabc"],
    [{ kind: "string", text: "public figure" }, "public figure"],
  ];
  it.each(cases)("renders %j", (value, expected) => {
    expect(formatValue(value)).toBe(expected);
  });
});

describe("parseAmendedValue", () => {
  const quantity: ValueJson = { kind: "quantity", amount: 213, unit: "cm" };

  it("keeps the template's unit for quantities", () => {
    expect(parseAmendedValue("211", quantity)).toEqual({
      kind: "quantity",
      amount: 211,
      unit: "cm",
    });
  });

  it("rejects non-numeric quantity input", () => {
    expect(parseAmendedValue("tall", quantity)).toBeNull();
    expect(parseAmendedValue("", quantity)).toBeNull();
  });

  it("parses ISO dates only", () => {
    const template: ValueJson = { kind: "date", iso: "1942-11-20", precision: "day" };
    expect(parseAmendedValue("1950-01-01", template)).toEqual({
      kind: "date",
      iso: "1950-01-01",
      precision: "day",
    });
    expect(parseAmendedValue("January 1, 1950", template)).toBeNull();
  });

  it("converts money major units to minor units", () => {
    const template: ValueJson = { kind: "money", amount_minor: 0, currency: "USD" };
    expect(parseAmendedValue("1,500", template)).toEqual({
      kind: "money",
      amount_minor: 150_000,
      currency: "USD",
    });
  });

  it("accepts entity ids in either namespace", () => {
    const template: ValueJson = { kind: "entity_ref", entity_id: "Q9001" };
    expect(parseAmendedValue("Q9002", template)).toEqual({
      kind: "entity_ref",
      entity_id: "Q9002",
    });
    expect(parseAmendedValue("odke:12", template)).toEqual({
      kind: "entity_ref",
      entity_id: "odke:12",
    });
    expect(parseAmendedValue("not-an-id", template)).toBeNull();
  });
});

describe("escapeHtml", () => {
  it("escapes markup-significant characters", () => {
    expect(escapeHtml('<b a="1">&</b>')).toBe("&lt;b a=&quot;1&quot;&gt;&amp;&lt;/b&gt;");
  });
});
