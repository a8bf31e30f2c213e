import { describe, expect, it } from "vitest";

import {
  buildFields,
  emptyOverrides,
  resetOverrides,
  setOverride,
} from "../src/adjusters.js";
import { goldenSummary } from "./helpers.js";

describe("adjuster fields", () => {
  const summary = goldenSummary();
  const profile = {
    age: { value: summary.columns.age.kind === "continuous"
      ? summary.columns.age.median : 0, source: "default" as const },
  };

  it("builds a continuous field with the observed range", () => {
    const fields = buildFields(profile, summary);
    expect(fields).toHaveLength(1);
    const age = fields[0];
    expect(age.kind).toBe("continuous");
    const col = summary.columns.age;
    if (col.kind !== "continuous") throw new Error("fixture expectation");
    expect(age.range).toEqual([col.min, col.max]);
    expect(age.defaultValue).toBe(col.median);
  });

  it("accepts in-range numbers silently and warns outside the range", () => {
    const [age] = buildFields(profile, summary);
    let state = emptyOverrides();
    state = setOverride(state, age, String(age.range![0] + 1));
    expect(state.warnings).toEqual({});
    expect(state.overrides.age).toBe(age.range![0] + 1);
    state = setOverride(state, age, String(age.range![1] + 100));
    expect(state.warnings.age).toMatch(/outside the observed range/);
    expect(state.overrides.age).toBe(age.range![1] + 100); // accepted, warned
    state = setOverride(state, age, "not-a-number");
    expect(state.warnings.age).toMatch(/not a number/);
  });

  it("rejects unknown categorical levels and lists known ones", () => {
    const field = {
      name: "arm",
      kind: "categorical" as const,
      defaultValue: "A",
      source: "default" as const,
      levels: ["A", "B"],
    };
    let state = emptyOverrides();
    state = setOverride(state, field, "B");
    expect(state.overrides.arm).toBe("B");
    state = setOverride(state, field, "C");
    expect(state.warnings.arm).toMatch(/unknown level/);
    expect(state.overrides.arm).toBe("B"); // last valid value kept
    expect(field.levels).toEqual(["A", "B"]);
  });

  it("reset clears every override so defaults are refetched", () => {
    const [age] = buildFields(profile, summary);
    let state = setOverride(emptyOverrides(), age, "55");
    expect(Object.keys(state.overrides)).toHaveLength(1);
    state = resetOverrides();
    expect(state.overrides).toEqual({});
    expect(state.warnings).toEqual({});
  });
});
