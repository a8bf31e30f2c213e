/** Adjuster override editing: validation against the dataset summary and
 * the override map sent to the service.  Resetting clears every override
 * so the default-profile surface is reproduced byte-identically. */

import type {
  AdjusterEntry,
  CategoricalColumnSummary,
  ContinuousColumnSummary,
  DatasetSummary,
} from "./types.js";

export interface AdjusterField {
  name: string;
  kind: "continuous" | "categorical";
  defaultValue: number | string;
  source: "default" | "user";
  /** categorical: the closed level set to offer */
  levels?: string[];
  /** continuous: observed range, for out-of-range warnings */
  range?: [number, number];
}

export function buildFields(
  profile: Record<string, AdjusterEntry>,
  summary: DatasetSummary,
): AdjusterField[] {
  return Object.entries(profile).map(([name, entry]) => {
    const column = summary.columns[name];
    if (column && column.kind === "categorical") {
      const cat = column as CategoricalColumnSummary;
      return {
        name,
        kind: "categorical",
        defaultValue: entry.value,
        source: entry.source,
        levels: [...cat.levels],
      };
    }
    const cont = column as ContinuousColumnSummary | undefined;
    return {
      name,
      kind: "continuous",
      defaultValue: entry.value,
      source: entry.source,
      range: cont ? [cont.min, cont.max] : undefined,
    };
  });
}

export interface OverrideState {
  overrides: Record<string, number | string>;
  warnings: Record<string, string>;
}

export function emptyOverrides(): OverrideState {
  return { overrides: {}, warnings: {} };
}

/** Apply one edit; invalid categorical levels are rejected, continuous
 * values outside the observed range are accepted with a warning. */
export function setOverride(
  state: OverrideState,
  field: AdjusterField,
  raw: string,
): OverrideState {
  const overrides = { ...state.overrides };
  const warnings = { ...state.warnings };
  delete warnings[field.name];
  if (field.kind === "categorical") {
    if (!field.levels || !field.levels.includes(raw)) {
      warnings[field.name] = `unknown level "${raw}"`;
      return { overrides: state.overrides, warnings };
    }
    overrides[field.name] = raw;
  } else {
    const value = Number(raw);
    if (!Number.isFinite(value)) {
      warnings[field.name] = `"${raw}" is not a number`;
      return { overrides: state.overrides, warnings };
    }
    if (field.range && (value < field.range[0] || value > field.range[1])) {
      warnings[field.name] =
        `outside the observed range [${field.range[0]}, ${field.range[1]}]`;
    }
    overrides[field.name] = value;
  }
  return { overrides, warnings };
}

export function clearOverride(
  state: OverrideState,
  name: string,
): OverrideState {
  const overrides = { ...state.overrides };
  const warnings = { ...state.warnings };
  delete overrides[name];
  delete warnings[name];
  return { overrides, warnings };
}

/** Reset to defaults: no overrides at all, so the refetched surface is
 * the default-profile surface. */
export function resetOverrides(): OverrideState {
  return emptyOverrides();
}
