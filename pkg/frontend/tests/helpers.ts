import { readFileSync } from "node:fs";
import { resolve } from "node:path";

import type { BiasReport, Catalogs, MetricEntry, ReportResponse } from "../src/types";

export function fixture<T>(name: string): T {
  const path = resolve(process.cwd(), "tests/fixtures", name);
  return JSON.parse(readFileSync(path, "utf8")) as T;
}

export const catalogs = (): Catalogs => fixture<Catalogs>("catalogs.json");

export function baselineReport(dataset: string): BiasReport {
  return fixture<ReportResponse>(`${dataset}_baseline.json`).report;
}

export function reweighingReport(): BiasReport {
  return fixture<ReportResponse>("german_reweighing.json").report;
}

export function entryOf(overrides: Partial<MetricEntry>): MetricEntry {
  return {
    metric_id: "statistical_parity_difference",
    value: -0.2,
    flag: null,
    ideal: 0.0,
    fair_range: [-0.1, 0.1],
    fair: false,
    explanation: {
      meta: { name: "statistical_parity_difference", definition: "def", ideal: 0.0 },
      stats: { value: -0.2 },
      text: "explanation text",
    },
    ...overrides,
  };
}
