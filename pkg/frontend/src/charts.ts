import type { Explanation, MetricEntry } from "./types";

// One metric value on a horizontal axis: shaded fair band, ideal reference
// line, value marker. The spec is pure data; render.ts turns it into SVG.
export interface ChartSpec {
  metricId: string;
  kind: "value" | "no-value";
  display: string; // value text exactly as received, no rounding
  styled: "fair" | "biased" | "na";
  capped: boolean; // infinite value pinned to the axis edge
  axis: { min: number; max: number };
  marker: number | null;
  band: [number, number] | null;
  ideal: number | null;
  explanation: Explanation;
}

function axisFor(points: number[]): { min: number; max: number } {
  if (points.length === 0) return { min: 0, max: 1 };
  let min = Math.min(...points);
  let max = Math.max(...points);
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  const pad = (max - min) * 0.15;
  return { min: min - pad, max: max + pad };
}

export function chartSpec(entry: MetricEntry): ChartSpec {
  const band = entry.fair_range;
  const ideal = entry.ideal;
  const anchors = [...(band ?? []), ...(ideal === null ? [] : [ideal])];

  if (entry.flag === "undefined") {
    return {
      metricId: entry.metric_id,
      kind: "no-value",
      display: "undefined",
      styled: "na",
      capped: false,
      axis: axisFor(anchors),
      marker: null,
      band,
      ideal,
      explanation: entry.explanation,
    };
  }

  if (entry.flag === "infinite") {
    const axis = axisFor(anchors);
    return {
      metricId: entry.metric_id,
      kind: "value",
      display: "infinite",
      styled: "biased",
      capped: true,
      axis,
      marker: axis.max,
      band,
      ideal,
      explanation: entry.explanation,
    };
  }

  const value = entry.value as number;
  return {
    metricId: entry.metric_id,
    kind: "value",
    display: String(value),
    styled: entry.fair === null ? "na" : entry.fair ? "fair" : "biased",
    capped: false,
    axis: axisFor([...anchors, value]),
    marker: value,
    band,
    ideal,
    explanation: entry.explanation,
  };
}
