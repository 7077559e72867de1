// Metrics panel content. Pure functions producing row data so the display
// logic is testable without a DOM; numbers pass through verbatim.

import type { EvaluateResponse, LabelScore } from "./api";

/**
 * Render a metric exactly as the server sent it. JavaScript's default number
 * stringification is the shortest round-trip form of the double, so no
 * precision is invented or lost.
 */
export function formatMetric(value: number): string {
  return String(value);
}

export interface MetricRow {
  key: string;
  label: string;
  value: string;
}

export function metricRows(resp: EvaluateResponse): MetricRow[] {
  return [
    { key: "epoch", label: "Epoch", value: String(resp.epoch) },
    { key: "pi1", label: "Privacy Π1 (super-class)", value: formatMetric(resp.pi1) },
    { key: "pi2", label: "Privacy Π2 (intra-class)", value: formatMetric(resp.pi2) },
    { key: "q1", label: "Utility Q1 (bounding box)", value: formatMetric(resp.q1) },
    { key: "q2_static", label: "Utility Q2 static", value: formatMetric(resp.q2_static) },
    { key: "q2_dynamic", label: "Utility Q2 dynamic", value: formatMetric(resp.q2_dynamic) },
    { key: "chamfer", label: "Chamfer distance", value: formatMetric(resp.chamfer) },
  ];
}

export interface HypothesisView {
  title: string;
  rows: { label: string; score: string; hit: boolean }[];
  likelihood: string;
}

function hypothesisView(title: string, basket: LabelScore[], truth: string | null): HypothesisView {
  let total = 0;
  const rows = basket.map((e) => {
    total += e.score;
    return { label: e.label, score: formatMetric(e.score), hit: e.label === truth };
  });
  return { title, rows, likelihood: formatMetric(total) };
}

export function hypothesisViews(resp: EvaluateResponse): [HypothesisView, HypothesisView] {
  return [
    hypothesisView(
      `Super-class basket (${resp.super_hypothesis.length})`,
      resp.super_hypothesis,
      resp.super_class,
    ),
    hypothesisView(
      `Intra-class basket (${resp.intra_hypothesis.length})`,
      resp.intra_hypothesis,
      resp.object_id,
    ),
  ];
}
