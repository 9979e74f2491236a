/** Dashboard models computed 1:1 from the analytics endpoints: a radar of
 * per-matcher metrics, rank-bucket bars, and UpSet-style consensus columns.
 * Values are carried through unchanged so the dashboards always equal what
 * the endpoints returned. */

import type { BreakdownReport, ConsensusReport, MetricsReport } from "./types.js";

export const RADAR_AXES = ["mrr", "precision_at_1", "recall_at_k", "f1"] as const;
export type RadarAxis = (typeof RADAR_AXES)[number];

export interface RadarSeries {
  matcher: string;
  values: Record<RadarAxis, number>;
  /** SVG-space polygon points, axis order, radius * value from center */
  points: [number, number][];
}

export interface RadarChart {
  axes: RadarAxis[];
  series: RadarSeries[];
  radius: number;
  notice: string | null;
}

export function radarChart(metrics: MetricsReport, radius = 100): RadarChart {
  const series: RadarSeries[] = Object.keys(metrics.per_matcher)
    .sort()
    .map((matcher) => {
      const mm = metrics.per_matcher[matcher];
      const values = {
        mrr: mm.mrr,
        precision_at_1: mm.precision_at_1,
        recall_at_k: mm.recall_at_k,
        f1: mm.f1,
      };
      const points = RADAR_AXES.map((axis, i): [number, number] => {
        const angle = (2 * Math.PI * i) / RADAR_AXES.length - Math.PI / 2;
        const r = radius * values[axis];
        return [r * Math.cos(angle), r * Math.sin(angle)];
      });
      return { matcher, values, points };
    });
  return {
    axes: [...RADAR_AXES],
    series,
    radius,
    notice: metrics.flag ?? null,
  };
}

export interface BreakdownBar {
  matcher: string;
  segments: { bucket: string; count: number; fraction: number }[];
  total: number;
}

export interface BreakdownChart {
  buckets: string[];
  bars: BreakdownBar[];
  evaluated: number;
  notice: string | null;
}

export function breakdownChart(report: BreakdownReport): BreakdownChart {
  const bars: BreakdownBar[] = Object.keys(report.per_matcher)
    .sort()
    .map((matcher) => {
      const counts = report.per_matcher[matcher];
      const total = report.buckets.reduce((sum, bucket) => sum + (counts[bucket] ?? 0), 0);
      const segments = report.buckets.map((bucket) => ({
        bucket,
        count: counts[bucket] ?? 0,
        fraction: total > 0 ? (counts[bucket] ?? 0) / total : 0,
      }));
      return { matcher, segments, total };
    });
  return {
    buckets: [...report.buckets],
    bars,
    evaluated: report.evaluated_sources,
    notice: report.evaluated_sources === 0 ? "insufficient ground truth" : null,
  };
}

export interface UpsetColumn {
  matchers: string[];
  count: number;
  /** membership dots in matcherRows order */
  dots: boolean[];
}

export interface UpsetChart {
  matcherRows: string[];
  columns: UpsetColumn[];
  notice: string | null;
}

export function upsetChart(report: ConsensusReport, matcherIds?: string[]): UpsetChart {
  const rows =
    matcherIds !== undefined
      ? [...matcherIds].sort()
      : [...new Set(report.subsets.flatMap((s) => s.matchers))].sort();
  const columns = report.subsets.map((subset) => ({
    matchers: [...subset.matchers],
    count: subset.count,
    dots: rows.map((m) => subset.matchers.includes(m)),
  }));
  const totalPairs = columns.reduce((sum, c) => sum + c.count, 0);
  return {
    matcherRows: rows,
    columns,
    notice: totalPairs === 0 ? "insufficient ground truth" : null,
  };
}
