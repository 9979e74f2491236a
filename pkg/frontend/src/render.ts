/** HTML-string renderers. Pure functions of server payloads + view state, so
 * they run (and are tested) without a DOM; app.ts mounts the strings. */

import { BreakdownChart, RadarChart, UpsetChart } from "./charts.js";
import { HeatmapCell, HeatmapModel, intensityColor } from "./heatmap.js";
import type {
  CandidateDict,
  MatcherListing,
  ProfileDict,
  ProvenanceEventDict,
  ValueMappingDict,
} from "./types.js";
import { matcherBadge } from "./editor.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderBanner(message: string | null): string {
  if (message === null) {
    return "";
  }
  return `<div class="banner error" role="alert">${escapeHtml(message)}</div>`;
}

export function renderHeatmap(model: HeatmapModel, cells: HeatmapCell[]): string {
  if (model.rows.length === 0) {
    return `<p class="empty">no candidates above the cutoff</p>`;
  }
  const byPosition = new Map<string, HeatmapCell>();
  for (const cell of cells) {
    byPosition.set(`${cell.row}:${cell.col}`, cell);
  }
  const rowIndexes = [...new Set(cells.map((c) => c.row))].sort((a, b) => a - b);
  const colIndexes = [...new Set(cells.map((c) => c.col))].sort((a, b) => a - b);
  const head = colIndexes
    .map((c) => `<th scope="col">${escapeHtml(model.cols[c])}</th>`)
    .join("");
  const body = rowIndexes
    .map((r) => {
      const tds = colIndexes
        .map((c) => {
          const cell = byPosition.get(`${r}:${c}`);
          if (!cell) {
            return `<td class="blank"></td>`;
          }
          const style = `background-color:${intensityColor(cell.aggregate)}`;
          return (
            `<td class="cell status-${escapeHtml(cell.status)}" style="${style}"` +
            ` data-source="${escapeHtml(cell.source)}" data-target="${escapeHtml(cell.target)}"` +
            ` title="${cell.aggregate.toFixed(3)}">${cell.aggregate.toFixed(2)}</td>`
          );
        })
        .join("");
      return `<tr><th scope="row">${escapeHtml(model.rows[r])}</th>${tds}</tr>`;
    })
    .join("");
  return `<table class="heatmap"><thead><tr><th></th>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

export function renderCandidateActions(cand: CandidateDict): string {
  const pair = `data-source="${escapeHtml(cand.source)}" data-target="${escapeHtml(cand.target)}"`;
  return (
    `<div class="actions" ${pair}>` +
    `<span class="pair">${escapeHtml(cand.source)} &rarr; ${escapeHtml(cand.target)}</span>` +
    `<span class="status">${escapeHtml(cand.status)}</span>` +
    `<button data-action="accept">accept</button>` +
    `<button data-action="reject">reject</button>` +
    `<button data-action="flag">flag</button>` +
    `<button data-action="note">note</button>` +
    `</div>`
  );
}

function renderProfile(profile: ProfileDict): string {
  const rows: string[] = [
    `<dt>type</dt><dd>${escapeHtml(profile.inferred_type)}</dd>`,
    `<dt>nulls</dt><dd>${profile.null_count}</dd>`,
  ];
  if (profile.min !== null && profile.max !== null) {
    rows.push(`<dt>range</dt><dd>${profile.min} &ndash; ${profile.max}</dd>`);
  }
  if (profile.categorical_frequencies) {
    const tops = profile.categorical_frequencies
      .slice(0, 5)
      .map(([value, count]) => `${escapeHtml(value)} (${count})`)
      .join(", ");
    rows.push(`<dt>top values</dt><dd>${tops}</dd>`);
  }
  return `<dl class="profile"><dt>attribute</dt><dd>${escapeHtml(profile.attribute)}</dd>${rows.join("")}</dl>`;
}

/** Drill-down: the two profiles side by side plus the value-mapping preview. */
export function renderCellDetail(
  source: ProfileDict,
  target: ProfileDict,
  mapping: ValueMappingDict | null,
): string {
  const mappingRows = mapping
    ? mapping.pairs
        .map(
          (p) =>
            `<tr><td>${escapeHtml(p.from)}</td><td>&rarr;</td><td>${escapeHtml(p.to)}</td>` +
            `<td>${p.similarity.toFixed(2)}</td></tr>`,
        )
        .join("")
    : "";
  const transform = mapping?.transform
    ? `<p class="transform">scale ${mapping.transform.scale}, offset ${mapping.transform.offset}</p>`
    : "";
  return (
    `<div class="detail">` +
    `<div class="side">${renderProfile(source)}</div>` +
    `<div class="side">${renderProfile(target)}</div>` +
    `<div class="value-map"><table>${mappingRows}</table>${transform}</div>` +
    `</div>`
  );
}

export function renderMatcherList(listing: MatcherListing): string {
  const rows = listing.matchers
    .map((m) => {
      const weight = listing.weights.weights[m.id];
      const weightText = weight !== undefined ? weight.toFixed(3) : "&mdash;";
      return (
        `<tr data-matcher="${escapeHtml(m.id)}"><td>${escapeHtml(m.id)}</td>` +
        `<td>${escapeHtml(m.kind)}</td><td class="badge">${escapeHtml(matcherBadge(m))}</td>` +
        `<td>${weightText}</td><td><button data-remove="${escapeHtml(m.id)}">remove</button></td></tr>`
      );
    })
    .join("");
  return `<table class="matchers"><thead><tr><th>id</th><th>kind</th><th>status</th><th>weight</th><th></th></tr></thead><tbody>${rows}</tbody></table>`;
}

function svgPolygon(points: [number, number][], cx: number, cy: number, cls: string): string {
  const attr = points.map(([x, y]) => `${(cx + x).toFixed(1)},${(cy + y).toFixed(1)}`).join(" ");
  return `<polygon class="${cls}" points="${attr}"></polygon>`;
}

export function renderRadar(chart: RadarChart): string {
  if (chart.notice) {
    return `<p class="notice">${escapeHtml(chart.notice)}</p>`;
  }
  const size = chart.radius * 2 + 40;
  const cx = size / 2;
  const cy = size / 2;
  const rings = [0.25, 0.5, 0.75, 1.0]
    .map((f) => `<circle cx="${cx}" cy="${cy}" r="${chart.radius * f}" class="ring"></circle>`)
    .join("");
  const polygons = chart.series
    .map((s, i) => svgPolygon(s.points, cx, cy, `series series-${i}`))
    .join("");
  const legend = chart.series
    .map((s) => `<li data-matcher="${escapeHtml(s.matcher)}">${escapeHtml(s.matcher)}</li>`)
    .join("");
  return (
    `<svg viewBox="0 0 ${size} ${size}" class="radar">${rings}${polygons}</svg>` +
    `<ul class="legend">${legend}</ul>`
  );
}

export function renderBreakdown(chart: BreakdownChart): string {
  if (chart.notice) {
    return `<p class="notice">${escapeHtml(chart.notice)}</p>`;
  }
  const bars = chart.bars
    .map((bar) => {
      const segments = bar.segments
        .map(
          (seg) =>
            `<div class="segment bucket-${escapeHtml(seg.bucket)}" style="width:${(seg.fraction * 100).toFixed(1)}%"` +
            ` title="${escapeHtml(seg.bucket)}: ${seg.count}">${seg.count > 0 ? seg.count : ""}</div>`,
        )
        .join("");
      return `<div class="bar" data-matcher="${escapeHtml(bar.matcher)}"><span class="label">${escapeHtml(bar.matcher)}</span><div class="track">${segments}</div></div>`;
    })
    .join("");
  return `<div class="breakdown">${bars}</div>`;
}

export function renderUpset(chart: UpsetChart): string {
  if (chart.notice) {
    return `<p class="notice">${escapeHtml(chart.notice)}</p>`;
  }
  const maxCount = Math.max(1, ...chart.columns.map((c) => c.count));
  const columns = chart.columns
    .map((col) => {
      const height = ((col.count / maxCount) * 100).toFixed(1);
      const dots = col.dots
        .map((on, i) => `<span class="dot ${on ? "on" : "off"}" data-matcher="${escapeHtml(chart.matcherRows[i])}"></span>`)
        .join("");
      const label = col.matchers.length > 0 ? col.matchers.join(" &amp; ") : "none";
      return (
        `<div class="upset-col" title="${label}">` +
        `<div class="bar" style="height:${height}%"><span class="count">${col.count}</span></div>` +
        `<div class="dots">${dots}</div></div>`
      );
    })
    .join("");
  const rows = chart.matcherRows.map((m) => `<li>${escapeHtml(m)}</li>`).join("");
  return `<div class="upset"><div class="columns">${columns}</div><ul class="rows">${rows}</ul></div>`;
}

export function renderProvenance(events: ProvenanceEventDict[]): string {
  const items = [...events]
    .sort((a, b) => b.seq - a.seq)
    .slice(0, 50)
    .map(
      (e) =>
        `<li><span class="seq">#${e.seq}</span> <span class="op">${escapeHtml(e.op)}</span>` +
        ` <span class="actor">${escapeHtml(e.actor)}</span>` +
        ` <time>${escapeHtml(e.timestamp)}</time></li>`,
    )
    .join("");
  return `<ol class="provenance">${items}</ol>`;
}

export function renderExportLinks(exportUrl: (kind: string) => string): string {
  const kinds = ["ground_truth_csv", "mapping_spec", "harmonized_csv", "provenance"];
  const links = kinds
    .map((kind) => `<a download href="${exportUrl(kind)}" data-kind="${kind}">${kind}</a>`)
    .join("");
  return `<nav class="exports">${links}</nav>`;
}
