"""Benchmark report rendering: metrics CSV plus radar/breakdown/consensus figures."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import RANK_BUCKETS

RADAR_AXES = ("mrr", "precision_at_1", "recall_at_k", "f1")

METRICS_CSV_HEADER = ["matcher", "mrr", "precision_at_1", "recall_at_k", "f1"]


def write_metrics_csv(metrics_doc: dict, path: Path) -> None:
    """One row per matcher with the four headline metrics."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_CSV_HEADER)
        for matcher in sorted(metrics_doc["per_matcher"]):
            mm = metrics_doc["per_matcher"][matcher]
            writer.writerow([matcher] + [f"{mm[axis]:.6f}" for axis in RADAR_AXES])


def save_radar(metrics_doc: dict, path: Path) -> None:
    """Radar plot with one polygon per matcher over the four rank metrics."""
    matchers = sorted(metrics_doc["per_matcher"])
    angles = [2 * math.pi * i / len(RADAR_AXES) for i in range(len(RADAR_AXES))]
    angles_closed = angles + angles[:1]

    fig, ax = plt.subplots(figsize=(6, 6), subplot_kw={"projection": "polar"})
    for matcher in matchers:
        mm = metrics_doc["per_matcher"][matcher]
        values = [mm[axis] for axis in RADAR_AXES]
        ax.plot(angles_closed, values + values[:1], label=matcher, linewidth=1.5)
        ax.fill(angles_closed, values + values[:1], alpha=0.08)
    ax.set_xticks(angles)
    ax.set_xticklabels(RADAR_AXES)
    ax.set_ylim(0, 1)
    ax.set_title(f"matcher performance @k={metrics_doc['k']}")
    if matchers:
        ax.legend(loc="upper right", bbox_to_anchor=(1.3, 1.1), fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_breakdown(breakdown_doc: dict, path: Path) -> None:
    """Stacked bars: where each matcher ranked the accepted pairs."""
    matchers = sorted(breakdown_doc["per_matcher"])
    buckets = breakdown_doc.get("buckets", list(RANK_BUCKETS))
    colors = plt.get_cmap("viridis")(np.linspace(0.15, 0.9, len(buckets)))

    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(matchers)), 4))
    bottoms = np.zeros(len(matchers))
    for bucket, color in zip(buckets, colors):
        counts = np.array(
            [breakdown_doc["per_matcher"][m].get(bucket, 0) for m in matchers], dtype=float
        )
        ax.bar(matchers, counts, bottom=bottoms, label=f"rank {bucket}", color=color)
        bottoms += counts
    ax.set_ylabel("accepted pairs")
    ax.set_title("rank breakdown over ground truth")
    ax.legend(fontsize=8)
    plt.setp(ax.get_xticklabels(), rotation=20, ha="right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_consensus(consensus_doc: dict, path: Path) -> None:
    """UpSet-style figure: bars for subset sizes, dot matrix for membership."""
    subsets = consensus_doc["subsets"]
    matchers = sorted({m for entry in subsets for m in entry["matchers"]})

    fig, (ax_bars, ax_dots) = plt.subplots(
        2, 1, figsize=(max(6, 0.8 * max(1, len(subsets))), 6),
        sharex=True, gridspec_kw={"height_ratios": [2, 1]},
    )
    xs = np.arange(len(subsets))
    counts = [entry["count"] for entry in subsets]
    ax_bars.bar(xs, counts, color="#4c72b0")
    for x, count in zip(xs, counts):
        ax_bars.text(x, count, str(count), ha="center", va="bottom", fontsize=8)
    ax_bars.set_ylabel("accepted pairs")
    ax_bars.set_title(f"matcher consensus @k={consensus_doc['k']}")

    for x, entry in enumerate(subsets):
        members = set(entry["matchers"])
        for y, matcher in enumerate(matchers):
            inside = matcher in members
            ax_dots.plot(x, y, "o", markersize=7,
                         color="#333333" if inside else "#dddddd")
        ys = [matchers.index(m) for m in entry["matchers"]]
        if len(ys) > 1:
            ax_dots.plot([x, x], [min(ys), max(ys)], color="#333333", linewidth=1.5)
    ax_dots.set_yticks(range(len(matchers)))
    ax_dots.set_yticklabels(matchers, fontsize=8)
    ax_dots.set_xticks(xs)
    ax_dots.set_xticklabels([str(i + 1) for i in xs], fontsize=7)
    ax_dots.set_xlabel("consensus subset")
    ax_dots.set_ylim(-0.5, max(0.5, len(matchers) - 0.5))
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report_files(doc: dict, outdir: str | Path) -> dict[str, Path]:
    """Write the combined JSON report, the metrics CSV, and the three figures."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": outdir / "report.json",
        "metrics_csv": outdir / "metrics.csv",
        "radar": outdir / "radar.png",
        "breakdown": outdir / "breakdown.png",
        "consensus": outdir / "consensus.png",
    }
    paths["report"].write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    write_metrics_csv(doc["metrics"], paths["metrics_csv"])
    save_radar(doc["metrics"], paths["radar"])
    save_breakdown(doc["breakdown"], paths["breakdown"])
    save_consensus(doc["consensus"], paths["consensus"])
    return paths
