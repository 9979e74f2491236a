"""Command-line entry points: serve, match, benchmark, export."""

from __future__ import annotations

import json
import shlex
import sys
from pathlib import Path

import click

from .bench import build_session, run_benchmark
from .engine import BUILTIN_MATCHER_IDS, MatcherSpec
from .errors import MatchbenchError
from .session import SessionStore


def parse_matcher_option(value: str) -> MatcherSpec:
    """Builtin matchers by name; external ones as 'id=command line'."""
    if "=" in value:
        matcher_id, command = value.split("=", 1)
        return MatcherSpec(id=matcher_id.strip(), kind="external", command=shlex.split(command))
    return MatcherSpec(id=value.strip())


def _specs_from_options(matchers: tuple[str, ...]) -> list[MatcherSpec]:
    if not matchers:
        return [MatcherSpec(id=m) for m in BUILTIN_MATCHER_IDS]
    return [parse_matcher_option(m) for m in matchers]


@click.group()
@click.version_option(package_name="matchbench", prog_name="matchbench")
def main() -> None:
    """Schema-matching curation and benchmarking toolkit."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=None, help="Defaults to $MATCHBENCH_PORT or 8642.")
@click.option("--data-dir", default=None, help="Session root; defaults to $MATCHBENCH_DATA_DIR.")
def serve(host: str, port: int | None, data_dir: str | None) -> None:
    """Run the HTTP API server."""
    from .service import run_server

    run_server(host=host, port=port, data_dir=data_dir)


@main.command()
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@click.argument("target", type=click.Path(exists=True, dir_okay=False))
@click.option("--matcher", "-m", "matchers", multiple=True,
              help="Matcher id, or 'id=command' for an external plugin. Repeatable.")
@click.option("--cutoff", type=float, default=None, help="Aggregate display cutoff.")
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None,
              help="Write candidates JSON here instead of stdout.")
def match(source: str, target: str, matchers: tuple[str, ...], cutoff: float | None, out: str | None) -> None:
    """Match two CSVs headlessly and emit the candidate list as JSON."""
    try:
        session = build_session(source, target, _specs_from_options(matchers), session_id="cli-match")
        page = session.filtered_candidates(cutoff=cutoff)
        doc = {
            "task": {"source": session.source_name, "target": session.target_name},
            "candidates": [c.to_dict() for c in page],
            "total": len(page),
            "matchers": [m.to_dict() for m in session.matchers],
            "weights": session.weights.to_dict(),
        }
    except MatchbenchError as exc:
        raise click.ClickException(str(exc))
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


@main.command()
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@click.argument("target", type=click.Path(exists=True, dir_okay=False))
@click.argument("ground_truth", type=click.Path(exists=True, dir_okay=False))
@click.option("--matcher", "-m", "matchers", multiple=True,
              help="Matcher id, or 'id=command' for an external plugin. Repeatable.")
@click.option("--k", type=int, default=10, show_default=True, help="Rank cutoff for recall/consensus.")
@click.option("--outdir", "-o", type=click.Path(file_okay=False), default="benchmark_out",
              show_default=True, help="Where report.json, metrics.csv, and figures land.")
def benchmark(source: str, target: str, ground_truth: str, matchers: tuple[str, ...],
              k: int, outdir: str) -> None:
    """Evaluate matchers against a ground-truth CSV and render a report."""
    from .report import render_report_files

    try:
        doc, _session = run_benchmark(source, target, ground_truth, _specs_from_options(matchers), k=k)
        paths = render_report_files(doc, outdir)
    except MatchbenchError as exc:
        raise click.ClickException(str(exc))

    if "flag" in doc["metrics"]:
        click.echo(f"warning: {doc['metrics']['flag']}", err=True)
    for matcher in sorted(doc["metrics"]["per_matcher"]):
        mm = doc["metrics"]["per_matcher"][matcher]
        click.echo(
            f"{matcher}: mrr={mm['mrr']:.3f} p@1={mm['precision_at_1']:.3f} "
            f"recall@{k}={mm['recall_at_k']:.3f} f1={mm['f1']:.3f}"
        )
    click.echo(f"report: {paths['report']}")


@main.command()
@click.argument("session_id")
@click.argument("kind", type=click.Choice(["harmonized_csv", "mapping_spec", "ground_truth_csv", "provenance"]))
@click.option("--data-dir", default=None, help="Session root; defaults to $MATCHBENCH_DATA_DIR.")
@click.option("--out", "-o", type=click.Path(dir_okay=False), default=None,
              help="Output file; stdout when omitted.")
def export(session_id: str, kind: str, data_dir: str | None, out: str | None) -> None:
    """Export a stored session artifact."""
    try:
        store = SessionStore(data_dir)
        payload = store.get(session_id).export(kind)
    except MatchbenchError as exc:
        raise click.ClickException(str(exc))
    if out:
        Path(out).write_bytes(payload)
        click.echo(f"wrote {out}")
    else:
        sys.stdout.buffer.write(payload)


if __name__ == "__main__":
    main()
