"""Host side of the external matcher protocol.

Matchers run as child processes speaking line-delimited JSON: the host writes
one `top_matches` request to stdin, the plugin answers with one line per
source attribute and a final `{"op": "done"}`, then exits 0. Any protocol
violation, crash, or timeout marks the matcher failed; plugin code is trusted
as-is (sandboxing is a documented non-goal).
"""

from __future__ import annotations

import json
import subprocess
from pathlib import Path

from .errors import PluginError
from .matchers import AttributeView

ScoreTable = dict[str, dict[str, float]]


def build_request(
    k: int,
    source_views: dict[str, AttributeView],
    target_views: dict[str, AttributeView],
) -> dict:
    def describe(views: dict[str, AttributeView]) -> list[dict]:
        return [
            {"name": v.name, "type": v.inferred_type, "samples": v.samples[:10]}
            for v in views.values()
        ]

    return {
        "op": "top_matches",
        "k": k,
        "source": describe(source_views),
        "target": describe(target_views),
    }


def parse_response(
    stdout: str,
    source_names: set[str],
    target_names: set[str],
    k: int,
) -> ScoreTable:
    table: ScoreTable = {}
    done = False
    for raw in stdout.splitlines():
        line = raw.strip()
        if not line:
            continue
        if done:
            break
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise PluginError(f"malformed response line: {line[:120]!r} ({exc})") from None
        if not isinstance(payload, dict):
            raise PluginError(f"malformed response line: expected object, got {line[:120]!r}")
        if payload.get("op") == "done":
            done = True
            continue

        source = payload.get("source")
        matches = payload.get("matches")
        if not isinstance(source, str) or not isinstance(matches, list):
            raise PluginError(f"malformed response line: {line[:120]!r}")
        if source not in source_names:
            raise PluginError(f"unknown source attribute {source!r}")
        if source in table:
            raise PluginError(f"duplicate response for source {source!r}")
        if len(matches) > k:
            raise PluginError(f"too many matches for {source!r} ({len(matches)} > k={k})")

        row: dict[str, float] = {}
        for match in matches:
            if not isinstance(match, dict):
                raise PluginError(f"malformed match entry for {source!r}")
            target = match.get("target")
            score = match.get("score")
            if not isinstance(target, str) or not isinstance(score, (int, float)):
                raise PluginError(f"malformed match entry for {source!r}: {match!r}")
            if target not in target_names:
                raise PluginError(f"unknown target attribute {target!r}")
            if not (0.0 <= score <= 1.0):
                raise PluginError(f"score out of range for ({source!r}, {target!r}): {score}")
            row[target] = float(score)
        table[source] = row

    if not done:
        raise PluginError("missing done line")
    return table


def run_external_matcher(
    spec,
    source_views: dict[str, AttributeView],
    target_views: dict[str, AttributeView],
    timeout: float = 300.0,
) -> ScoreTable:
    """Launch an external matcher, run the protocol once, and return its score table."""
    request = build_request(spec.top_k, source_views, target_views)
    try:
        proc = subprocess.Popen(
            spec.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
    except OSError as exc:
        raise PluginError(f"spawn failed: {exc}") from exc

    try:
        stdout, stderr = proc.communicate(json.dumps(request) + "\n", timeout=timeout)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.communicate()
        raise PluginError(f"timeout after {timeout}s") from None

    if proc.returncode != 0:
        tail = stderr.strip().splitlines()[-1] if stderr.strip() else ""
        detail = f": {tail}" if tail else ""
        raise PluginError(f"exited with code {proc.returncode}{detail}")

    return parse_response(stdout, set(source_views), set(target_views), spec.top_k)


def materialize_plugin(code: str, runner_command: list[str], workspace: Path, matcher_id: str) -> list[str]:
    """Persist a submitted code blob and return the launch command for it.

    The blob lands in the session workspace and runs through the configured
    runner; this is the documented trust boundary (no sandboxing).
    """
    workspace.mkdir(parents=True, exist_ok=True)
    path = workspace / f"matcher_{matcher_id}.py"
    path.write_text(code, encoding="utf-8")
    return list(runner_command) + [str(path)]
