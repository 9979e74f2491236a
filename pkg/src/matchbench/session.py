"""Event-sourced curation sessions: decisions, provenance, import/export.

A session's persistent form is a directory: the raw CSVs, a small meta file,
a snapshot of the state that existed before any event (`initial.json`), and
an append-only JSON-lines event log. Current state is always the fold of the
log over the initial snapshot — loading a session *is* a replay, so the
replay invariant holds by construction.

Matcher runs are themselves events whose payloads carry the produced score
table; replay therefore never re-executes a plugin and stays pure even for
external matchers.
"""

from __future__ import annotations

import csv
import io
import json
import os
import re
import threading
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from .engine import (
    STATUS_ACCEPTED,
    STATUS_AUTO_ACCEPTED,
    STATUS_FLAGGED,
    STATUS_REJECTED,
    STATUS_SUGGESTED,
    Candidate,
    EngineConfig,
    MatcherSpec,
    WeightVector,
    aggregate_score,
    assemble_candidates,
    detect_easy_matches,
    update_weights,
)
from .errors import (
    ConflictError,
    ExportError,
    UnknownAttributeError,
    UnknownCandidateError,
    UnknownMatcherError,
    UnknownSessionError,
    ValidationError,
)
from .ingest import Dataset, Ontology, assign_groups, infer_ontology, load_csv, profile_dataset
from .matchers import build_views, score_table
from .metrics import (
    GroundTruth,
    compute_metrics,
    consensus_sets,
    rank_breakdown,
    ranked_lists_from_candidates,
)
from .valuemap import ValueMapping, format_number, harmonize

OPS = (
    "accept",
    "reject",
    "flag",
    "note",
    "edit_value_map",
    "set_threshold",
    "add_matcher",
    "remove_matcher",
    "rerun",
    "import",
    "export",
)

DECISION_ACTIONS = ("accept", "reject", "flag", "note")

GT_HEADER = ["source", "target", "label", "actor", "timestamp"]
MAPPING_SPEC_VERSION = 1

_SESSION_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_-]*$")


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def _dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, ensure_ascii=False)


@dataclass
class ProvenanceEvent:
    seq: int
    timestamp: str
    actor: str
    op: str
    payload: dict

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "timestamp": self.timestamp,
            "actor": self.actor,
            "op": self.op,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProvenanceEvent":
        return cls(seq=d["seq"], timestamp=d["timestamp"], actor=d["actor"], op=d["op"], payload=d["payload"])


@dataclass
class GtEntry:
    source: str
    target: str
    label: str  # "accept" | "reject"
    actor: str
    timestamp: str

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "label": self.label,
            "actor": self.actor,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GtEntry":
        return cls(**d)


class Session:
    """One curation task: datasets, candidates, weights, decisions, provenance.

    All mutations funnel through :meth:`_record`, which assigns the next
    gapless sequence number, applies the event to in-memory state, and appends
    it to the on-disk log when the session is bound to a directory. Replay
    uses the same application code, so live state and replayed state cannot
    drift apart.
    """

    def __init__(self, session_id: str, config: EngineConfig | None = None, created: str | None = None):
        if not _SESSION_ID.match(session_id):
            raise ValidationError(f"invalid session id {session_id!r}")
        self.id = session_id
        self.config = config or EngineConfig()
        self.initial_config = self.config.to_dict()
        self.created = created or now_iso()
        self.lock = threading.RLock()

        self.source: Dataset | None = None
        self.target: Dataset | None = None
        self.source_raw: bytes | None = None
        self.target_raw: bytes | None = None
        self.source_name = "source.csv"
        self.target_name = "target.csv"
        self.source_profiles: dict = {}
        self.target_profiles: dict = {}
        self.source_ontology: Ontology | None = None
        self.target_ontology: Ontology | None = None
        self.source_views: dict = {}
        self.target_views: dict = {}

        self.matchers: list[MatcherSpec] = []
        self.weights = WeightVector(weights={}, learning_rate=0.1)
        self.score_tables: dict[str, dict[str, dict[str, float]]] = {}
        self.candidates: list[Candidate] = []
        self.gt: dict[tuple[str, str], GtEntry] = {}
        self.value_maps: dict[tuple[str, str], ValueMapping] = {}
        self.events: list[ProvenanceEvent] = []

        self.task_created: str | None = None
        self.persist_dir: Path | None = None
        self._initial: dict | None = None  # state snapshot taken at create_task, before any event

    # ------------------------------------------------------------------ task

    @property
    def has_task(self) -> bool:
        return self.source is not None

    def _require_task(self) -> None:
        if not self.has_task:
            raise ValidationError("session has no task; upload datasets first")

    def _attach_datasets(self, source_bytes: bytes, target_bytes: bytes) -> None:
        source = load_csv(source_bytes, side="source")
        target = load_csv(target_bytes, side="target")
        self.source, self.target = source, target
        self.source_raw, self.target_raw = source_bytes, target_bytes
        bins = self.config.histogram_bins
        self.source_profiles = profile_dataset(source, bins=bins)
        self.target_profiles = profile_dataset(target, bins=bins)
        self.source_ontology = infer_ontology(source)
        self.target_ontology = infer_ontology(target)
        assign_groups(source, self.source_ontology)
        assign_groups(target, self.target_ontology)
        self.source_views = build_views(source)
        self.target_views = build_views(target)

    def create_task(
        self,
        source_bytes: bytes,
        target_bytes: bytes,
        source_name: str = "source.csv",
        target_name: str = "target.csv",
    ) -> list[Candidate]:
        """Load both datasets, profile them, and auto-accept the easy matches.

        This establishes the initial (pre-event) state; matchers are added
        afterwards as `add_matcher` events. A session carries exactly one
        task.
        """
        with self.lock:
            if self.has_task:
                raise ConflictError("session already has a task")
            if self.events:
                raise ConflictError("cannot create a task after events were recorded")
            self._attach_datasets(source_bytes, target_bytes)
            self.source_name, self.target_name = source_name, target_name
            self.task_created = now_iso()

            easy = detect_easy_matches(self.source, self.target, self.config)
            self.candidates = easy
            for cand in easy:
                cand.aggregate = cand.scores["name_edit"]
                self.gt[(cand.source, cand.target)] = GtEntry(
                    source=cand.source,
                    target=cand.target,
                    label="accept",
                    actor="auto",
                    timestamp=self.task_created,
                )
            self._initial = {
                "task_created": self.task_created,
                "source_name": self.source_name,
                "target_name": self.target_name,
                "candidates": [c.to_dict() for c in self.candidates],
                "gt": [self.gt[p].to_dict() for p in sorted(self.gt)],
            }
            self._persist_initial()
            return easy

    # ------------------------------------------------------------ event core

    def _record(self, op: str, payload: dict, actor: str, timestamp: str | None = None) -> ProvenanceEvent:
        event = ProvenanceEvent(
            seq=len(self.events) + 1,
            timestamp=timestamp or now_iso(),
            actor=actor,
            op=op,
            payload=payload,
        )
        self._apply(event)
        self.events.append(event)
        self._persist_event(event)
        return event

    def _apply(self, event: ProvenanceEvent) -> None:
        """Pure state transition; every op here depends only on prior state and the event."""
        op, payload = event.op, event.payload
        if op in ("accept", "reject"):
            self._apply_verdict(op, payload)
        elif op == "flag":
            cand = self._candidate(payload["source"], payload["target"])
            cand.status = STATUS_FLAGGED
            cand.note = payload.get("note")
            self.gt.pop((cand.source, cand.target), None)
        elif op == "note":
            cand = self._candidate(payload["source"], payload["target"])
            cand.note = payload["note"]
            if cand.status == STATUS_SUGGESTED:
                cand.status = STATUS_FLAGGED
        elif op == "edit_value_map":
            vm = ValueMapping.from_dict(payload["mapping"])
            self.value_maps[(vm.source_attr, vm.target_attr)] = vm
        elif op == "set_threshold":
            self.config = replace(self.config, **{payload["name"]: payload["value"]})
        elif op == "add_matcher":
            self._apply_add_matcher(payload)
        elif op == "remove_matcher":
            self._apply_remove_matcher(payload["matcher_id"])
        elif op == "rerun":
            self._reassemble()
        elif op in ("import", "export"):
            pass  # bookkeeping only; the contained decisions are their own events
        else:  # pragma: no cover - _record validates ops
            raise ValidationError(f"unknown op {op!r}")

    def _apply_verdict(self, op: str, payload: dict) -> None:
        pair = (payload["source"], payload["target"])
        cand = self._candidate(*pair, create=payload.get("create", False))
        label = "accept" if op == "accept" else "reject"
        self.gt[pair] = GtEntry(
            source=pair[0],
            target=pair[1],
            label=label,
            actor=payload["gt_actor"],
            timestamp=payload["gt_timestamp"],
        )
        if payload.get("note") is not None:
            cand.note = payload["note"]

        settled = (STATUS_ACCEPTED, STATUS_AUTO_ACCEPTED) if op == "accept" else (STATUS_REJECTED,)
        if cand.status in settled:
            return  # metadata refresh only (e.g. re-import); no new feedback signal
        cand.status = STATUS_ACCEPTED if op == "accept" else STATUS_REJECTED
        if self.weights.weights:
            self.weights = update_weights(self.weights, op, pair, self.candidates, top_k=self.config.top_k)
            self._refresh_aggregates()

    def _apply_add_matcher(self, payload: dict) -> None:
        spec = MatcherSpec.from_dict(payload["spec"])
        self.matchers.append(spec)
        table = payload.get("table")
        if table is None:
            return  # failed matcher: recorded with its reason, excluded from the ensemble
        self.score_tables[spec.id] = table
        self.weights = self.weights.with_matcher(spec.id)
        self._reassemble()

    def _apply_remove_matcher(self, matcher_id: str) -> None:
        self.matchers = [m for m in self.matchers if m.id != matcher_id]
        if matcher_id in self.score_tables:
            del self.score_tables[matcher_id]
            self.weights = self.weights.without_matcher(matcher_id)
            for cand in self.candidates:
                cand.scores.pop(matcher_id, None)
            self._reassemble()

    # ------------------------------------------------------- derived updates

    def _source_order(self) -> list[str]:
        return self.source.attribute_names() if self.source else []

    def _sort_candidates(self) -> None:
        order = {name: i for i, name in enumerate(self._source_order())}
        self.candidates.sort(key=lambda c: (order.get(c.source, len(order)), -c.aggregate, c.target))

    def _refresh_aggregates(self) -> None:
        for cand in self.candidates:
            cand.aggregate = aggregate_score(cand.scores, self.weights)
        self._sort_candidates()

    def _reassemble(self) -> None:
        """Rebuild the candidate list from the score tables, keeping decisions.

        Fresh suggestions come from the per-matcher top-k union; previously
        decided or flagged pairs survive even when no matcher still proposes
        them, with their score maps refreshed from the tables.
        """
        prev = {(c.source, c.target): c for c in self.candidates}
        fresh = assemble_candidates(self.score_tables, self.weights, self._source_order(), self.config.top_k)
        by_pair: dict[tuple[str, str], Candidate] = {}
        for cand in fresh:
            old = prev.get((cand.source, cand.target))
            if old is not None:
                cand.status, cand.note = old.status, old.note
            by_pair[(cand.source, cand.target)] = cand
        for pair, old in prev.items():
            if pair in by_pair or old.status == STATUS_SUGGESTED:
                continue
            scores = {}
            for matcher_id, table in self.score_tables.items():
                row = table.get(pair[0])
                if row is not None and pair[1] in row:
                    scores[matcher_id] = row[pair[1]]
            old.scores = scores
            old.aggregate = aggregate_score(scores, self.weights)
            by_pair[pair] = old
        self.candidates = list(by_pair.values())
        self._sort_candidates()

    # ------------------------------------------------------------- decisions

    def _candidate(self, source: str, target: str, create: bool = False) -> Candidate:
        for cand in self.candidates:
            if cand.source == source and cand.target == target:
                return cand
        if create:
            scores = {}
            for matcher_id, table in self.score_tables.items():
                row = table.get(source)
                if row is not None and target in row:
                    scores[matcher_id] = row[target]
            cand = Candidate(source=source, target=target, scores=scores,
                             aggregate=aggregate_score(scores, self.weights))
            self.candidates.append(cand)
            self._sort_candidates()
            return cand
        raise UnknownCandidateError(f"no candidate for pair ({source!r}, {target!r})")

    def _check_accept_conflict(self, source: str, target: str) -> None:
        for cand in self.candidates:
            if cand.status not in (STATUS_ACCEPTED, STATUS_AUTO_ACCEPTED):
                continue
            if cand.source == source and cand.target != target:
                raise ConflictError(
                    f"source {source!r} already accepted with {cand.target!r}; revert it first"
                )
            if cand.target == target and cand.source != source:
                raise ConflictError(
                    f"target {target!r} already accepted with {cand.source!r}; revert it first"
                )

    def apply_decision(
        self,
        pair: tuple[str, str],
        action: str,
        note: str | None = None,
        actor: str = "curator",
        gt_actor: str | None = None,
        gt_timestamp: str | None = None,
        create_missing: bool = False,
    ) -> ProvenanceEvent | None:
        """Accept/reject/flag/annotate a candidate; returns None when idempotent.

        ``gt_actor``/``gt_timestamp`` override the ground-truth attribution
        (used by import so a re-export reproduces the original file); manual
        decisions attribute the entry to the acting curator at event time.
        """
        if action not in DECISION_ACTIONS:
            raise ValidationError(f"unknown decision action {action!r}")
        source, target = pair
        with self.lock:
            self._require_task()
            try:
                cand = self._candidate(source, target)
            except UnknownCandidateError:
                if not create_missing:
                    raise
                if source not in self.source_views:
                    raise UnknownAttributeError(f"no attribute named {source!r} on the source side")
                if target not in self.target_views:
                    raise UnknownAttributeError(f"no attribute named {target!r} on the target side")
                cand = None

            ts = now_iso()
            if action in ("accept", "reject"):
                explicit = gt_actor is not None or gt_timestamp is not None
                entry_actor = gt_actor if gt_actor is not None else actor
                entry_ts = gt_timestamp if gt_timestamp is not None else ts
                if cand is not None and self._verdict_is_noop(cand, action, note, entry_actor, entry_ts, explicit):
                    return None
                if action == "accept":
                    self._check_accept_conflict(source, target)
                payload = {"source": source, "target": target, "gt_actor": entry_actor, "gt_timestamp": entry_ts}
                if note is not None:
                    payload["note"] = note
                if cand is None:
                    payload["create"] = True
                return self._record(action, payload, actor, timestamp=ts)

            if cand is None:
                raise UnknownCandidateError(f"no candidate for pair ({source!r}, {target!r})")
            if action == "flag":
                if cand.status == STATUS_FLAGGED and cand.note == note:
                    return None
                return self._record("flag", {"source": source, "target": target, "note": note}, actor, timestamp=ts)
            # note
            if note is None:
                raise ValidationError("a note decision needs note text")
            if cand.note == note and cand.status != STATUS_SUGGESTED:
                return None
            return self._record("note", {"source": source, "target": target, "note": note}, actor, timestamp=ts)

    def _verdict_is_noop(
        self, cand: Candidate, action: str, note: str | None, entry_actor: str, entry_ts: str, explicit: bool
    ) -> bool:
        entry = self.gt.get((cand.source, cand.target))
        if action == "accept":
            if cand.status not in (STATUS_ACCEPTED, STATUS_AUTO_ACCEPTED):
                return False
            if entry is None or entry.label != "accept":
                return False
        else:
            if cand.status != STATUS_REJECTED:
                return False
            if entry is None or entry.label != "reject":
                return False
        if explicit and (entry.actor != entry_actor or entry.timestamp != entry_ts):
            return False
        return note is None or cand.note == note

    # -------------------------------------------------------------- matchers

    def matcher(self, matcher_id: str) -> MatcherSpec:
        for spec in self.matchers:
            if spec.id == matcher_id:
                return spec
        raise UnknownMatcherError(f"no matcher named {matcher_id!r} in this session")

    def add_matcher(self, spec: MatcherSpec, actor: str = "curator") -> MatcherSpec:
        """Run one matcher over the task and record its table as an event.

        External matchers that crash, time out, or break protocol are
        recorded as failed (reason preserved) and excluded from the ensemble;
        everything else proceeds.
        """
        with self.lock:
            self._require_task()
            if any(m.id == spec.id for m in self.matchers):
                raise ConflictError(f"matcher {spec.id!r} already registered")

            table = None
            if spec.kind == "builtin":
                table = score_table(spec.id, self.source_views, self.target_views)
                spec.status, spec.failure_reason = "ready", None
            else:
                from .plugin_host import run_external_matcher

                try:
                    table = run_external_matcher(
                        spec, self.source_views, self.target_views, timeout=self.config.plugin_timeout
                    )
                    spec.status, spec.failure_reason = "ready", None
                except Exception as exc:
                    spec.status, spec.failure_reason = "failed", str(exc)

            self._record("add_matcher", {"spec": spec.to_dict(), "table": table}, actor)
            return self.matcher(spec.id)

    def remove_matcher(self, matcher_id: str, actor: str = "curator") -> None:
        with self.lock:
            spec = self.matcher(matcher_id)
            if spec.status == "ready" and len(self.score_tables) == 1:
                raise ValidationError("cannot remove the last working matcher")
            self._record("remove_matcher", {"matcher_id": matcher_id}, actor)

    def rerun(self, actor: str = "curator") -> None:
        """Re-assemble candidates from the stored tables under current weights/config."""
        with self.lock:
            self._require_task()
            self._record("rerun", {}, actor)

    def set_threshold(self, name: str, value: float, actor: str = "curator") -> None:
        if name not in ("display_cutoff", "easy_threshold"):
            raise ValidationError(f"unknown threshold {name!r}")
        with self.lock:
            replace(self.config, **{name: value})  # validate before recording
            if getattr(self.config, name) == value:
                return
            self._record("set_threshold", {"name": name, "value": value}, actor)

    def set_value_mapping(self, vm: ValueMapping, actor: str = "curator") -> None:
        with self.lock:
            self._require_task()
            if vm.source_attr not in self.source_views:
                raise UnknownAttributeError(f"no attribute named {vm.source_attr!r} on the source side")
            if vm.target_attr not in self.target_views:
                raise UnknownAttributeError(f"no attribute named {vm.target_attr!r} on the target side")
            existing = self.value_maps.get((vm.source_attr, vm.target_attr))
            if existing is not None and existing.to_dict() == vm.to_dict():
                return
            self._record("edit_value_map", {"mapping": vm.to_dict()}, actor)

    # ----------------------------------------------------------------- reads

    def accepted_pairs(self) -> list[tuple[str, str]]:
        return sorted(p for p, e in self.gt.items() if e.label == "accept")

    def ground_truth(self) -> GroundTruth:
        accepted = {p for p, e in self.gt.items() if e.label == "accept"}
        rejected = {p for p, e in self.gt.items() if e.label == "reject"}
        return GroundTruth(accepted=accepted, rejected=rejected, snapshot_seq=len(self.events))

    def active_matcher_ids(self) -> list[str]:
        return [m.id for m in self.matchers if m.status == "ready"]

    def filtered_candidates(
        self, cutoff: float | None = None, group: str | None = None, source: str | None = None
    ) -> list[Candidate]:
        """Read-only candidate page: aggregate >= cutoff, optional group/source filters."""
        self._require_task()
        cutoff = self.config.display_cutoff if cutoff is None else cutoff
        members: set[str] | None = None
        if group is not None:
            labelled = dict(self.target_ontology.groups) if self.target_ontology else {}
            if group not in labelled:
                raise ValidationError(f"unknown ontology group {group!r}")
            members = set(labelled[group])
        out = []
        for cand in self.candidates:
            if cand.aggregate < cutoff:
                continue
            if source is not None and cand.source != source:
                continue
            if members is not None and cand.target not in members:
                continue
            out.append(cand)
        return out

    def metrics(self, k: int | None = None):
        self._require_task()
        gt = self.ground_truth()
        ranked = ranked_lists_from_candidates(self.candidates, self.active_matcher_ids())
        trivial = sum(1 for c in self.candidates if c.status == STATUS_AUTO_ACCEPTED)
        manual = sum(1 for c in self.candidates if c.status == STATUS_ACCEPTED)
        return compute_metrics(gt, ranked, k=k or self.config.top_k, trivial_accepts=trivial, manual_accepts=manual)

    def consensus(self, k: int | None = None):
        self._require_task()
        ranked = ranked_lists_from_candidates(self.candidates, self.active_matcher_ids())
        return consensus_sets(self.ground_truth(), ranked, k=k or self.config.top_k)

    def breakdown(self):
        self._require_task()
        ranked = ranked_lists_from_candidates(self.candidates, self.active_matcher_ids())
        return rank_breakdown(self.ground_truth(), ranked)

    def state_fingerprint(self) -> dict:
        """Everything a replay must reproduce, in a comparable form."""
        return {
            "config": self.config.to_dict(),
            "matchers": [m.to_dict() for m in self.matchers],
            "weights": self.weights.to_dict(),
            "candidates": [c.to_dict() for c in self.candidates],
            "gt": [self.gt[p].to_dict() for p in sorted(self.gt)],
            "value_maps": [self.value_maps[p].to_dict() for p in sorted(self.value_maps)],
            "seq": len(self.events),
        }

    # --------------------------------------------------------------- exports

    def export(self, kind: str) -> bytes:
        """Render one of the four artifacts; identical state yields identical bytes."""
        with self.lock:
            if kind == "provenance":
                return "".join(_dumps(e.to_dict()) + "\n" for e in self.events).encode("utf-8")
            self._require_task()
            if kind == "ground_truth_csv":
                return self._export_ground_truth()
            if kind == "mapping_spec":
                return self._export_mapping_spec()
            if kind == "harmonized_csv":
                return self._export_harmonized()
            raise ValidationError(f"unknown export kind {kind!r}")

    def _export_ground_truth(self) -> bytes:
        if not self.gt:
            raise ExportError("no ground truth to export")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(GT_HEADER)
        for pair in sorted(self.gt):
            e = self.gt[pair]
            writer.writerow([e.source, e.target, e.label, e.actor, e.timestamp])
        return buf.getvalue().encode("utf-8")

    def _accepted_candidates(self) -> list[Candidate]:
        return [c for c in self.candidates if c.status in (STATUS_ACCEPTED, STATUS_AUTO_ACCEPTED)]

    def _export_mapping_spec(self) -> bytes:
        accepted = self._accepted_candidates()
        if not accepted:
            raise ExportError("no accepted mappings to export")
        attribute_mappings = []
        for cand in sorted(accepted, key=lambda c: (c.source, c.target)):
            entry = {"source": cand.source, "target": cand.target, "status": cand.status}
            if cand.note is not None:
                entry["note"] = cand.note
            attribute_mappings.append(entry)
        value_mappings = []
        for pair in sorted(self.value_maps):
            vm = self.value_maps[pair]
            entry = {
                "source": vm.source_attr,
                "target": vm.target_attr,
                "pairs": [{"from": f, "to": t} for f, t, _ in vm.pairs],
            }
            if vm.transform is not None:
                entry["transform"] = {"scale": vm.transform[0], "offset": vm.transform[1]}
            value_mappings.append(entry)
        doc = {
            "version": MAPPING_SPEC_VERSION,
            "task": {"source": self.source_name, "target": self.target_name},
            "attribute_mappings": attribute_mappings,
            "value_mappings": value_mappings,
        }
        return (json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")

    def _export_harmonized(self) -> bytes:
        accepted = self._accepted_candidates()
        if not accepted:
            raise ExportError("no accepted mappings to harmonize with")
        mappings = [(c.source, c.target) for c in sorted(accepted, key=lambda c: (c.source, c.target))]
        harmonized = harmonize(self.source, mappings, self.value_maps)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(harmonized.attribute_names())
        for i in range(harmonized.row_count):
            writer.writerow([harmonized.columns[name][i] for name in harmonized.attribute_names()])
        return buf.getvalue().encode("utf-8")

    # --------------------------------------------------------------- imports

    def import_ground_truth(self, data: bytes, actor: str = "import") -> dict:
        """Apply a ground-truth CSV; conflicts and unknown names are reported, not fatal.

        Row actor/timestamp are preserved into the live ground truth so a
        re-export reproduces the imported file byte for byte.
        """
        with self.lock:
            self._require_task()
            text = data.decode("utf-8-sig")
            rows = list(csv.reader(io.StringIO(text, newline="")))
            if not rows or rows[0] != GT_HEADER:
                raise ValidationError(f"ground truth header must be {','.join(GT_HEADER)}")
            applied, skipped = 0, []
            for row in rows[1:]:
                if not row:
                    continue
                if len(row) != len(GT_HEADER):
                    skipped.append({"row": row, "reason": "wrong field count"})
                    continue
                source, target, label, gt_actor, gt_ts = row
                if label not in ("accept", "reject"):
                    skipped.append({"row": row, "reason": f"unknown label {label!r}"})
                    continue
                try:
                    event = self.apply_decision(
                        (source, target),
                        label,
                        actor=actor,
                        gt_actor=gt_actor,
                        gt_timestamp=gt_ts,
                        create_missing=True,
                    )
                except (UnknownAttributeError, ConflictError) as exc:
                    skipped.append({"row": row, "reason": str(exc)})
                    continue
                if event is not None:
                    applied += 1
            report = {"kind": "ground_truth_csv", "applied": applied, "skipped": skipped}
            self._record("import", report, actor)
            return report

    def import_mapping_spec(self, data: bytes | dict, actor: str = "import") -> dict:
        with self.lock:
            self._require_task()
            doc = json.loads(data.decode("utf-8")) if isinstance(data, (bytes, bytearray)) else data
            if not isinstance(doc, dict) or doc.get("version") != MAPPING_SPEC_VERSION:
                raise ValidationError(f"expected a mapping spec with version {MAPPING_SPEC_VERSION}")
            applied, skipped = 0, []
            for entry in doc.get("attribute_mappings", []):
                source, target = entry.get("source"), entry.get("target")
                # A mapping spec carries no attribution, so an already-accepted
                # pair keeps its ground-truth actor/timestamp (only the note may change).
                existing = self.gt.get((source, target))
                keep = existing if existing is not None and existing.label == "accept" else None
                try:
                    event = self.apply_decision(
                        (source, target),
                        "accept",
                        note=entry.get("note"),
                        actor=actor,
                        gt_actor=keep.actor if keep else None,
                        gt_timestamp=keep.timestamp if keep else None,
                        create_missing=True,
                    )
                except (UnknownAttributeError, ConflictError) as exc:
                    skipped.append({"entry": entry, "reason": str(exc)})
                    continue
                if event is not None:
                    applied += 1
            for entry in doc.get("value_mappings", []):
                source, target = entry.get("source"), entry.get("target")
                transform = entry.get("transform")
                vm = ValueMapping(
                    source_attr=source,
                    target_attr=target,
                    pairs=[(p["from"], p["to"], 1.0) for p in entry.get("pairs", [])],
                    unmapped_source=[],
                    transform=(transform["scale"], transform["offset"]) if transform else None,
                )
                try:
                    before = len(self.events)
                    self.set_value_mapping(vm, actor=actor)
                    if len(self.events) > before:
                        applied += 1
                except UnknownAttributeError as exc:
                    skipped.append({"entry": entry, "reason": str(exc)})
            report = {"kind": "mapping_spec", "applied": applied, "skipped": skipped}
            self._record("import", report, actor)
            return report

    # ----------------------------------------------------------- persistence

    def bind_dir(self, directory: str | Path) -> None:
        """Attach a directory and write everything recorded so far."""
        self.persist_dir = Path(directory)
        self.persist_dir.mkdir(parents=True, exist_ok=True)
        (self.persist_dir / "meta.json").write_text(
            json.dumps(
                {"id": self.id, "created": self.created, "config": self.initial_config},
                indent=2,
                sort_keys=True,
            )
            + "\n",
            encoding="utf-8",
        )
        self._persist_initial()
        with open(self.persist_dir / "events.jsonl", "w", encoding="utf-8") as fh:
            for event in self.events:
                fh.write(_dumps(event.to_dict()) + "\n")

    def _persist_initial(self) -> None:
        if self.persist_dir is None or self._initial is None:
            return
        (self.persist_dir / "source.csv").write_bytes(self.source_raw)
        (self.persist_dir / "target.csv").write_bytes(self.target_raw)
        (self.persist_dir / "initial.json").write_text(
            json.dumps(self._initial, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    def _persist_event(self, event: ProvenanceEvent) -> None:
        if self.persist_dir is None:
            return
        with open(self.persist_dir / "events.jsonl", "a", encoding="utf-8") as fh:
            fh.write(_dumps(event.to_dict()) + "\n")


class SessionStore:
    """Registry of sessions rooted at a directory (MATCHBENCH_DATA_DIR by default)."""

    def __init__(self, root: str | Path | None = None):
        root = root or os.environ.get("MATCHBENCH_DATA_DIR") or "matchbench_data"
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, Session] = {}
        self.lock = threading.Lock()

    def create(self, session_id: str | None = None, config: EngineConfig | None = None) -> Session:
        session_id = session_id or uuid.uuid4().hex[:12]
        with self.lock:
            if session_id in self.sessions or (self.root / session_id).exists():
                raise ConflictError(f"session {session_id!r} already exists")
            session = Session(session_id, config=config)
            session.bind_dir(self.root / session_id)
            self.sessions[session_id] = session
            return session

    def get(self, session_id: str) -> Session:
        with self.lock:
            if session_id in self.sessions:
                return self.sessions[session_id]
        session = self.load(session_id)
        with self.lock:
            return self.sessions.setdefault(session_id, session)

    def load(self, session_id: str) -> Session:
        directory = self.root / session_id
        if not (directory / "meta.json").exists():
            raise UnknownSessionError(f"no session named {session_id!r}")
        return load_session_dir(directory)

    def ids(self) -> list[str]:
        on_disk = {p.name for p in self.root.iterdir() if p.is_dir() and (p / "meta.json").exists()}
        return sorted(on_disk | set(self.sessions))


def load_session_dir(directory: str | Path) -> Session:
    """Rebuild a session from disk by folding its event log over the initial state."""
    directory = Path(directory)
    meta = json.loads((directory / "meta.json").read_text(encoding="utf-8"))
    session = Session(meta["id"], config=EngineConfig.from_dict(meta["config"]), created=meta["created"])

    initial_path = directory / "initial.json"
    if initial_path.exists():
        initial = json.loads(initial_path.read_text(encoding="utf-8"))
        session._attach_datasets(
            (directory / "source.csv").read_bytes(), (directory / "target.csv").read_bytes()
        )
        session._initial = initial
        session.source_name = initial["source_name"]
        session.target_name = initial["target_name"]
        session.task_created = initial["task_created"]
        session.candidates = [Candidate.from_dict(c) for c in initial["candidates"]]
        for entry in initial["gt"]:
            e = GtEntry.from_dict(entry)
            session.gt[(e.source, e.target)] = e

    events_path = directory / "events.jsonl"
    if events_path.exists():
        with open(events_path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                event = ProvenanceEvent.from_dict(json.loads(line))
                session._apply(event)
                session.events.append(event)

    session.persist_dir = directory
    return session
