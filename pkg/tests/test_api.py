from __future__ import annotations

import json
import time

import pytest
from fastapi.testclient import TestClient

from matchbench.service import create_app
from matchbench.session import SessionStore

from .conftest import SOURCE_CSV, TARGET_CSV, gt_csv_bytes


@pytest.fixture
def client(tmp_path):
    app = create_app(store=SessionStore(tmp_path / "data"))
    with TestClient(app) as c:
        yield c


def _wait_done(client, session_id, timeout=30.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        status = client.get(f"/sessions/{session_id}/status").json()
        if status["phase"] in ("done", "failed"):
            return status
        time.sleep(0.02)
    raise AssertionError("job did not finish in time")


def _start_task(client, session_id="s1", matchers=None):
    assert client.post("/sessions", json={"id": session_id}).status_code == 201
    files = {
        "source": ("patients.csv", SOURCE_CSV, "text/csv"),
        "target": ("registry.csv", TARGET_CSV, "text/csv"),
    }
    data = {}
    if matchers is not None:
        data["matchers"] = json.dumps(matchers)
    response = client.post(f"/sessions/{session_id}/task", files=files, data=data)
    assert response.status_code == 202, response.text
    status = _wait_done(client, session_id)
    assert status["phase"] == "done", status
    return status


# ------------------------------------------------------------------ sessions


def test_create_and_list_sessions(client):
    created = client.post("/sessions", json={"id": "alpha"}).json()
    assert created["id"] == "alpha"
    assert client.post("/sessions", json={"id": "alpha"}).status_code == 409
    anon = client.post("/sessions").json()
    assert anon["id"]
    listing = client.get("/sessions").json()
    assert set(listing["sessions"]) == {"alpha", anon["id"]}


def test_unknown_session_is_404(client):
    assert client.get("/sessions/ghost/candidates").status_code == 404


def test_task_lifecycle_and_progress(client):
    status = _start_task(client)
    assert status["progress"] and all(v == 1.0 for v in status["progress"].values())
    assert set(status["progress"]) == {
        "name_edit", "name_token_jaccard", "name_trigram", "value_overlap", "distribution",
    }
    # a second upload into the same session conflicts
    files = {"source": ("a.csv", SOURCE_CSV), "target": ("b.csv", TARGET_CSV)}
    assert client.post("/sessions/s1/task", files=files).status_code == 409


def test_bad_csv_rejected_synchronously(client):
    client.post("/sessions", json={"id": "bad"})
    files = {"source": ("a.csv", b"a,b\n1\n"), "target": ("b.csv", TARGET_CSV)}
    response = client.post("/sessions/bad/task", files=files)
    assert response.status_code == 400
    assert "line 2" in response.json()["detail"]
    # the failed upload leaves the session idle, not broken
    assert client.get("/sessions/bad/status").json()["phase"] == "idle"


def test_status_for_idle_session(client):
    client.post("/sessions", json={"id": "idle"})
    status = client.get("/sessions/idle/status").json()
    assert status["phase"] == "idle" and status["job_id"] is None


# ---------------------------------------------------------------- candidates


def test_candidates_page_and_filters(client):
    _start_task(client)
    page = client.get("/sessions/s1/candidates", params={"cutoff": 0.0}).json()
    assert page["total"] == len(page["candidates"]) > 0
    assert page["cutoff"] == 0.0
    assert sum(page["weights"]["weights"].values()) == pytest.approx(1.0)

    tumor = client.get(
        "/sessions/s1/candidates", params={"cutoff": 0.0, "group": "tumor"}
    ).json()
    assert tumor["candidates"]
    assert all(c["target"] in ("TumorSite", "TumorGrade") for c in tumor["candidates"])

    none = client.get("/sessions/s1/candidates", params={"cutoff": 1.1}).json()
    assert none["candidates"] == []

    assert (
        client.get("/sessions/s1/candidates", params={"group": "nope"}).status_code == 400
    )


def test_decision_flow_over_http(client):
    _start_task(client)
    body = {"source": "tumor_stage", "target": "TumorGrade", "action": "accept", "actor": "dana"}
    first = client.post("/sessions/s1/decisions", json=body).json()
    assert first["candidate"]["status"] == "accepted"
    assert first["event_seq"] is not None

    repeat = client.post("/sessions/s1/decisions", json=body).json()
    assert repeat["event_seq"] is None  # idempotent
    assert repeat["weights"] == first["weights"]

    conflict = client.post(
        "/sessions/s1/decisions",
        json={"source": "tumor_stage", "target": "TumorSite", "action": "accept"},
    )
    assert conflict.status_code == 409

    missing = client.post(
        "/sessions/s1/decisions",
        json={"source": "tumor_stage", "target": "Nope", "action": "accept"},
    )
    assert missing.status_code == 404

    assert client.post("/sessions/s1/decisions", json={"source": "x"}).status_code == 400


# ------------------------------------------------------- profiles / ontology


def test_profile_endpoint(client):
    _start_task(client)
    profile = client.get("/sessions/s1/profiles/age_at_diagnosis").json()
    assert profile["profile"]["inferred_type"] == "numeric"
    assert profile["profile"]["numeric_histogram"]["counts"]
    target = client.get(
        "/sessions/s1/profiles/TumorSite", params={"side": "target"}
    ).json()
    assert target["group"] == "tumor"
    assert target["profile"]["categorical_frequencies"]
    assert client.get("/sessions/s1/profiles/nope").status_code == 404
    assert (
        client.get("/sessions/s1/profiles/age_at_diagnosis", params={"side": "x"}).status_code
        == 400
    )


def test_ontology_endpoint(client):
    _start_task(client)
    onto = client.get("/sessions/s1/ontology", params={"side": "target"}).json()
    labels = [g["label"] for g in onto["groups"]]
    assert "tumor" in labels
    assert onto["properties"]["AgeAtDiagnosis"]["inferred_type"] == "numeric"


# ------------------------------------------------------------------ value map


def test_value_map_proposal_and_storage(client):
    _start_task(client)
    proposal = client.get("/sessions/s1/value-map/smoking_status/SmokingHistory").json()
    assert proposal["stored"] is False
    pairs = {p["from"]: p["to"] for p in proposal["mapping"]["pairs"]}
    assert pairs["Yes"] == "yes" and pairs["No"] == "no"

    numeric = client.get("/sessions/s1/value-map/age_at_diagnosis/AgeAtDiagnosis").json()
    assert numeric["mapping"]["transform"] is not None

    body = {"pairs": [{"from": "Yes", "to": "yes", "similarity": 1.0}], "unmapped_source": []}
    stored = client.put("/sessions/s1/value-map/smoking_status/SmokingHistory", json=body).json()
    assert stored["stored"] is True
    fetched = client.get("/sessions/s1/value-map/smoking_status/SmokingHistory").json()
    assert fetched["stored"] is True
    assert fetched["mapping"]["pairs"] == [{"from": "Yes", "to": "yes", "similarity": 1.0}]

    mismatch = client.put(
        "/sessions/s1/value-map/smoking_status/SmokingHistory",
        json={"source_attr": "other", "target_attr": "SmokingHistory", "pairs": []},
    )
    assert mismatch.status_code == 400


# ------------------------------------------------------------------- matchers


def test_matcher_management_over_http(client):
    _start_task(client, matchers=[{"id": "name_edit"}, {"id": "value_overlap"}])
    listing = client.get("/sessions/s1/matchers").json()
    assert [m["id"] for m in listing["matchers"]] == ["name_edit", "value_overlap"]

    code = (
        "import json, sys\n"
        "req = json.loads(sys.stdin.readline())\n"
        "for s in req['source']:\n"
        "    print(json.dumps({'source': s['name'], 'matches': []}))\n"
        "print(json.dumps({'op': 'done'}))\n"
    )
    added = client.post("/sessions/s1/matchers", json={"id": "noop", "code": code})
    assert added.status_code == 201, added.text
    assert added.json()["matcher"]["status"] == "ready"
    assert "noop" in added.json()["weights"]["weights"]

    dup = client.post("/sessions/s1/matchers", json={"id": "noop", "code": code})
    assert dup.status_code == 409

    removed = client.delete("/sessions/s1/matchers/noop").json()
    assert all(m["id"] != "noop" for m in removed["matchers"])
    assert client.delete("/sessions/s1/matchers/noop").status_code == 404


def test_failed_plugin_reported_not_fatal(client):
    _start_task(client)
    added = client.post(
        "/sessions/s1/matchers",
        json={"id": "bad", "code": "import sys\nsys.exit(9)\n"},
    )
    assert added.status_code == 201
    assert added.json()["matcher"]["status"] == "failed"
    assert "exited with code 9" in added.json()["matcher"]["failure_reason"]
    # the rest of the ensemble still answers
    page = client.get("/sessions/s1/candidates", params={"cutoff": 0.0}).json()
    assert page["candidates"]


# ------------------------------------------------------------------ analytics


def test_metrics_consensus_breakdown_endpoints(client):
    _start_task(client)
    client.post(
        "/sessions/s1/decisions",
        json={"source": "smoking_status", "target": "SmokingHistory", "action": "accept"},
    )
    metrics = client.get("/sessions/s1/metrics").json()
    assert metrics["evaluated_sources"] == 3  # two easy + one manual
    assert metrics["trivial_accepts"] == 2 and metrics["manual_accepts"] == 1
    assert "name_edit" in metrics["per_matcher"]
    assert 0.0 <= metrics["per_matcher"]["name_edit"]["mrr"] <= 1.0

    consensus = client.get("/sessions/s1/consensus").json()
    assert sum(s["count"] for s in consensus["subsets"]) == 3

    breakdown = client.get("/sessions/s1/breakdown").json()
    assert breakdown["buckets"] == ["1", "2-3", "4-10", "absent"]
    for counts in breakdown["per_matcher"].values():
        assert sum(counts.values()) == 3

    provenance = client.get("/sessions/s1/provenance").json()
    assert [e["seq"] for e in provenance["events"]] == list(
        range(1, len(provenance["events"]) + 1)
    )


def test_explain_endpoint(client):
    _start_task(client)
    explanation = client.post(
        "/sessions/s1/explain",
        json={"source": "smoking_status", "target": "SmokingHistory"},
    ).json()
    names = [c["name"] for c in explanation["criteria"]]
    assert "name_similarity" in names and "value_compatibility" in names
    assert explanation["diagnosis"] in ("likely_match", "likely_mismatch", "undetermined")
    # history reflects the auto-accepted pairs
    history = {c["name"]: c for c in explanation["criteria"]}["historical_mappings"]
    assert history["score"] == 0.0
    assert client.post("/sessions/s1/explain", json={"source": "nope", "target": "PatientId"}).status_code == 404


# -------------------------------------------------------------- import/export


def test_export_media_types_and_errors(client):
    _start_task(client)
    gt = client.get("/sessions/s1/export/ground_truth_csv")
    assert gt.status_code == 200
    assert gt.headers["content-type"].startswith("text/csv")
    assert gt.content.decode().splitlines()[0] == "source,target,label,actor,timestamp"

    spec = client.get("/sessions/s1/export/mapping_spec")
    assert spec.headers["content-type"].startswith("application/json")
    assert json.loads(spec.content)["version"] == 1

    prov = client.get("/sessions/s1/export/provenance")
    assert prov.headers["content-type"].startswith("application/x-ndjson")

    harmonized = client.get("/sessions/s1/export/harmonized_csv")
    assert harmonized.status_code == 200

    assert client.get("/sessions/s1/export/nope").status_code == 400


def test_import_endpoint_round_trip(client):
    _start_task(client)
    data = gt_csv_bytes([("tumor_stage", "TumorGrade", "accept")])
    report = client.post(
        "/sessions/s1/import",
        files={"file": ("gt.csv", data, "text/csv")},
        data={"kind": "ground_truth_csv"},
    ).json()
    assert report["applied"] == 1

    exported = client.get("/sessions/s1/export/ground_truth_csv").content
    assert b"tumor_stage,TumorGrade,accept,fixture" in exported

    bad = client.post(
        "/sessions/s1/import",
        files={"file": ("x.bin", b"junk")},
        data={"kind": "nope"},
    )
    assert bad.status_code == 400


# -------------------------------------------------------------- persistence


def test_sessions_survive_process_restart(client, tmp_path):
    _start_task(client)
    client.post(
        "/sessions/s1/decisions",
        json={"source": "tumor_stage", "target": "TumorGrade", "action": "accept"},
    )
    before = client.get("/sessions/s1/candidates", params={"cutoff": 0.0}).json()

    fresh = create_app(store=SessionStore(tmp_path / "data"))
    with TestClient(fresh) as second:
        after = second.get("/sessions/s1/candidates", params={"cutoff": 0.0}).json()
        assert after == before
