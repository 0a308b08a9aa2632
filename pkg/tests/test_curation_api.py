"""Curation: task generation, the journaled store, decision feedback, and
the HTTP service."""

from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from factmill.api import create_app
from factmill.corroborator import CorroboratorConfig, corroborate
from factmill.curation import (
    CurationError,
    Decision,
    DecisionConflict,
    TaskStore,
    apply_decisions,
    generate_tasks,
)
from factmill.extractors import CandidateFact
from factmill.model import FactKey, Quantity, SimulatedClock, parse_ts
from factmill.store import FactLog
from tests.conftest import make_provenance


def _cand(value, url, score=0.95):
    return CandidateFact(
        subject="Q100001",
        predicate="P2048",
        value=value,
        raw_text=str(value),
        provenance=make_provenance(url=url),
        extractor_id="pattern:height-en:0",
        extractor_score=score,
    )


@pytest.fixture()
def conflicted(ontology, kg):
    """A two-way height conflict routed to curation (no auto winner)."""
    cands = [
        _cand(Quantity(213.0, "cm"), "https://a/1"),
        _cand(Quantity(213.0, "cm"), "https://a/2"),
        _cand(Quantity(205.0, "cm"), "https://a/3"),
    ]
    # floor lowered so the minority cluster is reviewed instead of dropped
    scored, _ = corroborate(cands, ontology, kg, CorroboratorConfig(curation_floor=0.2))
    assert {sf.route for sf in scored} == {"curation"}
    return scored


@pytest.fixture()
def store(tmp_path, clock):
    return TaskStore(journal_path=tmp_path / "journal.ndjson", clock=clock)


@pytest.fixture()
def log(tmp_path, ontology, clock):
    return FactLog(tmp_path / "log.ndjson", ontology, clock=clock)


def _decision(task_id, verdict, cluster_id=None, value=None, curator="alice"):
    return Decision(
        task_id=task_id, verdict=verdict, curator_id=curator,
        decided_at="2024-01-02T00:00:00Z", cluster_id=cluster_id, amended_value=value,
    )


def test_generate_tasks_groups_by_subject_predicate(conflicted, kg, clock):
    tasks = generate_tasks(conflicted, kg, clock=clock)
    assert len(tasks) == 1
    task = tasks[0]
    assert task.subject_name == "Amara Okafor"
    assert [c.cluster_id for c in task.clusters] == ["c1", "c2"]
    assert task.clusters[0].rank == 1
    assert task.clusters[0].value == Quantity(213.0, "cm")
    assert task.clusters[0].support == 2


def test_decide_is_first_write_wins(store, conflicted, kg, clock):
    tasks = generate_tasks(conflicted, kg, clock=clock)
    store.add_tasks(tasks)
    tid = tasks[0].task_id
    store.decide(_decision(tid, "accept", cluster_id="c1"))
    with pytest.raises(DecisionConflict):
        store.decide(_decision(tid, "accept", cluster_id="c2", curator="bob"))
    assert store.get(tid).decision.curator_id == "alice"
    with pytest.raises(CurationError):
        store.decide(_decision("nope", "accept", cluster_id="c1"))


def test_journal_replay_reproduces_state(store, conflicted, kg, clock):
    tasks = generate_tasks(conflicted, kg, clock=clock)
    store.add_tasks(tasks)
    store.decide(_decision(tasks[0].task_id, "accept", cluster_id="c2"))
    replayed = TaskStore.replay(store.journal_path)
    assert set(replayed.tasks) == set(store.tasks)
    replayed_task = replayed.get(tasks[0].task_id)
    assert replayed_task.status == "decided"
    assert replayed_task.decision.cluster_id == "c2"
    assert replayed.stats() == store.stats()


def test_apply_accept_boosts_to_full_confidence(store, conflicted, kg, log, clock):
    tasks = generate_tasks(conflicted, kg, clock=clock)
    store.add_tasks(tasks)
    tid = tasks[0].task_id
    store.decide(_decision(tid, "accept", cluster_id="c2"))
    summary = apply_decisions(store, [store.get(tid).decision], kg, log, "curation")
    assert summary.appended == 1
    fact = log.materialize_latest().get(FactKey("Q100001", "P2048"))
    assert fact.object == Quantity(205.0, "cm")
    assert fact.confidence == 1.0
    assert fact.status.value == "curated_accepted"


def test_apply_amend_keeps_provenance_and_adds_curator(store, conflicted, kg, log, clock):
    tasks = generate_tasks(conflicted, kg, clock=clock)
    store.add_tasks(tasks)
    tid = tasks[0].task_id
    store.decide(_decision(tid, "amend", value=Quantity(211.0, "cm")))
    apply_decisions(store, [store.get(tid).decision], kg, log, "curation")
    fact = log.materialize_latest().get(FactKey("Q100001", "P2048"))
    assert fact.object == Quantity(211.0, "cm")
    assert any(p.extractor_id == "curator:alice" for p in fact.provenance)
    assert any(p.extractor_id.startswith("pattern:") for p in fact.provenance)


def test_apply_reject_all_tombstones_the_view(store, conflicted, kg, log, clock):
    # pre-existing auto value for the same key
    from tests.conftest import make_fact

    log.append_facts([make_fact("Q100001", "P2048", Quantity(213.0, "cm"))], run_id="auto")
    tasks = generate_tasks(conflicted, kg, clock=clock)
    store.add_tasks(tasks)
    tid = tasks[0].task_id
    store.decide(_decision(tid, "reject_all"))
    apply_decisions(store, [store.get(tid).decision], kg, log, "curation")
    assert log.materialize_latest().get(FactKey("Q100001", "P2048")) is None


def test_apply_decisions_idempotent(store, conflicted, kg, log, clock):
    tasks = generate_tasks(conflicted, kg, clock=clock)
    store.add_tasks(tasks)
    tid = tasks[0].task_id
    store.decide(_decision(tid, "accept", cluster_id="c1"))
    applied = set()
    d = store.get(tid).decision
    first = apply_decisions(store, [d], kg, log, "curation", applied_ids=applied)
    second = apply_decisions(store, [d], kg, log, "curation", applied_ids=applied)
    assert first.appended == 1 and second.appended == 0
    assert log.max_version(FactKey("Q100001", "P2048")) == 1


# ---------------------------------------------------------------------------
# HTTP service
# ---------------------------------------------------------------------------


@pytest.fixture()
def client(store, conflicted, kg, clock):
    tasks = generate_tasks(conflicted, kg, clock=clock)
    store.add_tasks(tasks)
    app = create_app(store, clock=clock)
    return TestClient(app), tasks[0].task_id


def test_api_list_and_get(client):
    http, tid = client
    listing = http.get("/tasks", params={"status": "pending"}).json()
    assert listing["total"] == 1
    assert listing["tasks"][0]["task_id"] == tid
    task = http.get(f"/tasks/{tid}").json()
    assert [c["cluster_id"] for c in task["clusters"]] == ["c1", "c2"]
    missing = http.get("/tasks/does-not-exist")
    assert missing.status_code == 404
    assert missing.json()["detail"]["code"] == "task_not_found"


def test_api_decision_flow_and_conflict(client):
    http, tid = client
    first = http.post(
        f"/tasks/{tid}/decision",
        json={"verdict": "accept", "cluster_id": "c1"},
        headers={"X-Curator-Id": "alice"},
    )
    assert first.status_code == 200
    assert first.json()["status"] == "decided"
    # a second curator racing on the same task gets a 409 with the winner
    second = http.post(
        f"/tasks/{tid}/decision",
        json={"verdict": "accept", "cluster_id": "c2"},
        headers={"X-Curator-Id": "bob"},
    )
    assert second.status_code == 409
    body = second.json()
    assert body["code"] == "already_decided"
    assert body["decision"]["curator_id"] == "alice"
    stats = http.get("/stats").json()
    assert stats == {"tasks": 1, "pending": 0, "decided": 1}


def test_api_rejects_bad_payloads(client):
    http, tid = client
    bad_value = http.post(
        f"/tasks/{tid}/decision",
        json={"verdict": "amend", "amended_value": {"kind": "quantity"}},
    )
    assert bad_value.status_code == 422
    assert bad_value.json()["detail"]["code"] == "bad_value"
    bad_verdict = http.post(f"/tasks/{tid}/decision", json={"verdict": "maybe"})
    assert bad_verdict.status_code == 422
    assert bad_verdict.json()["detail"]["code"] == "bad_decision"
    bad_cluster = http.post(
        f"/tasks/{tid}/decision", json={"verdict": "accept", "cluster_id": "c99"}
    )
    assert bad_cluster.status_code == 422


def test_api_pagination(store, conflicted, kg, clock):
    tasks = generate_tasks(conflicted, kg, clock=clock)
    store.add_tasks(tasks)
    http = TestClient(create_app(store, clock=clock))
    page = http.get("/tasks", params={"page": 2, "page_size": 1}).json()
    assert page["total"] == 1 and page["tasks"] == []


def test_api_serves_static_frontend_when_built(store, clock):
    dist = Path(__file__).resolve().parents[1] / "frontend" / "dist"
    if not (dist / "index.html").is_file():
        pytest.skip("frontend not built")
    http = TestClient(create_app(store, clock=clock, static_dir=dist))
    index = http.get("/")
    assert index.status_code == 200
    assert "<div id=\"app\">" in index.text
    bundle = http.get("/app.js")
    assert bundle.status_code == 200
    assert "bootstrap" in bundle.text
