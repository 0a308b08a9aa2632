"""Human curation: auto-generated review tasks grouping competing fact
clusters, a journaled task store with first-write-wins decisions, and the
feedback path appending curator verdicts to the fact log.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .corroborator import ScoredFact, FactCluster
from .extractors import resolve_span
from .ingestion import IngestSummary, ingest_batch
from .model import (
    Clock,
    Fact,
    FactStatus,
    Value,
    value_from_json,
    value_to_json,
)
from .ontology import Ontology
from .store import FactLog, KnowledgeGraph, LatestView

JOURNAL_SCHEMA = "factmill.curation_journal"

CONTEXT_FACT_LIMIT = 5
SNIPPET_RADIUS = 80


class CurationError(Exception):
    pass


class DecisionConflict(CurationError):
    pass


@dataclass
class ClusterOption:
    cluster_id: str
    value: Value
    score: float
    rank: int
    support: int
    snippets: List[str]
    fact: Fact

    def to_json(self) -> dict:
        return {
            "cluster_id": self.cluster_id,
            "value": value_to_json(self.value),
            "score": self.score,
            "rank": self.rank,
            "support": self.support,
            "snippets": self.snippets,
            "fact": self.fact.to_json(),
        }


@dataclass
class CurationTask:
    task_id: str
    subject_id: str
    subject_name: str
    subject_aliases: List[str]
    subject_types: List[str]
    context_facts: List[dict]  # up to 5 existing KG facts for context
    predicate: str
    clusters: List[ClusterOption]
    status: str = "pending"  # pending -> decided, exactly once
    created_at: str = ""
    decision: Optional["Decision"] = None

    def to_json(self) -> dict:
        return {
            "task_id": self.task_id,
            "subject_id": self.subject_id,
            "subject_name": self.subject_name,
            "subject_aliases": self.subject_aliases,
            "subject_types": self.subject_types,
            "context_facts": self.context_facts,
            "predicate": self.predicate,
            "clusters": [c.to_json() for c in self.clusters],
            "status": self.status,
            "created_at": self.created_at,
            "decision": self.decision.to_json() if self.decision else None,
        }


@dataclass
class Decision:
    task_id: str
    verdict: str  # accept | reject_all | amend
    curator_id: str
    decided_at: str
    cluster_id: Optional[str] = None  # accept
    amended_value: Optional[Value] = None  # amend

    def to_json(self) -> dict:
        return {
            "task_id": self.task_id,
            "verdict": self.verdict,
            "curator_id": self.curator_id,
            "decided_at": self.decided_at,
            "cluster_id": self.cluster_id,
            "amended_value": value_to_json(self.amended_value) if self.amended_value else None,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Decision":
        return cls(
            task_id=obj["task_id"],
            verdict=obj["verdict"],
            curator_id=obj["curator_id"],
            decided_at=obj["decided_at"],
            cluster_id=obj.get("cluster_id"),
            amended_value=value_from_json(obj["amended_value"]) if obj.get("amended_value") else None,
        )


def _snippet_for(provenance, corpus) -> Optional[str]:
    if corpus is None:
        return None
    doc = corpus.revision(provenance.source_url, provenance.revision_id) or corpus.latest(
        provenance.source_url
    )
    if doc is None:
        return None
    parts = provenance.span.split(":")
    if parts[0] == "infobox":
        row_index = int(parts[1])
        if row_index < len(doc.infobox):
            row = doc.infobox[row_index]
            return f"{row.key}: {row.raw_value}"
        return None
    if parts[0] == "passage":
        text = doc.passage(parts[1])
        if text is None:
            return None
        start, end = int(parts[2]), int(parts[3])
        lo = max(0, start - SNIPPET_RADIUS)
        hi = min(len(text), end + SNIPPET_RADIUS)
        return text[lo:hi]
    return None


def generate_tasks(
    routed_facts: Sequence[ScoredFact],
    kg: KnowledgeGraph,
    view: Optional[LatestView] = None,
    corpus=None,
    clock: Optional[Clock] = None,
) -> List[CurationTask]:
    """One task per (subject, predicate), grouping all competing clusters
    routed to curation, with KG context and evidence snippets attached."""
    clock = clock or Clock()
    grouped: Dict[Tuple[str, str], List[ScoredFact]] = {}
    for sf in routed_facts:
        if sf.route != "curation":
            continue
        grouped.setdefault((sf.fact.subject, sf.fact.predicate), []).append(sf)
    tasks: List[CurationTask] = []
    for (subject, predicate), group in sorted(grouped.items()):
        group.sort(key=lambda sf: sf.rank)
        entity = kg.get(subject) if subject in kg else None
        context: List[dict] = []
        if view is not None:
            context = [
                f.to_json() for f in view.facts_by_subject(subject)[:CONTEXT_FACT_LIMIT]
            ]
        options = []
        for i, sf in enumerate(group):
            snippets = []
            for member in sf.cluster.members:
                snip = _snippet_for(member.candidate.provenance, corpus)
                if snip:
                    snippets.append(snip)
            options.append(
                ClusterOption(
                    cluster_id=f"c{i + 1}",
                    value=sf.fact.object,
                    score=sf.score,
                    rank=sf.rank,
                    support=sf.cluster.support,
                    snippets=snippets[:3],
                    fact=sf.fact,
                )
            )
        tasks.append(
            CurationTask(
                task_id=uuid.uuid4().hex[:12],
                subject_id=subject,
                subject_name=entity.canonical_name if entity else subject,
                subject_aliases=[a for a, _l in entity.aliases] if entity else [],
                subject_types=sorted(entity.types) if entity else [],
                context_facts=context,
                predicate=predicate,
                clusters=options,
                created_at=clock.now_iso(),
            )
        )
    return tasks


class TaskStore:
    """In-memory task store with an append-only decision journal; replaying
    the journal reproduces the store state. Decisions are first-write-wins
    and serialized per task."""

    def __init__(self, journal_path: Optional[Path] = None, clock: Optional[Clock] = None):
        self.tasks: Dict[str, CurationTask] = {}
        self.journal_path = Path(journal_path) if journal_path else None
        self.clock = clock or Clock()
        self._lock = threading.Lock()
        if self.journal_path and not self.journal_path.exists():
            self.journal_path.write_text(
                json.dumps({"schema": JOURNAL_SCHEMA, "version": 1}) + "\n", encoding="utf-8"
            )

    def _journal(self, record: dict) -> None:
        if self.journal_path is None:
            return
        with self.journal_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            fh.flush()
            import os

            os.fsync(fh.fileno())

    def add_tasks(self, tasks: Sequence[CurationTask]) -> None:
        with self._lock:
            for task in tasks:
                self.tasks[task.task_id] = task
                self._journal({"event": "task_created", "task": task.to_json()})

    def get(self, task_id: str) -> CurationTask:
        try:
            return self.tasks[task_id]
        except KeyError:
            raise CurationError(f"unknown task {task_id!r}") from None

    def list_tasks(self, status: Optional[str] = None, page: int = 1, page_size: int = 20):
        tasks = sorted(self.tasks.values(), key=lambda t: (t.created_at, t.task_id))
        if status:
            tasks = [t for t in tasks if t.status == status]
        total = len(tasks)
        start = (page - 1) * page_size
        return tasks[start : start + page_size], total

    def decide(self, decision: Decision) -> CurationTask:
        """Apply a decision; durable (journaled) before returning. A second
        decision on the same task raises DecisionConflict."""
        with self._lock:
            task = self.get(decision.task_id)
            if task.status == "decided":
                raise DecisionConflict(
                    f"task {task.task_id} already decided by {task.decision.curator_id}"
                )
            if decision.verdict == "accept":
                if not any(c.cluster_id == decision.cluster_id for c in task.clusters):
                    raise CurationError(f"unknown cluster {decision.cluster_id!r}")
            elif decision.verdict == "amend":
                if decision.amended_value is None:
                    raise CurationError("amend requires a value")
            elif decision.verdict != "reject_all":
                raise CurationError(f"unknown verdict {decision.verdict!r}")
            task.status = "decided"
            task.decision = decision
            self._journal({"event": "decision", "decision": decision.to_json()})
            return task

    def stats(self) -> dict:
        pending = sum(1 for t in self.tasks.values() if t.status == "pending")
        return {"tasks": len(self.tasks), "pending": pending, "decided": len(self.tasks) - pending}

    @classmethod
    def replay(cls, journal_path: Path, clock: Optional[Clock] = None) -> "TaskStore":
        """Rebuild an equivalent store from the journal (no re-journaling)."""
        store = cls(journal_path=None, clock=clock)
        with Path(journal_path).open(encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            if header.get("schema") != JOURNAL_SCHEMA:
                raise CurationError(f"{journal_path}: unexpected schema")
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if record["event"] == "task_created":
                    store.tasks[record["task"]["task_id"]] = _task_from_json(record["task"])
                elif record["event"] == "decision":
                    decision = Decision.from_json(record["decision"])
                    task = store.tasks[decision.task_id]
                    task.status = "decided"
                    task.decision = decision
        return store


def _task_from_json(obj: dict) -> CurationTask:
    clusters = [
        ClusterOption(
            cluster_id=c["cluster_id"],
            value=value_from_json(c["value"]),
            score=c["score"],
            rank=c["rank"],
            support=c["support"],
            snippets=c["snippets"],
            fact=Fact.from_json(c["fact"]),
        )
        for c in obj["clusters"]
    ]
    task = CurationTask(
        task_id=obj["task_id"],
        subject_id=obj["subject_id"],
        subject_name=obj["subject_name"],
        subject_aliases=obj["subject_aliases"],
        subject_types=obj["subject_types"],
        context_facts=obj["context_facts"],
        predicate=obj["predicate"],
        clusters=clusters,
        status=obj["status"],
        created_at=obj["created_at"],
    )
    if obj.get("decision"):
        task.decision = Decision.from_json(obj["decision"])
    return task


def apply_decisions(
    store: TaskStore,
    decisions: Sequence[Decision],
    kg: KnowledgeGraph,
    log: FactLog,
    run_id: str,
    applied_ids: Optional[set] = None,
) -> IngestSummary:
    """Feed curator verdicts back into the fact log.

    accept appends the chosen cluster's fact at confidence 1.0; amend
    appends the amended value (provenance keeps the original rows plus
    the curator id); reject_all appends rejection tombstones for every
    cluster key. Idempotent per decision id when ``applied_ids`` is shared.
    """
    from dataclasses import replace as _replace

    from .corroborator import ScoredFact as _ScoredFact

    summary = IngestSummary()
    applied_ids = applied_ids if applied_ids is not None else set()
    for decision in decisions:
        if decision.task_id in applied_ids:
            continue
        try:
            task = store.get(decision.task_id)
        except CurationError as exc:
            summary.rejected += 1
            summary.errors.append(str(exc))
            continue
        if task.status != "decided" or task.decision is None:
            summary.rejected += 1
            summary.errors.append(f"task {decision.task_id} not decided")
            continue
        to_ingest: List[Tuple[Fact, FactStatus]] = []
        if decision.verdict == "accept":
            option = next(c for c in task.clusters if c.cluster_id == decision.cluster_id)
            fact = _replace(option.fact, confidence=1.0)
            to_ingest.append((fact, FactStatus.CURATED_ACCEPTED))
        elif decision.verdict == "amend":
            base = task.clusters[0].fact
            curator_prov = _replace(
                base.provenance[0], extractor_id=f"curator:{decision.curator_id}"
            )
            fact = _replace(
                base,
                object=decision.amended_value,
                confidence=1.0,
                provenance=base.provenance + (curator_prov,),
            )
            to_ingest.append((fact, FactStatus.CURATED_ACCEPTED))
        else:  # reject_all: tombstone every competing cluster key
            seen_keys = set()
            for option in task.clusters:
                fact = _replace(option.fact, confidence=0.0)
                key = log.key_for(fact).as_string()
                if key in seen_keys:
                    continue
                seen_keys.add(key)
                to_ingest.append((fact, FactStatus.CURATED_REJECTED))
        for fact, status in to_ingest:
            scored = _ScoredFact(
                fact=fact,
                score=fact.confidence,
                rank=1,
                route="auto",
                cluster=FactCluster(fact.subject, fact.predicate, fact.object, []),
            )
            part = ingest_batch([scored], kg, log, run_id, status=status)
            summary.appended += part.appended
            summary.diverted += part.diverted
            summary.rejected += part.rejected
            summary.errors.extend(part.errors)
        applied_ids.add(decision.task_id)
    return summary
