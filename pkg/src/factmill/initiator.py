"""Extraction initiation: profile the KG for gaps, detect stale facts
against newer document revisions, and turn change events into tasks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .corpus import ChangeEvent, CorpusHandle
from .model import Clock, FactKey, Value, parse_ts
from .ontology import Ontology, OntologyError
from .store import KnowledgeGraph, LatestView

TASK_SCHEMA = "factmill.tasks"
SCHEMA_VERSION = 1

WILDCARD_PREDICATE = "*"


@dataclass(frozen=True)
class ExtractionTask:
    subject_id: str
    subject_name: str
    subject_aliases: Tuple[str, ...]
    subject_type: str
    predicate: str  # predicate id or "*" for crawl mode
    urls: Tuple[str, ...]  # empty => search-based retrieval
    reason: str  # missing | stale | escalation | change_event | full_scan
    created_at: str
    language: str = "en"
    origin_event_time: Optional[str] = None

    @property
    def search_based(self) -> bool:
        return not self.urls

    def to_json(self) -> dict:
        return {
            "subject_id": self.subject_id,
            "subject_name": self.subject_name,
            "subject_aliases": list(self.subject_aliases),
            "subject_type": self.subject_type,
            "predicate": self.predicate,
            "urls": list(self.urls),
            "reason": self.reason,
            "created_at": self.created_at,
            "language": self.language,
            "origin_event_time": self.origin_event_time,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ExtractionTask":
        return cls(
            subject_id=obj["subject_id"],
            subject_name=obj["subject_name"],
            subject_aliases=tuple(obj.get("subject_aliases", [])),
            subject_type=obj.get("subject_type", ""),
            predicate=obj["predicate"],
            urls=tuple(obj.get("urls", [])),
            reason=obj["reason"],
            created_at=obj["created_at"],
            language=obj.get("language", "en"),
            origin_event_time=obj.get("origin_event_time"),
        )


@dataclass
class StalenessReport:
    # per (entity type, predicate): counts and mean lag in whole days
    missing: Dict[Tuple[str, str], int] = field(default_factory=dict)
    stale: Dict[Tuple[str, str], int] = field(default_factory=dict)
    lags: Dict[Tuple[str, str], List[int]] = field(default_factory=dict)

    def mean_lag(self, target: Tuple[str, str]) -> Optional[float]:
        lags = self.lags.get(target)
        if not lags:
            return None
        return sum(lags) / len(lags)


def profile_gaps(
    kg: KnowledgeGraph,
    view: LatestView,
    targets: Sequence[Tuple[str, str]],
    ontology: Ontology,
    clock: Optional[Clock] = None,
) -> List[ExtractionTask]:
    """One missing-reason task per (entity of target type, predicate)
    lacking a latest-view value."""
    clock = clock or Clock()
    for _type, predicate in targets:
        if predicate not in ontology:
            raise OntologyError(f"profile_gaps: unknown predicate {predicate!r}")
    tasks: List[ExtractionTask] = []
    for type_id, predicate in targets:
        for entity in sorted(kg.entities_of_type(type_id), key=lambda e: e.id):
            if view.latest_for(entity.id, predicate):
                continue
            tasks.append(
                ExtractionTask(
                    subject_id=entity.id,
                    subject_name=entity.canonical_name,
                    subject_aliases=tuple(a for a, _l in entity.aliases),
                    subject_type=type_id,
                    predicate=predicate,
                    urls=(),
                    reason="missing",
                    created_at=clock.now_iso(),
                )
            )
    return tasks


def detect_stale(
    kg: KnowledgeGraph,
    view: LatestView,
    corpus: CorpusHandle,
    targets: Sequence[Tuple[str, str]],
    ontology: Ontology,
    document_value: Callable[[object, str, str], Optional[Value]],
    doc_for_subject: Callable[[str], Optional[str]],
    clock: Optional[Clock] = None,
) -> Tuple[List[ExtractionTask], StalenessReport]:
    """Flag facts whose newest source revision holds a different
    normalized value and is newer than the KG fact.

    ``document_value(document, predicate, subject_id)`` extracts the
    document's normalized value; ``doc_for_subject`` maps an entity id to
    its url. Lag is whole days between revision_time and appended_at.
    """
    clock = clock or Clock()
    report = StalenessReport()
    tasks: List[ExtractionTask] = []
    for type_id, predicate in targets:
        target = (type_id, predicate)
        report.missing.setdefault(target, 0)
        report.stale.setdefault(target, 0)
        functional = ontology.is_functional(predicate)
        for entity in sorted(kg.entities_of_type(type_id), key=lambda e: e.id):
            current = view.latest_for(entity.id, predicate)
            if not current:
                report.missing[target] += 1
                continue
            url = doc_for_subject(entity.id)
            if url is None:
                continue
            doc = corpus.latest(url)
            if doc is None:
                continue
            doc_value = document_value(doc, predicate, entity.id)
            if doc_value is None:
                continue
            kg_fact = current[0] if functional else None
            if kg_fact is None or kg_fact.object == doc_value:
                continue
            key = FactKey(entity.id, predicate).as_string()
            appended_at = view.appended_at_of(key)
            if appended_at is None:
                continue
            rev_time = parse_ts(doc.revision_time)
            kg_time = parse_ts(appended_at)
            if rev_time <= kg_time:
                continue
            lag_days = (rev_time - kg_time).days
            report.stale[target] += 1
            report.lags.setdefault(target, []).append(lag_days)
            tasks.append(
                ExtractionTask(
                    subject_id=entity.id,
                    subject_name=entity.canonical_name,
                    subject_aliases=tuple(a for a, _l in entity.aliases),
                    subject_type=type_id,
                    predicate=predicate,
                    urls=(url,),
                    reason="stale",
                    created_at=clock.now_iso(),
                    language=doc.language,
                )
            )
    return tasks, report


@dataclass
class EventTaskResult:
    tasks: List[ExtractionTask]
    skipped: int = 0


def tasks_from_events(
    events: Sequence[ChangeEvent],
    kg: KnowledgeGraph,
    corpus: CorpusHandle,
    clock: Optional[Clock] = None,
) -> EventTaskResult:
    """One wildcard-predicate task per (vandalism-filtered) event; events
    whose url has no corpus document are skipped and counted."""
    clock = clock or Clock()
    result = EventTaskResult(tasks=[])
    for ev in events:
        doc = corpus.revision(ev.url, ev.revision_id) or corpus.latest(ev.url)
        if doc is None:
            result.skipped += 1
            continue
        subject_id = doc.subject_hint
        if subject_id is None or subject_id not in kg:
            result.skipped += 1
            continue
        entity = kg.get(subject_id)
        result.tasks.append(
            ExtractionTask(
                subject_id=entity.id,
                subject_name=entity.canonical_name,
                subject_aliases=tuple(a for a, _l in entity.aliases),
                subject_type=next(iter(sorted(entity.types)), ""),
                predicate=WILDCARD_PREDICATE,
                urls=(ev.url,),
                reason="change_event",
                created_at=clock.now_iso(),
                language=doc.language,
                origin_event_time=ev.event_time,
            )
        )
    return result


def load_tasks(path) -> List[ExtractionTask]:
    path = Path(path)
    tasks: List[ExtractionTask] = []
    with path.open(encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("schema") != TASK_SCHEMA:
            raise ValueError(f"{path}: unexpected schema {header.get('schema')!r}")
        for line in fh:
            line = line.strip()
            if line:
                tasks.append(ExtractionTask.from_json(json.loads(line)))
    return tasks


def save_tasks(tasks: Sequence[ExtractionTask], path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema": TASK_SCHEMA, "version": SCHEMA_VERSION}) + "\n")
        for task in tasks:
            fh.write(json.dumps(task.to_json(), ensure_ascii=False) + "\n")
