"""Ingestion: turn routed facts into KG updates, in batch (table handoff)
or streaming (in-process bounded queue) mode, with SLA accounting.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .corroborator import ScoredFact
from .extractors import validate_types
from .model import Clock, Fact, FactStatus, Text, ValueKind, parse_ts
from .ontology import Ontology
from .store import FactLog, KnowledgeGraph, ResolveStatus


@dataclass
class IngestSummary:
    appended: int = 0
    diverted: int = 0  # ambiguous entity resolution -> curation
    rejected: int = 0
    errors: List[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "appended": self.appended,
            "diverted": self.diverted,
            "rejected": self.rejected,
            "errors": self.errors,
        }


@dataclass
class DeliveryRecord:
    key: str
    mode: str  # batch | stream
    enqueued_at: str
    delivered_at: str
    origin_event_time: Optional[str] = None

    def latency_minutes(self) -> Optional[float]:
        if self.origin_event_time is None:
            return None
        delta = parse_ts(self.delivered_at) - parse_ts(self.origin_event_time)
        return delta.total_seconds() / 60.0

    def to_json(self) -> dict:
        return {
            "key": self.key,
            "mode": self.mode,
            "enqueued_at": self.enqueued_at,
            "delivered_at": self.delivered_at,
            "origin_event_time": self.origin_event_time,
        }


@dataclass
class SlaReport:
    mode: str
    latencies_minutes: List[float]
    sla_minutes: float
    violations: int

    @property
    def p50(self) -> float:
        return self._percentile(0.50)

    @property
    def p99(self) -> float:
        return self._percentile(0.99)

    @property
    def max(self) -> float:
        return max(self.latencies_minutes) if self.latencies_minutes else 0.0

    def _percentile(self, q: float) -> float:
        if not self.latencies_minutes:
            return 0.0
        ordered = sorted(self.latencies_minutes)
        idx = min(len(ordered) - 1, max(0, int(round(q * (len(ordered) - 1)))))
        return ordered[idx]

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "count": len(self.latencies_minutes),
            "p50_minutes": self.p50,
            "p99_minutes": self.p99,
            "max_minutes": self.max,
            "sla_minutes": self.sla_minutes,
            "violations": self.violations,
        }


def compute_sla_report(records: Sequence[DeliveryRecord], sla_minutes: float, mode: str) -> SlaReport:
    latencies = [r.latency_minutes() for r in records]
    latencies = [l for l in latencies if l is not None]
    return SlaReport(
        mode=mode,
        latencies_minutes=latencies,
        sla_minutes=sla_minutes,
        violations=sum(1 for l in latencies if l > sla_minutes),
    )


def _resolve_object(fact: Fact, sf: ScoredFact, ontology: Ontology, kg: KnowledgeGraph):
    """Resolve a still-textual object mention against the KG; returns
    (fact, 'ok'|'ambiguous')."""
    predicate = ontology.get(fact.predicate)
    if predicate.value_kind is not ValueKind.ENTITY_REF or not isinstance(fact.object, Text):
        return fact, "ok"
    hint = next(iter(sorted(predicate.allowed_object_types)), None)
    result = kg.resolve_entity(fact.object.text, type_hint=hint)
    if result.status is ResolveStatus.AMBIGUOUS:
        return fact, "ambiguous"
    from dataclasses import replace

    from .model import EntityRef

    return replace(fact, object=EntityRef(result.entity_id)), "ok"


def ingest_batch(
    scored_facts: Sequence[ScoredFact],
    kg: KnowledgeGraph,
    log: FactLog,
    run_id: str,
    ontology: Optional[Ontology] = None,
    status: FactStatus = FactStatus.AUTO_INGESTED,
) -> IngestSummary:
    """Append routed facts: resolve entities (ambiguity diverts the fact
    to curation), validate types, append, leaving the view rematerializable.
    |appended| + |diverted| + |rejected| always equals the input size."""
    ontology = ontology or log.ontology
    summary = IngestSummary()
    to_append: List[Fact] = []
    for sf in scored_facts:
        fact, resolution = _resolve_object(sf.fact, sf, ontology, kg)
        if resolution == "ambiguous":
            summary.diverted += 1
            continue
        to_append.append(fact.with_status(status))

    def validator(fact: Fact) -> Optional[str]:
        violation = validate_types(fact, ontology, kg)
        return violation.reason if violation else None

    outcome = log.append_facts(to_append, run_id, validator=validator)
    summary.appended = len(outcome.rows)
    summary.rejected += len(outcome.rejected)
    summary.errors.extend(reason for _f, reason in outcome.rejected)
    return summary


@dataclass
class QueueItem:
    scored: ScoredFact
    origin_event_time: Optional[str]
    enqueued_at: str
    extra_delay_minutes: float = 0.0  # test hook: simulated processing lag


class BoundedFactQueue:
    """Single-consumer, multi-producer FIFO channel between extraction and
    ingestion. A full queue blocks producers (backpressure)."""

    _CLOSE = object()

    def __init__(self, capacity: int = 1024):
        self._q: queue.Queue = queue.Queue(maxsize=capacity)
        self._closed = threading.Event()

    def put(self, item: QueueItem, timeout: Optional[float] = None) -> None:
        if self._closed.is_set():
            raise RuntimeError("queue closed")
        self._q.put(item, timeout=timeout)

    def close(self) -> None:
        self._closed.set()
        try:
            self._q.put_nowait(self._CLOSE)
        except queue.Full:
            pass  # drain notices the closed flag once the queue empties

    def drain(self):
        while True:
            try:
                item = self._q.get(timeout=0.05)
            except queue.Empty:
                if self._closed.is_set():
                    return
                continue
            if item is self._CLOSE:
                return
            yield item


def ingest_stream(
    fact_queue: BoundedFactQueue,
    kg: KnowledgeGraph,
    log: FactLog,
    sla_minutes: float,
    clock: Clock,
    ontology: Optional[Ontology] = None,
    run_id: str = "stream",
    metrics_path: Optional[Path] = None,
) -> SlaReport:
    """Consume the queue until closed, appending facts one by one and
    recording a DeliveryRecord each; the SLA report is computed at drain."""
    ontology = ontology or log.ontology
    records: List[DeliveryRecord] = []
    for item in fact_queue.drain():
        # With a simulated clock, delivery happens at the item's poll time;
        # extra_delay_minutes injects lag.
        if hasattr(clock, "set") and item.enqueued_at:
            clock.set(parse_ts(item.enqueued_at))
        if item.extra_delay_minutes and hasattr(clock, "advance_minutes"):
            clock.advance_minutes(item.extra_delay_minutes)
        ingest_batch([item.scored], kg, log, run_id, ontology)
        records.append(
            DeliveryRecord(
                key=log.key_for(item.scored.fact).as_string(),
                mode="stream",
                enqueued_at=item.enqueued_at,
                delivered_at=clock.now_iso(),
                origin_event_time=item.origin_event_time,
            )
        )
    if metrics_path is not None:
        with Path(metrics_path).open("a", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec.to_json()) + "\n")
    return compute_sla_report(records, sla_minutes, mode="stream")


def measure_throughput(
    run: Callable[[], int],
) -> Tuple[float, int, float]:
    """Time a batch extraction run; returns (facts_per_minute, fact_count,
    elapsed_seconds). An empty run reports rate 0 without dividing by zero."""
    start = time.perf_counter()
    count = run()
    elapsed = time.perf_counter() - start
    if count == 0:
        return 0.0, 0, elapsed
    rate = count / (elapsed / 60.0) if elapsed > 0 else float("inf")
    return rate, count, elapsed
