"""Orchestration: wire the stages into batch and streaming runs."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple

from . import initiator as initiator_mod
from .config import PipelineConfig
from .corroborator import CorroboratorConfig, ScoredFact, corroborate
from .corpus import CorpusHandle, filter_vandalism, load_corpus, load_feed, poll_feed
from .curation import TaskStore, generate_tasks
from .extractors import CandidateFact, RuleSet, compile_rules, extract_infobox, extract_links
from .ingestion import (
    BoundedFactQueue,
    IngestSummary,
    QueueItem,
    SlaReport,
    ingest_batch,
    ingest_stream,
)
from .initiator import ExtractionTask, WILDCARD_PREDICATE, load_tasks
from .model import Clock, Fact, parse_ts, value_to_json
from .ontology import Ontology, load_ontology
from .retriever import (
    build_index,
    generate_queries,
    load_templates,
    retrieve_crawl,
    search,
)
from .store import FactLog, KnowledgeGraph, load_entities

logger = logging.getLogger(__name__)


@dataclass
class RunReport:
    run_id: str
    tasks: int = 0
    documents: int = 0
    candidates: int = 0
    clusters: int = 0
    routed: Dict[str, int] = field(default_factory=lambda: {"auto": 0, "curation": 0, "drop": 0})
    appended: int = 0
    diverted: int = 0
    rejected: int = 0
    unchanged: int = 0
    curation_tasks: int = 0
    skipped_events: int = 0
    facts_per_minute: float = 0.0
    elapsed_seconds: float = 0.0
    precision: Optional[float] = None
    recall: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "run_id": self.run_id,
            "tasks": self.tasks,
            "documents": self.documents,
            "candidates": self.candidates,
            "clusters": self.clusters,
            "routed": self.routed,
            "appended": self.appended,
            "diverted": self.diverted,
            "rejected": self.rejected,
            "unchanged": self.unchanged,
            "curation_tasks": self.curation_tasks,
            "skipped_events": self.skipped_events,
            "facts_per_minute": self.facts_per_minute,
            "elapsed_seconds": self.elapsed_seconds,
            "precision": self.precision,
            "recall": self.recall,
        }


@dataclass
class PipelineContext:
    config: PipelineConfig
    ontology: Ontology
    kg: KnowledgeGraph
    corpus: CorpusHandle
    ruleset: RuleSet
    log: FactLog
    clock: Clock
    templates: list = field(default_factory=list)

    @classmethod
    def from_config(cls, config: PipelineConfig, clock: Optional[Clock] = None) -> "PipelineContext":
        clock = clock or Clock()
        ontology = load_ontology(config.ontology_path)
        kg = load_entities(config.entities_path)
        corpus = load_corpus(config.corpus_path)
        ruleset = compile_rules(config.rules_paths, ontology)
        log = FactLog(config.log_path, ontology, clock=clock)
        templates = load_templates(config.templates_path) if config.templates_path else []
        return cls(
            config=config,
            ontology=ontology,
            kg=kg,
            corpus=corpus,
            ruleset=ruleset,
            log=log,
            clock=clock,
            templates=templates,
        )

    def corroborator_config(self) -> CorroboratorConfig:
        return CorroboratorConfig(
            auto_threshold=self.config.auto_threshold,
            curation_floor=self.config.curation_floor,
            quantity_merge_tolerance=self.config.quantity_merge_tolerance,
            base_weights=dict(self.config.base_weights),
        )


def build_tasks(ctx: PipelineContext) -> List[ExtractionTask]:
    """Initiation for a batch run: full corpus scan and/or gap profiling
    plus any escalation file."""
    tasks: List[ExtractionTask] = []
    view = ctx.log.materialize_latest()
    if ctx.config.full_scan:
        for doc in ctx.corpus.latest_documents():
            if doc.subject_hint is None or doc.subject_hint not in ctx.kg:
                continue
            entity = ctx.kg.get(doc.subject_hint)
            tasks.append(
                ExtractionTask(
                    subject_id=entity.id,
                    subject_name=entity.canonical_name,
                    subject_aliases=tuple(a for a, _l in entity.aliases),
                    subject_type=next(iter(sorted(entity.types)), ""),
                    predicate=WILDCARD_PREDICATE,
                    urls=(doc.url,),
                    reason="full_scan",
                    created_at=ctx.clock.now_iso(),
                    language=doc.language,
                )
            )
    if ctx.config.targets:
        tasks.extend(
            initiator_mod.profile_gaps(ctx.kg, view, ctx.config.targets, ctx.ontology, ctx.clock)
        )
    if ctx.config.escalations_path:
        tasks.extend(load_tasks(ctx.config.escalations_path))
    return tasks


def retrieve_for_task(ctx: PipelineContext, task: ExtractionTask, index=None):
    if task.urls:
        return retrieve_crawl(task, ctx.corpus).documents
    if index is None:
        return []
    docs = []
    seen: Set[str] = set()
    for query in generate_queries(task, ctx.templates):
        for hit in search(index, query, ctx.config.search_k):
            if hit.url in seen:
                continue
            seen.add(hit.url)
            doc = ctx.corpus.latest(hit.url)
            if doc:
                docs.append(doc)
    return docs


def extract_for_task(
    ctx: PipelineContext, task: ExtractionTask, documents, run_id: str
) -> List[CandidateFact]:
    candidates: List[CandidateFact] = []
    stamp = ctx.clock.now_iso()
    for doc in documents:
        candidates.extend(extract_infobox(doc, ctx.ruleset, task.subject_id, run_id, stamp))
        candidates.extend(extract_links(doc, ctx.ruleset, task.subject_id, run_id, stamp))
    if task.predicate != WILDCARD_PREDICATE:
        candidates = [c for c in candidates if c.predicate == task.predicate]
    return candidates


def _fact_triple(fact: Fact) -> Tuple[str, str, str]:
    return (fact.subject, fact.predicate, json.dumps(value_to_json(fact.object), sort_keys=True))


def load_golden(path) -> Set[Tuple[str, str, str]]:
    golden: Set[Tuple[str, str, str]] = set()
    with Path(path).open(encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("schema") != "factmill.golden":
            raise ValueError(f"{path}: unexpected schema")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            golden.add(
                (obj["subject"], obj["predicate"], json.dumps(obj["object"], sort_keys=True))
            )
    return golden


def run_batch(
    config: PipelineConfig,
    clock: Optional[Clock] = None,
    run_id: str = "batch",
    task_store: Optional[TaskStore] = None,
    ctx: Optional[PipelineContext] = None,
) -> RunReport:
    """initiator -> retriever -> extractors -> corroborator -> ingestion.

    Deterministic for fixed inputs and worker count 1; multi-worker runs
    converge to the same latest view (candidates are re-sorted before
    corroboration)."""
    import time

    start = time.perf_counter()
    ctx = ctx or PipelineContext.from_config(config, clock)
    report = RunReport(run_id=run_id)
    tasks = build_tasks(ctx)
    report.tasks = len(tasks)
    index = build_index(ctx.corpus) if any(t.search_based for t in tasks) else None

    units: List[Tuple[ExtractionTask, list]] = []
    for task in tasks:
        documents = retrieve_for_task(ctx, task, index)
        report.documents += len(documents)
        units.append((task, documents))

    if ctx.config.workers > 1:
        with ThreadPoolExecutor(max_workers=ctx.config.workers) as pool:
            results = list(
                pool.map(lambda unit: extract_for_task(ctx, unit[0], unit[1], run_id), units)
            )
    else:
        results = [extract_for_task(ctx, task, documents, run_id) for task, documents in units]
    candidates: List[CandidateFact] = [c for group in results for c in group]
    # stable global order regardless of worker scheduling
    candidates.sort(key=lambda c: (c.subject, c.predicate, c.provenance.source_url, c.provenance.span, c.extractor_id))
    report.candidates = len(candidates)

    scored, _outcome = corroborate(candidates, ctx.ontology, ctx.kg, ctx.corroborator_config())
    report.clusters = len(scored)
    for sf in scored:
        report.routed[sf.route] += 1

    view = ctx.log.materialize_latest()
    auto: List[ScoredFact] = []
    for sf in scored:
        if sf.route != "auto":
            continue
        key = ctx.log.key_for(sf.fact)
        current = view.get(key)
        if current is not None and current.object == sf.fact.object:
            report.unchanged += 1  # no-op: same FactKey and value already latest
            continue
        auto.append(sf)
    summary = ingest_batch(auto, ctx.kg, ctx.log, run_id, ctx.ontology)
    report.appended = summary.appended
    report.diverted = summary.diverted
    report.rejected = summary.rejected

    curation_routed = [sf for sf in scored if sf.route == "curation"]
    if task_store is not None and curation_routed:
        new_tasks = generate_tasks(curation_routed, ctx.kg, view, ctx.corpus, ctx.clock)
        task_store.add_tasks(new_tasks)
        report.curation_tasks = len(new_tasks)
    else:
        report.curation_tasks = len(
            {(sf.fact.subject, sf.fact.predicate) for sf in curation_routed}
        )

    report.elapsed_seconds = time.perf_counter() - start
    if report.elapsed_seconds > 0:
        report.facts_per_minute = report.candidates / (report.elapsed_seconds / 60.0)

    if config.golden_path:
        golden = load_golden(config.golden_path)
        extracted = {
            _fact_triple(sf.fact) for sf in scored if sf.route == "auto"
        }
        tp = len(extracted & golden)
        report.precision = tp / len(extracted) if extracted else 1.0
        report.recall = tp / len(golden) if golden else 1.0
    return report


def run_stream(
    config: PipelineConfig,
    clock: Clock,
    run_id: str = "stream",
    delay_minutes_for: Optional[Dict[str, float]] = None,
) -> Tuple[SlaReport, RunReport]:
    """Poll the change feed on the configured interval, extract per event,
    and deliver facts through the streaming queue until the feed is
    exhausted. ``delay_minutes_for`` injects per-url processing lag (test
    hook for SLA violation cases)."""
    ctx = PipelineContext.from_config(config, clock)
    report = RunReport(run_id=run_id)
    if config.feed_path is None:
        raise ValueError("run_stream requires paths.feed in the config")
    feed = load_feed(config.feed_path)
    delay_minutes_for = delay_minutes_for or {}

    queue = BoundedFactQueue(capacity=4096)
    last_poll = ctx.clock.now()
    horizon = max(
        (parse_ts(ev.event_time) for ev in feed.events), default=last_poll
    )
    from datetime import timedelta

    interval = timedelta(minutes=config.poll_interval_minutes)
    poll_time = last_poll
    since = last_poll
    while True:
        poll_time = poll_time + interval
        if hasattr(ctx.clock, "set"):
            ctx.clock.set(poll_time)
        events = [
            ev
            for ev in poll_feed(feed, since)
            if parse_ts(ev.event_time) <= poll_time
        ]
        since = max((parse_ts(e.event_time) for e in events), default=since)
        clean = filter_vandalism(events)
        result = initiator_mod.tasks_from_events(clean, ctx.kg, ctx.corpus, ctx.clock)
        report.skipped_events += result.skipped
        report.tasks += len(result.tasks)
        for task in result.tasks:
            documents = retrieve_for_task(ctx, task)
            report.documents += len(documents)
            candidates = extract_for_task(ctx, task, documents, run_id)
            report.candidates += len(candidates)
            scored, _ = corroborate(candidates, ctx.ontology, ctx.kg, ctx.corroborator_config())
            for sf in scored:
                report.routed[sf.route] += 1
                if sf.route != "auto":
                    continue
                queue.put(
                    QueueItem(
                        scored=sf,
                        origin_event_time=task.origin_event_time,
                        enqueued_at=ctx.clock.now_iso(),
                        extra_delay_minutes=delay_minutes_for.get(task.urls[0], 0.0)
                        if task.urls
                        else 0.0,
                    )
                )
        if poll_time >= horizon:
            break
    queue.close()
    sla = ingest_stream(
        queue,
        ctx.kg,
        ctx.log,
        config.sla_minutes,
        ctx.clock,
        ctx.ontology,
        run_id=run_id,
        metrics_path=config.metrics_path,
    )
    return sla, report
