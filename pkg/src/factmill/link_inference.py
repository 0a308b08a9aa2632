"""Config-driven link inference: symmetric/inverse completeness closure
and confidence-based correction of conflicting functional facts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import yaml

from .ingestion import IngestSummary, ingest_batch
from .corroborator import ScoredFact, FactCluster
from .model import EntityRef, Fact, FactKey, FactStatus, Provenance, Text
from .ontology import Ontology
from .store import FactLog, KnowledgeGraph, LatestView

LINK_RULES_SCHEMA = "factmill.link_rules"

DEFAULT_FACTORS = {"symmetric": 1.0, "inverse": 0.99, "conditional_inverse": 0.98}


class LinkRuleError(Exception):
    pass


@dataclass(frozen=True)
class LinkInferenceRule:
    rule_id: str
    kind: str  # symmetric | inverse | conditional_inverse
    source: str
    target: Optional[str] = None  # inverse only
    condition_predicate: Optional[str] = None
    condition_mapping: Optional[Tuple[Tuple[str, str], ...]] = None  # value -> target predicate
    confidence_factor: float = 1.0
    correction: bool = False

    def __post_init__(self):
        if not 0 < self.confidence_factor <= 1:
            raise LinkRuleError(f"{self.rule_id}: confidence_factor outside (0, 1]")
        if self.kind == "symmetric" and self.target not in (None, self.source):
            raise LinkRuleError(f"{self.rule_id}: symmetric rule must target its source")
        if self.kind == "inverse" and not self.target:
            raise LinkRuleError(f"{self.rule_id}: inverse rule requires a target")
        if self.kind == "conditional_inverse" and not (
            self.condition_predicate and self.condition_mapping
        ):
            raise LinkRuleError(f"{self.rule_id}: conditional rule requires condition + mapping")

    def target_for(self, condition_value: Optional[str]) -> Optional[str]:
        if self.kind == "symmetric":
            return self.source
        if self.kind == "inverse":
            return self.target
        if condition_value is None:
            return None
        for value, target in self.condition_mapping:
            if value == condition_value:
                return target
        return None


def load_link_rules(path, ontology: Ontology) -> List[LinkInferenceRule]:
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if data.get("schema") != LINK_RULES_SCHEMA:
        raise LinkRuleError(f"{path}: unexpected schema {data.get('schema')!r}")
    rules: List[LinkInferenceRule] = []
    for obj in data.get("rules", []):
        kind = obj["kind"]
        rule = LinkInferenceRule(
            rule_id=obj["id"],
            kind=kind,
            source=obj["source"],
            target=obj.get("target"),
            condition_predicate=obj.get("condition_predicate"),
            condition_mapping=tuple(sorted((obj.get("mapping") or {}).items())) or None,
            confidence_factor=float(obj.get("confidence_factor", DEFAULT_FACTORS.get(kind, 1.0))),
            correction=bool(obj.get("correction", False)),
        )
        for pred in filter(None, [rule.source, rule.target, rule.condition_predicate]):
            if pred not in ontology:
                raise LinkRuleError(f"{rule.rule_id}: unknown predicate {pred!r}")
        if rule.condition_mapping:
            for _value, target in rule.condition_mapping:
                if target not in ontology:
                    raise LinkRuleError(f"{rule.rule_id}: unknown predicate {target!r}")
        rules.append(rule)
    return rules


@dataclass(frozen=True)
class InferredFact:
    fact: Fact
    derived_from: FactKey
    rule_id: str


def _inference_provenance(derived_from: FactKey, rule_id: str) -> Provenance:
    return Provenance(
        source_url=f"kg:{derived_from.as_string()}",
        revision_id="",
        span=f"rule:{rule_id}",
        extractor_id="link_inference",
        extracted_at="",
    )


def _condition_value(view: LatestView, subject: str, predicate: str) -> Optional[str]:
    facts = view.latest_for(subject, predicate)
    if not facts:
        return None
    value = facts[0].object
    if isinstance(value, Text):
        return value.text
    if isinstance(value, EntityRef):
        return value.entity_id
    return None


def _target_present(view: LatestView, subject: str, predicate: str, obj: EntityRef, functional: bool) -> bool:
    if functional:
        return bool(view.latest_for(subject, predicate))
    key = FactKey(subject, predicate, obj.sort_key())
    return view.get(key) is not None


@dataclass
class CompletenessResult:
    inferred: List[InferredFact]
    skipped_missing_condition: int = 0


def infer_completeness(
    view: LatestView, rules: Sequence[LinkInferenceRule], ontology: Ontology
) -> CompletenessResult:
    """Emit the reverse/derived edge for every source fact whose target
    edge is absent from the view; conditional rules consult the condition
    predicate's latest value and skip (counted) when it is missing."""
    result = CompletenessResult(inferred=[])
    for rule in rules:
        for fact in view.facts_by_predicate(rule.source):
            if not isinstance(fact.object, EntityRef):
                continue
            condition = None
            if rule.kind == "conditional_inverse":
                condition = _condition_value(view, fact.subject, rule.condition_predicate)
                if condition is None:
                    result.skipped_missing_condition += 1
                    continue
            target_predicate = rule.target_for(condition)
            if target_predicate is None:
                result.skipped_missing_condition += 1
                continue
            new_subject = fact.object.entity_id
            new_object = EntityRef(fact.subject)
            functional = ontology.is_functional(target_predicate)
            if _target_present(view, new_subject, target_predicate, new_object, functional):
                continue
            derived_from = FactKey.for_fact(fact, ontology.is_functional(fact.predicate))
            inferred = Fact(
                subject=new_subject,
                predicate=target_predicate,
                object=new_object,
                confidence=fact.confidence * rule.confidence_factor,
                provenance=(_inference_provenance(derived_from, rule.rule_id),),
                language=fact.language,
                status=FactStatus.INFERRED,
            )
            result.inferred.append(InferredFact(inferred, derived_from, rule.rule_id))
    return result


def infer_correctness(
    view: LatestView,
    rules: Sequence[LinkInferenceRule],
    ontology: Ontology,
    min_source_confidence: float = 0.9,
) -> List[Tuple[InferredFact, FactKey]]:
    """Corrections: when a derived edge conflicts with an existing
    functional fact of different value, replace it iff the derived
    confidence is strictly higher. The correction appends a new version
    of the existing key; old versions stay in the log."""
    corrections: List[Tuple[InferredFact, FactKey]] = []
    for rule in rules:
        if not rule.correction:
            continue
        for fact in view.facts_by_predicate(rule.source):
            if not isinstance(fact.object, EntityRef):
                continue
            if fact.confidence < min_source_confidence:
                continue
            condition = None
            if rule.kind == "conditional_inverse":
                condition = _condition_value(view, fact.subject, rule.condition_predicate)
            target_predicate = rule.target_for(condition)
            if target_predicate is None or not ontology.is_functional(target_predicate):
                continue
            new_subject = fact.object.entity_id
            new_object = EntityRef(fact.subject)
            existing = view.latest_for(new_subject, target_predicate)
            if not existing:
                continue  # completeness pass handles pure absence
            current = existing[0]
            if current.object == new_object:
                continue
            inferred_confidence = fact.confidence * rule.confidence_factor
            if inferred_confidence <= current.confidence:
                continue
            derived_from = FactKey.for_fact(fact, ontology.is_functional(fact.predicate))
            inferred = Fact(
                subject=new_subject,
                predicate=target_predicate,
                object=new_object,
                confidence=inferred_confidence,
                provenance=(_inference_provenance(derived_from, rule.rule_id),),
                language=fact.language,
                status=FactStatus.INFERRED,
            )
            replaced = FactKey(new_subject, target_predicate)
            corrections.append((InferredFact(inferred, derived_from, rule.rule_id), replaced))
    return corrections


def apply_inferred(
    inferred: Sequence[InferredFact],
    kg: KnowledgeGraph,
    log: FactLog,
    run_id: str,
) -> IngestSummary:
    """Append inferred facts (status preserved) through the ingestion path."""
    scored = [
        ScoredFact(
            fact=i.fact,
            score=i.fact.confidence,
            rank=1,
            route="auto",
            cluster=FactCluster(i.fact.subject, i.fact.predicate, i.fact.object, []),
        )
        for i in inferred
    ]
    return ingest_batch(scored, kg, log, run_id, status=FactStatus.INFERRED)
