"""Pattern-based fact extraction from infobox rows.

A rule maps infobox keys to a predicate (predicate mapper), carries an
ordered list of regex value extractors, and a per-row aggregation policy
reconciling multiple matches (e.g. metric vs imperial height). Link
extraction reads hyperlink targets directly and is language-agnostic.
A pluggable question-answering client fronts model-based extraction.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import yaml

from .corpus import Document, InfoboxRow
from .model import (
    EntityRef,
    ExternalId,
    Provenance,
    Quantity,
    Text,
    Value,
    ValueKind,
    value_kind,
)
from .ontology import Ontology, Predicate
from .store import KnowledgeGraph
from .values import METRIC_UNITS, convert_quantity, relative_difference

logger = logging.getLogger(__name__)

RULES_SCHEMA = "factmill.rules"

METRIC_AGREEMENT_TOLERANCE = 0.02  # metric/imperial reconciliation band
DEFAULT_RULE_SCORE = 0.95

_URL_RE = re.compile(r"^https?://")


class RuleCompileError(Exception):
    def __init__(self, errors: List[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


class ExtractionError(Exception):
    pass


@dataclass(frozen=True)
class CandidateFact:
    subject: str
    predicate: str
    value: Value
    raw_text: str
    provenance: Provenance
    extractor_id: str
    extractor_score: float
    language: str = "en"
    metric_source: bool = False
    needs_linking: bool = False


@dataclass(frozen=True)
class ValueExtractor:
    pattern: re.Pattern
    kind: str  # quantity | quantity_feet_inches | text | external_id
    unit: Optional[str] = None  # fixed unit when the pattern has no unit group
    scheme: Optional[str] = None

    def extract(self, text: str) -> List[Tuple[int, int, Value]]:
        out: List[Tuple[int, int, Value]] = []
        for m in self.pattern.finditer(text):
            value = self._construct(m)
            if value is not None:
                out.append((m.start(), m.end(), value))
        return out

    def _construct(self, m: re.Match) -> Optional[Value]:
        groups = m.groupdict()
        if self.kind == "quantity":
            raw = groups.get("value", m.group(0)).replace(",", ".")
            unit = groups.get("unit") or self.unit
            if unit is None:
                return None
            try:
                return Quantity(float(raw), unit)
            except ValueError:
                return None
        if self.kind == "quantity_feet_inches":
            feet = int(groups.get("feet") or 0)
            inches = float(groups.get("inches") or 0)
            return Quantity(feet * 12 + inches, "in")
        if self.kind == "external_id":
            return ExternalId(groups.get("value", m.group(0)), self.scheme or "generic")
        captured = groups.get("value", m.group(0))
        return Text(captured)

    def is_metric(self) -> bool:
        if self.kind == "quantity_feet_inches":
            return False
        return self.unit in METRIC_UNITS if self.unit else True


@dataclass(frozen=True)
class ExtractionRule:
    rule_id: str
    language: str  # tag or "*"
    keys: Tuple[str, ...]  # case-insensitive literals
    key_pattern: Optional[re.Pattern]
    predicate: str
    value_extractors: Tuple[ValueExtractor, ...]
    aggregator_policy: str  # single | metric_preference | all_values
    score: float = DEFAULT_RULE_SCORE
    link_only: bool = False

    def matches_key(self, key: str) -> bool:
        folded = key.casefold().strip()
        if any(folded == k for k in self.keys):
            return True
        return bool(self.key_pattern and self.key_pattern.match(key.strip()))


@dataclass
class RuleSet:
    rules: List[ExtractionRule] = field(default_factory=list)
    link_rules: List[ExtractionRule] = field(default_factory=list)
    question_templates: Dict[str, List[str]] = field(default_factory=dict)

    def rules_for(self, language: str) -> List[ExtractionRule]:
        return [r for r in self.rules if r.language in (language, "*")]

    def link_rules_for(self, language: str) -> List[ExtractionRule]:
        return [r for r in self.link_rules if r.language in (language, "*")]


_TEXT_COMPATIBLE_KINDS = {
    ValueKind.DATE,
    ValueKind.MONEY,
    ValueKind.STRING,
    ValueKind.ENTITY_REF,  # texual mention, linked downstream
}


def _check_extractor_kind(extractor_kind: str, predicate: Predicate) -> Optional[str]:
    vk = predicate.value_kind
    if extractor_kind in ("quantity", "quantity_feet_inches"):
        if vk is not ValueKind.QUANTITY:
            return f"quantity extractor on {vk.value} predicate {predicate.id}"
    elif extractor_kind == "external_id":
        if vk is not ValueKind.EXTERNAL_ID:
            return f"external_id extractor on {vk.value} predicate {predicate.id}"
    elif extractor_kind == "text":
        if vk not in _TEXT_COMPATIBLE_KINDS:
            return f"text extractor on {vk.value} predicate {predicate.id}"
    else:
        return f"unknown extractor kind {extractor_kind!r}"
    return None


def _compile_rule(obj: dict, language: str, ontology: Ontology, errors: List[str]) -> Optional[ExtractionRule]:
    rule_id = obj.get("id", "<missing id>")
    predicate_id = obj.get("predicate")
    if predicate_id not in ontology:
        errors.append(f"{rule_id}: unknown predicate {predicate_id!r}")
        return None
    predicate = ontology.get(predicate_id)
    extractors: List[ValueExtractor] = []
    for spec in obj.get("extractors", []):
        kind = spec.get("kind", "text")
        problem = _check_extractor_kind(kind, predicate)
        if problem:
            errors.append(f"{rule_id}: {problem}")
            return None
        try:
            pattern = re.compile(spec["pattern"], re.IGNORECASE)
        except re.error as exc:
            errors.append(f"{rule_id}: invalid regex: {exc}")
            return None
        extractors.append(
            ValueExtractor(
                pattern=pattern,
                kind=kind,
                unit=spec.get("unit"),
                scheme=spec.get("scheme"),
            )
        )
    link_only = bool(obj.get("link_only", False))
    if not extractors and not link_only:
        errors.append(f"{rule_id}: needs at least one value extractor (or link_only)")
        return None
    key_pattern = None
    if obj.get("key_pattern"):
        try:
            key_pattern = re.compile(obj["key_pattern"], re.IGNORECASE)
        except re.error as exc:
            errors.append(f"{rule_id}: invalid key_pattern: {exc}")
            return None
    return ExtractionRule(
        rule_id=rule_id,
        language=obj.get("language", language),
        keys=tuple(k.casefold() for k in obj.get("keys", [])),
        key_pattern=key_pattern,
        predicate=predicate_id,
        value_extractors=tuple(extractors),
        aggregator_policy=obj.get("aggregator", "single"),
        score=float(obj.get("score", DEFAULT_RULE_SCORE)),
        link_only=link_only,
    )


def _compile_link_rule(obj: dict, language: str, ontology: Ontology, errors: List[str]) -> Optional[ExtractionRule]:
    rule_id = obj.get("id", "<missing id>")
    predicate_id = obj.get("predicate")
    if predicate_id not in ontology:
        errors.append(f"{rule_id}: unknown predicate {predicate_id!r}")
        return None
    if ontology.get(predicate_id).value_kind is not ValueKind.ENTITY_REF:
        errors.append(f"{rule_id}: link rule requires an entity_ref predicate")
        return None
    key_pattern = None
    if obj.get("key_pattern"):
        try:
            key_pattern = re.compile(obj["key_pattern"], re.IGNORECASE)
        except re.error as exc:
            errors.append(f"{rule_id}: invalid key_pattern: {exc}")
            return None
    return ExtractionRule(
        rule_id=rule_id,
        language=obj.get("language", language),
        keys=tuple(k.casefold() for k in obj.get("keys", [])),
        key_pattern=key_pattern,
        predicate=predicate_id,
        value_extractors=(),
        aggregator_policy="all_values",
        score=float(obj.get("score", DEFAULT_RULE_SCORE)),
        link_only=True,
    )


def compile_rules(rule_files: Sequence, ontology: Ontology) -> RuleSet:
    """Compile declarative rule files (one per language), rejecting rules
    that conflict with the ontology at compile time."""
    ruleset = RuleSet()
    errors: List[str] = []
    for path in rule_files:
        path = Path(path)
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
        if not data:
            logger.warning("empty rule file %s", path)
            continue
        if data.get("schema") != RULES_SCHEMA:
            errors.append(f"{path}: unexpected schema {data.get('schema')!r}")
            continue
        language = data.get("language", "*")
        for obj in data.get("rules", []) or []:
            rule = _compile_rule(obj, language, ontology, errors)
            if rule:
                ruleset.rules.append(rule)
        for obj in data.get("link_rules", []) or []:
            rule = _compile_link_rule(obj, language, ontology, errors)
            if rule:
                ruleset.link_rules.append(rule)
        for pred, questions in (data.get("questions") or {}).items():
            ruleset.question_templates.setdefault(pred, []).extend(questions)
    if errors:
        raise RuleCompileError(errors)
    if not ruleset.rules and not ruleset.link_rules:
        logger.warning("rule compilation produced an empty rule set")
    return ruleset


# ---------------------------------------------------------------------------
# Infobox extraction
# ---------------------------------------------------------------------------


def _row_span(row_index: int, start: int, end: int) -> str:
    return f"infobox:{row_index}:{start}:{end}"


def resolve_span(document: Document, span: str) -> Optional[str]:
    """Dereference a provenance span against the stored document."""
    parts = span.split(":")
    if parts[0] == "infobox":
        row_index, start, end = int(parts[1]), int(parts[2]), int(parts[3])
        if row_index >= len(document.infobox):
            return None
        return document.infobox[row_index].raw_value[start:end]
    if parts[0] == "passage":
        pid, start, end = parts[1], int(parts[2]), int(parts[3])
        text = document.passage(pid)
        return None if text is None else text[start:end]
    return None


def extract_infobox(
    document: Document,
    ruleset: RuleSet,
    subject: str,
    run_id: str = "",
    extracted_at: str = "",
) -> List[CandidateFact]:
    """Apply key-matching rules of the document's language to each row;
    rows matching no rule are skipped silently."""
    if not isinstance(document, Document):
        raise ExtractionError(f"not a document: {document!r}")
    rules = ruleset.rules_for(document.language)
    out: List[CandidateFact] = []
    for row_index, row in enumerate(document.infobox):
        for rule in rules:
            if rule.link_only or not rule.matches_key(row.key):
                continue
            row_candidates: List[CandidateFact] = []
            for ex_index, extractor in enumerate(rule.value_extractors):
                for start, end, value in extractor.extract(row.raw_value):
                    prov = Provenance(
                        source_url=document.url,
                        revision_id=document.revision_id,
                        span=_row_span(row_index, start, end),
                        extractor_id=f"pattern:{rule.rule_id}:{ex_index}",
                        extracted_at=extracted_at,
                        pipeline_run_id=run_id,
                    )
                    row_candidates.append(
                        CandidateFact(
                            subject=subject,
                            predicate=rule.predicate,
                            value=value,
                            raw_text=row.raw_value[start:end],
                            provenance=prov,
                            extractor_id=f"pattern:{rule.rule_id}:{ex_index}",
                            extractor_score=rule.score,
                            language=document.language,
                            metric_source=extractor.is_metric(),
                        )
                    )
            out.extend(aggregate_row(row_candidates, rule.aggregator_policy))
    return out


def aggregate_row(candidates: List[CandidateFact], policy: str) -> List[CandidateFact]:
    """Reconcile the multiple values one row produced.

    metric_preference converts quantities to a common unit; when all
    values agree within 2% only the metric-sourced candidate survives,
    otherwise all pass through for the corroborator to arbitrate.
    """
    if len(candidates) <= 1 or policy == "all_values":
        return list(candidates)
    if policy == "single":
        best = max(
            range(len(candidates)),
            key=lambda i: (candidates[i].extractor_score, -i),
        )
        return [candidates[best]]
    if policy == "metric_preference":
        quantities = [c for c in candidates if isinstance(c.value, Quantity)]
        if len(quantities) != len(candidates):
            return list(candidates)
        try:
            converted = [convert_quantity(c.value, _common_unit(quantities)) for c in quantities]
        except Exception:
            return list(candidates)
        magnitudes = [q.magnitude for q in converted]
        max_diff = max(
            relative_difference(a, b) for a in magnitudes for b in magnitudes
        )
        if max_diff <= METRIC_AGREEMENT_TOLERANCE:
            for c in candidates:
                if c.metric_source:
                    return [c]
            return [candidates[0]]
        return list(candidates)
    raise ExtractionError(f"unknown aggregator policy {policy!r}")


def _common_unit(candidates: List[CandidateFact]) -> str:
    from .values import CANONICAL_UNIT, dimension_of_unit

    dim = dimension_of_unit(candidates[0].value.unit)
    if dim is None:
        raise ExtractionError(f"unknown unit {candidates[0].value.unit!r}")
    return CANONICAL_UNIT[dim]


def extract_links(
    document: Document,
    ruleset: RuleSet,
    subject: str,
    run_id: str = "",
    extracted_at: str = "",
) -> List[CandidateFact]:
    """Read hyperlink targets as object entities: entity-id targets copy
    straight through (language-agnostic); raw-url targets are flagged for
    entity resolution downstream."""
    rules = ruleset.link_rules_for(document.language)
    out: List[CandidateFact] = []
    for row_index, row in enumerate(document.infobox):
        for rule in rules:
            if not rule.matches_key(row.key):
                continue
            for link in row.hyperlinks:
                anchor = row.raw_value[link.char_start : link.char_end]
                prov = Provenance(
                    source_url=document.url,
                    revision_id=document.revision_id,
                    span=_row_span(row_index, link.char_start, link.char_end),
                    extractor_id=f"link:{rule.rule_id}",
                    extracted_at=extracted_at,
                    pipeline_run_id=run_id,
                )
                if _URL_RE.match(link.target):
                    value: Value = Text(anchor)
                    needs_linking = True
                else:
                    value = EntityRef(link.target)
                    needs_linking = False
                out.append(
                    CandidateFact(
                        subject=subject,
                        predicate=rule.predicate,
                        value=value,
                        raw_text=anchor,
                        provenance=prov,
                        extractor_id=f"link:{rule.rule_id}",
                        extractor_score=rule.score,
                        language=document.language,
                        needs_linking=needs_linking,
                    )
                )
    return out


# ---------------------------------------------------------------------------
# Type validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    predicate: str
    reason: str


def validate_types(fact_like, ontology: Ontology, kg: KnowledgeGraph) -> Optional[Violation]:
    """Check a fact or candidate against the predicate's ontology
    constraints; returns a Violation (never raises) on failure."""
    predicate = ontology.get(fact_like.predicate)
    value = fact_like.value if isinstance(fact_like, CandidateFact) else fact_like.object
    vk = value_kind(value)
    if vk is not predicate.value_kind:
        if not (getattr(fact_like, "needs_linking", False) and vk is ValueKind.STRING):
            return Violation(predicate.id, f"value kind {vk.value} != {predicate.value_kind.value}")
    if isinstance(value, Quantity) and predicate.unit_dimension:
        from .values import dimension_of_unit

        if dimension_of_unit(value.unit) != predicate.unit_dimension:
            return Violation(
                predicate.id,
                f"unit {value.unit!r} outside dimension {predicate.unit_dimension}",
            )
    if predicate.allowed_subject_types and fact_like.subject in kg:
        subject_types = kg.get(fact_like.subject).types
        if not subject_types & predicate.allowed_subject_types:
            return Violation(
                predicate.id,
                f"subject {fact_like.subject} types {sorted(subject_types)} "
                f"disjoint from allowed {sorted(predicate.allowed_subject_types)}",
            )
    if isinstance(value, EntityRef) and predicate.allowed_object_types:
        if value.entity_id not in kg:
            return Violation(predicate.id, f"object entity {value.entity_id} unknown")
        object_types = kg.get(value.entity_id).types
        if not object_types & predicate.allowed_object_types:
            return Violation(
                predicate.id,
                f"object {value.entity_id} types {sorted(object_types)} "
                f"disjoint from allowed {sorted(predicate.allowed_object_types)}",
            )
    return None


# ---------------------------------------------------------------------------
# Model-based extraction front
# ---------------------------------------------------------------------------


class ModelClientError(Exception):
    pass


class ModelExtractorClient:
    """Question-answering client interface. ``ask`` returns a dict with
    keys text/char_start/char_end/score, or None when there is no answer."""

    def ask(self, passage: str, question: str) -> Optional[dict]:
        raise NotImplementedError


class MockModelClient(ModelExtractorClient):
    """Deterministic scripted client for tests: maps (question substring,
    passage substring) to an answer span."""

    def __init__(self, script: Dict[str, Tuple[str, float]], down: bool = False):
        # script: question -> (answer substring to locate, score)
        self.script = script
        self.down = down

    def ask(self, passage: str, question: str) -> Optional[dict]:
        if self.down:
            raise ModelClientError("mock client down")
        entry = self.script.get(question)
        if entry is None:
            return None
        answer, score = entry
        start = passage.find(answer)
        if start < 0:
            return None
        return {"text": answer, "char_start": start, "char_end": start + len(answer), "score": score}


class HttpModelClient(ModelExtractorClient):
    """Minimal HTTP QA client. POST {"passage": …, "question": …} to the
    endpoint; response body mirrors the ask() answer dict."""

    def __init__(self, endpoint: str, timeout: float = 5.0):
        self.endpoint = endpoint
        self.timeout = timeout

    def ask(self, passage: str, question: str) -> Optional[dict]:
        import httpx

        try:
            resp = httpx.post(
                self.endpoint,
                json={"passage": passage, "question": question},
                timeout=self.timeout,
            )
            resp.raise_for_status()
        except Exception as exc:
            raise ModelClientError(str(exc)) from exc
        body = resp.json()
        return body.get("answer")


def format_questions(subject_name: str, predicate: str, ruleset: RuleSet) -> List[str]:
    templates = ruleset.question_templates.get(predicate, [])
    return [t.format(subject=subject_name) for t in templates]


@dataclass
class ModelExtractionResult:
    candidates: List[CandidateFact]
    deferred: bool = False


def model_extract(
    client: ModelExtractorClient,
    task,
    document: Document,
    ruleset: RuleSet,
    run_id: str = "",
    extracted_at: str = "",
) -> ModelExtractionResult:
    """Format questions for the task's predicate and query the client per
    passage. A dead client never crashes the pipeline: the task comes back
    flagged deferred."""
    questions = format_questions(task.subject_name, task.predicate, ruleset)
    if not questions:
        return ModelExtractionResult(candidates=[])
    candidates: List[CandidateFact] = []
    for passage_id, text in document.passages:
        for question in questions:
            try:
                answer = client.ask(text, question)
            except ModelClientError:
                return ModelExtractionResult(candidates=[], deferred=True)
            if not answer:
                continue
            start, end = answer["char_start"], answer["char_end"]
            prov = Provenance(
                source_url=document.url,
                revision_id=document.revision_id,
                span=f"passage:{passage_id}:{start}:{end}",
                extractor_id="model:qa",
                extracted_at=extracted_at,
                pipeline_run_id=run_id,
            )
            candidates.append(
                CandidateFact(
                    subject=task.subject_id,
                    predicate=task.predicate,
                    value=Text(answer["text"]),
                    raw_text=text[start:end],
                    provenance=prov,
                    extractor_id="model:qa",
                    extractor_score=float(answer.get("score", 0.5)),
                    language=document.language,
                )
            )
    return ModelExtractionResult(candidates=candidates)
