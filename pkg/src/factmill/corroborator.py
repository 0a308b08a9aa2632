"""Corroboration: normalize candidate values, link textual mentions,
cluster equivalent values, then score, rank and route each cluster.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .extractors import CandidateFact
from .model import (
    EntityRef,
    Fact,
    FactStatus,
    Quantity,
    Text,
    Value,
    ValueKind,
    parse_ts,
)
from .ontology import Ontology
from .store import KnowledgeGraph
from .values import (
    NormalizationError,
    normalize_value,
    parse_date,
    parse_money,
    relative_difference,
)

logger = logging.getLogger(__name__)


@dataclass
class CorroboratorConfig:
    auto_threshold: float = 0.8
    curation_floor: float = 0.4
    quantity_merge_tolerance: float = 0.01
    base_weights: Dict[str, float] = field(
        default_factory=lambda: {"pattern": 1.0, "link": 1.0, "model": 0.7}
    )

    def __post_init__(self):
        if not 0 <= self.curation_floor < self.auto_threshold <= 1:
            raise ValueError("thresholds must satisfy 0 <= floor < auto <= 1")


@dataclass(frozen=True)
class NormalizedCandidate:
    candidate: CandidateFact
    normalized: Value

    @property
    def subject(self) -> str:
        return self.candidate.subject

    @property
    def predicate(self) -> str:
        return self.candidate.predicate


@dataclass
class NormalizationOutcome:
    normalized: List[NormalizedCandidate]
    failures: int = 0
    ambiguous: List[CandidateFact] = field(default_factory=list)


def normalize(
    candidate: CandidateFact, ontology: Ontology, language: Optional[str] = None
) -> NormalizedCandidate:
    """Normalize the candidate value to the predicate's target kind.

    Idempotent: normalizing an already-normalized value is a fixpoint.
    Raises NormalizationError for unparseable surface forms.
    """
    language = language or candidate.language
    predicate = ontology.get(candidate.predicate)
    value = candidate.value
    target = predicate.value_kind
    if isinstance(value, Text) and target is ValueKind.DATE:
        normalized: Value = parse_date(value.text, language)
    elif isinstance(value, Text) and target is ValueKind.MONEY:
        normalized = parse_money(value.text, language)
    elif isinstance(value, Quantity):
        normalized = normalize_value(value)
    else:
        normalized = normalize_value(value, language)
    return NormalizedCandidate(candidate=candidate, normalized=normalized)


class LinkResult:
    pass


@dataclass(frozen=True)
class Linked(LinkResult):
    ref: EntityRef


@dataclass(frozen=True)
class Ambiguous(LinkResult):
    candidates: Tuple[str, ...]


@dataclass(frozen=True)
class NoMatch(LinkResult):
    pass


def link_mention(text: str, type_hint: Optional[str], kg: KnowledgeGraph) -> LinkResult:
    """Exact case-insensitive alias match with a type filter: unique hit
    links, multiple hits are ambiguous (curation), none is a miss."""
    type_filter = {type_hint} if type_hint else None
    matches = kg.find_by_name(text.strip(), type_filter)
    if len(matches) == 1:
        return Linked(EntityRef(matches[0].id))
    if len(matches) >= 2:
        return Ambiguous(tuple(sorted(e.id for e in matches)))
    return NoMatch()


def normalize_batch(
    candidates: Sequence[CandidateFact],
    ontology: Ontology,
    kg: KnowledgeGraph,
) -> NormalizationOutcome:
    """Normalize every candidate, resolving textual entity mentions along
    the way; unparseable candidates are dropped with a counter."""
    outcome = NormalizationOutcome(normalized=[])
    for cand in candidates:
        predicate = ontology.get(cand.predicate)
        if cand.needs_linking or (
            isinstance(cand.value, Text) and predicate.value_kind is ValueKind.ENTITY_REF
        ):
            hint = next(iter(sorted(predicate.allowed_object_types)), None)
            result = link_mention(cand.value.text, hint, kg)
            if isinstance(result, Linked):
                linked = replace(cand, value=result.ref, needs_linking=False)
                outcome.normalized.append(NormalizedCandidate(linked, result.ref))
            elif isinstance(result, Ambiguous):
                outcome.ambiguous.append(cand)
            else:
                outcome.failures += 1
            continue
        try:
            outcome.normalized.append(normalize(cand, ontology))
        except NormalizationError:
            logger.debug("normalization failed for %r", cand.raw_text)
            outcome.failures += 1
    return outcome


@dataclass
class FactCluster:
    subject: str
    predicate: str
    value: Value
    members: List[NormalizedCandidate]

    @property
    def support(self) -> int:
        return len(self.members)

    @property
    def distinct_sources(self) -> int:
        return len({m.candidate.provenance.source_url for m in self.members})

    def earliest_extraction(self) -> str:
        return min((m.candidate.provenance.extracted_at or "9999") for m in self.members)


def cluster(
    candidates: Sequence[NormalizedCandidate],
    merge_tolerance: float = 0.01,
) -> List[FactCluster]:
    """Group by exact normalized value per (subject, predicate), then
    merge quantity clusters within the relative-difference tolerance.

    A merged cluster takes the value of its best-supported member
    cluster; ties go to the smallest magnitude.
    """
    grouped: Dict[Tuple[str, str, str], FactCluster] = {}
    for nc in candidates:
        key = (nc.subject, nc.predicate, nc.normalized.sort_key())
        if key not in grouped:
            grouped[key] = FactCluster(nc.subject, nc.predicate, nc.normalized, [])
        grouped[key].members.append(nc)

    by_sp: Dict[Tuple[str, str], List[FactCluster]] = {}
    for (_s, _p, _v), cl in sorted(grouped.items()):
        by_sp.setdefault((cl.subject, cl.predicate), []).append(cl)

    out: List[FactCluster] = []
    for (_s, _p), clusters in sorted(by_sp.items()):
        quantity_clusters = [c for c in clusters if isinstance(c.value, Quantity)]
        other = [c for c in clusters if not isinstance(c.value, Quantity)]
        out.extend(other)
        out.extend(_merge_quantity_clusters(quantity_clusters, merge_tolerance))
    return out


def _merge_quantity_clusters(
    clusters: List[FactCluster], tolerance: float
) -> List[FactCluster]:
    # union-find over clusters whose magnitudes agree within tolerance
    n = len(clusters)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            a, b = clusters[i].value, clusters[j].value
            if a.unit == b.unit and relative_difference(a.magnitude, b.magnitude) <= tolerance:
                parent[find(i)] = find(j)
    groups: Dict[int, List[FactCluster]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(clusters[i])
    merged: List[FactCluster] = []
    for members in groups.values():
        if len(members) == 1:
            merged.append(members[0])
            continue
        representative = max(
            members, key=lambda c: (c.support, -c.value.magnitude)
        )
        merged.append(
            FactCluster(
                subject=representative.subject,
                predicate=representative.predicate,
                value=representative.value,
                members=[m for c in members for m in c.members],
            )
        )
    merged.sort(key=lambda c: c.value.sort_key())
    return merged


@dataclass
class ScoredFact:
    fact: Fact
    score: float
    rank: int
    route: str  # auto | curation | drop
    cluster: FactCluster


def _extractor_type(extractor_id: str) -> str:
    return extractor_id.split(":", 1)[0]


def score_and_rank(
    clusters: Sequence[FactCluster],
    ontology: Ontology,
    config: Optional[CorroboratorConfig] = None,
) -> List[ScoredFact]:
    """Score each cluster and produce a total ranking per (subject,
    predicate).

    score = max over members of (base_weight[extractor type] ×
    extractor_score) × (cluster support / total candidates for the
    subject-predicate pair). Ties break by distinct sources, earliest
    extraction time, then the smaller normalized value.
    """
    config = config or CorroboratorConfig()
    by_sp: Dict[Tuple[str, str], List[FactCluster]] = {}
    for cl in clusters:
        by_sp.setdefault((cl.subject, cl.predicate), []).append(cl)

    out: List[ScoredFact] = []
    for (subject, predicate_id), group in sorted(by_sp.items()):
        predicate = ontology.get(predicate_id)
        total = sum(c.support for c in group)
        scored: List[Tuple[float, FactCluster]] = []
        for cl in group:
            best_member = max(
                config.base_weights.get(_extractor_type(m.candidate.extractor_id), 0.5)
                * m.candidate.extractor_score
                for m in cl.members
            )
            scored.append((best_member * cl.support / total, cl))
        scored.sort(
            key=lambda sc: (
                -sc[0],
                -sc[1].distinct_sources,
                sc[1].earliest_extraction(),
                sc[1].value.sort_key(),
            )
        )
        for rank, (score, cl) in enumerate(scored, start=1):
            if predicate.sensitive:
                route = "curation"
            elif score >= config.auto_threshold:
                route = "auto"
            elif score >= config.curation_floor:
                route = "curation"
            else:
                route = "drop"
            provenance = tuple(m.candidate.provenance for m in cl.members)
            languages = {m.candidate.language for m in cl.members}
            fact = Fact(
                subject=subject,
                predicate=predicate_id,
                object=cl.value,
                confidence=round(score, 6),
                provenance=provenance,
                language=next(iter(sorted(languages)), "en"),
                status=FactStatus.CANDIDATE,
            )
            out.append(ScoredFact(fact=fact, score=score, rank=rank, route=route, cluster=cl))
    return out


def corroborate(
    candidates: Sequence[CandidateFact],
    ontology: Ontology,
    kg: KnowledgeGraph,
    config: Optional[CorroboratorConfig] = None,
) -> Tuple[List[ScoredFact], NormalizationOutcome]:
    """Full corroboration pass: normalize, cluster, score and route."""
    config = config or CorroboratorConfig()
    outcome = normalize_batch(candidates, ontology, kg)
    clusters = cluster(outcome.normalized, config.quantity_merge_tolerance)
    return score_and_rank(clusters, ontology, config), outcome
