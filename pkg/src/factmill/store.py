"""Knowledge graph store: entities, the append-only versioned fact log,
and the materialized latest view.

The log is newline-delimited JSON with a schema header line and a crc32
checksum per row; replaying the file reconstructs the identical view.
"""

from __future__ import annotations

import itertools
import json
import threading
import zlib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from .model import (
    Clock,
    Fact,
    FactKey,
    FactStatus,
    HIDDEN_STATUSES,
    INTERNAL_ID_PREFIX,
    VersionedFactRow,
    check_entity_id,
    is_internal_id,
)
from .ontology import Ontology

LOG_SCHEMA = "factmill.factlog"
ENTITY_SCHEMA = "factmill.entities"
SCHEMA_VERSION = 1


class StoreError(Exception):
    pass


class CorruptLogError(StoreError):
    def __init__(self, path, lineno, reason):
        super().__init__(f"{path}:{lineno}: corrupt log row: {reason}")
        self.lineno = lineno


# ---------------------------------------------------------------------------
# Entities
# ---------------------------------------------------------------------------


class EntityOrigin(str, Enum):
    SEED = "seed"
    INGESTION = "ingestion"


@dataclass
class Entity:
    id: str
    canonical_name: str
    aliases: List[Tuple[str, str]] = field(default_factory=list)  # (alias, language)
    types: Set[str] = field(default_factory=set)
    created_by: EntityOrigin = EntityOrigin.SEED

    def __post_init__(self):
        check_entity_id(self.id)
        if not self.canonical_name:
            raise ValueError(f"entity {self.id}: canonical_name must be non-empty")
        if self.created_by is EntityOrigin.INGESTION and not self.types:
            raise ValueError(f"entity {self.id}: ingested entities require types")

    def all_names(self) -> Iterator[str]:
        yield self.canonical_name
        for alias, _lang in self.aliases:
            yield alias

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "canonical_name": self.canonical_name,
            "aliases": [[a, l] for a, l in self.aliases],
            "types": sorted(self.types),
            "created_by": self.created_by.value,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Entity":
        return cls(
            id=obj["id"],
            canonical_name=obj["canonical_name"],
            aliases=[(a, l) for a, l in obj.get("aliases", [])],
            types=set(obj.get("types", [])),
            created_by=EntityOrigin(obj.get("created_by", "seed")),
        )


class ResolveStatus(str, Enum):
    EXISTING = "existing"
    CREATED = "created"
    AMBIGUOUS = "ambiguous"


@dataclass
class ResolveResult:
    status: ResolveStatus
    entity_id: Optional[str] = None
    candidates: List[str] = field(default_factory=list)


class KnowledgeGraph:
    """Entity registry plus alias index. Fact state lives in the FactLog."""

    def __init__(self):
        self.entities: Dict[str, Entity] = {}
        self._by_name: Dict[str, Set[str]] = {}
        self._counter = itertools.count(1)
        self._lock = threading.Lock()

    def add_entity(self, entity: Entity) -> None:
        if entity.id in self.entities:
            raise StoreError(f"duplicate entity id {entity.id}")
        self.entities[entity.id] = entity
        for name in entity.all_names():
            self._by_name.setdefault(name.casefold(), set()).add(entity.id)

    def get(self, entity_id: str) -> Entity:
        try:
            return self.entities[entity_id]
        except KeyError:
            raise StoreError(f"unknown entity {entity_id!r}") from None

    def __contains__(self, entity_id: str) -> bool:
        return entity_id in self.entities

    def entities_of_type(self, type_id: str) -> List[Entity]:
        return [e for e in self.entities.values() if type_id in e.types]

    def find_by_name(self, name: str, type_filter: Optional[Set[str]] = None) -> List[Entity]:
        ids = self._by_name.get(name.casefold(), set())
        out = [self.entities[i] for i in sorted(ids)]
        if type_filter:
            out = [e for e in out if e.types & type_filter]
        return out

    def _next_internal_id(self) -> str:
        while True:
            candidate = f"{INTERNAL_ID_PREFIX}{next(self._counter)}"
            if candidate not in self.entities:
                return candidate

    def resolve_entity(
        self,
        name: str,
        aliases: Sequence[str] = (),
        type_hint: Optional[str] = None,
        external_id: Optional[str] = None,
    ) -> ResolveResult:
        """Resolve a mention to an entity, creating one when nothing matches.

        External IDs win outright; otherwise a unique case-insensitive
        name/alias match with compatible type is used; two or more matches
        signal ambiguity for curation routing.
        """
        if not name:
            raise StoreError("resolve_entity: empty name")
        with self._lock:
            if external_id and not is_internal_id(external_id) and external_id in self.entities:
                return ResolveResult(ResolveStatus.EXISTING, external_id)
            type_filter = {type_hint} if type_hint else None
            matched: Dict[str, Entity] = {}
            for candidate_name in [name, *aliases]:
                for entity in self.find_by_name(candidate_name, type_filter):
                    matched[entity.id] = entity
            if len(matched) == 1:
                return ResolveResult(ResolveStatus.EXISTING, next(iter(matched)))
            if len(matched) >= 2:
                return ResolveResult(ResolveStatus.AMBIGUOUS, candidates=sorted(matched))
            new_id = external_id if external_id else self._next_internal_id()
            entity = Entity(
                id=new_id,
                canonical_name=name,
                aliases=[(a, "und") for a in aliases],
                types={type_hint} if type_hint else {"Q35120"},  # fallback: "entity"
                created_by=EntityOrigin.INGESTION,
            )
            self.add_entity(entity)
            return ResolveResult(ResolveStatus.CREATED, new_id)


def load_entities(path, kg: Optional[KnowledgeGraph] = None) -> KnowledgeGraph:
    path = Path(path)
    kg = kg or KnowledgeGraph()
    with path.open(encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("schema") != ENTITY_SCHEMA:
            raise StoreError(f"{path}: unexpected schema {header.get('schema')!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                kg.add_entity(Entity.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise StoreError(f"{path}:{lineno}: bad entity record: {exc}") from exc
    return kg


def save_entities(kg: KnowledgeGraph, path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema": ENTITY_SCHEMA, "version": SCHEMA_VERSION}) + "\n")
        for entity in sorted(kg.entities.values(), key=lambda e: e.id):
            fh.write(json.dumps(entity.to_json(), ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# Append-only versioned fact log
# ---------------------------------------------------------------------------


def _row_payload(row: VersionedFactRow) -> dict:
    return {
        "key": row.key.as_string(),
        "version": row.version,
        "fact": row.fact.to_json(),
        "appended_at": row.appended_at,
        "run_id": row.run_id,
    }


def _key_from_string(key_str: str) -> FactKey:
    parts = key_str.split("|", 2)
    if len(parts) == 2:
        return FactKey(parts[0], parts[1])
    return FactKey(parts[0], parts[1], parts[2])


def _encode_row(row: VersionedFactRow) -> str:
    payload = json.dumps(_row_payload(row), ensure_ascii=False, sort_keys=True)
    crc = zlib.crc32(payload.encode("utf-8")) & 0xFFFFFFFF
    return json.dumps({"crc": crc, "row": json.loads(payload)}, ensure_ascii=False, sort_keys=True)


def _decode_row(line: str, path, lineno: int) -> VersionedFactRow:
    try:
        wrapper = json.loads(line)
        payload = wrapper["row"]
        expected_crc = wrapper["crc"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CorruptLogError(path, lineno, str(exc)) from exc
    actual = zlib.crc32(
        json.dumps(payload, ensure_ascii=False, sort_keys=True).encode("utf-8")
    ) & 0xFFFFFFFF
    if actual != expected_crc:
        raise CorruptLogError(path, lineno, f"checksum mismatch (got {actual}, want {expected_crc})")
    try:
        return VersionedFactRow(
            key=_key_from_string(payload["key"]),
            version=int(payload["version"]),
            fact=Fact.from_json(payload["fact"]),
            appended_at=payload["appended_at"],
            run_id=payload["run_id"],
        )
    except (KeyError, ValueError) as exc:
        raise CorruptLogError(path, lineno, str(exc)) from exc


@dataclass
class AppendOutcome:
    rows: List[VersionedFactRow]
    rejected: List[Tuple[Fact, str]]  # (fact, reason)


class LatestView:
    """Materialization of the log: newest non-hidden version per key."""

    def __init__(
        self,
        facts: Dict[str, Fact],
        versions: Dict[str, int],
        appended_at: Optional[Dict[str, str]] = None,
    ):
        self._facts = facts
        self._versions = versions
        self._appended_at = appended_at or {}

    def __len__(self) -> int:
        return len(self._facts)

    def __iter__(self) -> Iterator[Tuple[str, Fact]]:
        return iter(sorted(self._facts.items()))

    def get(self, key: FactKey) -> Optional[Fact]:
        return self._facts.get(key.as_string())

    def get_by_key_string(self, key_str: str) -> Optional[Fact]:
        return self._facts.get(key_str)

    def version_of(self, key: FactKey) -> Optional[int]:
        return self._versions.get(key.as_string())

    def appended_at_of(self, key_str: str) -> Optional[str]:
        return self._appended_at.get(key_str)

    def facts_by_subject(self, subject: str) -> List[Fact]:
        return [f for _, f in self if f.subject == subject]

    def facts_by_predicate(self, predicate: str) -> List[Fact]:
        return [f for _, f in self if f.predicate == predicate]

    def latest_for(self, subject: str, predicate: str) -> List[Fact]:
        return [f for _, f in self if f.subject == subject and f.predicate == predicate]

    def as_dict(self) -> Dict[str, Fact]:
        return dict(self._facts)


class FactLog:
    """Single-writer append-only log. Appends are serialized by a lock;
    readers always see a consistent prefix (rows are written whole lines,
    flushed before return)."""

    def __init__(self, path, ontology: Ontology, clock: Optional[Clock] = None):
        self.path = Path(path)
        self.ontology = ontology
        self.clock = clock or Clock()
        self._lock = threading.Lock()
        self._max_version: Dict[str, int] = {}
        if self.path.exists() and self.path.stat().st_size > 0:
            for row in self.scan():
                self._replay(row)
        else:
            with self.path.open("w", encoding="utf-8") as fh:
                fh.write(json.dumps({"schema": LOG_SCHEMA, "version": SCHEMA_VERSION}) + "\n")

    def _replay(self, row: VersionedFactRow) -> None:
        key = row.key.as_string()
        expected = self._max_version.get(key, 0) + 1
        if row.version != expected:
            raise StoreError(
                f"{self.path}: version gap for key {key}: got {row.version}, want {expected}"
            )
        self._max_version[key] = row.version

    def key_for(self, fact: Fact) -> FactKey:
        return FactKey.for_fact(fact, self.ontology.is_functional(fact.predicate))

    def scan(self) -> Iterator[VersionedFactRow]:
        with self.path.open(encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            if header.get("schema") != LOG_SCHEMA:
                raise StoreError(f"{self.path}: unexpected schema {header.get('schema')!r}")
            for lineno, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                yield _decode_row(line, self.path, lineno)

    def append_facts(
        self,
        facts: Iterable[Fact],
        run_id: str,
        validator=None,
    ) -> AppendOutcome:
        """Append one row per fact; versions are per-key successors.

        ``validator`` is called per fact and may veto it with a reason
        string; vetoed facts are rejected individually, the rest of the
        batch still lands. Rows are durable (flushed + fsynced) on return.
        """
        rows: List[VersionedFactRow] = []
        rejected: List[Tuple[Fact, str]] = []
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                for fact in facts:
                    if fact.predicate not in self.ontology:
                        rejected.append((fact, f"unknown predicate {fact.predicate!r}"))
                        continue
                    if validator is not None:
                        reason = validator(fact)
                        if reason:
                            rejected.append((fact, reason))
                            continue
                    key = self.key_for(fact)
                    key_str = key.as_string()
                    version = self._max_version.get(key_str, 0) + 1
                    row = VersionedFactRow(
                        key=key,
                        version=version,
                        fact=fact,
                        appended_at=self.clock.now_iso(),
                        run_id=run_id,
                    )
                    fh.write(_encode_row(row) + "\n")
                    self._max_version[key_str] = version
                    rows.append(row)
                fh.flush()
                import os

                os.fsync(fh.fileno())
        return AppendOutcome(rows=rows, rejected=rejected)

    def materialize_latest(self) -> LatestView:
        return materialize_latest(self.scan())

    def max_version(self, key: FactKey) -> int:
        return self._max_version.get(key.as_string(), 0)

    def row_count(self) -> int:
        return sum(self._max_version.values())


def materialize_latest(rows: Iterable[VersionedFactRow]) -> LatestView:
    """Select, per key, the fact of the maximum version whose status is
    not rejected/retracted. Deterministic for a fixed row sequence."""
    best: Dict[str, Tuple[int, Optional[Fact], str]] = {}
    for row in rows:
        key = row.key.as_string()
        prev = best.get(key)
        if prev is None or row.version > prev[0]:
            # A hidden (rejected/retracted) newest version tombstones the
            # key entirely: rejection supersedes older values.
            fact = None if row.fact.status in HIDDEN_STATUSES else row.fact
            best[key] = (row.version, fact, row.appended_at)
    facts = {k: f for k, (v, f, _t) in best.items() if f is not None}
    versions = {k: v for k, (v, _f, _t) in best.items()}
    appended = {k: t for k, (v, f, t) in best.items() if f is not None}
    return LatestView(facts, versions, appended)
