"""Predicate registry with type constraints, loaded from a declarative file."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Optional

from .model import ValueKind

ONTOLOGY_SCHEMA = "factmill.ontology"
SCHEMA_VERSION = 1


class OntologyError(Exception):
    pass


@dataclass(frozen=True)
class Predicate:
    id: str
    name: str
    value_kind: ValueKind
    unit_dimension: Optional[str] = None
    functional: bool = False
    allowed_subject_types: FrozenSet[str] = frozenset()
    allowed_object_types: FrozenSet[str] = frozenset()
    sensitive: bool = False

    def __post_init__(self):
        if self.allowed_object_types and self.value_kind is not ValueKind.ENTITY_REF:
            raise OntologyError(
                f"{self.id}: allowed_object_types only applies to entity_ref predicates"
            )


@dataclass
class Ontology:
    predicates: Dict[str, Predicate] = field(default_factory=dict)

    def add(self, predicate: Predicate) -> None:
        if predicate.id in self.predicates:
            raise OntologyError(f"duplicate predicate id {predicate.id}")
        self.predicates[predicate.id] = predicate

    def get(self, predicate_id: str) -> Predicate:
        try:
            return self.predicates[predicate_id]
        except KeyError:
            raise OntologyError(f"unknown predicate {predicate_id!r}") from None

    def __contains__(self, predicate_id: str) -> bool:
        return predicate_id in self.predicates

    def is_functional(self, predicate_id: str) -> bool:
        return self.get(predicate_id).functional


def _predicate_from_json(obj: dict) -> Predicate:
    return Predicate(
        id=obj["id"],
        name=obj["name"],
        value_kind=ValueKind(obj["value_kind"]),
        unit_dimension=obj.get("unit_dimension"),
        functional=bool(obj.get("functional", False)),
        allowed_subject_types=frozenset(obj.get("allowed_subject_types", [])),
        allowed_object_types=frozenset(obj.get("allowed_object_types", [])),
        sensitive=bool(obj.get("sensitive", False)),
    )


def predicate_to_json(p: Predicate) -> dict:
    return {
        "id": p.id,
        "name": p.name,
        "value_kind": p.value_kind.value,
        "unit_dimension": p.unit_dimension,
        "functional": p.functional,
        "allowed_subject_types": sorted(p.allowed_subject_types),
        "allowed_object_types": sorted(p.allowed_object_types),
        "sensitive": p.sensitive,
    }


def load_ontology(path) -> Ontology:
    """Load predicates from a newline-delimited file with a schema header."""
    path = Path(path)
    ontology = Ontology()
    with path.open(encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError:
            raise OntologyError(f"{path}: missing schema header") from None
        if header.get("schema") != ONTOLOGY_SCHEMA:
            raise OntologyError(f"{path}: unexpected schema {header.get('schema')!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                ontology.add(_predicate_from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise OntologyError(f"{path}:{lineno}: bad predicate record: {exc}") from exc
    return ontology


def save_ontology(ontology: Ontology, path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema": ONTOLOGY_SCHEMA, "version": SCHEMA_VERSION}) + "\n")
        for p in sorted(ontology.predicates.values(), key=lambda p: p.id):
            fh.write(json.dumps(predicate_to_json(p)) + "\n")
