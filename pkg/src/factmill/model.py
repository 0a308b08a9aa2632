"""Core domain types shared by every pipeline stage.

Facts are immutable value objects; the append-only log (see ``store``)
owns versioning and persistence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Optional, Union

INTERNAL_ID_PREFIX = "odke:"

_ISO_DATE = re.compile(r"^\d{4}(-\d{2}){0,2}$")


class FactStatus(str, Enum):
    CANDIDATE = "candidate"
    AUTO_INGESTED = "auto_ingested"
    CURATED_ACCEPTED = "curated_accepted"
    CURATED_REJECTED = "curated_rejected"
    RETRACTED = "retracted"
    INFERRED = "inferred"


#: Statuses whose versions are hidden from the materialized latest view.
HIDDEN_STATUSES = frozenset({FactStatus.CURATED_REJECTED, FactStatus.RETRACTED})


class ValueKind(str, Enum):
    ENTITY_REF = "entity_ref"
    QUANTITY = "quantity"
    DATE = "date"
    MONEY = "money"
    STRING = "string"
    EXTERNAL_ID = "external_id"


def is_internal_id(entity_id: str) -> bool:
    return entity_id.startswith(INTERNAL_ID_PREFIX)


def check_entity_id(entity_id: str) -> str:
    if not entity_id:
        raise ValueError("entity id must be non-empty")
    return entity_id


@dataclass(frozen=True)
class EntityRef:
    entity_id: str

    def sort_key(self) -> str:
        return f"E:{self.entity_id}"


@dataclass(frozen=True)
class Quantity:
    magnitude: float
    unit: str

    def __post_init__(self):
        if not (self.magnitude == self.magnitude and abs(self.magnitude) != float("inf")):
            raise ValueError("quantity magnitude must be finite")

    def sort_key(self) -> str:
        return f"Q:{self.magnitude:024.6f}:{self.unit}"


class DatePrecision(str, Enum):
    YEAR = "year"
    MONTH = "month"
    DAY = "day"


_PRECISION_LEN = {DatePrecision.YEAR: 4, DatePrecision.MONTH: 7, DatePrecision.DAY: 10}


@dataclass(frozen=True)
class DateValue:
    iso: str
    precision: DatePrecision = DatePrecision.DAY

    def __post_init__(self):
        if not _ISO_DATE.match(self.iso):
            raise ValueError(f"not an ISO-8601 date: {self.iso!r}")
        if len(self.iso) != _PRECISION_LEN[DatePrecision(self.precision)]:
            raise ValueError(f"date {self.iso!r} does not match precision {self.precision}")

    def sort_key(self) -> str:
        return f"D:{self.iso}"


@dataclass(frozen=True)
class Money:
    minor_units: int
    currency: str

    def __post_init__(self):
        if not re.match(r"^[A-Z]{3}$", self.currency):
            raise ValueError(f"not an ISO-4217 currency code: {self.currency!r}")

    def sort_key(self) -> str:
        return f"M:{self.minor_units:024d}:{self.currency}"


@dataclass(frozen=True)
class Text:
    text: str
    language: str = "en"

    def sort_key(self) -> str:
        return f"T:{self.text}"


@dataclass(frozen=True)
class ExternalId:
    value: str
    scheme: str

    def sort_key(self) -> str:
        return f"X:{self.scheme}:{self.value}"


Value = Union[EntityRef, Quantity, DateValue, Money, Text, ExternalId]

_KIND_BY_TYPE = {
    EntityRef: ValueKind.ENTITY_REF,
    Quantity: ValueKind.QUANTITY,
    DateValue: ValueKind.DATE,
    Money: ValueKind.MONEY,
    Text: ValueKind.STRING,
    ExternalId: ValueKind.EXTERNAL_ID,
}


def value_kind(value: Value) -> ValueKind:
    return _KIND_BY_TYPE[type(value)]


def value_to_json(value: Value) -> dict:
    kind = value_kind(value)
    if isinstance(value, EntityRef):
        body = {"entity_id": value.entity_id}
    elif isinstance(value, Quantity):
        body = {"magnitude": value.magnitude, "unit": value.unit}
    elif isinstance(value, DateValue):
        body = {"iso": value.iso, "precision": value.precision.value}
    elif isinstance(value, Money):
        body = {"minor_units": value.minor_units, "currency": value.currency}
    elif isinstance(value, Text):
        body = {"text": value.text, "language": value.language}
    else:
        body = {"value": value.value, "scheme": value.scheme}
    return {"kind": kind.value, **body}


def value_from_json(obj: dict) -> Value:
    kind = ValueKind(obj["kind"])
    if kind is ValueKind.ENTITY_REF:
        return EntityRef(obj["entity_id"])
    if kind is ValueKind.QUANTITY:
        return Quantity(float(obj["magnitude"]), obj["unit"])
    if kind is ValueKind.DATE:
        return DateValue(obj["iso"], DatePrecision(obj["precision"]))
    if kind is ValueKind.MONEY:
        return Money(int(obj["minor_units"]), obj["currency"])
    if kind is ValueKind.STRING:
        return Text(obj["text"], obj.get("language", "en"))
    return ExternalId(obj["value"], obj["scheme"])


@dataclass(frozen=True)
class Provenance:
    source_url: str
    revision_id: str
    span: str  # "passage:<id>:<start>:<end>" or "infobox:<row key>"
    extractor_id: str
    extracted_at: str  # ISO timestamp
    pipeline_run_id: str = ""

    def to_json(self) -> dict:
        return {
            "source_url": self.source_url,
            "revision_id": self.revision_id,
            "span": self.span,
            "extractor_id": self.extractor_id,
            "extracted_at": self.extracted_at,
            "pipeline_run_id": self.pipeline_run_id,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Provenance":
        return cls(
            source_url=obj["source_url"],
            revision_id=obj["revision_id"],
            span=obj["span"],
            extractor_id=obj["extractor_id"],
            extracted_at=obj["extracted_at"],
            pipeline_run_id=obj.get("pipeline_run_id", ""),
        )


@dataclass(frozen=True)
class Fact:
    subject: str
    predicate: str
    object: Value
    confidence: float
    provenance: tuple
    language: str = "en"
    status: FactStatus = FactStatus.CANDIDATE

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of range: {self.confidence}")
        if not self.provenance:
            raise ValueError("fact requires at least one provenance entry")
        if self.status is FactStatus.INFERRED and not any(
            p.extractor_id == "link_inference" for p in self.provenance
        ):
            raise ValueError("inferred fact must carry link_inference provenance")

    def with_status(self, status: FactStatus) -> "Fact":
        return replace(self, status=status)

    def to_json(self) -> dict:
        return {
            "subject": self.subject,
            "predicate": self.predicate,
            "object": value_to_json(self.object),
            "confidence": self.confidence,
            "provenance": [p.to_json() for p in self.provenance],
            "language": self.language,
            "status": self.status.value,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Fact":
        return cls(
            subject=obj["subject"],
            predicate=obj["predicate"],
            object=value_from_json(obj["object"]),
            confidence=float(obj["confidence"]),
            provenance=tuple(Provenance.from_json(p) for p in obj["provenance"]),
            language=obj.get("language", "en"),
            status=FactStatus(obj["status"]),
        )


@dataclass(frozen=True)
class FactKey:
    """Version identity of a logical fact.

    Functional predicates key on (subject, predicate); multi-valued
    predicates additionally key on the normalized object value.
    """

    subject: str
    predicate: str
    value_token: Optional[str] = None  # None for functional predicates

    def as_string(self) -> str:
        if self.value_token is None:
            return f"{self.subject}|{self.predicate}"
        return f"{self.subject}|{self.predicate}|{self.value_token}"

    @classmethod
    def for_fact(cls, fact: Fact, functional: bool) -> "FactKey":
        token = None if functional else fact.object.sort_key()
        return cls(fact.subject, fact.predicate, token)


@dataclass(frozen=True)
class VersionedFactRow:
    key: FactKey
    version: int
    fact: Fact
    appended_at: str
    run_id: str

    def __post_init__(self):
        if self.version < 1:
            raise ValueError("version must be positive")


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_ts(ts: str) -> datetime:
    """Parse the ISO-8601 timestamps used across fixture and log files."""
    if ts.endswith("Z"):
        ts = ts[:-1] + "+00:00"
    dt = datetime.fromisoformat(ts)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


@dataclass
class Clock:
    """Injectable clock; tests drive a simulated timeline."""

    def now(self) -> datetime:
        return datetime.now(timezone.utc)

    def now_iso(self) -> str:
        return self.now().strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class SimulatedClock(Clock):
    current: datetime = field(default_factory=lambda: datetime(2024, 1, 1, tzinfo=timezone.utc))

    def now(self) -> datetime:
        return self.current

    def advance_minutes(self, minutes: float) -> None:
        from datetime import timedelta

        self.current = self.current + timedelta(minutes=minutes)

    def set(self, dt: datetime) -> None:
        self.current = dt
