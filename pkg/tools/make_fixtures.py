#!/usr/bin/env python3
"""Regenerate the committed test fixtures (deterministic).

Writes tests/fixtures/: ontology + entity seed, the 50-document bilingual
golden corpus with its label file, a 200-event change feed, extraction
rule files, query templates, and link-inference rules. The golden labels
are derived here from the same person table the documents are rendered
from, independently of the extraction code.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"

EN_MONTHS = [
    "January", "February", "March", "April", "May", "June",
    "July", "August", "September", "October", "November", "December",
]
ES_MONTHS = [
    "enero", "febrero", "marzo", "abril", "mayo", "junio",
    "julio", "agosto", "septiembre", "octubre", "noviembre", "diciembre",
]

CITIES = [
    ("Q9001", "Brookfield Heights"),
    ("Q9002", "Port Alvera"),
    ("Q9003", "Casterbridge"),
    ("Q9004", "Nueva Esperanza"),
    ("Q9005", "Lakewood Falls"),
    ("Q9006", "San Verino"),
]

FIRST = [
    "Amara", "Bennett", "Carla", "Dimitri", "Elena", "Farid", "Greta", "Hiro",
    "Imani", "Jonas", "Katya", "Lorenzo", "Mireia", "Nadia", "Oskar", "Priya",
    "Quentin", "Rosa", "Stefan", "Talia", "Umar", "Vera", "Wen", "Ximena",
]
LAST = [
    "Okafor", "Lindqvist", "Moreno", "Petrov", "Vasquez", "Nazari", "Holm",
    "Tanaka", "Jallow", "Keller", "Orlova", "Bianchi", "Serra", "Haddad",
    "Nilsen", "Raman", "Dubois", "Delgado", "Novak", "Aridi", "Farouk",
    "Santos", "Liang", "Reyes",
]


def persons():
    """The source-of-truth table the corpus and labels are rendered from."""
    out = []
    for i in range(24):
        qid = f"Q{100001 + i}"
        name = f"{FIRST[i]} {LAST[i]}"
        height_cm = 160 + (i * 3) % 50  # 160..209
        year = 1950 + (i * 7) % 50
        month = 1 + (i * 5) % 12
        day = 1 + (i * 11) % 28
        city_id, city_name = CITIES[i % len(CITIES)]
        bilingual = i % 2 == 0  # 12 of 24 have a Spanish page too
        out.append(
            {
                "qid": qid,
                "name": name,
                "alias": f"{FIRST[i][0]}. {LAST[i]}",
                "height_cm": height_cm,
                "dob": f"{year:04d}-{month:02d}-{day:02d}",
                "city_id": city_id,
                "city_name": city_name,
                "bilingual": bilingual,
            }
        )
    return out


def imperial(height_cm: float):
    total_inches = round(height_cm / 2.54)
    return total_inches // 12, total_inches % 12


def en_date(dob: str) -> str:
    y, m, d = dob.split("-")
    return f"{EN_MONTHS[int(m) - 1]} {int(d)}, {y}"


def es_date(dob: str) -> str:
    y, m, d = dob.split("-")
    return f"{int(d)} de {ES_MONTHS[int(m) - 1]} de {y}"


def ndjson(path: Path, header: dict, records) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def write_ontology() -> None:
    predicates = [
        {"id": "P2048", "name": "height", "value_kind": "quantity", "unit_dimension": "length",
         "functional": True, "allowed_subject_types": ["Q5"], "allowed_object_types": [],
         "sensitive": False},
        {"id": "P569", "name": "date of birth", "value_kind": "date", "unit_dimension": None,
         "functional": True, "allowed_subject_types": ["Q5"], "allowed_object_types": [],
         "sensitive": False},
        {"id": "P19", "name": "place of birth", "value_kind": "entity_ref", "unit_dimension": None,
         "functional": True, "allowed_subject_types": ["Q5"],
         "allowed_object_types": ["Q2221906"], "sensitive": False},
        {"id": "P1082", "name": "population", "value_kind": "quantity", "unit_dimension": "count",
         "functional": True, "allowed_subject_types": ["Q2221906"], "allowed_object_types": [],
         "sensitive": False},
        {"id": "P2218", "name": "net worth", "value_kind": "money", "unit_dimension": None,
         "functional": True, "allowed_subject_types": ["Q5"], "allowed_object_types": [],
         "sensitive": False},
        {"id": "P2397", "name": "YouTube channel ID", "value_kind": "external_id",
         "unit_dimension": None, "functional": True, "allowed_subject_types": ["Q5"],
         "allowed_object_types": [], "sensitive": True},
        {"id": "has_spouse", "name": "spouse", "value_kind": "entity_ref", "unit_dimension": None,
         "functional": False, "allowed_subject_types": ["Q5"], "allowed_object_types": ["Q5"],
         "sensitive": False},
        {"id": "has_child", "name": "child", "value_kind": "entity_ref", "unit_dimension": None,
         "functional": False, "allowed_subject_types": ["Q5"], "allowed_object_types": ["Q5"],
         "sensitive": False},
        {"id": "has_father", "name": "father", "value_kind": "entity_ref", "unit_dimension": None,
         "functional": True, "allowed_subject_types": ["Q5"], "allowed_object_types": ["Q5"],
         "sensitive": False},
        {"id": "has_mother", "name": "mother", "value_kind": "entity_ref", "unit_dimension": None,
         "functional": True, "allowed_subject_types": ["Q5"], "allowed_object_types": ["Q5"],
         "sensitive": False},
        {"id": "gender", "name": "gender", "value_kind": "string", "unit_dimension": None,
         "functional": True, "allowed_subject_types": ["Q5"], "allowed_object_types": [],
         "sensitive": False},
        {"id": "located_in", "name": "located in", "value_kind": "entity_ref",
         "unit_dimension": None, "functional": True,
         "allowed_subject_types": ["Q2221906"], "allowed_object_types": ["Q2221906"],
         "sensitive": False},
        {"id": "contain_cities", "name": "contains city", "value_kind": "entity_ref",
         "unit_dimension": None, "functional": False,
         "allowed_subject_types": ["Q2221906"], "allowed_object_types": ["Q2221906"],
         "sensitive": False},
    ]
    ndjson(FIXTURES / "ontology.ndjson", {"schema": "factmill.ontology", "version": 1}, predicates)


def write_entities(people) -> None:
    records = [
        {"id": "Q5", "canonical_name": "human", "aliases": [["person", "en"]],
         "types": [], "created_by": "seed"},
        {"id": "Q2221906", "canonical_name": "geographic location", "aliases": [],
         "types": [], "created_by": "seed"},
    ]
    for city_id, city_name in CITIES:
        records.append(
            {"id": city_id, "canonical_name": city_name, "aliases": [],
             "types": ["Q2221906"], "created_by": "seed"}
        )
    for p in people:
        records.append(
            {"id": p["qid"], "canonical_name": p["name"],
             "aliases": [[p["alias"], "en"]], "types": ["Q5"], "created_by": "seed"}
        )
    ndjson(FIXTURES / "entities.ndjson", {"schema": "factmill.entities", "version": 1}, records)


def slug(name: str) -> str:
    return name.lower().replace(" ", "_").replace(".", "")


def en_url(p) -> str:
    return f"https://wiki.example/en/{slug(p['name'])}"


def es_url(p) -> str:
    return f"https://wiki.example/es/{slug(p['name'])}"


def en_doc(p, i) -> dict:
    ft, inch = imperial(p["height_cm"])
    metric_m = p["height_cm"] / 100.0
    height_raw = f"{metric_m:.2f} m ({ft} ft {inch} in)"
    born_raw = en_date(p["dob"])
    place_raw = p["city_name"]
    passage = (
        f"{p['name']} is a well known figure. {p['name']} was born on {born_raw} "
        f"in {p['city_name']} and has a listed height of {metric_m:.2f} m."
    )
    return {
        "url": en_url(p),
        "language": "en",
        "revision_id": "r1",
        "revision_time": f"2024-01-{(i % 28) + 1:02d}T08:00:00Z",
        "subject_hint": p["qid"],
        "infobox": [
            {"key": "Height", "raw_value": height_raw, "hyperlinks": []},
            {"key": "Born", "raw_value": born_raw, "hyperlinks": []},
            {"key": "Birthplace", "raw_value": place_raw,
             "hyperlinks": [[0, len(place_raw), p["city_id"]]]},
            {"key": "Occupation", "raw_value": "public figure", "hyperlinks": []},
        ],
        "passages": [["p1", passage]],
        "tables": [],
    }


def es_doc(p, i) -> dict:
    metric_m = p["height_cm"] / 100.0
    height_raw = f"{metric_m:.2f} m".replace(".", ",")
    born_raw = es_date(p["dob"])
    place_raw = p["city_name"]
    passage = f"{p['name']} nació el {born_raw} en {p['city_name']}."
    return {
        "url": es_url(p),
        "language": "es",
        "revision_id": "r1",
        "revision_time": f"2024-01-{(i % 28) + 1:02d}T09:00:00Z",
        "subject_hint": p["qid"],
        "infobox": [
            {"key": "Estatura", "raw_value": height_raw, "hyperlinks": []},
            {"key": "Nacimiento", "raw_value": born_raw, "hyperlinks": []},
            {"key": "Lugar de nacimiento", "raw_value": place_raw,
             "hyperlinks": [[0, len(place_raw), p["city_id"]]]},
        ],
        "passages": [["p1", passage]],
        "tables": [],
    }


def write_corpus_and_golden(people) -> None:
    docs = []
    for i, p in enumerate(people):
        docs.append(en_doc(p, i))
        if p["bilingual"]:
            docs.append(es_doc(p, i))
    # two extra revisions of the first person's page, to exercise
    # newest-revision retrieval (corpus stays at 50 records: 24 en + 12 es
    # + 2 extra revisions + 12 filler city pages)
    first = people[0]
    for rev, hour in (("r2", 10), ("r3", 12)):
        doc = en_doc(first, 0)
        doc["revision_id"] = rev
        doc["revision_time"] = f"2024-02-01T{hour:02d}:00:00Z"
        docs.append(doc)
    for city_id, city_name in CITIES * 2:
        if sum(1 for d in docs) >= 50:
            break
        docs.append(
            {
                "url": f"https://wiki.example/en/city_{city_id.lower()}_{len(docs)}",
                "language": "en",
                "revision_id": "r1",
                "revision_time": "2024-01-15T00:00:00Z",
                "subject_hint": city_id,
                "infobox": [],
                "passages": [["p1", f"{city_name} is a settlement."]],
                "tables": [],
            }
        )
    assert len(docs) == 50, len(docs)
    ndjson(FIXTURES / "corpus_golden.ndjson", {"schema": "factmill.corpus", "version": 1}, docs)

    golden = []
    for p in people:
        y, m, d = p["dob"].split("-")
        golden.append({"subject": p["qid"], "predicate": "P2048",
                       "object": {"kind": "quantity", "magnitude": float(p["height_cm"]),
                                  "unit": "cm"}})
        golden.append({"subject": p["qid"], "predicate": "P569",
                       "object": {"kind": "date", "iso": p["dob"], "precision": "day"}})
        golden.append({"subject": p["qid"], "predicate": "P19",
                       "object": {"kind": "entity_ref", "entity_id": p["city_id"]}})
    ndjson(FIXTURES / "golden.ndjson", {"schema": "factmill.golden", "version": 1}, golden)


def write_feed(people) -> None:
    events = []
    base_minutes = 0
    for n in range(200):
        p = people[n % len(people)]
        minutes = base_minutes + (n + 1) * 6  # one event every 6 simulated minutes
        hour, minute = divmod(minutes, 60)
        day, hour = divmod(hour, 24)
        events.append(
            {
                "url": en_url(p),
                "revision_id": "r1",
                "event_time": f"2024-03-{day + 1:02d}T{hour:02d}:{minute:02d}:00Z",
                "editor_flags": [],
            }
        )
    ndjson(FIXTURES / "feed_200.ndjson", {"schema": "factmill.feed", "version": 1}, events)


EN_RULES = """\
schema: factmill.rules
version: 1
language: en
rules:
  - id: height-en
    keys: [Height]
    predicate: P2048
    aggregator: metric_preference
    score: 0.95
    extractors:
      - pattern: '(?P<value>\\d+(?:[.,]\\d+)?)\\s*(?P<unit>cm|m)\\b'
        kind: quantity
      - pattern: '(?P<feet>\\d+)\\s*ft\\s*(?P<inches>\\d+)\\s*in\\b'
        kind: quantity_feet_inches
  - id: dob-en
    keys: [Born, "Date of birth"]
    predicate: P569
    aggregator: single
    score: 0.95
    extractors:
      - pattern: '(?P<value>[A-Za-z]+\\.?\\s+\\d{1,2},?\\s+\\d{4}|\\d{1,2}\\s+[A-Za-z]+\\s+\\d{4}|\\d{4}-\\d{2}-\\d{2})'
        kind: text
  - id: population-en
    keys: [Population]
    predicate: P1082
    aggregator: single
    score: 0.95
    extractors:
      - pattern: '(?P<value>\\d[\\d,]*)'
        kind: quantity
        unit: '1'
  - id: networth-en
    keys: ["Net worth"]
    predicate: P2218
    aggregator: single
    score: 0.95
    extractors:
      - pattern: '(?P<value>(?:US\\$|[$€£])\\s*\\d[\\d,]*(?:\\.\\d+)?(?:\\s*(?:thousand|million|billion))?)'
        kind: text
  - id: youtube-en
    keys: ["YouTube channel", "YouTube"]
    predicate: P2397
    aggregator: single
    score: 0.9
    extractors:
      - pattern: '(?P<value>UC[A-Za-z0-9_-]{6,})'
        kind: external_id
        scheme: youtube
link_rules:
  - id: birthplace-link-en
    keys: [Birthplace, "Place of birth"]
    predicate: P19
    score: 0.95
  - id: spouse-link-en
    keys: [Spouse]
    predicate: has_spouse
    score: 0.95
questions:
  P569:
    - "When was {subject} born?"
  P19:
    - "Where was {subject} born?"
"""

ES_RULES = """\
schema: factmill.rules
version: 1
language: es
rules:
  - id: height-es
    keys: [Estatura, Altura]
    predicate: P2048
    aggregator: metric_preference
    score: 0.95
    extractors:
      - pattern: '(?P<value>\\d+(?:[.,]\\d+)?)\\s*(?P<unit>cm|m)\\b'
        kind: quantity
  - id: dob-es
    keys: [Nacimiento, "Fecha de nacimiento"]
    predicate: P569
    aggregator: single
    score: 0.95
    extractors:
      - pattern: '(?P<value>\\d{1,2}\\s+de\\s+[a-záéíóú]+\\s+de\\s+\\d{4}|\\d{4}-\\d{2}-\\d{2})'
        kind: text
link_rules:
  - id: birthplace-link-es
    keys: ["Lugar de nacimiento"]
    predicate: P19
    score: 0.95
"""

LINK_RULES = """\
schema: factmill.link_rules
version: 1
rules:
  - id: spouse-symmetric
    kind: symmetric
    source: has_spouse
    confidence_factor: 1.0
  - id: child-to-parent
    kind: conditional_inverse
    source: has_child
    condition_predicate: gender
    mapping:
      male: has_father
      female: has_mother
    confidence_factor: 0.98
  - id: contains-to-located
    kind: inverse
    source: contain_cities
    target: located_in
    confidence_factor: 0.99
    correction: true
"""


def write_rules() -> None:
    (FIXTURES / "rules").mkdir(parents=True, exist_ok=True)
    (FIXTURES / "rules" / "en.yaml").write_text(EN_RULES, encoding="utf-8")
    (FIXTURES / "rules" / "es.yaml").write_text(ES_RULES, encoding="utf-8")
    (FIXTURES / "link_rules.yaml").write_text(LINK_RULES, encoding="utf-8")


def write_templates() -> None:
    templates = [
        {"predicate": "P2048", "language": "en", "pattern": "{subject} {predicate_phrase}",
         "predicate_phrase": "height"},
        {"predicate": "P19", "language": "en", "pattern": "{subject} {predicate_phrase}",
         "predicate_phrase": "birthplace"},
        {"predicate": "P569", "language": "en", "pattern": "{subject} {predicate_phrase}",
         "predicate_phrase": "date of birth"},
        {"predicate": "P2048", "language": "es", "pattern": "{subject} {predicate_phrase}",
         "predicate_phrase": "estatura"},
    ]
    ndjson(FIXTURES / "templates.ndjson",
           {"schema": "factmill.query_templates", "version": 1}, templates)


def main() -> int:
    people = persons()
    write_ontology()
    write_entities(people)
    write_corpus_and_golden(people)
    write_feed(people)
    write_rules()
    write_templates()
    print(f"fixtures written to {FIXTURES}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
