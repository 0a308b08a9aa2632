"""Shared fixtures: committed fixture paths and pre-loaded handles."""

from pathlib import Path

import pytest

from factmill.config import PipelineConfig
from factmill.corpus import load_corpus
from factmill.extractors import compile_rules
from factmill.model import Fact, FactStatus, Provenance, SimulatedClock
from factmill.ontology import load_ontology
from factmill.store import load_entities

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def ontology():
    return load_ontology(FIXTURES / "ontology.ndjson")


@pytest.fixture()
def kg():
    # function scope: tests mutate the graph via entity resolution
    return load_entities(FIXTURES / "entities.ndjson")


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(FIXTURES / "corpus_golden.ndjson")


@pytest.fixture(scope="session")
def ruleset(ontology):
    return compile_rules(
        [FIXTURES / "rules" / "en.yaml", FIXTURES / "rules" / "es.yaml"], ontology
    )


@pytest.fixture()
def clock():
    return SimulatedClock()


def make_config(tmp_path: Path, **overrides) -> PipelineConfig:
    """A PipelineConfig over the committed fixtures with a tmp log file."""
    defaults = dict(
        ontology_path=FIXTURES / "ontology.ndjson",
        entities_path=FIXTURES / "entities.ndjson",
        corpus_path=FIXTURES / "corpus_golden.ndjson",
        log_path=tmp_path / "factlog.ndjson",
        rules_paths=[FIXTURES / "rules" / "en.yaml", FIXTURES / "rules" / "es.yaml"],
    )
    defaults.update(overrides)
    return PipelineConfig(**defaults)


def make_provenance(url: str = "https://wiki.example/en/test", span: str = "infobox:0:0:4",
                    extractor_id: str = "pattern:test:0", extracted_at: str = "2024-01-01T00:00:00Z"):
    return Provenance(
        source_url=url,
        revision_id="r1",
        span=span,
        extractor_id=extractor_id,
        extracted_at=extracted_at,
    )


def make_fact(subject: str, predicate: str, value, confidence: float = 0.9,
              status: FactStatus = FactStatus.AUTO_INGESTED, **prov_kwargs) -> Fact:
    return Fact(
        subject=subject,
        predicate=predicate,
        object=value,
        confidence=confidence,
        provenance=(make_provenance(**prov_kwargs),),
        status=status,
    )
