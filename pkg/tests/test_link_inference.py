"""Link inference: rule loading, completeness closure, corrections."""

import pytest

from factmill.link_inference import (
    LinkInferenceRule,
    LinkRuleError,
    apply_inferred,
    infer_completeness,
    infer_correctness,
    load_link_rules,
)
from factmill.model import EntityRef, FactKey, Quantity, Text
from factmill.store import Entity, FactLog, KnowledgeGraph
from tests.conftest import FIXTURES, make_fact


@pytest.fixture()
def rules(ontology):
    return load_link_rules(FIXTURES / "link_rules.yaml", ontology)


@pytest.fixture()
def log(tmp_path, ontology, clock):
    return FactLog(tmp_path / "log.ndjson", ontology, clock=clock)


def test_rule_loading_and_validation(rules, ontology, tmp_path):
    by_id = {r.rule_id: r for r in rules}
    assert by_id["spouse-symmetric"].kind == "symmetric"
    assert by_id["contains-to-located"].correction
    assert by_id["child-to-parent"].target_for("male") == "has_father"
    assert by_id["child-to-parent"].target_for("other") is None
    bad = tmp_path / "bad.yaml"
    bad.write_text(
        "schema: factmill.link_rules\nversion: 1\nrules:\n"
        "  - id: nope\n    kind: inverse\n    source: has_spouse\n    target: P404\n"
    )
    with pytest.raises(LinkRuleError, match="P404"):
        load_link_rules(bad, ontology)
    with pytest.raises(LinkRuleError):
        LinkInferenceRule(rule_id="x", kind="inverse", source="has_spouse")  # no target
    with pytest.raises(LinkRuleError):
        LinkInferenceRule(rule_id="x", kind="symmetric", source="a", confidence_factor=0.0)


def test_symmetric_completeness(rules, ontology, kg, log):
    log.append_facts(
        [make_fact("Q100001", "has_spouse", EntityRef("Q100002"), confidence=0.95)],
        run_id="seed",
    )
    view = log.materialize_latest()
    result = infer_completeness(view, rules, ontology)
    assert len(result.inferred) == 1
    inferred = result.inferred[0].fact
    assert (inferred.subject, inferred.object) == ("Q100002", EntityRef("Q100001"))
    assert inferred.confidence == pytest.approx(0.95)  # factor 1.0
    assert inferred.provenance[0].extractor_id == "link_inference"
    # apply, then the closure is complete: a second pass infers nothing
    apply_inferred(result.inferred, kg, log, "infer")
    view2 = log.materialize_latest()
    assert infer_completeness(view2, rules, ontology).inferred == []


def test_conditional_inverse_uses_gender(rules, ontology, kg, log):
    log.append_facts(
        [
            make_fact("Q100001", "has_child", EntityRef("Q100003"), confidence=0.95),
            make_fact("Q100001", "gender", Text("female"), confidence=0.99),
            make_fact("Q100002", "has_child", EntityRef("Q100004"), confidence=0.95),
            # Q100002 has no gender fact: skipped, counted
        ],
        run_id="seed",
    )
    result = infer_completeness(log.materialize_latest(), rules, ontology)
    assert result.skipped_missing_condition == 1
    mothers = [i.fact for i in result.inferred if i.fact.predicate == "has_mother"]
    assert len(mothers) == 1
    assert (mothers[0].subject, mothers[0].object) == ("Q100003", EntityRef("Q100001"))
    assert mothers[0].confidence == pytest.approx(0.95 * 0.98)


def test_correction_replaces_lower_confidence_conflict(rules, ontology, kg, log):
    # the KG believes the city sits in the wrong region, at low confidence
    log.append_facts(
        [
            make_fact("Q9001", "contain_cities", EntityRef("Q9003"), confidence=0.95),
            make_fact("Q9003", "located_in", EntityRef("Q9002"), confidence=0.6),
        ],
        run_id="seed",
    )
    view = log.materialize_latest()
    corrections = infer_correctness(view, rules, ontology)
    assert len(corrections) == 1
    inferred, replaced = corrections[0]
    assert replaced == FactKey("Q9003", "located_in")
    assert inferred.fact.object == EntityRef("Q9001")
    assert inferred.fact.confidence == pytest.approx(0.95 * 0.99)
    apply_inferred([inferred], kg, log, "correct")
    fixed = log.materialize_latest().get(FactKey("Q9003", "located_in"))
    assert fixed.object == EntityRef("Q9001")
    # and the log still holds the overwritten version
    assert log.max_version(FactKey("Q9003", "located_in")) == 2


def test_correction_respects_higher_confidence_existing(rules, ontology, kg, log):
    log.append_facts(
        [
            make_fact("Q9001", "contain_cities", EntityRef("Q9003"), confidence=0.92),
            make_fact("Q9003", "located_in", EntityRef("Q9002"), confidence=0.99),
        ],
        run_id="seed",
    )
    # 0.92 * 0.99 = 0.9108 < 0.99: the existing fact wins
    assert infer_correctness(log.materialize_latest(), rules, ontology) == []


def test_correction_needs_confident_source(rules, ontology, kg, log):
    log.append_facts(
        [
            make_fact("Q9001", "contain_cities", EntityRef("Q9003"), confidence=0.5),
            make_fact("Q9003", "located_in", EntityRef("Q9002"), confidence=0.3),
        ],
        run_id="seed",
    )
    assert infer_correctness(log.materialize_latest(), rules, ontology,
                             min_source_confidence=0.9) == []


def test_inference_skips_non_entity_objects(rules, ontology, kg, log):
    log.append_facts([make_fact("Q100001", "P2048", Quantity(184.0, "cm"))], run_id="seed")
    assert infer_completeness(log.materialize_latest(), rules, ontology).inferred == []
