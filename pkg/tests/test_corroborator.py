"""Corroboration: normalization, entity linking, clustering, scoring."""

import pytest

from factmill.corroborator import (
    Ambiguous,
    CorroboratorConfig,
    Linked,
    NoMatch,
    cluster,
    corroborate,
    link_mention,
    normalize,
    normalize_batch,
    score_and_rank,
)
from factmill.extractors import CandidateFact
from factmill.model import DateValue, EntityRef, Money, Quantity, Text
from factmill.store import Entity
from tests.conftest import make_provenance


def _cand(subject, predicate, value, url="https://a.example/1", score=0.95,
          extractor_id="pattern:r:0", language="en", needs_linking=False,
          extracted_at="2024-01-01T00:00:00Z"):
    return CandidateFact(
        subject=subject,
        predicate=predicate,
        value=value,
        raw_text=str(value),
        provenance=make_provenance(url=url, extractor_id=extractor_id, extracted_at=extracted_at),
        extractor_id=extractor_id,
        extractor_score=score,
        language=language,
        needs_linking=needs_linking,
    )


def test_normalize_is_idempotent(ontology):
    cases = [
        _cand("Q1", "P2048", Quantity(1.84, "m")),
        _cand("Q1", "P569", Text("November 20, 1942")),
        _cand("Q1", "P2218", Text("$1.5 billion")),
    ]
    for cand in cases:
        once = normalize(cand, ontology)
        again = normalize(_cand(cand.subject, cand.predicate, once.normalized), ontology)
        assert again.normalized == once.normalized
    assert normalize(cases[0], ontology).normalized == Quantity(184.0, "cm")
    assert normalize(cases[1], ontology).normalized == DateValue("1942-11-20")
    assert normalize(cases[2], ontology).normalized == Money(150_000_000_000, "USD")


def test_link_mention_paths(kg):
    assert link_mention("Casterbridge", "Q2221906", kg) == Linked(EntityRef("Q9003"))
    assert isinstance(link_mention("Nobody Here", None, kg), NoMatch)
    kg.add_entity(Entity("Q88001", "Twin Name", types={"Q5"}))
    kg.add_entity(Entity("Q88002", "Twin Name", types={"Q5"}))
    result = link_mention("Twin Name", "Q5", kg)
    assert isinstance(result, Ambiguous)
    assert result.candidates == ("Q88001", "Q88002")


def test_normalize_batch_links_and_counts_failures(ontology, kg):
    kg.add_entity(Entity("Q88001", "Twin City", types={"Q2221906"}))
    kg.add_entity(Entity("Q88002", "Twin City", types={"Q2221906"}))
    cands = [
        _cand("Q1", "P19", Text("Casterbridge"), needs_linking=True),
        _cand("Q1", "P19", Text("Twin City"), needs_linking=True),
        _cand("Q1", "P19", Text("Nowhere Specific"), needs_linking=True),
        _cand("Q1", "P569", Text("not a date at all")),
    ]
    outcome = normalize_batch(cands, ontology, kg)
    assert [nc.normalized for nc in outcome.normalized] == [EntityRef("Q9003")]
    assert len(outcome.ambiguous) == 1
    assert outcome.failures == 2


def test_quantity_clusters_merge_within_tolerance(ontology, kg):
    cands = [
        _cand("Q1", "P2048", Quantity(213.0, "cm"), url="https://a/1"),
        _cand("Q1", "P2048", Quantity(213.0, "cm"), url="https://a/2"),
        _cand("Q1", "P2048", Quantity(211.0, "cm"), url="https://a/3"),
    ]
    outcome = normalize_batch(cands, ontology, kg)
    clusters = cluster(outcome.normalized, merge_tolerance=0.01)
    # 211 vs 213 differ by 0.94% <= 1%: one merged cluster, value from the
    # better-supported member
    assert len(clusters) == 1
    assert clusters[0].value == Quantity(213.0, "cm")
    assert clusters[0].support == 3
    assert clusters[0].distinct_sources == 3
    # at a tighter tolerance they stay apart
    apart = cluster(outcome.normalized, merge_tolerance=0.005)
    assert sorted(c.value.magnitude for c in apart) == [211.0, 213.0]


def test_conflict_scoring_oracle(ontology, kg):
    """The two-against-one height conflict, scores recomputed by hand."""
    cands = [
        _cand("Q1", "P2048", Quantity(2.13, "m"), url="https://a/1"),
        _cand("Q1", "P2048", Quantity(2.13, "m"), url="https://a/2"),
        _cand("Q1", "P2048", Quantity(211.0, "cm"), url="https://a/3"),
    ]
    scored, _ = corroborate(cands, ontology, kg, CorroboratorConfig(quantity_merge_tolerance=0.005))
    assert len(scored) == 2
    top, second = scored[0], scored[1]
    assert top.rank == 1 and top.fact.object == Quantity(213.0, "cm")
    # oracle: best member weight = 1.0 (pattern) x 0.95; support ratio 2/3
    assert top.score == pytest.approx(0.95 * 2 / 3)
    assert second.score == pytest.approx(0.95 * 1 / 3)
    # 0.633 is below the default 0.8 auto threshold: conflicts go to review
    assert top.route == "curation"
    assert second.route == "drop" if second.score < 0.4 else second.route == "curation"
    # with the merge tolerance at its default the clusters merge and the
    # consensus value auto-ingests
    merged, _ = corroborate(cands, ontology, kg, CorroboratorConfig())
    assert len(merged) == 1
    assert merged[0].fact.object == Quantity(213.0, "cm")
    assert merged[0].score == pytest.approx(0.95)
    assert merged[0].route == "auto"


def test_model_candidates_weighted_lower(ontology, kg):
    pattern = _cand("Q1", "P2048", Quantity(1.84, "m"), extractor_id="pattern:r:0")
    model = _cand("Q1", "P2048", Quantity(1.9, "m"), extractor_id="model:qa", score=0.9)
    scored, _ = corroborate([pattern, model], ontology, kg,
                            CorroboratorConfig(quantity_merge_tolerance=0.005))
    by_value = {sf.fact.object.magnitude: sf for sf in scored}
    # pattern: 1.0 x 0.95 x 1/2; model: 0.7 x 0.9 x 1/2
    assert by_value[184.0].score == pytest.approx(0.95 / 2)
    assert by_value[190.0].score == pytest.approx(0.7 * 0.9 / 2)
    assert by_value[184.0].rank == 1


def test_sensitive_predicates_always_reviewed(ontology, kg):
    from factmill.model import ExternalId

    cand = _cand("Q100001", "P2397", ExternalId("UCabcdef123456", "youtube"),
                 extractor_id="pattern:youtube-en:0")
    scored, _ = corroborate([cand], ontology, kg)
    assert scored[0].score == pytest.approx(0.95)
    assert scored[0].route == "curation"  # despite clearing the auto threshold


def test_tie_break_by_distinct_sources(ontology, kg):
    # two clusters with equal score; more distinct sources ranks first
    cands = [
        _cand("Q1", "has_spouse", EntityRef("Q100002"), url="https://a/1"),
        _cand("Q1", "has_spouse", EntityRef("Q100002"), url="https://a/2"),
        _cand("Q1", "has_spouse", EntityRef("Q100003"), url="https://a/1"),
        _cand("Q1", "has_spouse", EntityRef("Q100003"), url="https://a/1"),
    ]
    outcome = normalize_batch(cands, ontology, kg)
    scored = score_and_rank(cluster(outcome.normalized), ontology)
    assert scored[0].fact.object == EntityRef("Q100002")
    assert scored[0].cluster.distinct_sources == 2


def test_threshold_config_validation():
    with pytest.raises(ValueError):
        CorroboratorConfig(auto_threshold=0.3, curation_floor=0.4)
