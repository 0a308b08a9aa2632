"""Value objects: serialization round trips, validation, fact keys."""

import pytest
from hypothesis import given, strategies as st

from factmill.model import (
    DatePrecision,
    DateValue,
    EntityRef,
    ExternalId,
    Fact,
    FactKey,
    FactStatus,
    Money,
    Quantity,
    SimulatedClock,
    Text,
    parse_ts,
    value_from_json,
    value_to_json,
)
from tests.conftest import make_fact, make_provenance

finite = st.floats(allow_nan=False, allow_infinity=False, width=32)

values = st.one_of(
    st.builds(EntityRef, st.text(min_size=1, max_size=8)),
    st.builds(Quantity, finite, st.sampled_from(["cm", "kg", "in", "1"])),
    st.builds(
        DateValue,
        st.integers(min_value=1000, max_value=9999).map(lambda y: f"{y:04d}"),
        st.just(DatePrecision.YEAR),
    ),
    st.builds(Money, st.integers(min_value=-10**15, max_value=10**15), st.just("USD")),
    st.builds(Text, st.text(max_size=20)),
    st.builds(ExternalId, st.text(min_size=1, max_size=12), st.sampled_from(["youtube", "isbn"])),
)


@given(values)
def test_value_json_round_trip(value):
    assert value_from_json(value_to_json(value)) == value


@given(values, values)
def test_sort_key_distinguishes_values(a, b):
    # sort_key is injective per kind: equal keys imply equal values
    if a.sort_key() == b.sort_key():
        if isinstance(a, Quantity) and isinstance(b, Quantity):
            assert a.unit == b.unit and f"{a.magnitude:.6f}" == f"{b.magnitude:.6f}"
        else:
            assert a == b


def test_quantity_rejects_non_finite():
    with pytest.raises(ValueError):
        Quantity(float("nan"), "cm")
    with pytest.raises(ValueError):
        Quantity(float("inf"), "cm")


def test_date_precision_mismatch_rejected():
    with pytest.raises(ValueError):
        DateValue("2024-01", DatePrecision.DAY)
    with pytest.raises(ValueError):
        DateValue("not-a-date", DatePrecision.DAY)
    assert DateValue("2024", DatePrecision.YEAR).sort_key() == "D:2024"


def test_money_requires_iso_currency():
    with pytest.raises(ValueError):
        Money(100, "dollars")
    assert Money(100, "USD").minor_units == 100


def test_fact_validation():
    with pytest.raises(ValueError):
        make_fact("Q1", "P2048", Quantity(184, "cm"), confidence=1.5)
    with pytest.raises(ValueError):
        Fact("Q1", "P2048", Quantity(184, "cm"), 0.9, provenance=())
    # inferred facts must say where they came from
    with pytest.raises(ValueError):
        make_fact("Q1", "has_spouse", EntityRef("Q2"), status=FactStatus.INFERRED)


def test_fact_json_round_trip():
    fact = make_fact("Q1", "P2048", Quantity(184.0, "cm"))
    assert Fact.from_json(fact.to_json()) == fact


def test_fact_key_functional_vs_multi_valued():
    fact = make_fact("Q1", "has_spouse", EntityRef("Q2"))
    functional = FactKey.for_fact(fact, functional=True)
    multi = FactKey.for_fact(fact, functional=False)
    assert functional.as_string() == "Q1|has_spouse"
    assert multi.as_string() == "Q1|has_spouse|E:Q2"
    # same subject+predicate, different value => distinct multi-valued keys
    other = make_fact("Q1", "has_spouse", EntityRef("Q3"))
    assert FactKey.for_fact(other, functional=False) != multi


def test_parse_ts_handles_z_suffix_and_offsets():
    a = parse_ts("2024-01-01T00:00:00Z")
    b = parse_ts("2024-01-01T00:00:00+00:00")
    assert a == b


def test_simulated_clock_advances():
    clock = SimulatedClock(parse_ts("2024-01-01T00:00:00Z"))
    clock.advance_minutes(90)
    assert clock.now_iso() == "2024-01-01T01:30:00Z"
