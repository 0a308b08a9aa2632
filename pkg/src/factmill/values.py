"""Value normalization: quantities to canonical units, surface-form dates
to ISO-8601, money to (minor units, currency), whitespace-collapsed text.

Locale tables (month names, language-specific date patterns) live in
``locales/<lang>.json`` so adding a language is a data change.
"""

from __future__ import annotations

import json
import re
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional

from .model import DatePrecision, DateValue, Money, Quantity, Text, Value

_LOCALE_DIR = Path(__file__).parent / "locales"

# Exact conversion constants; canonical unit first per dimension.
UNIT_TABLE: Dict[str, Dict[str, float]] = {
    "length": {"cm": 1.0, "m": 100.0, "mm": 0.1, "km": 100000.0, "in": 2.54, "ft": 30.48},
    "mass": {"kg": 1.0, "g": 0.001, "t": 1000.0, "lb": 0.45359237},
    "count": {"1": 1.0},
}

CANONICAL_UNIT = {"length": "cm", "mass": "kg", "count": "1"}

METRIC_UNITS = frozenset({"cm", "m", "mm", "km", "kg", "g", "t", "1"})

CURRENCY_SYMBOLS = {"$": "USD", "US$": "USD", "€": "EUR", "£": "GBP", "¥": "JPY"}


class NormalizationError(Exception):
    pass


@lru_cache(maxsize=None)
def _locale(language: str) -> dict:
    path = _LOCALE_DIR / f"{language}.json"
    if not path.exists():
        path = _LOCALE_DIR / "en.json"
    with path.open(encoding="utf-8") as fh:
        data = json.load(fh)
    data["_compiled_patterns"] = [
        re.compile(p["pattern"], re.IGNORECASE) for p in data.get("date_patterns", [])
    ]
    return data


def dimension_of_unit(unit: str) -> Optional[str]:
    for dim, units in UNIT_TABLE.items():
        if unit in units:
            return dim
    return None


def convert_quantity(q: Quantity, target_unit: str) -> Quantity:
    dim = dimension_of_unit(q.unit)
    if dim is None or target_unit not in UNIT_TABLE[dim]:
        raise NormalizationError(f"cannot convert {q.unit!r} to {target_unit!r}")
    in_canonical = q.magnitude * UNIT_TABLE[dim][q.unit]
    return Quantity(in_canonical / UNIT_TABLE[dim][target_unit], target_unit)


def normalize_quantity(q: Quantity) -> Quantity:
    """Convert to the dimension's canonical unit, rounded to 1 decimal."""
    dim = dimension_of_unit(q.unit)
    if dim is None:
        raise NormalizationError(f"unknown unit {q.unit!r}")
    canonical = convert_quantity(q, CANONICAL_UNIT[dim])
    return Quantity(round(canonical.magnitude, 1), canonical.unit)


_ISO_RE = re.compile(r"^(\d{4})(?:-(\d{2}))?(?:-(\d{2}))?$")
_YEAR_ONLY = re.compile(r"^(\d{4})$")


def parse_date(raw: str, language: str = "en") -> DateValue:
    """Parse a surface-form date into ISO-8601 with precision."""
    text = collapse_ws(raw).strip(" .").lower()
    m = _ISO_RE.match(text)
    if m:
        year, month, day = m.group(1), m.group(2), m.group(3)
        if day:
            _check_date(int(year), int(month), int(day))
            return DateValue(f"{year}-{month}-{day}", DatePrecision.DAY)
        if month:
            _check_date(int(year), int(month), 1)
            return DateValue(f"{year}-{month}", DatePrecision.MONTH)
        return DateValue(year, DatePrecision.YEAR)
    locale = _locale(language)
    months = locale["months"]
    for pattern in locale["_compiled_patterns"]:
        m = pattern.match(text)
        if not m:
            continue
        groups = m.groupdict()
        month_name = groups.get("month", "").lower()
        if month_name not in months:
            continue
        year = int(groups["year"])
        month = months[month_name]
        if groups.get("day"):
            day = int(groups["day"])
            _check_date(year, month, day)
            return DateValue(f"{year:04d}-{month:02d}-{day:02d}", DatePrecision.DAY)
        return DateValue(f"{year:04d}-{month:02d}", DatePrecision.MONTH)
    raise NormalizationError(f"unparseable date: {raw!r} (language {language})")


def _check_date(year: int, month: int, day: int) -> None:
    import datetime

    try:
        datetime.date(year, month, day)
    except ValueError as exc:
        raise NormalizationError(f"invalid calendar date {year}-{month}-{day}") from exc


_MONEY_RE = re.compile(
    r"^(?P<sym>US\$|[$€£¥])?\s*(?P<amount>\d[\d,]*(?:\.\d+)?)\s*(?P<scale>[a-zñó ]+?)?\s*(?P<code>[A-Z]{3})?$"
)


def parse_money(raw: str, language: str = "en", default_currency: str = "USD") -> Money:
    text = collapse_ws(raw).strip()
    m = _MONEY_RE.match(text)
    if not m:
        raise NormalizationError(f"unparseable money: {raw!r}")
    amount = float(m.group("amount").replace(",", ""))
    scale_word = (m.group("scale") or "").strip().lower()
    if scale_word:
        scales = _locale(language).get("scale_words", {})
        if scale_word not in scales:
            raise NormalizationError(f"unknown scale word {scale_word!r} in {raw!r}")
        amount *= scales[scale_word]
    currency = m.group("code") or CURRENCY_SYMBOLS.get(m.group("sym") or "", None)
    if currency is None:
        if m.group("sym"):
            raise NormalizationError(f"unknown currency symbol in {raw!r}")
        currency = default_currency
    return Money(int(round(amount * 100)), currency)


def collapse_ws(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


def normalize_value(value: Value, language: str = "en") -> Value:
    """Idempotent canonicalization used before clustering."""
    if isinstance(value, Quantity):
        return normalize_quantity(value)
    if isinstance(value, Text):
        return Text(collapse_ws(value.text), value.language)
    # EntityRef, DateValue, Money, ExternalId are already canonical forms.
    return value


def relative_difference(a: float, b: float) -> float:
    """|a − b| / max(|a|, |b|); 0 when both are 0."""
    denom = max(abs(a), abs(b))
    if denom == 0:
        return 0.0
    return abs(a - b) / denom
