"""Household-year observations and their range validation.

Field ranges follow the survey summary statistics the pipeline was built
around; violations of those ranges are soft flags by default, while
conditions that make a row uncomputable (non-positive income or wealth,
negative credit, non-binary indicators, empty bundle) are fatal.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .footprint import ConsumptionBundle
from .intensity import FIRST_YEAR, LAST_YEAR

BINARY_FIELDS = ("rural", "male", "married", "employed", "health", "business")

# Soft range bounds (inclusive) from the ingestion schema.
RANGES = {
    "age": (16, 80),
    "schooling": (0, 22),
    "family_size": (1, 20),
    "income": (1.05, 690_180.0),
    "wealth": (4.0, 9_794_016.0),
    "credit_access": (0.0, 1_000_000.0),
}


@dataclass(frozen=True)
class HouseholdRecord:
    household_id: str
    year: int
    province: str
    rural: int
    age: int
    male: int
    schooling: int
    married: int
    employed: int
    health: int
    income: float
    wealth: float
    business: int
    family_size: int
    credit_access: float
    bundle: ConsumptionBundle


def fatal_violations(rec: HouseholdRecord) -> list[str]:
    """Conditions that make the row unusable for footprints or regression."""
    problems = []
    if not FIRST_YEAR <= rec.year <= LAST_YEAR:
        problems.append(f"year {rec.year} outside [{FIRST_YEAR}, {LAST_YEAR}]")
    if rec.bundle.year != rec.year:
        problems.append(f"bundle year {rec.bundle.year} != record year {rec.year}")
    if rec.bundle.total() <= 0.0:
        problems.append("zero total consumption")
    if not rec.income > 0.0:
        problems.append(f"income must be positive, got {rec.income}")
    if not rec.wealth > 0.0:
        problems.append(f"wealth must be positive, got {rec.wealth}")
    if rec.credit_access < 0.0:
        problems.append(f"credit_access must be non-negative, got {rec.credit_access}")
    if rec.family_size < 1:
        problems.append(f"family_size must be >= 1, got {rec.family_size}")
    for name in BINARY_FIELDS:
        v = getattr(rec, name)
        if v not in (0, 1):
            problems.append(f"{name} must be 0 or 1, got {v!r}")
    return problems


def range_flags(rec: HouseholdRecord) -> list[str]:
    """Soft out-of-range flags against the ingestion schema."""
    flags = []
    for name, (lo, hi) in RANGES.items():
        v = getattr(rec, name)
        if not lo <= v <= hi:
            flags.append(f"{name}={v} outside [{lo}, {hi}]")
    return flags


def validate_record(rec: HouseholdRecord, strict: bool = False) -> list[str]:
    """All violations for one record; strict treats range flags as fatal too.

    Returns the fatal list (plus range flags when strict); callers decide
    whether to reject or merely report.
    """
    problems = fatal_violations(rec)
    if strict:
        problems += range_flags(rec)
    return problems


def repeated_households(records: Iterable[HouseholdRecord]) -> list[HouseholdRecord]:
    """Keep only households observed in at least two distinct years."""
    records = list(records)
    years_seen: dict[str, set[int]] = {}
    for rec in records:
        years_seen.setdefault(rec.household_id, set()).add(rec.year)
    return [r for r in records if len(years_seen[r.household_id]) >= 2]
