"""Household indirect energy use, carbon emissions and the efficiency ratio.

A household's footprint is the intensity-weighted sum of its 8-sector
consumption bundle: spend (Yuan) times intensity (per 10^4 Yuan), summed over
sectors. Efficiency is carbon divided by energy (kg/GJ); lower means a
cleaner energy mix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .intensity import Sector, IntensityTable, sector_ratio, YEARS

if TYPE_CHECKING:
    from .records import HouseholdRecord


class EmptyBundle(ValueError):
    """Total spend is zero; the efficiency ratio is undefined."""


class EmptyCohort(ValueError):
    """Cohort aggregation over no footprints."""


@dataclass(frozen=True)
class ConsumptionBundle:
    """One household-year consumption vector, in Yuan, indexed by Sector."""

    year: int
    spend: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.spend) != len(Sector):
            raise ValueError(f"bundle needs {len(Sector)} sector spends")
        for s in Sector:
            v = self.spend[s]
            if not (v >= 0.0):  # also rejects NaN
                raise ValueError(f"negative or invalid spend for {s.label}: {v!r}")

    @classmethod
    def from_mapping(cls, year: int, spend: Mapping[Sector, float]) -> "ConsumptionBundle":
        """Build from a (possibly partial) Sector -> Yuan mapping; missing sectors are 0."""
        return cls(year=year, spend=tuple(float(spend.get(s, 0.0)) for s in Sector))

    def total(self) -> float:
        return sum(self.spend)

    def scaled(self, factor: float) -> "ConsumptionBundle":
        return ConsumptionBundle(self.year, tuple(v * factor for v in self.spend))


@dataclass(frozen=True)
class Footprint:
    """Derived energy use (GJ), carbon emissions (kg) and efficiency (kg/GJ)."""

    energy_gj: float
    carbon_kg: float
    efficiency: float

    @classmethod
    def from_totals(cls, energy_gj: float, carbon_kg: float) -> "Footprint":
        return cls(energy_gj, carbon_kg, carbon_kg / energy_gj)


def estimate_footprint(bundle: ConsumptionBundle, table: IntensityTable) -> Footprint:
    """Intensity-weighted footprint of one bundle.

    energy = sum_s spend[s] * energy_intensity[year][s] / 1e4, likewise for
    carbon; raises EmptyBundle when total spend is zero (undefined ratio) and
    YearOutOfRange for years outside table coverage.
    """
    energy_row = table.energy_row(bundle.year)
    carbon_row = table.carbon_row(bundle.year)
    if bundle.total() == 0.0:
        raise EmptyBundle(f"zero total spend in year {bundle.year}")
    energy = sum(bundle.spend[s] * energy_row[s] for s in Sector) / 1e4
    carbon = sum(bundle.spend[s] * carbon_row[s] for s in Sector) / 1e4
    return Footprint.from_totals(energy, carbon)


def cohort_efficiency(footprints: Sequence[Footprint]) -> float:
    """Aggregate ratio sum(carbon)/sum(energy), not the mean of ratios."""
    if not footprints:
        raise EmptyCohort("no footprints to aggregate")
    return sum(f.carbon_kg for f in footprints) / sum(f.energy_gj for f in footprints)


def sector_efficiency_series(table: IntensityTable) -> dict[Sector, dict[int, float]]:
    """Per-sector carbon/energy ratio for every covered year: 8 series of 15 points."""
    return {
        s: {year: sector_ratio(table, year, s) for year in YEARS} for s in Sector
    }


@dataclass(frozen=True)
class FootprintRow:
    household_id: str
    year: int
    footprint: Footprint


@dataclass(frozen=True)
class RowError:
    index: int
    household_id: str
    cause: str


@dataclass(frozen=True)
class FootprintPanel:
    rows: tuple[FootprintRow, ...]
    errors: tuple[RowError, ...]


def footprint_panel(records: Iterable["HouseholdRecord"],
                    table: IntensityTable) -> FootprintPanel:
    """One footprint per input record, order preserved.

    Records whose bundle cannot be evaluated (zero spend, year out of range)
    are reported with their input index and cause, never silently dropped.
    """
    rows: list[FootprintRow] = []
    errors: list[RowError] = []
    for i, rec in enumerate(records):
        try:
            fp = estimate_footprint(rec.bundle, table)
        except ValueError as exc:
            errors.append(RowError(i, rec.household_id, str(exc)))
            continue
        rows.append(FootprintRow(rec.household_id, rec.year, fp))
    return FootprintPanel(tuple(rows), tuple(errors))
