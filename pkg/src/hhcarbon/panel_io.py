"""Reading and writing the delimited household-year panel format.

One row per household-year; the header is fixed and case-sensitive. Rows
that cannot be parsed or fail fatal validation are collected into sidecar
entries (kind "error") and excluded; soft range flags become "warning"
entries and keep their row. Nothing is ever silently dropped.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .footprint import ConsumptionBundle
from .intensity import Sector
from .records import HouseholdRecord, fatal_violations, range_flags

PANEL_COLUMNS = [
    "household_id", "year", "province", "rural", "age", "male", "schooling",
    "married", "employed", "health", "income", "wealth", "business",
    "family_size", "credit_access",
] + [f"spend_{s.label}" for s in Sector]

_INT_FIELDS = ("year", "rural", "age", "male", "schooling", "married",
               "employed", "health", "business", "family_size")
_FLOAT_FIELDS = ("income", "wealth", "credit_access")


class PanelFormatError(ValueError):
    """The file-level layout (header, delimiter) is wrong."""


@dataclass(frozen=True)
class SidecarEntry:
    line: int
    household_id: str
    kind: str
    message: str


@dataclass
class PanelReadResult:
    records: list[HouseholdRecord]
    entries: list[SidecarEntry]

    @property
    def errors(self) -> list[SidecarEntry]:
        return [e for e in self.entries if e.kind == "error"]

    @property
    def warnings(self) -> list[SidecarEntry]:
        return [e for e in self.entries if e.kind == "warning"]


def _parse_row(raw: dict[str, str]) -> HouseholdRecord:
    values: dict[str, object] = {"household_id": raw["household_id"],
                                 "province": raw["province"]}
    for name in _INT_FIELDS:
        values[name] = int(raw[name])
    for name in _FLOAT_FIELDS:
        values[name] = float(raw[name])
    spend = tuple(float(raw[f"spend_{s.label}"]) for s in Sector)
    bundle = ConsumptionBundle(values["year"], spend)
    return HouseholdRecord(bundle=bundle, **values)  # type: ignore[arg-type]


def read_panel(path: str | Path) -> PanelReadResult:
    """Parse and validate a panel file; see module docstring for semantics."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PanelFormatError(f"{path}: empty file") from None
        if header != PANEL_COLUMNS:
            raise PanelFormatError(
                f"{path}: bad header; expected columns "
                f"{','.join(PANEL_COLUMNS)} but found {','.join(header)}"
            )
        records: list[HouseholdRecord] = []
        entries: list[SidecarEntry] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(PANEL_COLUMNS):
                entries.append(SidecarEntry(
                    line_no, row[0] if row else "",
                    "error", f"expected {len(PANEL_COLUMNS)} columns, found {len(row)}"))
                continue
            raw = dict(zip(PANEL_COLUMNS, row))
            try:
                rec = _parse_row(raw)
            except (ValueError, TypeError) as exc:
                entries.append(SidecarEntry(line_no, raw["household_id"],
                                            "error", str(exc)))
                continue
            problems = fatal_violations(rec)
            if problems:
                entries.append(SidecarEntry(line_no, rec.household_id,
                                            "error", "; ".join(problems)))
                continue
            for flag in range_flags(rec):
                entries.append(SidecarEntry(line_no, rec.household_id,
                                            "warning", flag))
            records.append(rec)
    return PanelReadResult(records, entries)


def _format_number(value: float) -> str:
    """Full-precision, locale-free text for machine-readable files."""
    return repr(float(value))


def write_panel(records: Sequence[HouseholdRecord], path: str | Path) -> None:
    """Write records in the ingestion format, full precision, deterministic."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PANEL_COLUMNS)
        for rec in records:
            row = [
                rec.household_id, str(rec.year), rec.province, str(rec.rural),
                str(rec.age), str(rec.male), str(rec.schooling), str(rec.married),
                str(rec.employed), str(rec.health), _format_number(rec.income),
                _format_number(rec.wealth), str(rec.business),
                str(rec.family_size), _format_number(rec.credit_access),
            ] + [_format_number(v) for v in rec.bundle.spend]
            writer.writerow(row)


def write_sidecar(entries: Iterable[SidecarEntry], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["line", "household_id", "kind", "message"])
        for e in entries:
            writer.writerow([e.line, e.household_id, e.kind, e.message])
