"""Per-sector energy and carbon intensities of consumer expenditure, 2005-2019.

Energy intensity is GJ per 10^4 Yuan of expenditure, carbon intensity is kg
CO2 per 10^4 Yuan. Values are stored as exact hundredths (scaled integers),
never as binary floats, so the published two-decimal digits survive
round-trips; floats appear only at computation boundaries.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

FIRST_YEAR = 2005
LAST_YEAR = 2019
YEARS = range(FIRST_YEAR, LAST_YEAR + 1)


class Sector(enum.IntEnum):
    """The eight consumption sectors, in fixed column order."""

    FOOD = 0
    CLOTHING = 1
    FACILITIES = 2
    MEDICINE = 3
    COMMUNICATION = 4
    EDUCATION = 5
    RESIDENCE = 6
    COMMODITIES = 7

    @property
    def label(self) -> str:
        return self.name.lower()


class YearOutOfRange(ValueError):
    """Requested year lies outside the 2005-2019 coverage of the tables."""

    def __init__(self, year: int):
        self.year = year
        super().__init__(
            f"year {year} outside table coverage [{FIRST_YEAR}, {LAST_YEAR}]"
        )


class TableFormatError(ValueError):
    """An intensity file does not match the expected layout."""


# Energy intensity (GJ / 10^4 Yuan), one row per year, sectors in column order.
_ENERGY_TEXT = {
    2005: ("17.64", "18.06", "6.56", "13.85", "5.85", "48.18", "82.53", "8.23"),
    2006: ("14.82", "16.59", "5.57", "12.41", "5.15", "43.93", "69.95", "7.23"),
    2007: ("12.09", "14.03", "4.59", "9.80", "4.59", "35.37", "55.02", "5.81"),
    2008: ("11.22", "12.60", "4.66", "9.16", "5.18", "33.61", "57.58", "5.56"),
    2009: ("10.27", "11.08", "4.19", "7.80", "4.27", "30.03", "51.66", "4.70"),
    2010: ("9.63", "10.83", "3.99", "7.32", "4.34", "28.06", "48.52", "4.11"),
    2011: ("8.39", "9.19", "3.64", "6.65", "3.99", "26.16", "47.50", "4.00"),
    2012: ("11.69", "10.22", "3.78", "8.70", "1.99", "27.65", "51.17", "5.24"),
    2013: ("11.07", "9.55", "3.46", "7.91", "1.80", "25.35", "49.07", "5.03"),
    2014: ("9.48", "8.36", "3.18", "7.29", "1.51", "22.07", "48.64", "4.01"),
    2015: ("8.89", "10.79", "2.91", "7.20", "1.48", "20.82", "47.01", "3.30"),
    2016: ("8.66", "10.21", "2.64", "6.44", "1.50", "19.91", "44.89", "2.81"),
    2017: ("7.66", "9.15", "2.34", "5.24", "1.54", "19.80", "41.46", "2.65"),
    2018: ("7.06", "6.40", "2.20", "4.33", "2.15", "18.49", "38.17", "2.48"),
    2019: ("7.18", "6.46", "2.05", "4.02", "1.67", "17.26", "35.71", "2.23"),
}

# Carbon intensity (kg / 10^4 Yuan), same layout.
_CARBON_TEXT = {
    2005: ("163.68", "167.91", "59.45", "128.84", "52.34", "451.22", "753.62", "76.43"),
    2006: ("137.60", "154.50", "50.58", "115.41", "46.15", "411.56", "639.38", "67.07"),
    2007: ("112.34", "130.70", "41.72", "90.88", "41.18", "331.35", "501.36", "53.89"),
    2008: ("104.02", "116.95", "42.12", "84.51", "45.85", "313.96", "525.18", "51.35"),
    2009: ("95.06", "102.95", "37.73", "71.69", "38.10", "280.93", "469.50", "43.37"),
    2010: ("88.98", "100.75", "35.88", "67.18", "38.95", "262.53", "438.99", "37.90"),
    2011: ("77.62", "85.69", "33.03", "61.05", "35.77", "245.25", "429.18", "36.75"),
    2012: ("108.80", "95.65", "34.49", "80.27", "17.64", "258.63", "465.41", "48.39"),
    2013: ("102.84", "89.38", "31.52", "72.85", "15.92", "236.46", "445.02", "46.37"),
    2014: ("87.89", "78.09", "29.03", "67.06", "13.30", "205.45", "440.60", "36.73"),
    2015: ("82.37", "100.99", "26.60", "66.22", "13.07", "193.07", "421.86", "30.03"),
    2016: ("79.59", "94.38", "23.96", "59.05", "13.05", "184.07", "400.41", "25.41"),
    2017: ("69.62", "83.24", "21.00", "47.70", "13.29", "180.87", "366.31", "23.65"),
    2018: ("63.74", "56.92", "19.65", "38.95", "16.86", "167.10", "334.40", "21.46"),
    2019: ("63.92", "56.59", "18.41", "35.69", "14.20", "155.50", "311.67", "19.05"),
}


def _parse_hundredths(text: str) -> int:
    """Parse a decimal string with at most two fractional digits into hundredths."""
    text = text.strip()
    negative = text.startswith("-")
    body = text[1:] if negative else text
    whole, _, frac = body.partition(".")
    if not whole.isdigit() or (frac and not frac.isdigit()) or len(frac) > 2:
        raise TableFormatError(f"not a 2-decimal value: {text!r}")
    cents = int(whole) * 100 + int(frac.ljust(2, "0") or "0")
    return -cents if negative else cents


def _format_hundredths(cents: int) -> str:
    sign = "-" if cents < 0 else ""
    cents = abs(cents)
    return f"{sign}{cents // 100}.{cents % 100:02d}"


@dataclass(frozen=True)
class IntensityTable:
    """15 x 8 grids of energy and carbon intensities in exact hundredths.

    Immutable after construction; safe for unrestricted concurrent reads.
    """

    energy_hundredths: tuple[tuple[int, ...], ...]
    carbon_hundredths: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        for name, grid in (("energy", self.energy_hundredths),
                           ("carbon", self.carbon_hundredths)):
            if len(grid) != len(YEARS):
                raise TableFormatError(f"{name} grid must cover {len(YEARS)} years")
            for year, row in zip(YEARS, grid):
                if len(row) != len(Sector):
                    raise TableFormatError(f"{name} row {year} must have 8 sectors")
                if any(v <= 0 for v in row):
                    raise TableFormatError(f"nonpositive {name} intensity in {year}")
            for s in Sector:
                if grid[-1][s] >= grid[0][s]:
                    raise TableFormatError(
                        f"{name} intensity for {s.label} does not decline "
                        f"{FIRST_YEAR}->{LAST_YEAR}"
                    )

    def _row(self, grid: tuple[tuple[int, ...], ...], year: int) -> tuple[int, ...]:
        if not FIRST_YEAR <= year <= LAST_YEAR:
            raise YearOutOfRange(year)
        return grid[year - FIRST_YEAR]

    def energy(self, year: int, sector: Sector) -> float:
        """Energy intensity in GJ per 10^4 Yuan."""
        return self._row(self.energy_hundredths, year)[sector] / 100.0

    def carbon(self, year: int, sector: Sector) -> float:
        """Carbon intensity in kg per 10^4 Yuan."""
        return self._row(self.carbon_hundredths, year)[sector] / 100.0

    def energy_text(self, year: int, sector: Sector) -> str:
        """Energy intensity as the exact published 2-decimal string."""
        return _format_hundredths(self._row(self.energy_hundredths, year)[sector])

    def carbon_text(self, year: int, sector: Sector) -> str:
        """Carbon intensity as the exact published 2-decimal string."""
        return _format_hundredths(self._row(self.carbon_hundredths, year)[sector])

    def energy_row(self, year: int) -> tuple[float, ...]:
        return tuple(v / 100.0 for v in self._row(self.energy_hundredths, year))

    def carbon_row(self, year: int) -> tuple[float, ...]:
        return tuple(v / 100.0 for v in self._row(self.carbon_hundredths, year))


_BUILTIN = IntensityTable(
    energy_hundredths=tuple(
        tuple(_parse_hundredths(v) for v in _ENERGY_TEXT[y]) for y in YEARS
    ),
    carbon_hundredths=tuple(
        tuple(_parse_hundredths(v) for v in _CARBON_TEXT[y]) for y in YEARS
    ),
)


def builtin_table() -> IntensityTable:
    """The embedded 2005-2019 table; this copy is authoritative."""
    return _BUILTIN


def lookup(table: IntensityTable, year: int, sector: Sector) -> tuple[float, float]:
    """(energy intensity, carbon intensity) for one year-sector cell."""
    return table.energy(year, sector), table.carbon(year, sector)


def sector_ratio(table: IntensityTable, year: int, sector: Sector) -> float:
    """Carbon-per-energy ratio (kg/GJ) of one sector in one year."""
    return table.carbon(year, sector) / table.energy(year, sector)


FILE_HEADER = (
    ["year"]
    + [f"energy_{s.label}" for s in Sector]
    + [f"carbon_{s.label}" for s in Sector]
)


def render_table(table: IntensityTable) -> str:
    """Render the delimited text form: year, 8 energy columns, 8 carbon columns."""
    lines = [",".join(FILE_HEADER)]
    for year in YEARS:
        cells = [str(year)]
        cells += [table.energy_text(year, s) for s in Sector]
        cells += [table.carbon_text(year, s) for s in Sector]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_table(table: IntensityTable, path: str | Path) -> None:
    Path(path).write_text(render_table(table), encoding="utf-8")


def read_table(path: str | Path) -> IntensityTable:
    """Load a table from its delimited text form (see render_table)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split(",") != FILE_HEADER:
        raise TableFormatError(f"bad header in {path}; expected {','.join(FILE_HEADER)}")
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != len(YEARS):
        raise TableFormatError(f"expected {len(YEARS)} data rows, found {len(body)}")
    energy: list[tuple[int, ...]] = []
    carbon: list[tuple[int, ...]] = []
    for expected_year, line in zip(YEARS, body):
        cells = line.split(",")
        if len(cells) != len(FILE_HEADER):
            raise TableFormatError(f"row {expected_year}: expected {len(FILE_HEADER)} columns")
        if cells[0].strip() != str(expected_year):
            raise TableFormatError(f"expected year {expected_year}, found {cells[0]!r}")
        values = [_parse_hundredths(c) for c in cells[1:]]
        energy.append(tuple(values[:8]))
        carbon.append(tuple(values[8:]))
    return IntensityTable(tuple(energy), tuple(carbon))
