"""Credit marginal-effect curves and checks against the published tables.

The published coefficient tables are shipped as a data file keyed by
(table, row, column) so every check here is data-driven; absolute curve
levels depend on unpublished sample means, so only differences and shape
are meaningful.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

CREDIT = "ln_credit"
CREDIT_SQ = "ln_credit_sq"

PUBLISHED_COLUMNS = (
    "ols_energy", "fe_energy",
    "ols_carbon", "fe_carbon",
    "ols_efficiency", "fe_efficiency",
)


class MissingCreditTerm(ValueError):
    """The coefficient set carries no ln-credit term."""


@dataclass(frozen=True)
class PublishedCell:
    coefficient: float | None
    std_error: float | None
    stars: str

    @property
    def blank(self) -> bool:
        return self.coefficient is None


@dataclass(frozen=True)
class PublishedTable:
    """One published coefficient table: row label -> column id -> cell."""

    table_id: int
    row_order: tuple[str, ...]
    cells: Mapping[str, Mapping[str, PublishedCell]]

    def cell(self, row_label: str, column_id: str) -> PublishedCell:
        return self.cells[row_label][column_id]

    def credit_coefficients(self, column_id: str) -> dict[str, float]:
        """The ln-credit terms of one column, usable with effect_curve."""
        out: dict[str, float] = {}
        for label in (CREDIT, CREDIT_SQ):
            if label in self.cells and not self.cells[label][column_id].blank:
                out[label] = self.cells[label][column_id].coefficient
        if CREDIT not in out:
            raise MissingCreditTerm(
                f"table {self.table_id} column {column_id} has no credit term"
            )
        return out


def load_published() -> dict[int, PublishedTable]:
    """Read the shipped published-coefficients file into table objects."""
    text = (resources.files("hhcarbon") / "data" / "published_coefficients.csv").read_text(
        encoding="utf-8"
    )
    raw: dict[int, dict[str, dict[str, PublishedCell]]] = {}
    order: dict[int, list[str]] = {}
    for rec in csv.DictReader(text.splitlines()):
        tid = int(rec["table"])
        row = rec["row_label"]
        blank = rec["coefficient"] == ""
        cell = PublishedCell(
            coefficient=None if blank else float(rec["coefficient"]),
            std_error=None if blank else float(rec["std_error"]),
            stars=rec["stars"],
        )
        table = raw.setdefault(tid, {})
        if row not in table:
            table[row] = {}
            order.setdefault(tid, []).append(row)
        if rec["column_id"] not in PUBLISHED_COLUMNS:
            raise ValueError(f"unknown column id {rec['column_id']!r}")
        table[row][rec["column_id"]] = cell
    return {
        tid: PublishedTable(tid, tuple(order[tid]), raw[tid]) for tid in sorted(raw)
    }


def default_grid(n: int = 50, low: float = 1e2, high: float = 1e6) -> tuple[float, ...]:
    """Log-spaced credit grid spanning the visible range of the data."""
    return tuple(float(v) for v in np.geomspace(low, high, n))


@dataclass(frozen=True)
class EffectCurve:
    """Predicted outcome (log units) over a grid of credit values."""

    credit_grid: tuple[float, ...]
    predicted: tuple[float, ...]


def _credit_part(coefficients: Mapping[str, float], credit: float) -> float:
    lc = math.log1p(credit)
    value = coefficients[CREDIT] * lc
    if CREDIT_SQ in coefficients:
        value += coefficients[CREDIT_SQ] * lc * lc
    return value


def effect_curve(coefficients: Mapping[str, float],
                 grid: Sequence[float] | None = None,
                 means: Mapping[str, float] | None = None) -> EffectCurve:
    """Evaluate predicted(c) = constant(means) + b1*ln(1+c) + b2*ln(1+c)^2.

    The constant aggregates the intercept and every non-credit coefficient
    evaluated at the supplied means; it shifts the level and never the shape,
    so differences between grid points depend only on the credit terms.
    """
    if CREDIT not in coefficients:
        raise MissingCreditTerm("coefficients carry no ln_credit term")
    if grid is None:
        grid = default_grid()
    grid = tuple(float(c) for c in grid)
    if any(c < 0 for c in grid):
        raise ValueError("credit grid values must be non-negative")
    means = means or {}
    constant = 0.0
    for label, coef in coefficients.items():
        if label in (CREDIT, CREDIT_SQ):
            continue
        value = means.get(label, 1.0 if label == "const" else 0.0)
        constant += coef * value
    predicted = tuple(constant + _credit_part(coefficients, c) for c in grid)
    return EffectCurve(credit_grid=grid, predicted=predicted)


def predicted_change(coefficients: Mapping[str, float],
                     low: float, high: float) -> float:
    """Predicted outcome difference from credit=low to credit=high."""
    if CREDIT not in coefficients:
        raise MissingCreditTerm("coefficients carry no ln_credit term")
    if low < 0 or high < 0:
        raise ValueError("credit values must be non-negative")
    return _credit_part(coefficients, high) - _credit_part(coefficients, low)


def curve_vertex(coefficients: Mapping[str, float]) -> float | None:
    """Stationary point -b1/(2*b2) in ln(1+credit) units; None when linear."""
    if CREDIT not in coefficients:
        raise MissingCreditTerm("coefficients carry no ln_credit term")
    b2 = coefficients.get(CREDIT_SQ, 0.0)
    if b2 == 0.0:
        return None
    return -coefficients[CREDIT] / (2.0 * b2)


def curve_shape(coefficients: Mapping[str, float]) -> str:
    """'concave' (b2<0), 'convex' (b2>0), or 'linear' in ln(1+credit)."""
    b2 = coefficients.get(CREDIT_SQ, 0.0)
    if b2 < 0:
        return "concave"
    if b2 > 0:
        return "convex"
    return "linear"


@dataclass(frozen=True)
class DeclineCheck:
    """Outcome of the efficiency-decline claim between two credit levels."""

    change: float
    magnitude: float
    threshold: float
    holds: bool
    low: float
    high: float


def decline_claim_check(coefficients: Mapping[str, float],
                        low: float = 1_000.0, high: float = 100_000.0,
                        threshold: float = 3e-4) -> DeclineCheck:
    """Assert the log-efficiency change from low to high credit is a decline.

    The claim holds when the change is negative with magnitude above the
    threshold (0.03% in relative terms by default).
    """
    change = predicted_change(coefficients, low, high)
    return DeclineCheck(
        change=change,
        magnitude=abs(change),
        threshold=threshold,
        holds=change < 0 and abs(change) > threshold,
        low=low,
        high=high,
    )


@dataclass(frozen=True)
class PublishedIdentityCheck:
    table_id: int
    row_label: str
    estimator: str
    beta_energy: float
    beta_carbon: float
    beta_efficiency: float
    delta: float
    ok: bool


@dataclass(frozen=True)
class PublishedIdentityReport:
    checks: tuple[PublishedIdentityCheck, ...]
    skipped: tuple[tuple[int, str, str, str], ...]
    tolerance: float

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> tuple[PublishedIdentityCheck, ...]:
        return tuple(c for c in self.checks if not c.ok)


def validate_published(tables: Mapping[int, PublishedTable] | None = None,
                       tolerance: float = 1.5e-5) -> PublishedIdentityReport:
    """Check beta_efficiency = beta_carbon - beta_energy across all cells.

    The default tolerance 1.5e-5 is the worst-case accumulation of three
    5-decimal roundings. Rows with any blank cell (dropped terms) are
    reported as skipped, not failed.
    """
    if tables is None:
        tables = load_published()
    checks: list[PublishedIdentityCheck] = []
    skipped: list[tuple[int, str, str, str]] = []
    for tid in sorted(tables):
        table = tables[tid]
        for row in table.row_order:
            for est in ("ols", "fe"):
                cells = [table.cell(row, f"{est}_{kind}")
                         for kind in ("energy", "carbon", "efficiency")]
                if any(c.blank for c in cells):
                    skipped.append((tid, row, est, "blank cell (dropped term)"))
                    continue
                be, bc, bf = (c.coefficient for c in cells)
                delta = bf - (bc - be)
                checks.append(PublishedIdentityCheck(
                    table_id=tid, row_label=row, estimator=est,
                    beta_energy=be, beta_carbon=bc, beta_efficiency=bf,
                    delta=delta, ok=abs(delta) <= tolerance,
                ))
    return PublishedIdentityReport(tuple(checks), tuple(skipped), tolerance)
