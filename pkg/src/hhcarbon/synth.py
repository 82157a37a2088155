"""Deterministic synthetic household panels with a known data-generating process.

The generator exists so the estimators and the full pipeline can be tested
end-to-end against a known truth: the implied log energy use of every
generated row equals

    intercept + b1*ln(1+credit) [+ b2*ln(1+credit)^2] + X @ gamma
    + household effect + noise

exactly (up to float rounding), because sector spending is constructed by
scaling fixed per-household budget shares to hit the target footprint.

Randomness comes from NumPy's PCG64 bit generator; per-household streams are
spawned from one SeedSequence(seed), so parallel generation by household
would reproduce serial output bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from types import SimpleNamespace
from typing import Mapping

import numpy as np

from .footprint import ConsumptionBundle
from .intensity import FIRST_YEAR, LAST_YEAR, IntensityTable, Sector, builtin_table
from .panel import CONTROL_LABELS, control_values, credit_terms
from .records import HouseholdRecord, repeated_households

ALLOCATIONS = ("random_shares", "fixed_shares")


class InfeasibleConfig(ValueError):
    """The configuration cannot produce valid records."""


def _default_gamma() -> dict[str, float]:
    return {
        "age": -0.004,
        "schooling": 0.01,
        "ln_income": 0.05,
        "family_size": 0.08,
        "rural": -0.25,
    }


@dataclass(frozen=True)
class DGPConfig:
    """Knobs of the synthetic data-generating process."""

    n_households: int = 200
    years: tuple[int, ...] = (2011, 2013, 2015, 2017, 2019)
    seed: int = 0
    intercept: float = 3.0
    beta_credit: float = 0.012
    beta_credit_sq: float | None = None
    gamma: Mapping[str, float] = field(default_factory=_default_gamma)
    household_sd: float = 0.3
    noise_sd: float = 0.1
    allocation: str = "random_shares"
    budget_shares: tuple[float, ...] | None = None
    attrition: float = 0.0
    n_provinces: int = 6

    def __post_init__(self) -> None:
        if self.n_households < 1:
            raise InfeasibleConfig("n_households must be >= 1")
        if not self.years:
            raise InfeasibleConfig("years must be non-empty")
        for y in self.years:
            if not FIRST_YEAR <= y <= LAST_YEAR:
                raise InfeasibleConfig(f"year {y} outside table coverage")
        if self.household_sd < 0 or self.noise_sd < 0:
            raise InfeasibleConfig("standard deviations must be non-negative")
        if not 0.0 <= self.attrition < 1.0:
            raise InfeasibleConfig("attrition must lie in [0, 1)")
        if self.allocation not in ALLOCATIONS:
            raise InfeasibleConfig(f"allocation must be one of {ALLOCATIONS}")
        unknown = set(self.gamma) - set(CONTROL_LABELS)
        if unknown:
            raise InfeasibleConfig(f"gamma keys not control labels: {sorted(unknown)}")
        if self.allocation == "fixed_shares":
            shares = self.budget_shares
            if shares is None or len(shares) != len(Sector):
                raise InfeasibleConfig("fixed_shares needs 8 budget_shares")
            if any(s < 0 for s in shares) or sum(shares) <= 0:
                raise InfeasibleConfig("budget_shares must be non-negative with positive sum")


def _household_rows(config: DGPConfig, index: int,
                    rng: np.random.Generator,
                    table: IntensityTable) -> list[HouseholdRecord]:
    household_id = f"H{index:06d}"
    province = f"P{int(rng.integers(config.n_provinces)) + 1:02d}"
    male = int(rng.integers(0, 2))
    effect = float(rng.normal(0.0, config.household_sd)) if config.household_sd else 0.0

    if config.allocation == "fixed_shares":
        shares = np.asarray(config.budget_shares, dtype=float)
        shares = shares / shares.sum()
    else:
        shares = rng.dirichlet(np.ones(len(Sector)))

    years = sorted(config.years)
    observed = [years[0]]
    observed += [y for y in years[1:] if rng.random() >= config.attrition]
    n = len(observed)

    draws = {
        "rural": rng.random(n) < 0.33,
        "age": rng.integers(16, 81, size=n),
        "schooling": rng.integers(0, 23, size=n),
        "married": rng.random(n) < 0.85,
        "employed": rng.random(n) < 0.67,
        "health": rng.random(n) < 0.42,
        "income": np.clip(np.exp(rng.normal(10.5, 0.8, size=n)), 1.05, 690_180.0),
        "wealth": np.clip(np.exp(rng.normal(12.5, 1.2, size=n)), 4.0, 9_794_016.0),
        "business": rng.random(n) < 0.14,
        "family_size": np.minimum(1 + rng.poisson(2.3, size=n), 20),
    }
    has_credit = rng.random(n) >= 0.4
    credit = np.where(
        has_credit, np.minimum(np.exp(rng.normal(10.0, 1.2, size=n)), 1e6), 0.0
    )
    noise = rng.normal(0.0, config.noise_sd, size=n) if config.noise_sd else np.zeros(n)

    rows: list[HouseholdRecord] = []
    for t, year in enumerate(observed):
        fields = dict(
            household_id=household_id,
            year=year,
            province=province,
            rural=int(draws["rural"][t]),
            age=int(draws["age"][t]),
            male=male,
            schooling=int(draws["schooling"][t]),
            married=int(draws["married"][t]),
            employed=int(draws["employed"][t]),
            health=int(draws["health"][t]),
            income=float(draws["income"][t]),
            wealth=float(draws["wealth"][t]),
            business=int(draws["business"][t]),
            family_size=int(draws["family_size"][t]),
            credit_access=float(credit[t]),
        )
        target = config.intercept + effect + float(noise[t])
        for label, value in credit_terms(fields["credit_access"],
                                         config.beta_credit_sq is not None).items():
            beta = config.beta_credit if label == "ln_credit" else config.beta_credit_sq
            target += beta * value
        controls = control_values(SimpleNamespace(**fields))
        for label, coef in config.gamma.items():
            target += coef * controls[label]

        denom = float(shares @ np.asarray(table.energy_row(year))) / 1e4
        if denom <= 0.0:
            raise InfeasibleConfig("allocation shares give a non-positive footprint")
        total_spend = float(np.exp(target)) / denom
        bundle = ConsumptionBundle(year, tuple(float(s * total_spend) for s in shares))
        rows.append(HouseholdRecord(bundle=bundle, **fields))
    return rows


def generate(config: DGPConfig,
             table: IntensityTable | None = None) -> list[HouseholdRecord]:
    """Generate the panel; same config (seed included) gives identical output."""
    table = table or builtin_table()
    seeds = np.random.SeedSequence(config.seed).spawn(config.n_households)
    records: list[HouseholdRecord] = []
    for i, child in enumerate(seeds):
        rng = np.random.Generator(np.random.PCG64(child))
        records.extend(_household_rows(config, i, rng, table))
    return records


def repeated_households_filter(records):
    """Keep only households observed in at least two distinct years."""
    return repeated_households(records)
