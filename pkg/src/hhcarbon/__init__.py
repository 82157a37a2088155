"""Household footprint accounting, inequality metrics and credit-access panels."""

from .intensity import (
    IntensityTable,
    Sector,
    YearOutOfRange,
    builtin_table,
    lookup,
    sector_ratio,
)
from .footprint import (
    ConsumptionBundle,
    EmptyBundle,
    EmptyCohort,
    Footprint,
    cohort_efficiency,
    estimate_footprint,
    footprint_panel,
    sector_efficiency_series,
)
from .inequality import gini, lorenz, tail_share
from .records import HouseholdRecord, repeated_households
from .panel import (
    Design,
    FitResult,
    RegressionSpec,
    build_design,
    coefficient_identity_check,
    fit_all_outcomes,
    fit_pooled_ols,
    fit_within_fe,
)
from .effects import (
    decline_claim_check,
    effect_curve,
    load_published,
    predicted_change,
    validate_published,
)
from .synth import DGPConfig, generate, repeated_households_filter

__all__ = [
    "IntensityTable", "Sector", "YearOutOfRange", "builtin_table", "lookup",
    "sector_ratio", "ConsumptionBundle", "EmptyBundle", "EmptyCohort",
    "Footprint", "cohort_efficiency", "estimate_footprint", "footprint_panel",
    "sector_efficiency_series", "gini", "lorenz", "tail_share",
    "HouseholdRecord", "repeated_households", "Design", "FitResult",
    "RegressionSpec", "build_design", "coefficient_identity_check",
    "fit_all_outcomes", "fit_pooled_ols", "fit_within_fe",
    "decline_claim_check", "effect_curve", "load_published",
    "predicted_change", "validate_published", "DGPConfig", "generate",
    "repeated_households_filter",
]
