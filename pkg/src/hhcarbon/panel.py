"""Design matrices and panel estimators for the credit-access regressions.

Two estimators are provided: pooled OLS with province and year dummies, and
the within (household fixed-effects) estimator, which demeans every variable
inside each household and absorbs all time-invariant heterogeneity. Both
solve least squares through a Householder QR factorization; rank deficiency
is resolved by dropping later columns in build order and reporting them,
never by a silent pseudo-inverse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .footprint import RowError, estimate_footprint
from .intensity import IntensityTable
from .records import HouseholdRecord, fatal_violations, range_flags

OUTCOMES = ("energy", "carbon", "efficiency")
ESTIMATORS = ("pooled_ols", "within_fe")
SE_TYPES = ("classical", "cluster_by_household")

CONTROL_LABELS = (
    "age", "age_sq", "male", "schooling", "schooling_sq", "married",
    "employed", "health", "ln_income", "ln_income_sq", "ln_wealth",
    "ln_wealth_sq", "business", "family_size", "rural",
)


class RankDeficientError(ValueError):
    """Collinear columns found while on_rank_deficient='raise'."""

    def __init__(self, dropped: Sequence[tuple[str, str]]):
        self.dropped = list(dropped)
        names = ", ".join(label for label, _ in dropped)
        super().__init__(f"rank-deficient design; collinear columns: {names}")


class Underdetermined(ValueError):
    """Fewer observations than parameters to estimate."""


class NoWithinVariation(ValueError):
    """Every requested regressor is time-invariant within households."""


class SpecMismatch(ValueError):
    """Fits being compared do not share spec, sample or retained columns."""


@dataclass(frozen=True)
class RegressionSpec:
    """Declarative description of one regression run.

    Year dummies are always included; province dummies only under pooled OLS
    (household effects absorb them in the within estimator).
    """

    outcome: str
    estimator: str = "pooled_ols"
    include_credit_square: bool = False
    se_type: str = "classical"

    def __post_init__(self) -> None:
        if self.outcome not in OUTCOMES:
            raise ValueError(f"outcome must be one of {OUTCOMES}, got {self.outcome!r}")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")
        if self.se_type not in SE_TYPES:
            raise ValueError(f"se_type must be one of {SE_TYPES}, got {self.se_type!r}")


def credit_terms(credit_access: float, include_square: bool) -> dict[str, float]:
    """ln(1 + credit) and optionally its square; credit 0 maps to 0."""
    lc = math.log1p(credit_access)
    terms = {"ln_credit": lc}
    if include_square:
        terms["ln_credit_sq"] = lc * lc
    return terms


def control_values(rec: HouseholdRecord) -> dict[str, float]:
    """Control regressors exactly as the published tables transform them."""
    ln_income = math.log(rec.income)
    ln_wealth = math.log(rec.wealth)
    return {
        "age": float(rec.age),
        "age_sq": rec.age * rec.age / 100.0,
        "male": float(rec.male),
        "schooling": float(rec.schooling),
        "schooling_sq": rec.schooling * rec.schooling / 100.0,
        "married": float(rec.married),
        "employed": float(rec.employed),
        "health": float(rec.health),
        "ln_income": ln_income,
        "ln_income_sq": ln_income * ln_income,
        "ln_wealth": ln_wealth,
        "ln_wealth_sq": ln_wealth * ln_wealth,
        "business": float(rec.business),
        "family_size": float(rec.family_size),
        "rural": float(rec.rural),
    }


@dataclass
class Design:
    """Outcome vector, regressor matrix and row metadata for one spec."""

    y: np.ndarray
    x: np.ndarray
    labels: list[str]
    groups: np.ndarray
    years: np.ndarray
    spec: RegressionSpec
    has_intercept: bool
    row_errors: tuple[RowError, ...]
    soft_flags: tuple[RowError, ...]
    n_input_rows: int

    @property
    def n_obs(self) -> int:
        return int(self.y.size)


def build_design(records: Sequence[HouseholdRecord], spec: RegressionSpec,
                 table: IntensityTable) -> Design:
    """Assemble the design for `spec`, reporting unusable rows per cause.

    Rows with fatal violations or unevaluable footprints are excluded and
    reported (listwise deletion, counted); soft range flags keep the row.
    """
    outcomes: list[float] = []
    regressors: list[dict[str, float]] = []
    group_ids: list[str] = []
    years: list[int] = []
    provinces: list[str] = []
    row_errors: list[RowError] = []
    soft_flags: list[RowError] = []

    for i, rec in enumerate(records):
        problems = fatal_violations(rec)
        if problems:
            row_errors.append(RowError(i, rec.household_id, "; ".join(problems)))
            continue
        try:
            fp = estimate_footprint(rec.bundle, table)
        except ValueError as exc:
            row_errors.append(RowError(i, rec.household_id, str(exc)))
            continue
        for flag in range_flags(rec):
            soft_flags.append(RowError(i, rec.household_id, flag))
        if spec.outcome == "energy":
            outcomes.append(math.log(fp.energy_gj))
        elif spec.outcome == "carbon":
            outcomes.append(math.log(fp.carbon_kg))
        else:
            outcomes.append(math.log(fp.efficiency))
        row = credit_terms(rec.credit_access, spec.include_credit_square)
        row.update(control_values(rec))
        regressors.append(row)
        group_ids.append(rec.household_id)
        years.append(rec.year)
        provinces.append(rec.province)

    has_intercept = spec.estimator == "pooled_ols"
    labels: list[str] = (["const"] if has_intercept else [])
    labels += ["ln_credit"] + (["ln_credit_sq"] if spec.include_credit_square else [])
    labels += list(CONTROL_LABELS)

    year_levels = sorted(set(years))
    year_dummies = [f"year_{y}" for y in year_levels[1:]]
    labels += year_dummies
    province_dummies: list[str] = []
    if spec.estimator == "pooled_ols":
        province_levels = sorted(set(provinces))
        province_dummies = [f"province_{p}" for p in province_levels[1:]]
        labels += province_dummies

    n = len(outcomes)
    x = np.zeros((n, len(labels)))
    col = {label: j for j, label in enumerate(labels)}
    for r, row in enumerate(regressors):
        if has_intercept:
            x[r, col["const"]] = 1.0
        for label, value in row.items():
            x[r, col[label]] = value
        ylab = f"year_{years[r]}"
        if ylab in col:
            x[r, col[ylab]] = 1.0
        plab = f"province_{provinces[r]}"
        if plab in col:
            x[r, col[plab]] = 1.0

    return Design(
        y=np.asarray(outcomes, dtype=float),
        x=x,
        labels=labels,
        groups=np.asarray(group_ids, dtype=object),
        years=np.asarray(years, dtype=int),
        spec=spec,
        has_intercept=has_intercept,
        row_errors=tuple(row_errors),
        soft_flags=tuple(soft_flags),
        n_input_rows=len(records),
    )


@dataclass(frozen=True)
class DroppedTerm:
    label: str
    reason: str


@dataclass
class FitResult:
    """Estimation output: coefficients keyed by label plus diagnostics."""

    spec: RegressionSpec
    coefficients: dict[str, float]
    standard_errors: dict[str, float]
    n_obs: int
    r2: float
    adjusted_r2: float
    dropped_terms: list[DroppedTerm]
    residuals: np.ndarray
    dof: int
    se_type: str
    n_households: int
    n_excluded_rows: int = 0
    fixed_effects: dict[str, float] | None = None

    @property
    def retained_labels(self) -> list[str]:
        return list(self.coefficients)


def _drop_collinear(x: np.ndarray, labels: Sequence[str],
                    tol: float = 1e-9) -> tuple[list[int], list[DroppedTerm]]:
    """Greedy modified Gram-Schmidt scan: later columns lose on collinearity."""
    n = x.shape[0]
    q = np.empty((n, 0))
    keep: list[int] = []
    dropped: list[DroppedTerm] = []
    for j in range(x.shape[1]):
        colv = x[:, j]
        norm0 = np.linalg.norm(colv)
        if norm0 == 0.0:
            dropped.append(DroppedTerm(labels[j], "all-zero column"))
            continue
        resid = colv - q @ (q.T @ colv)
        resid = resid - q @ (q.T @ resid)
        norm_r = np.linalg.norm(resid)
        if norm_r <= tol * norm0:
            kept_names = ", ".join(labels[i] for i in keep)
            dropped.append(DroppedTerm(labels[j], f"collinear with [{kept_names}]"))
            continue
        q = np.column_stack([q, resid / norm_r])
        keep.append(j)
    return keep, dropped


def _qr_solve(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least squares via Householder QR; returns (beta, (X'X)^-1)."""
    q, r = np.linalg.qr(x)
    beta = np.linalg.solve(r, q.T @ y)
    r_inv = np.linalg.inv(r)
    return beta, r_inv @ r_inv.T


def _cluster_vcov(x: np.ndarray, resid: np.ndarray, groups: np.ndarray,
                  xtx_inv: np.ndarray, dof: int) -> np.ndarray:
    """Household-clustered sandwich with the usual G/(G-1)*(n-1)/dof factor."""
    n, k = x.shape
    _, inv = np.unique(groups, return_inverse=True)
    g = int(inv.max()) + 1
    scores = np.zeros((g, k))
    np.add.at(scores, inv, x * resid[:, None])
    meat = scores.T @ scores
    correction = g / (g - 1) * (n - 1) / dof
    return correction * xtx_inv @ meat @ xtx_inv


def fit_pooled_ols(design: Design, se_type: str | None = None,
                   on_rank_deficient: str = "drop") -> FitResult:
    """Pooled OLS on the stacked panel with dummies, intercept retained."""
    if design.spec.estimator != "pooled_ols":
        raise SpecMismatch("design was built for a different estimator")
    se_type = se_type or design.spec.se_type
    if se_type not in SE_TYPES:
        raise ValueError(f"unknown se_type {se_type!r}")

    keep, dropped = _drop_collinear(design.x, design.labels)
    if dropped and on_rank_deficient == "raise":
        raise RankDeficientError([(d.label, d.reason) for d in dropped])
    x = design.x[:, keep]
    labels = [design.labels[j] for j in keep]
    y = design.y
    n, k = x.shape
    if n <= k:
        raise Underdetermined(f"{n} observations for {k} retained columns")

    beta, xtx_inv = _qr_solve(x, y)
    resid = y - x @ beta
    ssr = float(resid @ resid)
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ssr / tss if tss > 0 else 0.0
    dof = n - k
    adjusted = 1.0 - (1.0 - r2) * (n - 1) / dof

    sigma2 = ssr / dof
    if se_type == "classical":
        vcov = sigma2 * xtx_inv
    else:
        vcov = _cluster_vcov(x, resid, design.groups, xtx_inv, dof)
    se = np.sqrt(np.diag(vcov))

    return FitResult(
        spec=design.spec,
        coefficients={lab: float(b) for lab, b in zip(labels, beta)},
        standard_errors={lab: float(s) for lab, s in zip(labels, se)},
        n_obs=n,
        r2=r2,
        adjusted_r2=adjusted,
        dropped_terms=list(dropped),
        residuals=resid,
        dof=dof,
        se_type=se_type,
        n_households=len(np.unique(design.groups)),
        n_excluded_rows=len(design.row_errors),
    )


def _group_demean(values: np.ndarray, inv: np.ndarray,
                  counts: np.ndarray) -> np.ndarray:
    if values.ndim == 1:
        means = np.bincount(inv, weights=values) / counts
        return values - means[inv]
    out = np.empty_like(values)
    for j in range(values.shape[1]):
        means = np.bincount(inv, weights=values[:, j]) / counts
        out[:, j] = values[:, j] - means[inv]
    return out


def fit_within_fe(design: Design, se_type: str | None = None,
                  on_rank_deficient: str = "drop") -> FitResult:
    """Within (household fixed-effects) estimator on demeaned data.

    Regressors with no within-household variation are dropped and reported;
    singleton households demean to zero rows and contribute nothing.
    Degrees of freedom are n - k - G (G absorbed household means), so
    standard errors match pooled OLS with one dummy per household. The
    reported R-squared values are within-R2, computed on demeaned data.
    """
    if design.spec.estimator != "within_fe":
        raise SpecMismatch("design was built for a different estimator")
    se_type = se_type or design.spec.se_type
    if se_type not in SE_TYPES:
        raise ValueError(f"unknown se_type {se_type!r}")

    uniq, inv = np.unique(design.groups, return_inverse=True)
    counts = np.bincount(inv)
    if design.y.size == 0 or counts.max() < 2:
        raise NoWithinVariation("no household observed in two or more years")

    yd = _group_demean(design.y, inv, counts)
    xd = _group_demean(design.x, inv, counts)

    dropped: list[DroppedTerm] = []
    within_idx: list[int] = []
    for j, label in enumerate(design.labels):
        scale = np.linalg.norm(design.x[:, j])
        if np.linalg.norm(xd[:, j]) <= 1e-10 * max(1.0, scale):
            dropped.append(DroppedTerm(label, "no within-household variation"))
        else:
            within_idx.append(j)
    if not within_idx:
        raise NoWithinVariation("every requested regressor is time-invariant")

    sub_labels = [design.labels[j] for j in within_idx]
    keep_rel, collinear = _drop_collinear(xd[:, within_idx], sub_labels)
    if collinear and on_rank_deficient == "raise":
        raise RankDeficientError([(d.label, d.reason) for d in collinear])
    dropped += collinear
    keep = [within_idx[j] for j in keep_rel]
    labels = [design.labels[j] for j in keep]
    x = xd[:, keep]
    n, k = x.shape
    g = len(uniq)
    dof = n - k - g
    if dof <= 0:
        raise Underdetermined(f"{n} observations for {k} slopes + {g} household means")

    beta, xtx_inv = _qr_solve(x, yd)
    resid = yd - x @ beta
    ssr = float(resid @ resid)
    tss = float(yd @ yd)
    r2 = 1.0 - ssr / tss if tss > 0 else 0.0
    adjusted = 1.0 - (1.0 - r2) * (n - g) / dof

    sigma2 = ssr / dof
    if se_type == "classical":
        vcov = sigma2 * xtx_inv
    else:
        vcov = _cluster_vcov(x, resid, design.groups, xtx_inv, dof)
    se = np.sqrt(np.diag(vcov))

    mean_y = np.bincount(inv, weights=design.y) / counts
    mean_x = np.column_stack([
        np.bincount(inv, weights=design.x[:, j]) / counts for j in keep
    ])
    effect_values = mean_y - mean_x @ beta
    effects = {str(hid): float(v) for hid, v in zip(uniq, effect_values)}

    return FitResult(
        spec=design.spec,
        coefficients={lab: float(b) for lab, b in zip(labels, beta)},
        standard_errors={lab: float(s) for lab, s in zip(labels, se)},
        n_obs=n,
        r2=r2,
        adjusted_r2=adjusted,
        dropped_terms=dropped,
        residuals=resid,
        dof=dof,
        se_type=se_type,
        n_households=g,
        n_excluded_rows=len(design.row_errors),
        fixed_effects=effects,
    )


def fit(design: Design, se_type: str | None = None,
        on_rank_deficient: str = "drop") -> FitResult:
    if design.spec.estimator == "pooled_ols":
        return fit_pooled_ols(design, se_type, on_rank_deficient)
    return fit_within_fe(design, se_type, on_rank_deficient)


@dataclass(frozen=True)
class IdentityRow:
    label: str
    beta_energy: float
    beta_carbon: float
    beta_efficiency: float
    delta: float


@dataclass
class IdentityReport:
    """Per-regressor check of beta_efficiency = beta_carbon - beta_energy."""

    rows: list[IdentityRow]
    tolerance: float
    violations: list[IdentityRow] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def max_abs_delta(self) -> float:
        return max((abs(r.delta) for r in self.rows), default=0.0)


def coefficient_identity_check(fit_energy: FitResult, fit_carbon: FitResult,
                               fit_efficiency: FitResult,
                               tolerance: float = 1e-9) -> IdentityReport:
    """Check the log-ratio identity across three fits on the same design.

    Because OLS is linear in the outcome and ln(efficiency) equals
    ln(carbon) - ln(energy) row by row, the identity must hold coefficient
    by coefficient.
    """
    fits = (fit_energy, fit_carbon, fit_efficiency)
    for f, outcome in zip(fits, OUTCOMES):
        if f.spec.outcome != outcome:
            raise SpecMismatch(f"expected outcome {outcome!r}, got {f.spec.outcome!r}")
    base = fits[0]
    for f in fits[1:]:
        if (f.spec.estimator != base.spec.estimator
                or f.spec.include_credit_square != base.spec.include_credit_square
                or f.n_obs != base.n_obs
                or f.retained_labels != base.retained_labels):
            raise SpecMismatch("fits do not share estimator, sample and columns")

    report = IdentityReport(rows=[], tolerance=tolerance)
    for label in base.retained_labels:
        be = fit_energy.coefficients[label]
        bc = fit_carbon.coefficients[label]
        bf = fit_efficiency.coefficients[label]
        row = IdentityRow(label, be, bc, bf, bf - (bc - be))
        report.rows.append(row)
        if abs(row.delta) > tolerance:
            report.violations.append(row)
    return report


def fit_all_outcomes(records: Sequence[HouseholdRecord], table: IntensityTable,
                     estimator: str = "pooled_ols",
                     include_credit_square: bool = False,
                     se_type: str = "classical") -> tuple[dict[str, FitResult], IdentityReport]:
    """Fit all three outcomes on one sample and append the identity check."""
    fits: dict[str, FitResult] = {}
    for outcome in OUTCOMES:
        spec = RegressionSpec(outcome=outcome, estimator=estimator,
                              include_credit_square=include_credit_square,
                              se_type=se_type)
        fits[outcome] = fit(build_design(records, spec, table))
    report = coefficient_identity_check(fits["energy"], fits["carbon"],
                                        fits["efficiency"])
    return fits, report
