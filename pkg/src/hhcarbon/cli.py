"""Command-line surface: footprints, inequality, regressions, effect curves.

Every command is deterministic given its inputs and flags: data outputs
carry no timestamps, numbers are written at full precision in
machine-readable files and at 6 significant digits in text tables, and run
metadata goes to stderr. Exit codes: 0 success, 1 validation failure,
2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import effects as fx
from . import inequality as ineq
from .footprint import cohort_efficiency, footprint_panel, sector_efficiency_series
from .intensity import Sector, builtin_table, read_table, sector_ratio, YEARS
from .panel import (
    OUTCOMES,
    RegressionSpec,
    build_design,
    coefficient_identity_check,
    fit,
)
from .panel_io import PanelFormatError, read_panel, write_panel, write_sidecar
from .records import repeated_households
from .synth import DGPConfig, InfeasibleConfig, generate

TABLE_ENV = "HHCARBON_INTENSITY_TABLE"

FOOTPRINT_HEADER = ["household_id", "year", "energy_gj", "carbon_kg", "efficiency"]

_ESTIMATOR_FLAG = {"ols": "pooled_ols", "fe": "within_fe"}
_SE_FLAG = {"classical": "classical", "cluster": "cluster_by_household"}


def _full(x: float) -> str:
    return repr(float(x))


def _sig6(x: float) -> str:
    return f"{x:.6g}"


def _stars(coef: float, se: float) -> str:
    if se <= 0:
        return ""
    t = abs(coef / se)
    if t >= 2.576:
        return "***"
    if t >= 1.960:
        return "**"
    if t >= 1.645:
        return "*"
    return ""


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _resolve_table(args: argparse.Namespace):
    path = getattr(args, "table", None) or os.environ.get(TABLE_ENV)
    if path:
        return read_table(path)
    return builtin_table()


def _load_panel(args: argparse.Namespace, parser: argparse.ArgumentParser):
    """Read + validate the input panel; returns (records, entries) or exits."""
    try:
        result = read_panel(args.input)
    except (PanelFormatError, OSError) as exc:
        _log(f"error: {exc}")
        raise SystemExit(1)
    return result


def _write_csv(path: str | None, header: list[str], rows: list[list[str]]) -> None:
    if path is None or path == "-":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _sidecar_path(args: argparse.Namespace) -> str:
    if getattr(args, "errors", None):
        return args.errors
    base = getattr(args, "output", None) or args.input
    return str(Path(base).with_suffix(".errors.csv"))


def _emit_sidecar(args: argparse.Namespace, entries) -> int:
    """Write the sidecar if needed; return 1 when any row was rejected."""
    if entries:
        path = _sidecar_path(args)
        write_sidecar(entries, path)
        n_err = sum(1 for e in entries if e.kind == "error")
        n_warn = len(entries) - n_err
        _log(f"{n_err} row error(s), {n_warn} warning(s) -> {path}")
        if n_err:
            return 1
    return 0


# ---------------------------------------------------------------------------
# footprint
# ---------------------------------------------------------------------------

def cmd_footprint(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    table = _resolve_table(args)
    result = _load_panel(args, parser)
    panel = footprint_panel(result.records, table)
    rows = [
        [r.household_id, str(r.year), _full(r.footprint.energy_gj),
         _full(r.footprint.carbon_kg), _full(r.footprint.efficiency)]
        for r in panel.rows
    ]
    _write_csv(args.output, FOOTPRINT_HEADER, rows)

    if args.group_by:
        groups: dict[str, list] = {}
        by_row = {(r.household_id, r.year): r.footprint for r in panel.rows}
        for rec in result.records:
            key = (rec.household_id, rec.year)
            if key not in by_row:
                continue
            if args.group_by == "year":
                label = str(rec.year)
            elif args.group_by == "rural":
                label = "rural" if rec.rural else "urban"
            else:
                label = rec.province
            groups.setdefault(label, []).append(by_row[key])
        cohort_rows = [
            [label, str(len(fps)), _full(sum(f.energy_gj for f in fps)),
             _full(sum(f.carbon_kg for f in fps)), _full(cohort_efficiency(fps))]
            for label, fps in sorted(groups.items())
        ]
        cohort_path = args.cohort_output or (
            str(Path(args.output).with_suffix(".cohorts.csv")) if args.output else None
        )
        _write_csv(cohort_path,
                   ["group", "n", "energy_gj", "carbon_kg", "efficiency"],
                   cohort_rows)

    _log(f"{len(panel.rows)} footprints computed from {len(result.records)} rows")
    status = _emit_sidecar(args, result.entries)
    return status


# ---------------------------------------------------------------------------
# inequality
# ---------------------------------------------------------------------------

PANEL_ATTRIBUTES = ("income", "wealth", "credit", "consumption",
                    "energy", "carbon", "efficiency")
FOOTPRINT_ATTRIBUTES = ("energy", "carbon", "efficiency")


def _attribute_values(args, parser) -> tuple[list[float], int]:
    with open(args.input, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), None)
    if header == FOOTPRINT_HEADER:
        column = {"energy": "energy_gj", "carbon": "carbon_kg",
                  "efficiency": "efficiency"}.get(args.attribute)
        if column is None:
            parser.error(f"attribute {args.attribute!r} needs a panel input "
                         f"(footprint files carry {FOOTPRINT_ATTRIBUTES})")
        with open(args.input, newline="", encoding="utf-8") as fh:
            values = [float(row[column]) for row in csv.DictReader(fh)]
        return values, 0

    result = _load_panel(args, parser)
    status = _emit_sidecar(args, result.entries)
    if args.attribute in ("income", "wealth"):
        values = [float(getattr(r, args.attribute)) for r in result.records]
    elif args.attribute == "credit":
        values = [float(r.credit_access) for r in result.records]
    elif args.attribute == "consumption":
        values = [r.bundle.total() for r in result.records]
    else:
        table = _resolve_table(args)
        panel = footprint_panel(result.records, table)
        values = [getattr(r.footprint,
                          {"energy": "energy_gj", "carbon": "carbon_kg",
                           "efficiency": "efficiency"}[args.attribute])
                  for r in panel.rows]
    return values, status


def cmd_inequality(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if not 0.0 < args.q < 1.0:
        parser.error(f"--q must lie strictly between 0 and 1, got {args.q}")
    values, status = _attribute_values(args, parser)
    try:
        result = ineq.lorenz(values)
    except ValueError as exc:
        _log(f"error: {exc}")
        return 1
    rows = [[_full(p), _full(share)] for p, share in result.points]
    _write_csv(args.output, ["population_share", "cumulative_share"], rows)

    summary = {
        "attribute": args.attribute,
        "n": len(values),
        "gini": result.gini,
        "q": args.q,
        "top_share": result.top_share(args.q),
        "bottom_share": result.bottom_share(args.q),
    }
    print(f"attribute      {args.attribute}")
    print(f"n              {len(values)}")
    print(f"gini           {_sig6(result.gini)}")
    print(f"top {args.q:.0%} share    {_sig6(summary['top_share'])}")
    print(f"bottom {args.q:.0%} share {_sig6(summary['bottom_share'])}")
    if args.summary_output:
        Path(args.summary_output).write_text(
            json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return status


# ---------------------------------------------------------------------------
# regress
# ---------------------------------------------------------------------------

def _fit_payload(result) -> dict:
    return {
        "outcome": result.spec.outcome,
        "estimator": result.spec.estimator,
        "se_type": result.se_type,
        "include_credit_square": result.spec.include_credit_square,
        "coefficients": result.coefficients,
        "standard_errors": result.standard_errors,
        "n_obs": result.n_obs,
        "n_households": result.n_households,
        "n_excluded_rows": result.n_excluded_rows,
        "r2": result.r2,
        "adjusted_r2": result.adjusted_r2,
        "dof": result.dof,
        "dropped_terms": [
            {"label": d.label, "reason": d.reason} for d in result.dropped_terms
        ],
    }


_OUTCOME_TITLES = {"energy": "ln(Energy Use)", "carbon": "ln(Carbon Emissions)",
                   "efficiency": "ln(Energy Efficiency)"}


def _regress_text(fits: dict) -> str:
    """Aligned text table in the layout of the published regression tables."""
    outcomes = list(fits)
    some = fits[outcomes[0]]
    labels = [lab for lab in some.retained_labels
              if lab != "const" and not lab.startswith(("year_", "province_"))]
    labels += [d.label for d in some.dropped_terms
               if not d.label.startswith(("year_", "province_"))]
    width = max(len(lab) for lab in labels) + 2
    cell_w = 30
    lines = [" " * width + "".join(
        _OUTCOME_TITLES[o].ljust(cell_w) for o in outcomes)]
    for lab in labels:
        cells = []
        for o in outcomes:
            f = fits[o]
            if lab in f.coefficients:
                coef, se = f.coefficients[lab], f.standard_errors[lab]
                cells.append(f"{_sig6(coef)}{_stars(coef, se)} ({_sig6(se)})")
            else:
                cells.append("")
        lines.append(lab.ljust(width) + "".join(c.ljust(cell_w) for c in cells))
    has_prov = any(lab.startswith("province_") for lab in some.retained_labels)
    lines.append("Province".ljust(width) + ("Yes" if has_prov else "No"))
    lines.append("Year".ljust(width) + "Yes")
    lines.append("Observations".ljust(width) + str(some.n_obs))
    lines.append("Adjusted R2".ljust(width) + "".join(
        _sig6(fits[o].adjusted_r2).ljust(cell_w) for o in outcomes))
    return "\n".join(lines)


def cmd_regress(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    table = _resolve_table(args)
    result = _load_panel(args, parser)
    records = result.records
    if args.repeated_only:
        before = len(records)
        records = repeated_households(records)
        _log(f"repeated-households filter: {before} -> {len(records)} rows")

    estimator = _ESTIMATOR_FLAG[args.estimator]
    se_type = _SE_FLAG[args.se]
    outcomes = list(OUTCOMES) if args.outcome == "all" else [args.outcome]

    fits = {}
    try:
        for outcome in outcomes:
            spec = RegressionSpec(outcome=outcome, estimator=estimator,
                                  include_credit_square=args.credit_square,
                                  se_type=se_type)
            fits[outcome] = fit(build_design(records, spec, table))
    except ValueError as exc:
        _log(f"error: {exc}")
        return 1

    payload: dict = {"fits": {o: _fit_payload(f) for o, f in fits.items()}}
    if args.outcome == "all":
        report = coefficient_identity_check(fits["energy"], fits["carbon"],
                                            fits["efficiency"])
        payload["identity_check"] = {
            "tolerance": report.tolerance,
            "ok": report.ok,
            "max_abs_delta": report.max_abs_delta,
            "rows": [
                {"label": r.label, "beta_energy": r.beta_energy,
                 "beta_carbon": r.beta_carbon,
                 "beta_efficiency": r.beta_efficiency, "delta": r.delta}
                for r in report.rows
            ],
        }

    print(_regress_text(fits))
    if "identity_check" in payload:
        status = "holds" if payload["identity_check"]["ok"] else "VIOLATED"
        print(f"\ncoefficient identity beta_EE = beta_C - beta_E: {status} "
              f"(max |delta| = {_sig6(payload['identity_check']['max_abs_delta'])})")
    if args.output:
        Path(args.output).write_text(json.dumps(payload, indent=2) + "\n",
                                     encoding="utf-8")
    status = _emit_sidecar(args, result.entries)
    return status


# ---------------------------------------------------------------------------
# effects
# ---------------------------------------------------------------------------

def _effects_coefficients(args, parser) -> dict[str, float]:
    if args.published:
        spec = args.published.replace("-", "_").lower()
        table_part, _, column = spec.partition(":")
        try:
            tid = int(table_part)
        except ValueError:
            parser.error(f"--published wants TABLE:COLUMN, got {args.published!r}")
        tables = fx.load_published()
        if tid not in tables:
            parser.error(f"no published table {tid}; have {sorted(tables)}")
        if column not in fx.PUBLISHED_COLUMNS:
            parser.error(f"column must be one of {', '.join(fx.PUBLISHED_COLUMNS)}")
        return tables[tid].credit_coefficients(column)
    data = json.loads(Path(args.fit).read_text(encoding="utf-8"))
    fits = data.get("fits", data)
    if args.outcome in fits:
        return dict(fits[args.outcome]["coefficients"])
    if len(fits) == 1:
        return dict(next(iter(fits.values()))["coefficients"])
    parser.error(f"fit file has outcomes {sorted(fits)}; pick one with --outcome")


def cmd_effects(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.grid_min < 0 or args.grid_max < 0:
        parser.error("credit grid values must be non-negative")
    if args.grid_min >= args.grid_max:
        parser.error("--grid-min must be below --grid-max")
    coefficients = _effects_coefficients(args, parser)
    means = {}
    if args.means:
        means = json.loads(Path(args.means).read_text(encoding="utf-8"))
    grid = fx.default_grid(args.points, args.grid_min, args.grid_max)
    try:
        curve = fx.effect_curve(coefficients, grid, means)
    except fx.MissingCreditTerm as exc:
        _log(f"error: {exc}")
        return 1
    rows = [[_full(c), _full(p)] for c, p in zip(curve.credit_grid, curve.predicted)]
    _write_csv(args.output, ["credit_yuan", "predicted_log_outcome"], rows)

    shape = fx.curve_shape(coefficients)
    print(f"shape          {shape} in ln(1+credit)")
    vertex = fx.curve_vertex(coefficients)
    if vertex is not None:
        print(f"vertex         ln(1+credit) = {_sig6(vertex)}")
    change = fx.predicted_change(coefficients, 1_000.0, 100_000.0)
    print(f"change 1e3->1e5 Yuan: {_sig6(change)}")
    return 0


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------

def cmd_dynamics(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    table = _resolve_table(args)
    header = ["series", "year", "efficiency_kg_per_gj"]
    if args.by == "sector":
        series = sector_efficiency_series(table)
        rows = [[s.label, str(year), _full(ratio)]
                for s in Sector for year, ratio in sorted(series[s].items())]
        _write_csv(args.output, header, rows)
        return 0
    if not args.input:
        parser.error("--by cohort needs --input PANEL")
    result = _load_panel(args, parser)
    table_rows: dict[tuple[str, int], list] = {}
    panel = footprint_panel(result.records, table)
    fp_by_key = {(r.household_id, r.year): r.footprint for r in panel.rows}
    for rec in result.records:
        fp = fp_by_key.get((rec.household_id, rec.year))
        if fp is None:
            continue
        label = "rural" if rec.rural else "urban"
        table_rows.setdefault((label, rec.year), []).append(fp)
    rows = [[label, str(year), _full(cohort_efficiency(fps))]
            for (label, year), fps in sorted(table_rows.items())]
    _write_csv(args.output, header, rows)
    return _emit_sidecar(args, result.entries)


# ---------------------------------------------------------------------------
# validate-published
# ---------------------------------------------------------------------------

def cmd_validate_published(args: argparse.Namespace,
                           parser: argparse.ArgumentParser) -> int:
    report = fx.validate_published(tolerance=args.tolerance)
    for c in report.checks:
        flag = "ok " if c.ok else "FAIL"
        print(f"{flag} table {c.table_id} {c.estimator.upper():3s} "
              f"{c.row_label:14s} {c.beta_carbon:+.5f} - {c.beta_energy:+.5f} "
              f"-> {c.beta_carbon - c.beta_energy:+.5f} vs {c.beta_efficiency:+.5f} "
              f"(delta {c.delta:+.1e})")
    for tid, row, est, reason in report.skipped:
        print(f"skip table {tid} {est.upper():3s} {row:14s} {reason}")
    n_fail = len(report.failures)
    print(f"\n{len(report.checks)} checks, {n_fail} failures, "
          f"{len(report.skipped)} skipped (tolerance {report.tolerance:g})")
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

def cmd_synth(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    years = tuple(int(y) for y in args.years.split(","))
    shares = None
    if args.shares:
        shares = tuple(float(s) for s in args.shares.split(","))
    try:
        config = DGPConfig(
            n_households=args.households,
            years=years,
            seed=args.seed,
            beta_credit=args.beta,
            beta_credit_sq=args.beta_sq,
            household_sd=args.household_sd,
            noise_sd=args.noise_sd,
            allocation="fixed_shares" if shares else "random_shares",
            budget_shares=shares,
            attrition=args.attrition,
        )
        records = generate(config)
    except InfeasibleConfig as exc:
        _log(f"error: {exc}")
        return 1
    write_panel(records, args.output)
    _log(f"wrote {len(records)} rows for {args.households} households -> {args.output}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hhcarbon",
        description="Household footprints, inequality and credit-access regressions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_table_flag(p):
        p.add_argument("--table", help=f"intensity table file (default: builtin, "
                                       f"or ${TABLE_ENV})")

    p = sub.add_parser("footprint", help="compute per-row footprints from a panel")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="footprint CSV (default stdout)")
    p.add_argument("--group-by", choices=["year", "rural", "province"])
    p.add_argument("--cohort-output", help="cohort summary CSV")
    p.add_argument("--errors", help="error sidecar path")
    add_table_flag(p)
    p.set_defaults(func=cmd_footprint)

    p = sub.add_parser("inequality", help="Lorenz curve, Gini and tail shares")
    p.add_argument("--input", required=True, help="panel or footprint CSV")
    p.add_argument("--attribute", required=True, choices=sorted(set(
        PANEL_ATTRIBUTES + FOOTPRINT_ATTRIBUTES)))
    p.add_argument("--q", type=float, default=0.1, help="tail quantile (default 0.1)")
    p.add_argument("--output", help="Lorenz points CSV (default stdout)")
    p.add_argument("--summary-output", help="summary JSON path")
    p.add_argument("--errors", help="error sidecar path")
    add_table_flag(p)
    p.set_defaults(func=cmd_inequality)

    p = sub.add_parser("regress", help="pooled OLS / within FE on a panel")
    p.add_argument("--input", required=True)
    p.add_argument("--outcome", choices=list(OUTCOMES) + ["all"], default="all")
    p.add_argument("--estimator", choices=["ols", "fe"], default="ols")
    p.add_argument("--credit-square", action="store_true",
                   help="include ln(1+credit)^2")
    p.add_argument("--se", choices=["classical", "cluster"], default="classical")
    p.add_argument("--repeated-only", action="store_true",
                   help="keep only households observed in >= 2 years")
    p.add_argument("--output", help="fit report JSON path")
    p.add_argument("--errors", help="error sidecar path")
    add_table_flag(p)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("effects", help="credit effect curve from a fit or "
                                       "published column")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--fit", help="fit report JSON from `regress`")
    src.add_argument("--published", metavar="TABLE:COLUMN",
                     help="e.g. 3:fe_efficiency")
    p.add_argument("--outcome", choices=list(OUTCOMES), default="efficiency",
                   help="which fit to use from a multi-outcome report")
    p.add_argument("--grid-min", type=float, default=1e2)
    p.add_argument("--grid-max", type=float, default=1e6)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--means", help="JSON of regressor means for the level")
    p.add_argument("--output", help="curve CSV (default stdout)")
    p.set_defaults(func=cmd_effects)

    p = sub.add_parser("dynamics", help="efficiency time series by sector or cohort")
    p.add_argument("--by", choices=["sector", "cohort"], required=True)
    p.add_argument("--input", help="panel CSV (cohort mode)")
    p.add_argument("--output", help="series CSV (default stdout)")
    p.add_argument("--errors", help="error sidecar path")
    add_table_flag(p)
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("validate-published",
                       help="check the published-coefficient identity")
    p.add_argument("--tolerance", type=float, default=1.5e-5)
    p.set_defaults(func=cmd_validate_published)

    p = sub.add_parser("synth", help="generate a synthetic panel")
    p.add_argument("--households", type=int, default=200)
    p.add_argument("--years", default="2011,2013,2015,2017,2019")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta", type=float, default=0.012,
                   help="true ln(1+credit) coefficient")
    p.add_argument("--beta-sq", type=float, default=None,
                   help="true ln(1+credit)^2 coefficient")
    p.add_argument("--household-sd", type=float, default=0.3)
    p.add_argument("--noise-sd", type=float, default=0.1)
    p.add_argument("--attrition", type=float, default=0.0)
    p.add_argument("--shares", help="8 fixed budget shares, comma-separated")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args, parser)


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
