"""Batch command-line front end.

Each study in the library is a subcommand that loads a YAML study file,
runs the analysis, prints a short human summary, and writes deterministic
CSV tables plus a JSON run manifest (config hash, input digests, derived
required revenue, base-case anchors).  Floats in tables are formatted at 12
significant digits and rows are emitted in a fixed order, so re-running a
command with identical inputs reproduces the files byte for byte.

Exit codes: 0 success, 2 validation failure, 3 infeasible study, 4 I/O
error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import demand as dm
from . import ingest
from . import tariff as tf
from . import welfare as wf

OUTPUT_DIR_ENV = "TARIFFKIT_OUTPUT_DIR"


def _fmt(value) -> str:
    """12-significant-digit float formatting; blank for missing values."""
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return ""
    return f"{value:.12g}"


def _sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _sha256_file(path) -> str:
    return _sha256_bytes(Path(path).read_bytes())


def _config_hash(config: ingest.StudyConfig) -> str:
    canonical = json.dumps(
        ingest.config_to_mapping(config), sort_keys=True, separators=(",", ":")
    )
    return _sha256_bytes(canonical.encode("utf-8"))


def build_manifest(study: ingest.Study, anchors: wf.BaseAnchors, tables: dict[str, str]) -> dict:
    """Deterministic run manifest; its hash is embedded in every table."""
    inputs = {
        "prices": _sha256_file(study.config.prices_path),
        "load": _sha256_file(study.config.load_path),
        "solar": _sha256_file(study.config.solar_path),
    }
    config_hash = _config_hash(study.config)
    run_hash = _sha256_bytes(
        (config_hash + inputs["prices"] + inputs["load"] + inputs["solar"] + __version__).encode()
    )
    return {
        "version": __version__,
        "config_sha256": config_hash,
        "input_sha256": inputs,
        "manifest_hash": run_hash,
        "fixed_cost_usd_per_day": study.fixed_cost,
        "anchors": {
            "revenue_usd_per_day": anchors.revenue,
            "consumer_surplus_usd_per_day": anchors.consumer_surplus,
            "retailer_surplus_usd_per_day": anchors.retailer_surplus,
        },
        "tables": tables,
    }


def _write_manifest(out_dir: Path, name: str, manifest: dict) -> Path:
    path = out_dir / f"{name}_manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def _write_table(path: Path, kind: str, manifest: dict, meta: list[str],
                 header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# tariffkit {kind}\n")
        fh.write(f"# version: {__version__}\n")
        fh.write(f"# manifest: {manifest['manifest_hash']}\n")
        fh.write(f"# fixed_cost_usd_per_day: {_fmt(manifest['fixed_cost_usd_per_day'])}\n")
        anchors = manifest["anchors"]
        fh.write(f"# base_revenue_usd_per_day: {_fmt(anchors['revenue_usd_per_day'])}\n")
        for line in meta:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _out_dir(config: ingest.StudyConfig) -> Path:
    out = Path(os.environ.get(OUTPUT_DIR_ENV) or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_study(args) -> tuple[ingest.Study, wf.BaseAnchors]:
    config = ingest.load_config(args.config)
    study = ingest.build_study(config)
    anchors = wf.base_anchors(study.model, study.scenario_set, ingest.nominal_tariff(config))
    return study, anchors


def _sweep_fixture(study: ingest.Study, mode: str, capacity_kw: float):
    """Scenario set and integration case for one DER capacity."""
    config = study.config
    unit = ingest.storage_unit_spec(config)
    units_total = config.storage_per_pv_kwh_per_kw * capacity_kw / unit.capacity_kwh
    if mode == tf.MODE_NONE or capacity_kw == 0.0:
        if mode == tf.MODE_DECENTRALIZED:
            return study.scenario_set, tf.decentralized_case(unit, np.zeros(study.model.n_classes))
        if mode == tf.MODE_CENTRALIZED:
            return study.scenario_set, tf.centralized_case(unit, 0.0)
        return study.scenario_set, tf.no_der()
    if mode == tf.MODE_DECENTRALIZED:
        kw, _ = wf.allocate_pv(study.model, capacity_kw, config.pv_unit_kw)
        share = kw / capacity_kw
        case = tf.decentralized_case(unit, units_total * share)
        swept = wf.with_pv_capacity(study.scenario_set, customer_kw=kw)
        return swept, case
    case = tf.centralized_case(unit, units_total)
    swept = wf.with_pv_capacity(study.scenario_set, retailer_kw=capacity_kw)
    return swept, case


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    failures = []

    def check(label, fn):
        try:
            result = fn()
        except Exception as exc:  # report every failing check, not just the first
            failures.append(label)
            print(f"FAIL {label}: {exc}")
            return None
        print(f"ok   {label}")
        return result

    config = check("config parses", lambda: ingest.load_config(args.config))
    if config is None:
        print("validation failed: 1 check")
        return 2
    study = check("inputs load and align", lambda: ingest.build_study(config))
    if study is None:
        print(f"validation failed: {len(failures)} check(s)")
        return 2

    report = check(
        "assumption 1 (price response negative definite)",
        lambda: _assumption1_or_raise(study),
    )
    if report is not None:
        print(
            f"     aggregate price-response eigenvalues in "
            f"[{report.eig_min:.6g}, {report.eig_max:.6g}]"
        )
    check("scenario weights sum to one", lambda: study.scenario_set.probabilities.sum())
    nominal = ingest.nominal_tariff(config)
    anchors = check(
        "nominal tariff evaluates",
        lambda: wf.base_anchors(study.model, study.scenario_set, nominal),
    )
    if anchors is not None:
        print(
            f"     base revenue {anchors.revenue:.6g} $/day, cs {anchors.consumer_surplus:.6g}, "
            f"rs {anchors.retailer_surplus:.6g}, derived F {study.fixed_cost:.6g}"
        )
        if anchors.consumer_surplus <= 0.0:
            failures.append("consumer surplus positive")
            print("FAIL consumer surplus positive: nominal tariff leaves cs <= 0")
    if failures:
        print(f"validation failed: {len(failures)} check(s)")
        return 2
    print("validation passed")
    return 0


def _assumption1_or_raise(study: ingest.Study) -> dm.Assumption1Report:
    report = dm.validate_assumption1(study.model, study.scenario_set)
    if not report.passed:
        raise tf.ModelAssumptionError(
            f"aggregate demand jacobian not negative definite, max eigenvalue {report.eig_max:.6g}"
        )
    return report


def cmd_optimize(args) -> int:
    study, anchors = _load_study(args)
    fixed_cost = study.fixed_cost if args.fixed_cost is None else args.fixed_cost
    fixed_a = (
        args.fixed_connection_charge
        if args.fixed_connection_charge is not None
        else study.config.fixed_connection_charges[0]
    )
    if args.family in (tf.FLAT_FIXED_A, tf.DYNAMIC_FIXED_A):
        family = tf.TariffFamily(kind=args.family, fixed_connection_charge=fixed_a)
    else:
        family = tf.TariffFamily(kind=args.family)
    swept, case = _sweep_fixture(study, args.mode, args.capacity_kw)

    result = tf.optimize_family_report(family, study.model, swept, case, fixed_cost)
    tariff = result.tariff
    report = wf.evaluate(tariff, study.model, swept, case)
    residual = abs(report.retailer_surplus - fixed_cost)

    print(f"family: {args.family}   mode: {args.mode}   pv: {_fmt(args.capacity_kw)} kW")
    print(f"required revenue F: {_fmt(fixed_cost)} $/day")
    print(f"connection charge A: {_fmt(tariff.connection_charge)} $/day")
    prices = "  ".join(_fmt(p) for p in tariff.prices)
    print(f"prices ($/kWh): {prices}")
    print(
        f"cs: {_fmt(report.consumer_surplus)}   rs: {_fmt(report.retailer_surplus)}   "
        f"sw: {_fmt(report.social_welfare)} $/day"
    )
    print(f"revenue-adequacy residual: {residual:.3e} $/day")
    if result.notes:
        print(f"notes: {'; '.join(result.notes)}")

    out = _out_dir(study.config)
    manifest = build_manifest(study, anchors, {"optimize": "optimize.csv"})
    header = (
        ["family", "mode", "pv_capacity_kw", "fixed_cost_usd_per_day",
         "connection_charge_usd_per_day", "consumer_surplus_usd_per_day",
         "retailer_surplus_usd_per_day", "social_welfare_usd_per_day",
         "adequacy_residual_usd_per_day"]
        + [f"price_{k:02d}_usd_per_kwh" for k in range(study.config.horizon)]
    )
    row = (
        [args.family, args.mode, _fmt(args.capacity_kw), _fmt(fixed_cost),
         _fmt(tariff.connection_charge), _fmt(report.consumer_surplus),
         _fmt(report.retailer_surplus), _fmt(report.social_welfare), _fmt(residual)]
        + [_fmt(p) for p in tariff.prices]
    )
    _write_table(out / "optimize.csv", "optimize", manifest,
                 [f"family: {args.family}", f"mode: {args.mode}"], header, [row])
    _write_manifest(out, "optimize", manifest)
    return 0


def _select_families(config: ingest.StudyConfig, labels) -> list[tuple[str, tf.TariffFamily]]:
    configured = ingest.configured_families(config)
    if not labels:
        return configured
    by_label = dict(configured)
    out = []
    for label in labels:
        if label not in by_label:
            raise ingest.ConfigError(
                f"unknown family {label!r}; configured: {', '.join(by_label)}"
            )
        out.append((label, by_label[label]))
    return out


def cmd_pareto(args) -> int:
    study, anchors = _load_study(args)
    families = _select_families(study.config, args.families)
    grid = tuple(args.fixed_cost_grid) if args.fixed_cost_grid else \
        ingest.resolve_fixed_cost_grid(study.config, study.fixed_cost)

    rows = []
    feasible_cells = 0
    for label, family in families:
        front = wf.pareto_front(
            family, study.model, study.scenario_set, tf.no_der(), grid, anchors
        )
        by_f = {p.fixed_cost: p for p in front.points}
        reasons = dict(front.infeasible)
        for f in grid:
            point = by_f.get(float(f))
            if point is None:
                rows.append([label, _fmt(f), "", "", "", "", reasons.get(float(f), "infeasible")])
                continue
            feasible_cells += 1
            rows.append([
                label, _fmt(f), _fmt(point.rs_gain), _fmt(point.cs_gain),
                _fmt(point.tariff.connection_charge), _fmt(point.tariff.prices.mean()), "",
            ])
    print(f"pareto: {len(families)} families x {len(grid)} F points, "
          f"{feasible_cells} feasible cells")
    if feasible_cells == 0:
        raise tf.InfeasibleFamilyError("every (family, F) cell is infeasible", math.nan)

    out = _out_dir(study.config)
    manifest = build_manifest(study, anchors, {"pareto": "pareto.csv"})
    _write_table(
        out / "pareto.csv", "pareto", manifest,
        ["gains normalized by base revenue"],
        ["family", "fixed_cost_usd_per_day", "rs_gain", "cs_gain",
         "connection_charge_usd_per_day", "mean_price_usd_per_kwh", "reason"],
        rows,
    )
    _write_manifest(out, "pareto", manifest)
    print(f"wrote {out / 'pareto.csv'}")
    return 0


def cmd_sweep(args) -> int:
    study, anchors = _load_study(args)
    families = _select_families(study.config, args.families)
    grid = tuple(args.capacity_grid) if args.capacity_grid else study.config.capacity_grid_kw

    cells = wf.der_sweep(
        [family for _, family in families],
        study.model,
        study.scenario_set,
        args.mode,
        grid,
        study.config.storage_per_pv_kwh_per_kw,
        study.fixed_cost,
        anchors,
        pv_unit_kw=study.config.pv_unit_kw,
        storage_unit=ingest.storage_unit_spec(study.config),
    )
    rows = []
    feasible_cells = 0
    for k, cell in enumerate(cells):
        label = families[k % len(families)][0]  # cells are capacity-major, family-minor
        if not cell.feasible:
            rows.append([_fmt(cell.capacity_kw), label, "", "", "", "", cell.reason])
            continue
        feasible_cells += 1
        rows.append([
            _fmt(cell.capacity_kw), label, _fmt(cell.cs_gain), _fmt(cell.sw_gain),
            _fmt(cell.connection_charge), _fmt(cell.mean_price), "",
        ])
    print(f"sweep ({args.mode}): {len(grid)} capacities x {len(families)} families, "
          f"{feasible_cells} feasible cells")
    if feasible_cells == 0:
        raise tf.InfeasibleFamilyError("every sweep cell is infeasible", math.nan)

    out = _out_dir(study.config)
    manifest = build_manifest(study, anchors, {"sweep": "sweep.csv"})
    _write_table(
        out / "sweep.csv", "sweep", manifest,
        [f"mode: {args.mode}", "gains normalized by base revenue"],
        ["capacity_kw", "family", "cs_gain", "sw_gain",
         "connection_charge_usd_per_day", "mean_price_usd_per_kwh", "reason"],
        rows,
    )
    _write_manifest(out, "sweep", manifest)
    print(f"wrote {out / 'sweep.csv'}")
    return 0


def cmd_xsub(args) -> int:
    study, anchors = _load_study(args)
    families = _select_families(study.config, args.families)
    grid = tuple(args.capacity_grid) if args.capacity_grid else study.config.capacity_grid_kw

    rows = []
    feasible_cells = 0
    for label, family in families:
        cells = wf.cross_subsidy(
            family, study.model, study.scenario_set, grid, study.fixed_cost,
            pv_unit_kw=study.config.pv_unit_kw,
        )
        for cell in cells:
            if not cell.feasible:
                rows.append([label, _fmt(cell.capacity_kw), _fmt(cell.owner_count),
                             "", "", "", cell.reason])
                continue
            feasible_cells += 1
            rows.append([
                label, _fmt(cell.capacity_kw), _fmt(cell.owner_count),
                _fmt(cell.contribution_net_metering), _fmt(cell.contribution_separated),
                _fmt(cell.subsidy_norm), "",
            ])
    print(f"cross-subsidy: {len(families)} families x {len(grid)} capacities, "
          f"{feasible_cells} feasible cells")
    if feasible_cells == 0:
        raise tf.InfeasibleFamilyError("every cross-subsidy cell is infeasible", math.nan)

    out = _out_dir(study.config)
    manifest = build_manifest(study, anchors, {"xsub": "xsub.csv"})
    _write_table(
        out / "xsub.csv", "xsub", manifest,
        ["subsidy normalized by required revenue F"],
        ["family", "capacity_kw", "owner_count",
         "owner_contribution_net_metering_usd_per_day",
         "owner_contribution_separated_usd_per_day", "subsidy_norm", "reason"],
        rows,
    )
    _write_manifest(out, "xsub", manifest)
    print(f"wrote {out / 'xsub.csv'}")
    return 0


def cmd_gen_synthetic(args) -> int:
    paths = ingest.write_synthetic_dataset(
        args.out,
        seed=args.seed,
        n_days=args.days,
        horizon=args.horizon,
        correlated=(args.variant == "correlated"),
    )
    for name in ("prices", "load", "solar", "config"):
        print(f"wrote {paths[name]}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tariffkit",
        description="Scenario-based two-part retail tariff studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_study_command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="path to a YAML study file")
        p.set_defaults(func=func)
        return p

    add_study_command("validate", cmd_validate, "check config, data, and model assumptions")

    p = add_study_command("optimize", cmd_optimize, "solve one tariff family at one F")
    p.add_argument("--family", choices=tf.FAMILY_KINDS, default=tf.OPTIMAL_TWO_PART)
    p.add_argument("--mode", choices=tf.MODES, default=tf.MODE_NONE)
    p.add_argument("--F", dest="fixed_cost", type=float, default=None,
                   help="required revenue $/day (default: derived from the nominal tariff)")
    p.add_argument("--capacity-kw", type=float, default=0.0,
                   help="installed PV capacity for DER modes")
    p.add_argument("--fixed-A", dest="fixed_connection_charge", type=float, default=None,
                   help="connection charge for fixed-A families")

    p = add_study_command("pareto", cmd_pareto, "surplus trade-off across an F grid")
    p.add_argument("--families", nargs="+", default=None,
                   help="family labels (default: all configured)")
    p.add_argument("--F-grid", dest="fixed_cost_grid", nargs="+", type=float, default=None)

    p = add_study_command("sweep", cmd_sweep, "re-solve families across PV capacities")
    p.add_argument("--mode", choices=(tf.MODE_DECENTRALIZED, tf.MODE_CENTRALIZED),
                   required=True)
    p.add_argument("--families", nargs="+", default=None)
    p.add_argument("--capacity-grid", nargs="+", type=float, default=None)

    p = add_study_command("xsub", cmd_xsub, "net-metering cross-subsidy by capacity")
    p.add_argument("--families", nargs="+", default=None)
    p.add_argument("--capacity-grid", nargs="+", type=float, default=None)

    p = sub.add_parser("gen-synthetic", help="write the bundled synthetic dataset")
    p.add_argument("--out", default="synthetic", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--days", type=int, default=20)
    p.add_argument("--horizon", type=int, default=24)
    p.add_argument("--variant", choices=("correlated", "independent"), default="correlated")
    p.set_defaults(func=cmd_gen_synthetic)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except tf.InfeasibleFamilyError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except (ingest.ConfigError, ingest.DataError, tf.TariffError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
