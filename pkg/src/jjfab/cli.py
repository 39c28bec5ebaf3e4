"""Command-line front end: ``jjfab <subcommand> ...``.

Exit codes: 0 success, 1 domain/config error (one JSON line on stderr),
2 usage error. Runs that write files finish by writing ``manifest.json``
with the sha256 of every output; a stale manifest is removed first, so an
interrupted run leaves none behind.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from . import electrical as el
from . import geometry as geo
from . import variability as var
from .analysis import (
    OutlierPolicy,
    group_sigma_over_mean,
    ingest_measurements,
    ingest_qubits,
    qubit_table_stats,
    reject_outliers,
    wafer_heatmap,
)
from .barrier import calibrate_oxidation, read_calibration_csv
from .config import default_config, load_config
from .errors import ConfigError, JJFabError

MANIFEST = "manifest.json"


def _json(obj):
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _csv(rows, columns=None):
    rows = list(rows)
    columns = columns or (list(rows[0]) if rows else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in (r[c] for c in columns)])
    return buf.getvalue()


class OutputDir:
    """Collects artifacts; the manifest is written by ``close`` only."""

    def __init__(self, path):
        self.path = os.fspath(path)
        try:
            os.makedirs(self.path, exist_ok=True)
            stale = os.path.join(self.path, MANIFEST)
            if os.path.exists(stale):
                os.remove(stale)
        except OSError as exc:
            raise ConfigError(f"cannot use output directory {self.path}: {exc.strerror}") from None
        self.files = {}

    def write(self, name, text):
        data = text.encode("utf-8")
        full = os.path.join(self.path, name)
        try:
            with open(full, "wb") as fh:
                fh.write(data)
        except OSError as exc:
            raise ConfigError(f"cannot write {full}: {exc.strerror}") from None
        self.files[name] = hashlib.sha256(data).hexdigest()
        return full

    def close(self, command):
        manifest = {
            "command": command,
            "version": __version__,
            "files": [{"path": k, "sha256": v} for k, v in sorted(self.files.items())],
        }
        self.write(MANIFEST, _json(manifest))


def _config(args):
    cfg = load_config(args.config) if getattr(args, "config", None) else default_config()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _out(args, cfg):
    return OutputDir(args.out or cfg.output_dir)


def _require_seed(cfg):
    if cfg.seed is None:
        raise ConfigError("a seed is required: pass --seed or set 'seed' in the config")


def _summary_rows(summaries, extra=None):
    return [{**(extra or {}), **s.as_row()} for s in summaries]


def _write_table(out, stem, rows, fmt):
    if fmt == "json":
        return out.write(f"{stem}.json", _json(rows))
    return out.write(f"{stem}.csv", _csv(rows))


def _ensemble_heatmap(ens, design_idx=0):
    """Mean Ic per die for one design, as records for ``wafer_heatmap``."""
    cells = {}
    for d, x, y, ic, dead in zip(ens.design, ens.x_mm, ens.y_mm, ens.ic_na, ens.dead):
        if d == design_idx and not dead:
            cells.setdefault((float(x), float(y)), []).append(float(ic))
    keys = sorted(cells)
    return geo.ScalarField(
        x_mm=np.array([k[0] for k in keys]),
        y_mm=np.array([k[1] for k in keys]),
        values=np.array([sum(cells[k]) / len(cells[k]) for k in keys]),
    )


def cmd_simulate(args):
    cfg = _config(args)
    _require_seed(cfg)
    sc = cfg.scenario()
    out = _out(args, cfg)
    grouping = cfg.get("scenario", "grouping")
    ens = var.sample_ensemble(sc)
    summaries, skipped = var.summarize(ens, grouping)
    rows = _summary_rows(summaries)
    _write_table(out, "summary", rows, cfg.output_format)
    rough = {k: float(v) for k, v in sorted(ens.roughness.items())}
    report = {"seed": cfg.seed, "sample_count": sc.sample_count, "grouping": grouping,
              "roughness_nm": rough, "skipped_groups": [list(map(str, s)) for s in skipped],
              "summaries": rows}
    out.write("summary_report.json", _json(report))
    ic_field = _ensemble_heatmap(ens)
    if len(ic_field):
        out.write("ic_map.svg", wafer_heatmap(ic_field, title=f"mean Ic per die, {ens.design_names[0]}",
                                              unit="nA"))
    out.close("simulate")
    print(_json(report), end="")
    return 0


def _parse_values(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values must be comma-separated numbers, got {text!r}") from None


def cmd_sweep(args):
    cfg = _config(args)
    _require_seed(cfg)
    axis = args.axis or cfg.get("sweep", "axis")
    values = _parse_values(args.values) if args.values else cfg.get("sweep", "values")
    if not axis or not values:
        raise ConfigError("sweep needs an axis and values (--axis/--values or the [sweep] block)")
    sc = cfg.scenario()
    out = _out(args, cfg)
    results = var.sweep(sc, axis, values, cfg.get("scenario", "grouping"))
    rows = []
    for v, sums in results:
        rows.extend(_summary_rows(sums, {"axis": axis, "value": float(v)}))
    _write_table(out, "sweep_trace", rows, cfg.output_format)
    out.close("sweep")
    print(_json({"axis": axis, "points": len(values), "seed": cfg.seed}), end="")
    return 0


def _parse_bound(text):
    try:
        axis, rng = text.split("=", 1)
        lo, hi = rng.split(":", 1)
        return axis.strip(), (float(lo), float(hi))
    except ValueError:
        raise ConfigError(f"--bound must look like AXIS=LO:HI, got {text!r}") from None


def cmd_optimize(args):
    cfg = _config(args)
    _require_seed(cfg)
    bounds = dict(_parse_bound(b) for b in args.bound) if args.bound else cfg.get("optimize", "bounds")
    if not bounds:
        raise ConfigError("optimize needs bounds (--bound AXIS=LO:HI or [optimize] bounds)")
    design = args.design or cfg.get("optimize", "design")
    sc = cfg.scenario()
    out = _out(args, cfg)
    res = var.optimize(sc, bounds, design,
                       cfg.get("optimize", "points_per_axis"), cfg.get("optimize", "refinements"))
    cols = ["round", *bounds, "objective"]
    _write_table(out, "optimize_trace", [{c: r[c] for c in cols} for r in res.trace], cfg.output_format)
    best = {"best_params": res.best_params, "best_sigma_over_mean_ic": res.best_value,
            "evaluations": len(res.trace), "seed": cfg.seed}
    out.write("optimize_best.json", _json(best))
    out.close("optimize")
    print(_json(best), end="")
    return 0


def _read(path):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except FileNotFoundError:
        raise ConfigError(f"input file not found: {path}") from None


def _stats_rows(summaries):
    return [s.as_row() for s in summaries]


def cmd_analyze(args):
    if not args.measurements and not args.qubits:
        raise ConfigError("analyze needs --measurements and/or --qubits")
    report = {}
    out = OutputDir(args.out) if args.out else None
    if args.measurements:
        recs = ingest_measurements(_read(args.measurements))
        policy = OutlierPolicy(args.short_ohm, args.open_ohm, args.mad_k)
        kept, rejected, orep = reject_outliers(recs, policy)
        groups = _stats_rows(group_sigma_over_mean(kept))
        report["measurements"] = {"outliers": orep.as_dict(), "ic_by_design": groups}
        if out:
            out.write("ic_by_design.csv", _csv(groups))
            if kept:
                out.write("resistance_map.svg", wafer_heatmap(kept, "resistance_ohm",
                                                              title="resistance per die", unit="ohm"))
    if args.qubits:
        stats = qubit_table_stats(ingest_qubits(_read(args.qubits)))
        rows = [r.as_row() for q in stats.values() for r in q]
        report["qubits"] = rows
        if out:
            out.write("qubit_stats.csv", _csv(rows))
    if out:
        out.write("analysis_report.json", _json(report))
        out.close("analyze")
    print(_json(report), end="")
    return 0


def cmd_calibrate(args):
    cfg = _config(args)
    if args.what == "throw":
        throw = geo.calibrate_throw(args.nonuniformity, args.tilt_deg, cfg.source(), cfg.wafer(),
                                    args.grid_step_mm)
        result = {"throw_distance_mm": throw, "tilt_alpha_deg": args.tilt_deg,
                  "target_nonuniformity": args.nonuniformity}
    elif args.what == "linewidth":
        mask = cfg.mask()
        throw = geo.calibrate_linewidth_throw(args.reduction, args.nominal_nm, mask,
                                              cfg.get("geometry", "wafer_radius_mm"), args.tilt_deg)
        result = {"throw_distance_mm": throw, "target_reduction": args.reduction,
                  "nominal_nm": args.nominal_nm, "mask_height_nm": mask.total_height_nm}
    else:
        fit = calibrate_oxidation(read_calibration_csv(_read(args.csv)), cfg.get("oxidation", "e0_mbar_s"))
        result = {"jc_prefactor_a_per_um2": fit.jc_prefactor, "jc_exponent": fit.jc_exponent,
                  "rms_residual_log": fit.rms_residual_log}
    print(_json(result), end="")
    return 0


def cmd_junction(args):
    constants = el.PhysicalConstants(gap_delta_ueV=args.gap_ueV)
    if args.f01_ghz is not None:
        result = el.frequency_chain(args.f01_ghz, args.ec_mhz, constants, args.temperature_k)
    else:
        ic = el.ic_from_rn(args.rn_ohm, constants, args.temperature_k)
        ej = float(el.ej_ghz_from_ic(ic, constants))
        result = {"rn_ohm": args.rn_ohm, "ic_na": ic, "ej_over_h_ghz": ej,
                  "ec_over_h_mhz": args.ec_mhz, "ej_over_ec": ej * 1e3 / args.ec_mhz,
                  "f01_ghz": float(el.f01_ghz(ej, args.ec_mhz)),
                  "gap_delta_ueV": args.gap_ueV, "temperature_K": args.temperature_k}
    if result["ej_over_ec"] < el.TRANSMON_MIN_RATIO:
        result["warning"] = "EJ/EC below transmon regime"
    print(_json(result), end="")
    return 0


def cmd_report(args):
    cfg = _config(args)
    src, wafer, mask = cfg.source(), cfg.wafer(), cfg.mask()
    out = _out(args, cfg)
    step = cfg.get("geometry", "grid_step_mm")
    nominal = cfg.get("geometry", "nominal_linewidth_nm")
    thick = geo.thickness_map(src, wafer, step)
    width = geo.linewidth_map(src, wafer, nominal, mask, step)
    out.write("thickness_map.csv", thick.to_csv("relative_thickness"))
    out.write("thickness_map.svg", wafer_heatmap(thick, title="relative thickness"))
    out.write("linewidth_map.csv", width.to_csv("linewidth_nm"))
    out.write("linewidth_map.svg", wafer_heatmap(width, title=f"{nominal:g} nm line width", unit="nm"))
    summary = {
        "throw_distance_mm": src.throw_distance_mm,
        "tilt_alpha_deg": src.tilt_alpha_deg,
        "thickness_nonuniformity": geo.nonuniformity(thick),
        "linewidth_min_nm": float(width.values.min()),
        "linewidth_max_nm": float(width.values.max()),
        "linewidth_reduction": 1.0 - float(width.values.min()) / nominal,
        "grid_step_mm": step,
    }
    out.write("geometry_report.json", _json(summary))
    out.close("report")
    print(_json(summary), end="")
    return 0


def _positive(kind):
    def parse(text):
        v = kind(text)
        if not (v > 0 and math.isfinite(v)):
            raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
        return v
    return parse


def build_parser():
    p = argparse.ArgumentParser(prog="jjfab", description="Josephson-junction fabrication variability toolkit")
    p.add_argument("--version", action="version", version=f"jjfab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def run_cmd(name, help_):
        s = sub.add_parser(name, help=help_, description=help_)
        s.add_argument("--config", help="TOML run configuration")
        s.add_argument("--seed", type=int, help="RNG seed (overrides the config)")
        s.add_argument("--out", help="output directory (overrides output.dir)")
        return s

    run_cmd("simulate", "Monte Carlo Ic / f01 spread for a scenario").set_defaults(func=cmd_simulate)

    s = run_cmd("sweep", "one-parameter sweep; every point reuses the seed")
    s.add_argument("--axis", help=f"one of: {', '.join(sorted(var.SWEEP_AXES))}")
    s.add_argument("--values", help="comma-separated values")
    s.set_defaults(func=cmd_sweep)

    s = run_cmd("optimize", "bounded grid search minimising sigma/<Ic>")
    s.add_argument("--bound", action="append", metavar="AXIS=LO:HI", help="free parameter (repeatable)")
    s.add_argument("--design", help="design name such as 150x200 (default: first design)")
    s.set_defaults(func=cmd_optimize)

    s = sub.add_parser("analyze", help="statistics of measured probe / qubit tables")
    s.add_argument("--measurements", help="probe-station CSV")
    s.add_argument("--qubits", help="qubit table CSV")
    s.add_argument("--out", help="write report files here")
    s.add_argument("--short-ohm", type=_positive(float), default=100.0)
    s.add_argument("--open-ohm", type=_positive(float), default=1e6)
    s.add_argument("--mad-k", type=_positive(float), default=5.0)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("calibrate", help="fit geometry or oxidation parameters")
    csub = s.add_subparsers(dest="what", required=True, metavar="WHAT")
    c = csub.add_parser("throw", help="throw distance for a thickness nonuniformity")
    c.add_argument("--nonuniformity", type=float, required=True, help="target, e.g. 0.14")
    c.add_argument("--tilt-deg", type=float, required=True)
    c.add_argument("--grid-step-mm", type=_positive(float), default=1.0)
    c = csub.add_parser("linewidth", help="throw distance for an edge linewidth reduction")
    c.add_argument("--reduction", type=float, required=True, help="target fraction, e.g. 0.18")
    c.add_argument("--nominal-nm", type=_positive(float), default=100.0)
    c.add_argument("--tilt-deg", type=float, default=0.0)
    c = csub.add_parser("oxidation", help="jc power-law fit from exposure_mbar_s,jc_a_per_um2 CSV")
    c.add_argument("--csv", required=True)
    for c in csub.choices.values():
        c.add_argument("--config", help="TOML run configuration")
    s.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("junction", help="single-junction electrics query")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--f01-ghz", type=_positive(float), help="target frequency -> required Rn")
    g.add_argument("--rn-ohm", type=_positive(float), help="resistance -> Ic, EJ, f01")
    s.add_argument("--ec-mhz", type=_positive(float), default=250.0)
    s.add_argument("--gap-ueV", type=_positive(float), default=180.0)
    s.add_argument("--temperature-k", type=float, default=0.0)
    s.set_defaults(func=cmd_junction)

    s = sub.add_parser("report", help="thickness and linewidth wafer maps (CSV + SVG)")
    s.add_argument("--config", help="TOML run configuration")
    s.add_argument("--out", help="output directory (overrides output.dir)")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (JJFabError, ValueError, OSError) as exc:
        msg = " ".join(str(exc).split())
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": msg}) + "\n")
        return 1


run = main

if __name__ == "__main__":
    sys.exit(main())
