"""Batch command-line front end.

    pdnx datasets   [--config FILE]
    pdnx evaluate    --config FILE [--out DIR] [--format json,csv,txt] [--strict] [--stamp]
    pdnx compare     --config FILE [...]
    pdnx sweep       --config FILE --param NAME --values LIST [...]
    pdnx calibrate  [--config FILE] --target NAME=VALUE [...]
    pdnx feasibility --config FILE [...]

Exit codes: 0 success, 2 config or usage error, 3 feasibility failure in
strict mode, 4 numerical failure. All outputs are deterministic; text
reports embed a timestamp only under --stamp.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import architecture as arch
from . import reporting as rpt
from .calibrate import run_calibration
from .config import RunConfig, load_config
from .datasets import BUILTIN_NAMES, calibration_to_document, load_datasets, load_raw_dataset
from .errors import (ConfigError, NoConvergence, PdnxError, RatingViolation,
                     SingularSystem, TargetUnreachable, Unsatisfiable)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FEASIBILITY = 3
EXIT_NUMERICAL = 4

# Calibration knobs a sweep may vary, mapped to their calibration field.
SWEEP_PARAMETERS = {
    "sheet_resistance": "sheet_resistance_ohm_sq",
    "die_grid_multiplier": "die_grid_multiplier",
    "power_die_multiplier": "power_die_multiplier",
    "pcb_lateral_resistance": "pcb_lateral_resistance_ohm",
    "demand_weight": "demand_weight",
}
# Plus run-level knobs handled specially.
SWEEP_RUN_PARAMETERS = ("die_area", "total_power")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdnx",
        description="Board-to-die power delivery design space exploration",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="run configuration (JSON or dotted key=value)")
        p.add_argument("--out", help="output directory (default from config)")
        p.add_argument("--format", help="comma list of json,csv,txt")
        p.add_argument("--strict", action="store_true",
                       help="treat feasibility failures as errors (exit 3)")
        p.add_argument("--stamp", action="store_true",
                       help="embed a timestamp in text reports")

    common(sub.add_parser("datasets", help="list built-in datasets and overrides"))
    common(sub.add_parser("evaluate", help="evaluate one architecture + converter"))
    common(sub.add_parser("compare", help="evaluate every architecture x converter cell"))
    p_sweep = sub.add_parser("sweep", help="evaluate along one numeric knob")
    common(p_sweep)
    p_sweep.add_argument("--param", required=True,
                         help=f"one of: {', '.join([*SWEEP_PARAMETERS, *SWEEP_RUN_PARAMETERS])}")
    p_sweep.add_argument("--values", required=True,
                         help="comma list (1,2,3) or range start:stop:step")
    p_cal = sub.add_parser("calibrate", help="fit calibration knobs to targets")
    common(p_cal)
    p_cal.add_argument("--target", action="append", default=[],
                       metavar="NAME=VALUE",
                       help="a0_loss_pct=40 | a1_spread=16:27 | a2_spread=10:93 | "
                            "min_die_area=1200 | utilizations=bga:0.01,c4:0.02,...")
    common(sub.add_parser("feasibility", help="usage caps and minimum die area"))
    return parser


def _load(args) -> tuple[RunConfig, "object"]:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.out:
        cfg.out_dir = args.out
    if args.format:
        fmts = tuple(f.strip() for f in args.format.split(",") if f.strip())
        bad = sorted(set(fmts) - {"json", "csv", "txt"})
        if bad:
            raise ConfigError(f"unknown format(s): {', '.join(bad)}")
        cfg.formats = fmts
    if args.strict:
        cfg.strict = True
    datasets = load_datasets(cfg.dataset_overrides)
    for name in cfg.architectures:
        if name not in arch.ARCHITECTURE_NAMES:
            raise ConfigError(f"unknown architecture '{name}'")
    for name in cfg.topologies:
        if name not in datasets.topologies:
            raise ConfigError(f"unknown converter topology '{name}'")
    return cfg, datasets


def _emit(cfg: RunConfig, stem: str, json_doc, csv_text: str | None,
          txt_text: str | None) -> list[str]:
    written = []
    if "json" in cfg.formats and json_doc is not None:
        path = os.path.join(cfg.out_dir, f"{stem}.json")
        rpt.write_atomic(path, rpt.dump_json(json_doc))
        written.append(path)
    if "csv" in cfg.formats and csv_text is not None:
        path = os.path.join(cfg.out_dir, f"{stem}.csv")
        rpt.write_atomic(path, csv_text)
        written.append(path)
    if "txt" in cfg.formats and txt_text is not None:
        path = os.path.join(cfg.out_dir, f"{stem}.txt")
        rpt.write_atomic(path, txt_text)
        written.append(path)
    return written


def cmd_datasets(args) -> int:
    cfg, datasets = _load(args)
    for name in BUILTIN_NAMES:
        raw = load_raw_dataset(name)
        print(f"{name}: {raw.get('provenance', '')}")
    if datasets.overridden_fields:
        print("overridden fields:")
        for field_name in datasets.overridden_fields:
            print(f"  {field_name}")
    else:
        print("no user overrides active")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg, datasets = _load(args)
    arch_name = cfg.architectures[0]
    topo_name = cfg.topologies[0]
    spec = arch.build_architecture(
        arch_name, None if arch_name == "A0" else topo_name, datasets,
        die_area_mm2=cfg.die_area_mm2, total_power_w=cfg.total_power_w,
        pol_voltage_v=cfg.pol_voltage_v,
    )
    try:
        breakdown = arch.evaluate(spec, datasets, strict=False)
    except PdnxError as exc:
        marker = {"architecture": arch_name, "topology": topo_name,
                  "status": "not_reported", "reason": str(exc)}
        _emit(cfg, "breakdown", marker,
              f"architecture,topology,status,reason\n{arch_name},{topo_name},"
              f"not_reported,\"{exc}\"\n",
              f"{arch_name} + {topo_name}: not reported ({exc})\n")
        return EXIT_FEASIBILITY if cfg.strict else EXIT_OK

    rating_fail = any(f.check == "converter_rating" and f.status == "fail"
                      for f in breakdown.feasibility)
    if rating_fail:
        reason = next(f.detail for f in breakdown.feasibility
                      if f.check == "converter_rating" and f.status == "fail")
        marker = {"architecture": arch_name, "topology": topo_name,
                  "status": "not_reported", "reason": reason}
        _emit(cfg, "breakdown", marker,
              f"architecture,topology,status,reason\n{arch_name},{topo_name},"
              f"not_reported,\"{reason}\"\n",
              f"{arch_name} + {topo_name}: not reported ({reason})\n")
        print(f"{arch_name} + {topo_name}: not reported ({reason})")
        return EXIT_FEASIBILITY if cfg.strict else EXIT_OK

    files = _emit(cfg, "breakdown", rpt.breakdown_to_dict(breakdown),
                  rpt.breakdown_to_csv(breakdown),
                  rpt.breakdown_to_text(breakdown, stamp=args.stamp))
    print(f"{arch_name} + {breakdown.topology}: total loss "
          f"{breakdown.total_loss_w:.1f} W ({breakdown.total_loss_pct:.1f}% of budget)")
    for path in files:
        print(f"wrote {path}")
    if cfg.strict and breakdown.worst_status() == "fail":
        return EXIT_FEASIBILITY
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg, datasets = _load(args)
    table = arch.compare(
        cfg.architectures, cfg.topologies, datasets,
        die_area_mm2=cfg.die_area_mm2, total_power_w=cfg.total_power_w,
        pol_voltage_v=cfg.pol_voltage_v,
    )
    files = _emit(cfg, "comparison", rpt.table_to_dict(table),
                  rpt.table_to_csv(table), rpt.table_to_text(table, stamp=args.stamp))
    print(rpt.table_to_text(table), end="")
    for path in files:
        print(f"wrote {path}")
    if cfg.strict and any(c.status != "ok" for c in table.cells):
        return EXIT_FEASIBILITY
    return EXIT_OK


def _parse_values(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"bad range '{text}' (want start:stop[:step])")
        start, stop = float(parts[0]), float(parts[1])
        step = float(parts[2]) if len(parts) == 3 else (stop - start) / 10.0
        if step <= 0:
            raise ConfigError("range step must be > 0")
        out = []
        v = start
        while v <= stop + 1e-12:
            out.append(round(v, 12))
            v += step
        return out
    return [float(p) for p in text.split(",") if p.strip()]


def cmd_sweep(args) -> int:
    cfg, datasets = _load(args)
    param = args.param
    if param not in SWEEP_PARAMETERS and param not in SWEEP_RUN_PARAMETERS:
        raise ConfigError(
            f"unknown sweep parameter '{param}' "
            f"(known: {', '.join([*SWEEP_PARAMETERS, *SWEEP_RUN_PARAMETERS])})"
        )
    values = _parse_values(args.values)
    arch_name = cfg.architectures[0]
    topo_name = cfg.topologies[0]

    header = (f"{param},architecture,topology,status,total_loss_w,total_loss_pct,"
              "horizontal_loss_w,converter_loss_w,vertical_loss_w,pcb_lateral_loss_w,"
              "feasibility")
    lines = [header]
    for value in values:
        ds = datasets
        die_area = cfg.die_area_mm2
        total_power = cfg.total_power_w
        if param in SWEEP_PARAMETERS:
            cal = replace(ds.calibration, **{SWEEP_PARAMETERS[param]: value})
            ds = replace(ds, calibration=cal)
        elif param == "die_area":
            die_area = value
        elif param == "total_power":
            total_power = value
        try:
            spec = arch.build_architecture(
                arch_name, None if arch_name == "A0" else topo_name, ds,
                die_area_mm2=die_area, total_power_w=total_power,
                pol_voltage_v=cfg.pol_voltage_v,
            )
            b = arch.evaluate(spec, ds, strict=False)
            lines.append(
                f"{value!r},{arch_name},{b.topology},ok,{b.total_loss_w!r},"
                f"{b.total_loss_pct!r},{sum(b.horizontal_losses_w.values())!r},"
                f"{sum(b.converter_losses_w.values())!r},"
                f"{sum(b.vertical_losses_w.values())!r},{b.pcb_lateral_loss_w!r},"
                f"{b.worst_status()}"
            )
        except PdnxError as exc:
            lines.append(f"{value!r},{arch_name},{topo_name},error,,,,,,,\"{exc}\"")
    csv_text = "\n".join(lines) + "\n"
    path = os.path.join(cfg.out_dir, f"sweep_{param}.csv")
    rpt.write_atomic(path, csv_text)
    print(f"wrote {path} ({len(values)} samples)")
    return EXIT_OK


def _parse_targets(pairs: list[str]) -> dict:
    targets: dict = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"bad target '{pair}' (want NAME=VALUE)")
        name, _, value = pair.partition("=")
        name = name.strip()
        value = value.strip()
        if name in ("a0_loss_pct", "min_die_area"):
            targets[name] = float(value)
        elif name in ("a1_spread", "a2_spread"):
            lo, _, hi = value.partition(":")
            targets[name] = (float(lo), float(hi))
        elif name == "utilizations":
            entries = {}
            for chunk in value.split(","):
                level, _, frac = chunk.partition(":")
                entries[level.strip()] = float(frac)
            targets[name] = entries
        else:
            raise ConfigError(
                f"unknown calibration target '{name}' (known: a0_loss_pct, "
                "a1_spread, a2_spread, utilizations, min_die_area)"
            )
    return targets


def cmd_calibrate(args) -> int:
    cfg, datasets = _load(args)
    targets = _parse_targets(args.target)
    calibration, residuals = run_calibration(datasets, targets)
    doc = calibration_to_document(
        calibration,
        provenance="user calibration fitted by 'pdnx calibrate'"
        if targets else "identity copy of the active calibration",
        residuals=residuals,
    )
    path = os.path.join(cfg.out_dir, "calibration-user.json")
    rpt.write_atomic(path, rpt.dump_json(doc))
    print(f"wrote {path}")
    for name, res in sorted(residuals.items()):
        print(f"  {name}: relative residual {res:.4f}")
    return EXIT_OK


def cmd_feasibility(args) -> int:
    cfg, datasets = _load(args)
    arch_name = cfg.architectures[0]
    topo_name = cfg.topologies[0]
    spec = arch.build_architecture(
        arch_name, None if arch_name == "A0" else topo_name, datasets,
        die_area_mm2=cfg.die_area_mm2, total_power_w=cfg.total_power_w,
        pol_voltage_v=cfg.pol_voltage_v,
    )
    entries = arch.utilization_report(spec, datasets)
    demand = cfg.total_power_w / cfg.pol_voltage_v
    try:
        min_area = arch.min_die_area_for_current(
            demand, datasets.calibration.policy(), datasets)
        area_doc = {
            "demand_a": demand,
            "min_die_area_mm2": min_area.area_mm2,
            "power_density_a_mm2": min_area.density_a_mm2,
            "binding_level": min_area.binding_level,
        }
    except Unsatisfiable as exc:
        area_doc = {"demand_a": demand, "error": str(exc)}

    doc = {
        "architecture": arch_name,
        "utilization": rpt.utilization_to_dict(entries),
        "reference_min_die_area": area_doc,
    }
    txt_lines = [f"vertical-path utilization for {arch_name} "
                 f"({cfg.total_power_w:g} W at {cfg.pol_voltage_v:g} V POL):"]
    for e in entries:
        txt_lines.append(
            f"  [{e.status:>4}] {e.level} at {e.domain_voltage_v:g} V / "
            f"{e.current_a:.1f} A: {e.total_used} of {e.available} "
            f"({e.utilization_fraction:.2%} vs cap {e.cap:.0%})"
        )
    if "min_die_area_mm2" in area_doc:
        txt_lines.append(
            f"board-level delivery of {demand:g} A needs at least "
            f"{area_doc['min_die_area_mm2']:.0f} mm2 of die "
            f"({area_doc['power_density_a_mm2']:.2f} A/mm2, "
            f"binding level {area_doc['binding_level']})"
        )
    else:
        txt_lines.append(str(area_doc.get("error", "")))
    txt = "\n".join(txt_lines) + "\n"
    _emit(cfg, "feasibility", doc, rpt.utilization_to_csv(entries), txt)
    print(txt, end="")
    if cfg.strict and any(e.status == "fail" for e in entries):
        return EXIT_FEASIBILITY
    return EXIT_OK


_COMMANDS = {
    "datasets": cmd_datasets,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "calibrate": cmd_calibrate,
    "feasibility": cmd_feasibility,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RatingViolation as exc:
        print(f"feasibility failure: {exc}", file=sys.stderr)
        return EXIT_FEASIBILITY
    except (TargetUnreachable, NoConvergence, SingularSystem, Unsatisfiable) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PdnxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
