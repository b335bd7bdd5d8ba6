"""Built-in datasets and field-wise override merging.

Three datasets ship with the package: "table1" (vertical interconnect
levels), "table2" (converter topologies), and "calibration-default" (fitted
model parameters). A user override file with the same shape replaces fields
one by one; PDNX_DATA_DIR points the loader at an alternative dataset
directory.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .converter import ConverterTopology
from .errors import ConfigError
from .interconnect import InterconnectLevel, InterconnectStack, UtilizationPolicy

BUILTIN_NAMES = ("table1", "table2", "calibration-default")


@dataclass(frozen=True)
class Calibration:
    """Fitted model parameters shipped alongside the raw datasheets."""

    resistivity_ohm_m: dict[str, float]
    ampacity_a: dict[str, float]
    max_usage_fraction: dict[str, float]
    sheet_resistance_ohm_sq: float
    droop_share_resistance_scale: float
    die_grid_multiplier: float
    power_die_multiplier: float
    pcb_lateral_resistance_ohm: float
    demand_weight: float
    grid_resolution: int
    derating: float
    dpmih_efficiency_variant: str     # "nominal" | "text"
    die_attach_level: str             # "adv_pad" | "u_bump"
    interposer_margin_mm: float
    idle_shutdown: bool
    notes: tuple[str, ...] = ()

    def policy(self) -> UtilizationPolicy:
        return UtilizationPolicy(dict(self.max_usage_fraction), dict(self.ampacity_a))


@dataclass(frozen=True)
class VrSiteCounts:
    periphery: int
    below_die: int


@dataclass
class Datasets:
    """Everything the evaluators need, assembled from the three datasets."""

    levels: dict[str, InterconnectLevel]
    level_order: tuple[str, ...]                  # PCB side -> die side
    topologies: dict[str, ConverterTopology]
    vr_site_counts: dict[str, VrSiteCounts]
    calibration: Calibration
    reference_die_area_mm2: float
    provenance: dict[str, str] = field(default_factory=dict)
    overridden_fields: tuple[str, ...] = ()

    def stack_levels(self, include_die_attach: str | None = None) -> tuple[str, ...]:
        """Level names on the vertical power path, PCB side to die side.

        One of the two die-attach variants is on the path at a time; the
        calibration selects which (the other stays available in the dataset).
        """
        attach = include_die_attach or self.calibration.die_attach_level
        if attach not in ("adv_pad", "u_bump"):
            raise ConfigError(f"unknown die attach level '{attach}'")
        return ("bga", "c4", "tsv", attach)

    def interconnect_stack(self) -> InterconnectStack:
        return InterconnectStack(tuple(self.levels[n] for n in self.stack_levels()))


def _builtin_dir() -> Path:
    env = os.environ.get("PDNX_DATA_DIR")
    if env:
        p = Path(env)
        if not p.is_dir():
            raise ConfigError(f"PDNX_DATA_DIR is not a directory: {env}")
        return p
    return Path(str(resources.files("pdnx").joinpath("data")))


def _read_json(path: Path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"unknown dataset file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def load_raw_dataset(name: str) -> dict:
    if name not in BUILTIN_NAMES:
        raise ConfigError(f"unknown dataset '{name}' (built-ins: {', '.join(BUILTIN_NAMES)})")
    return _read_json(_builtin_dir() / f"{name}.json")


def _merge(base, override, path: str, touched: list[str]):
    """Field-wise merge: override leaves win, dicts recurse, lists replace."""
    if isinstance(base, dict) and isinstance(override, dict):
        out = dict(base)
        for key, value in override.items():
            sub = f"{path}.{key}" if path else key
            if key in base:
                out[key] = _merge(base[key], value, sub, touched)
            else:
                out[key] = value
                touched.append(sub)
        return out
    touched.append(path)
    return override


def load_datasets(overrides: dict | None = None) -> Datasets:
    """Assemble the working dataset bundle, applying optional overrides.

    The override document groups fields by dataset name, e.g.
    {"calibration-default": {"sheet_resistance_ohm_sq": 1e-3}}.
    """
    raw = {name: load_raw_dataset(name) for name in BUILTIN_NAMES}
    touched: list[str] = []
    if overrides:
        for name, chunk in overrides.items():
            if name not in raw:
                raise ConfigError(
                    f"unknown dataset '{name}' (built-ins: {', '.join(BUILTIN_NAMES)})"
                )
            raw[name] = _merge(raw[name], chunk, name, touched)
    return _assemble(raw, tuple(touched))


def _assemble(raw: dict[str, dict], touched: tuple[str, ...]) -> Datasets:
    cal_doc = raw["calibration-default"]
    try:
        calibration = Calibration(
            resistivity_ohm_m=dict(cal_doc["resistivity_ohm_m"]),
            ampacity_a=dict(cal_doc["ampacity_a"]),
            max_usage_fraction=dict(cal_doc["max_usage_fraction"]),
            sheet_resistance_ohm_sq=float(cal_doc["sheet_resistance_ohm_sq"]),
            droop_share_resistance_scale=float(cal_doc["droop_share_resistance_scale"]),
            die_grid_multiplier=float(cal_doc["die_grid_multiplier"]),
            power_die_multiplier=float(cal_doc["power_die_multiplier"]),
            pcb_lateral_resistance_ohm=float(cal_doc["pcb_lateral_resistance_ohm"]),
            demand_weight=float(cal_doc["demand_weight"]),
            grid_resolution=int(cal_doc["grid_resolution"]),
            derating=float(cal_doc["derating"]),
            dpmih_efficiency_variant=str(cal_doc["dpmih_efficiency_variant"]),
            die_attach_level=str(cal_doc["die_attach_level"]),
            interposer_margin_mm=float(cal_doc["interposer_margin_mm"]),
            idle_shutdown=bool(cal_doc["idle_shutdown"]),
            notes=tuple(cal_doc.get("notes", ())),
        )
    except KeyError as exc:
        raise ConfigError(f"calibration-default: missing field {exc}") from None

    levels: dict[str, InterconnectLevel] = {}
    order: list[str] = []
    for row in raw["table1"]["levels"]:
        material = row["material"]
        if material not in calibration.resistivity_ohm_m:
            raise ConfigError(f"table1 level '{row['name']}': no resistivity for '{material}'")
        lv = InterconnectLevel(
            name=row["name"],
            platform_area_mm2=float(row["platform_area_mm2"]),
            material=material,
            resistivity_ohm_m=float(row.get("resistivity_ohm_m")
                                    or calibration.resistivity_ohm_m[material]),
            cross_area_um2=float(row["cross_area_um2"]),
            height_um=float(row["height_um"]),
            pitch_um=float(row["pitch_um"]),
            diameter_um=None if row.get("diameter_um") is None else float(row["diameter_um"]),
            area_ratio_to_die=float(row["area_ratio_to_die"]),
        )
        levels[lv.name] = lv
        order.append(lv.name)

    topologies: dict[str, ConverterTopology] = {}
    counts: dict[str, VrSiteCounts] = {}
    for row in raw["table2"]["topologies"]:
        eta = float(row["eta_peak"])
        if (row["name"] == "DPMIH"
                and calibration.dpmih_efficiency_variant == "text"
                and row.get("alt_eta_peak_text") is not None):
            eta = float(row["alt_eta_peak_text"])
        topo = ConverterTopology(
            name=row["name"],
            v_in_v=float(row["v_in_v"]),
            v_out_v=float(row["v_out_v"]),
            i_max_a=float(row["i_max_a"]),
            eta_peak=eta,
            i_at_peak_a=float(row["i_at_peak_a"]),
            n_switches=int(row["n_switches"]),
            switch_density_per_mm2=float(row["switch_density_per_mm2"]),
            n_inductors=int(row.get("n_inductors", 0)),
            total_inductance_uh=float(row.get("total_inductance_uh", 0.0)),
            n_capacitors=int(row.get("n_capacitors", 0)),
            total_capacitance_uf=float(row.get("total_capacitance_uf", 0.0)),
        )
        topologies[topo.name] = topo
        counts[topo.name] = VrSiteCounts(
            periphery=int(row["vr_sites_periphery"]),
            below_die=int(row["vr_sites_below_die"]),
        )

    return Datasets(
        levels=levels,
        level_order=tuple(order),
        topologies=topologies,
        vr_site_counts=counts,
        calibration=calibration,
        reference_die_area_mm2=float(raw["table1"].get("reference_die_area_mm2", 500.0)),
        provenance={name: raw[name].get("provenance", "") for name in BUILTIN_NAMES},
        overridden_fields=touched,
    )


def calibration_to_document(calibration: Calibration, provenance: str,
                            residuals: dict[str, float] | None = None) -> dict:
    """Serialize a calibration back to the dataset JSON shape."""
    doc = {
        "provenance": provenance,
        "resistivity_ohm_m": dict(calibration.resistivity_ohm_m),
        "ampacity_a": dict(calibration.ampacity_a),
        "max_usage_fraction": dict(calibration.max_usage_fraction),
        "sheet_resistance_ohm_sq": calibration.sheet_resistance_ohm_sq,
        "droop_share_resistance_scale": calibration.droop_share_resistance_scale,
        "die_grid_multiplier": calibration.die_grid_multiplier,
        "power_die_multiplier": calibration.power_die_multiplier,
        "pcb_lateral_resistance_ohm": calibration.pcb_lateral_resistance_ohm,
        "demand_weight": calibration.demand_weight,
        "grid_resolution": calibration.grid_resolution,
        "derating": calibration.derating,
        "dpmih_efficiency_variant": calibration.dpmih_efficiency_variant,
        "die_attach_level": calibration.die_attach_level,
        "interposer_margin_mm": calibration.interposer_margin_mm,
        "idle_shutdown": calibration.idle_shutdown,
        "notes": list(calibration.notes),
    }
    if residuals is not None:
        doc["residuals"] = dict(residuals)
    return doc
