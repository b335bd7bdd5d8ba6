"""Calibration search: fit the free model parameters to reported observables.

Every target is matched by a deterministic bracketed or fixed-grid search
over its natural knob:

  a0_loss_pct    -> board lateral resistance (bisection; loss is monotone)
  min_die_area   -> the binding level's ampacity (bisection on a step function)
  utilizations   -> per-level ampacities (direct back-solve)
  a1_spread      -> radial demand weight (fixed-grid scan)
  a2_spread      -> radial demand weight (fixed-grid scan)

The per-VR current spread is invariant to the sheet resistance (equal-voltage
sources), so spread targets calibrate the demand profile instead; the sheet
resistance remains the knob for the horizontal loss level itself.
"""

from __future__ import annotations

import math
from dataclasses import replace

from . import architecture as arch
from . import interconnect as ic
from .datasets import Calibration, Datasets
from .errors import TargetUnreachable

_SPREAD_WEIGHT_GRID = [round(0.1 * k, 1) for k in range(0, 41)]   # 0.0 .. 4.0
_UNREACHABLE_RESIDUAL = 0.30


def _with_calibration(datasets: Datasets, calibration: Calibration) -> Datasets:
    return replace(datasets, calibration=calibration)


def _a0_loss_pct(datasets: Datasets) -> float:
    spec = arch.build_architecture("A0", None, datasets)
    return arch.evaluate(spec, datasets).total_loss_pct


def _spread(datasets: Datasets, arch_name: str, topology: str) -> tuple[float, float]:
    spec = arch.build_architecture(arch_name, topology, datasets)
    breakdown = arch.evaluate(spec, datasets)
    key = sorted(breakdown.per_vr_currents_a)[-1]   # POL stage
    currents = breakdown.per_vr_currents_a[key]
    return min(currents), max(currents)


def calibrate_a0_loss(datasets: Datasets, target_pct: float) -> tuple[Calibration, float]:
    cal = datasets.calibration
    lo, hi = 0.0, 0.005
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        trial = replace(cal, pcb_lateral_resistance_ohm=mid)
        if _a0_loss_pct(_with_calibration(datasets, trial)) < target_pct:
            lo = mid
        else:
            hi = mid
    best = replace(cal, pcb_lateral_resistance_ohm=0.5 * (lo + hi))
    achieved = _a0_loss_pct(_with_calibration(datasets, best))
    residual = abs(achieved - target_pct) / target_pct
    return best, residual


def calibrate_min_die_area(datasets: Datasets, target_mm2: float) -> tuple[Calibration, float]:
    cal = datasets.calibration

    def area_for(ampacity: float) -> float:
        trial = replace(cal, ampacity_a={**cal.ampacity_a, "c4": ampacity})
        ds = _with_calibration(datasets, trial)
        return arch.min_die_area_for_current(
            1000.0, trial.policy(), ds
        ).area_mm2

    lo, hi = 0.01, 0.2   # area decreases as ampacity grows
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if area_for(mid) > target_mm2:
            lo = mid
        else:
            hi = mid
    candidates = [lo, hi, 0.5 * (lo + hi)]
    best_amp, best_res = None, math.inf
    for amp in candidates:
        res = abs(area_for(amp) - target_mm2) / target_mm2
        if res < best_res:
            best_amp, best_res = amp, res
    best = replace(cal, ampacity_a={**cal.ampacity_a, "c4": best_amp})
    return best, best_res


def calibrate_utilizations(datasets: Datasets,
                           targets: dict[str, float]) -> tuple[Calibration, float]:
    """Back-solve ampacities so nameplate utilization hits each target fraction."""
    cal = datasets.calibration
    spec = arch.build_architecture("A1", "DSCH", datasets)
    domain_by_level = {a.level_name: a.domain_voltage_v for a in spec.stack}
    amps = dict(cal.ampacity_a)
    worst = 0.0
    for level_name, target in targets.items():
        if level_name not in domain_by_level:
            raise TargetUnreachable(f"level '{level_name}' is not on the vertical path")
        level = datasets.levels[level_name]
        current = spec.total_power_w / domain_by_level[level_name]
        count = ic.connection_count(level)
        per_net = max(1, math.floor(target * count / 2.0))
        # Slightly under I/N so the ceil lands exactly on per_net.
        amps[level_name] = current / (per_net - 0.25)
        achieved = 2.0 * per_net / count
        worst = max(worst, abs(achieved - target) / target)
    return replace(cal, ampacity_a=amps), worst


def calibrate_spread(datasets: Datasets, arch_name: str, topology: str,
                     target_lo: float, target_hi: float) -> tuple[Calibration, float]:
    cal = datasets.calibration
    best_w, best_res = None, math.inf
    for w in _SPREAD_WEIGHT_GRID:
        trial = replace(cal, demand_weight=w)
        lo, hi = _spread(_with_calibration(datasets, trial), arch_name, topology)
        res = 0.5 * (abs(lo - target_lo) / target_lo + abs(hi - target_hi) / target_hi)
        if res < best_res - 1e-12:
            best_w, best_res = w, res
    if best_res > _UNREACHABLE_RESIDUAL:
        raise TargetUnreachable(
            f"{arch_name} spread target [{target_lo:g}, {target_hi:g}] A unreachable: "
            f"best residual {best_res:.3f} at demand_weight {best_w:g}",
            best_value=best_w, best_residual=best_res,
        )
    return replace(cal, demand_weight=best_w), best_res


def run_calibration(datasets: Datasets, targets: dict) -> tuple[Calibration, dict[str, float]]:
    """Apply every requested target in a fixed order; later knobs win on overlap.

    With no targets the current calibration is returned unchanged (identity).
    """
    residuals: dict[str, float] = {}
    cal = datasets.calibration
    ds = datasets

    if "utilizations" in targets:
        cal, res = calibrate_utilizations(ds, targets["utilizations"])
        ds = _with_calibration(ds, cal)
        residuals["utilizations"] = res
    if "min_die_area" in targets:
        cal, res = calibrate_min_die_area(ds, float(targets["min_die_area"]))
        ds = _with_calibration(ds, cal)
        residuals["min_die_area"] = res
    if "a0_loss_pct" in targets:
        cal, res = calibrate_a0_loss(ds, float(targets["a0_loss_pct"]))
        ds = _with_calibration(ds, cal)
        residuals["a0_loss_pct"] = res
    if "a1_spread" in targets:
        lo, hi = targets["a1_spread"]
        cal, res = calibrate_spread(ds, "A1", "DSCH", float(lo), float(hi))
        ds = _with_calibration(ds, cal)
        residuals["a1_spread"] = res
    if "a2_spread" in targets:
        lo, hi = targets["a2_spread"]
        cal, res = calibrate_spread(ds, "A2", "DSCH", float(lo), float(hi))
        ds = _with_calibration(ds, cal)
        residuals["a2_spread"] = res
    return cal, residuals
