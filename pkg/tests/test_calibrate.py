"""Calibration search behavior beyond the acceptance-gated paths."""

from dataclasses import replace

import pytest

import pdnx
from pdnx.architecture import build_architecture, evaluate, utilization_report
from pdnx.calibrate import (calibrate_a0_loss, calibrate_min_die_area,
                            calibrate_utilizations, run_calibration)
from pdnx.datasets import load_datasets
from pdnx.errors import TargetUnreachable


@pytest.fixture(scope="module")
def datasets():
    return load_datasets()


def test_identity_when_no_targets(datasets):
    calibration, residuals = run_calibration(datasets, {})
    assert calibration == datasets.calibration
    assert residuals == {}


def test_a0_target_monotone_bisection(datasets):
    calibration, residual = calibrate_a0_loss(datasets, 45.0)
    assert residual < 0.01
    ds = replace(datasets, calibration=calibration)
    b = evaluate(build_architecture("A0", None, ds), ds)
    assert b.total_loss_pct == pytest.approx(45.0, abs=0.5)


def test_min_die_area_target(datasets):
    calibration, residual = calibrate_min_die_area(datasets, 1200.0)
    assert residual < 0.05
    ds = replace(datasets, calibration=calibration)
    result = pdnx.min_die_area_for_current(1000.0, calibration.policy(), ds)
    assert result.area_mm2 == pytest.approx(1200.0, rel=0.05)


def test_utilization_targets_back_solve(datasets):
    targets = {"bga": 0.01, "c4": 0.02, "tsv": 0.10, "adv_pad": 0.19}
    calibration, residual = calibrate_utilizations(datasets, targets)
    assert residual < 0.05
    ds = replace(datasets, calibration=calibration)
    entries = {e.level: e for e in utilization_report(
        build_architecture("A1", "DSCH", ds), ds)}
    for level, target in targets.items():
        assert entries[level].utilization_fraction == pytest.approx(target, rel=0.05)


def test_published_a2_range_unreachable(datasets):
    # The 10-to-93 A under-die range belongs to the 100 A-class topology;
    # the 30 A-class bank cannot span it, so the search must say so and
    # carry its best residual rather than pretending.
    with pytest.raises(TargetUnreachable) as err:
        run_calibration(datasets, {"a2_spread": (10.0, 93.0)})
    assert err.value.best_residual is not None
    assert err.value.best_residual > 0.30


def test_a1_spread_target_reachable(datasets):
    calibration, residuals = run_calibration(datasets, {"a1_spread": (16.0, 27.0)})
    assert residuals["a1_spread"] <= 0.30
    assert 0.0 <= calibration.demand_weight <= 4.0
