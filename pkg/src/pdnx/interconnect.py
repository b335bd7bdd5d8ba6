"""Vertical interconnect model: per-level connection counts, resistance, and loss.

Each packaging level (BGA field, C4 bumps, TSVs, die attach pads) is a field
of identical parallel connections. Per-connection resistance follows rho*l/A;
a level's effective resistance is the parallel combination of the connections
assigned to the power net, mirrored for the ground return.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .errors import CapExceeded, ZeroConnections

# Bulk resistivities in ohm*m, overridable through the calibration dataset.
RESISTIVITY_DEFAULTS = {
    "copper": 1.68e-8,
    "solder": 1.4e-7,
}


@dataclass(frozen=True)
class InterconnectLevel:
    """One vertical packaging level (a field of identical connections)."""

    name: str
    platform_area_mm2: float      # area hosting the connection field
    material: str                 # "copper" or "solder"
    resistivity_ohm_m: float
    cross_area_um2: float         # per-connection cross section
    height_um: float              # per-connection vertical span
    pitch_um: float               # grid pitch of the field
    diameter_um: float | None = None   # informational only
    area_ratio_to_die: float = 1.0     # platform area / die area, used when sweeping die size

    def __post_init__(self):
        if self.platform_area_mm2 <= 0:
            raise ValueError(f"{self.name}: platform_area_mm2 must be > 0")
        if self.cross_area_um2 <= 0:
            raise ValueError(f"{self.name}: cross_area_um2 must be > 0")
        if self.height_um < 0:
            raise ValueError(f"{self.name}: height_um must be >= 0")
        if self.pitch_um <= 0:
            raise ValueError(f"{self.name}: pitch_um must be > 0")
        if self.pitch_um ** 2 < self.cross_area_um2:
            # Dataset values win; a footprint denser than the pitch grid is
            # only suspicious, not fatal.
            warnings.warn(
                f"{self.name}: cross_area_um2 exceeds pitch^2; "
                "connection footprint overlaps the pitch grid",
                stacklevel=2,
            )


@dataclass(frozen=True)
class InterconnectStack:
    """Ordered levels from the PCB side to the die side."""

    levels: tuple[InterconnectLevel, ...]
    power_fraction: float = 0.5   # share of connections assigned to power (rest is ground)

    def __post_init__(self):
        if not self.levels:
            raise ValueError("stack must contain at least one level")
        if not 0.0 < self.power_fraction < 1.0:
            raise ValueError("power_fraction must lie in (0, 1)")

    def level(self, name: str) -> InterconnectLevel:
        for lv in self.levels:
            if lv.name == name:
                return lv
        raise KeyError(name)


@dataclass(frozen=True)
class UtilizationPolicy:
    """Usage caps and per-connection current limits, per level name."""

    max_usage_fraction: dict[str, float] = field(default_factory=dict)
    ampacity_a: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name, frac in self.max_usage_fraction.items():
            if not 0.0 < frac <= 1.0:
                raise ValueError(f"max_usage_fraction[{name}] must lie in (0, 1]")
        for name, amp in self.ampacity_a.items():
            if amp <= 0:
                raise ValueError(f"ampacity_a[{name}] must be > 0")

    def cap(self, level_name: str) -> float:
        return self.max_usage_fraction.get(level_name, 1.0)

    def ampacity(self, level_name: str) -> float:
        try:
            return self.ampacity_a[level_name]
        except KeyError:
            raise KeyError(f"no ampacity calibrated for level '{level_name}'") from None


def connection_count(level: InterconnectLevel, platform_area_mm2: float | None = None) -> int:
    """Number of connection sites on the level, square-grid packing.

    An explicit platform_area_mm2 overrides the level's own (used when
    sweeping die area with fixed platform/die ratios).
    """
    area = level.platform_area_mm2 if platform_area_mm2 is None else platform_area_mm2
    area_um2 = area * 1e6
    return int(math.floor(area_um2 / level.pitch_um ** 2))


def per_connection_resistance(level: InterconnectLevel) -> float:
    """Single-connection DC resistance rho*l/A in ohm."""
    height_m = level.height_um * 1e-6
    cross_m2 = level.cross_area_um2 * 1e-12
    return level.resistivity_ohm_m * height_m / cross_m2


def effective_level_resistance(level: InterconnectLevel, used_power_connections: int) -> float:
    """Parallel resistance of the power-net connections actually used, in ohm.

    The ground return is modeled identically by callers (same count, summed).
    """
    if used_power_connections < 1:
        raise ZeroConnections(
            f"{level.name}: need at least one power connection, got {used_power_connections}"
        )
    return per_connection_resistance(level) / used_power_connections


def level_loss(level: InterconnectLevel, current_a: float, used_power_connections: int) -> float:
    """Round-trip I^2*R loss in W: power net plus identical ground return."""
    if current_a < 0:
        raise ValueError("current_a must be >= 0")
    if current_a == 0.0:
        return 0.0
    r_net = effective_level_resistance(level, used_power_connections)
    return current_a ** 2 * (r_net + r_net)


@dataclass(frozen=True)
class ConnectionRequirement:
    """Result of sizing a level for a given current."""

    per_net_count: int            # connections per net (power; ground mirrors it)
    total_used: int               # power + ground
    available: int                # all connection sites on the level
    utilization_fraction: float   # total_used / available
    violates_cap: bool


def required_connections(
    level: InterconnectLevel,
    current_a: float,
    policy: UtilizationPolicy,
    platform_area_mm2: float | None = None,
    strict: bool = False,
) -> ConnectionRequirement:
    """Size the connection field for a current and check it against the usage cap.

    Connections are provisioned per net at ceil(I / ampacity) and doubled for
    the ground return. In strict mode a cap violation raises CapExceeded
    carrying the maximum current the level supports within the cap.
    """
    if current_a < 0:
        raise ValueError("current_a must be >= 0")
    available = connection_count(level, platform_area_mm2)
    cap = policy.cap(level.name)
    if current_a == 0.0:
        return ConnectionRequirement(0, 0, available, 0.0, False)
    amp = policy.ampacity(level.name)
    per_net = math.ceil(current_a / amp)
    total = 2 * per_net
    utilization = total / available
    violates = utilization > cap
    if violates and strict:
        achievable = math.floor(cap * available / 2) * amp
        raise CapExceeded(
            f"{level.name}: {total} of {available} connections needed "
            f"({utilization:.1%} > cap {cap:.0%})",
            achievable_max_a=achievable,
        )
    return ConnectionRequirement(per_net, total, available, utilization, violates)


def stack_loss(
    stack: InterconnectStack,
    current_a: float,
    used_per_level: dict[str, int],
) -> dict[str, float]:
    """Per-level round-trip loss for one current through every level in series."""
    return {
        lv.name: level_loss(lv, current_a, used_per_level[lv.name])
        for lv in stack.levels
    }
