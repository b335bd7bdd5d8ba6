"""DC current sharing on a horizontal power plane.

The plane is a uniform resistive lattice: one conductance of 1/R_sheet per
cell edge (square cells). VR outputs pin their nodes to the rail voltage;
point-of-load demand is drawn as current sinks spread over the nodes under
the die shadow. Eliminating the pinned nodes leaves a symmetric positive
definite system for the free node voltages; per-VR currents, edge currents,
and the plane's ohmic loss (doubled for the mirrored ground plane) follow
from the solved voltages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DegenerateGrid, SingularSystem
from .placement import DieFloorplan, VrSite

_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class ResistiveGrid:
    """Uniform rectangular node lattice over the plane."""

    nx: int
    ny: int
    cell_pitch_mm: float
    sheet_resistance_ohm_sq: float
    x0_mm: float = 0.0    # coordinates of node (0, 0)
    y0_mm: float = 0.0

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1 or self.nx * self.ny < 2:
            raise ValueError("grid needs at least two nodes")
        if self.cell_pitch_mm <= 0:
            raise ValueError("cell_pitch_mm must be > 0")
        if self.sheet_resistance_ohm_sq <= 0:
            raise ValueError("sheet_resistance_ohm_sq must be > 0")

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    def node_index(self, i: int, j: int) -> int:
        return j * self.nx + i

    def node_xy(self, index: int) -> tuple[float, float]:
        j, i = divmod(index, self.nx)
        return (self.x0_mm + i * self.cell_pitch_mm, self.y0_mm + j * self.cell_pitch_mm)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Endpoint index arrays of all horizontal and vertical lattice edges."""
        idx = np.arange(self.n_nodes).reshape(self.ny, self.nx)
        h_a = idx[:, :-1].ravel()
        h_b = idx[:, 1:].ravel()
        v_a = idx[:-1, :].ravel()
        v_b = idx[1:, :].ravel()
        return np.concatenate([h_a, v_a]), np.concatenate([h_b, v_b])


@dataclass(frozen=True)
class GridProblem:
    """A grid plus fixed-voltage source nodes and current-sink nodes.

    With droop_resistance_ohm set, each source pins a virtual node behind a
    series resistance instead of the plane node itself: that is how parallel
    VRs actually share current (output droop). The series element models the
    converter's internal series resistance, so its dissipation belongs to the
    converter loss model, not to the plane.
    """

    grid: ResistiveGrid
    source_nodes: dict[int, float]      # node index -> fixed voltage, insertion-ordered
    sink_currents: dict[int, float]     # node index -> drawn current (>= 0)
    edge_conductance_s: np.ndarray | None = None   # per edge; None = uniform 1/R_sheet
    droop_resistance_ohm: float | None = None      # None or 0 = ideal pinned sources
    # In droop mode a VR couples over its whole footprint pad field rather
    # than one node; maps each source node to its plane contact nodes.
    source_fanout: dict[int, tuple[int, ...]] | None = None

    def __post_init__(self):
        if not self.source_nodes:
            raise ValueError("need at least one source node")
        overlap = set(self.source_nodes) & set(self.sink_currents)
        if overlap:
            raise ValueError(f"sink and source nodes must be disjoint: {sorted(overlap)}")
        if any(i < 0 for i in self.sink_currents.values()):
            raise ValueError("sink currents must be >= 0")
        if sum(self.sink_currents.values()) <= 0:
            raise ValueError("total sink current must be > 0")
        if self.droop_resistance_ohm is not None and self.droop_resistance_ohm < 0:
            raise ValueError("droop_resistance_ohm must be >= 0")


@dataclass
class GridSolution:
    """Solved node voltages and the derived current/loss quantities."""

    node_voltages: np.ndarray           # per node, V
    vr_currents: np.ndarray             # per source node, source order, A
    source_nodes: tuple[int, ...]
    edge_a: np.ndarray
    edge_b: np.ndarray
    edge_currents: np.ndarray           # positive from edge_a toward edge_b, A
    horizontal_loss_w: float            # both planes (power + ground return)
    vr_plane_voltages: np.ndarray | None = None   # plane-side terminal voltage per VR
    residual: float = 0.0
    vr_by_node: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class CurrentSpread:
    min_a: float
    max_a: float
    mean_a: float


def _snap_site(grid: ResistiveGrid, x: float, y: float) -> tuple[int, bool]:
    """Nearest node to (x, y), ties toward the lower index.

    Also flags a fully ambiguous snap (equidistant to all four surrounding
    nodes, i.e. the site sits at a cell center); the caller refines the
    lattice once in that case because no node represents the site at all.
    """
    fi = (x - grid.x0_mm) / grid.cell_pitch_mm
    fj = (y - grid.y0_mm) / grid.cell_pitch_mm
    candidates = []
    for j in (math.floor(fj), math.ceil(fj)):
        for i in (math.floor(fi), math.ceil(fi)):
            ic = min(max(i, 0), grid.nx - 1)
            jc = min(max(j, 0), grid.ny - 1)
            idx = grid.node_index(ic, jc)
            nx_mm, ny_mm = grid.node_xy(idx)
            d2 = (x - nx_mm) ** 2 + (y - ny_mm) ** 2
            candidates.append((d2, idx))
    best_d2 = min(d2 for d2, _ in candidates)
    tol = max(best_d2 * 1e-9, (grid.cell_pitch_mm * 1e-7) ** 2)
    tied = sorted({idx for d2, idx in candidates if d2 <= best_d2 + tol})
    return tied[0], len(tied) >= 4


def _build_grid(plan: DieFloorplan, sites: list[VrSite] | tuple[VrSite, ...],
                resolution: int, sheet_resistance: float) -> ResistiveGrid:
    side = plan.side_mm
    half = side / 2.0
    pitch = side / (resolution - 1)
    needed_half = half
    for s in sites:
        w = math.sqrt(s.footprint_mm2)
        needed_half = max(needed_half, abs(s.x_mm) + w / 2.0, abs(s.y_mm) + w / 2.0)
    n_ext = math.ceil((needed_half - half) / pitch - 1e-12) if needed_half > half else 0
    n = resolution + 2 * n_ext
    origin = -half - n_ext * pitch
    return ResistiveGrid(n, n, pitch, sheet_resistance, origin, origin)


def build_problem(
    plan: DieFloorplan,
    sites: list[VrSite] | tuple[VrSite, ...],
    demand_a: float,
    sheet_resistance_ohm_sq: float,
    grid_resolution: int = 32,
    rail_voltage_v: float = 1.0,
    demand_weight: float = 0.0,
    explicit_sinks: list[tuple[float, float, float]] | None = None,
    droop_resistance_ohm: float | None = None,
) -> GridProblem:
    """Discretize a placement into a grid problem.

    The lattice spans the die shadow at grid_resolution nodes across and is
    extended outward to cover any periphery sites. Every site pins its
    nearest node to the rail voltage. Demand is drawn at the nodes under the
    die shadow, weighted by a radial profile (weight 1 + w*(1 - (r/r0)^2)
    with r0 the die half-diagonal; w = 0 is uniform), unless explicit sinks
    (x, y, current) are given. Snapping collisions trigger one automatic
    lattice refinement before raising DegenerateGrid.
    """
    if demand_a <= 0:
        raise ValueError("demand_a must be > 0")
    if not sites:
        raise ValueError("need at least one VR site")
    if grid_resolution < 2:
        raise ValueError("grid_resolution must be >= 2")

    resolution = grid_resolution
    for attempt in range(2):
        grid = _build_grid(plan, sites, resolution, sheet_resistance_ohm_sq)
        source_nodes: dict[int, float] = {}
        fanout: dict[int, tuple[int, ...]] = {}
        ambiguous = False
        collision = False
        for s in sites:
            idx, tied = _snap_site(grid, s.x_mm, s.y_mm)
            ambiguous = ambiguous or tied
            if idx in source_nodes:
                collision = True
                break
            source_nodes[idx] = rail_voltage_v
            fanout[idx] = _footprint_nodes(grid, s, idx)

        sink_currents: dict[int, float] = {}
        if not collision:
            if explicit_sinks is not None:
                for (sx, sy, cur) in explicit_sinks:
                    idx, tied = _snap_site(grid, sx, sy)
                    ambiguous = ambiguous or tied
                    if idx in source_nodes:
                        collision = True
                        break
                    sink_currents[idx] = sink_currents.get(idx, 0.0) + cur
                total = sum(sink_currents.values())
                if not collision and total > 0:
                    scale = demand_a / total
                    sink_currents = {k: v * scale for k, v in sink_currents.items()}
            else:
                sink_currents = _profile_sinks(plan, grid, source_nodes, demand_a, demand_weight)

        if not collision and not ambiguous and sink_currents:
            return GridProblem(grid, source_nodes, sink_currents,
                               droop_resistance_ohm=droop_resistance_ohm,
                               source_fanout=fanout)
        if attempt == 0:
            # One refinement keeps the old nodes and adds the midpoints.
            resolution = 2 * resolution - 1
            continue
        raise DegenerateGrid(
            "VR sites collapse onto shared or ambiguous grid nodes even after refinement"
        )
    raise AssertionError("unreachable")


def _footprint_nodes(grid: ResistiveGrid, site: VrSite, center_idx: int) -> tuple[int, ...]:
    """Plane nodes covered by the site's square footprint (at least the center)."""
    w2 = math.sqrt(site.footprint_mm2) / 2.0
    i_lo = math.ceil((site.x_mm - w2 - grid.x0_mm) / grid.cell_pitch_mm - 1e-12)
    i_hi = math.floor((site.x_mm + w2 - grid.x0_mm) / grid.cell_pitch_mm + 1e-12)
    j_lo = math.ceil((site.y_mm - w2 - grid.y0_mm) / grid.cell_pitch_mm - 1e-12)
    j_hi = math.floor((site.y_mm + w2 - grid.y0_mm) / grid.cell_pitch_mm + 1e-12)
    nodes = [
        grid.node_index(i, j)
        for j in range(max(j_lo, 0), min(j_hi, grid.ny - 1) + 1)
        for i in range(max(i_lo, 0), min(i_hi, grid.nx - 1) + 1)
    ]
    if not nodes:
        nodes = [center_idx]
    return tuple(nodes)


def _profile_sinks(plan: DieFloorplan, grid: ResistiveGrid, source_nodes: dict[int, float],
                   demand_a: float, demand_weight: float) -> dict[int, float]:
    half = plan.side_mm / 2.0
    r0_sq = 2.0 * half * half   # squared distance to a die corner
    eps = 1e-9 * plan.side_mm
    weights: dict[int, float] = {}
    for idx in range(grid.n_nodes):
        x, y = grid.node_xy(idx)
        if abs(x) > half + eps or abs(y) > half + eps or idx in source_nodes:
            continue
        radial = 1.0 - (x * x + y * y) / r0_sq
        w = 1.0 + demand_weight * max(0.0, radial)
        # Nodes on the die outline own only half (corners: a quarter) of a
        # cell; trapezoidal coverage keeps the drawn area resolution-stable.
        if abs(abs(x) - half) <= eps:
            w *= 0.5
        if abs(abs(y) - half) <= eps:
            w *= 0.5
        weights[idx] = w
    total_w = sum(weights.values())
    if total_w <= 0:
        return {}
    return {idx: demand_a * w / total_w for idx, w in weights.items()}


def solve_dc(problem: GridProblem) -> GridSolution:
    """Solve the nodal system and derive currents and the plane loss.

    With pinned sources those nodes are eliminated; with droop, every lattice
    node stays unknown and each source contributes a series branch. Either
    way the system is symmetric positive definite and solved directly; the
    relative residual must come in at or below 1e-10.
    """
    grid = problem.grid
    n = grid.n_nodes
    edge_a, edge_b = grid.edges()
    if problem.edge_conductance_s is not None:
        g_edges = problem.edge_conductance_s
    else:
        g_edges = np.full(edge_a.shape[0], 1.0 / grid.sheet_resistance_ohm_sq)

    source_idx = np.fromiter(problem.source_nodes.keys(), dtype=np.int64)
    source_v = np.fromiter(problem.source_nodes.values(), dtype=float)
    if source_idx.size == 0:
        raise SingularSystem("no source node pins the grid")

    injections = np.zeros(n)
    for idx, cur in problem.sink_currents.items():
        injections[idx] -= cur

    # Full lattice Laplacian.
    rows = np.concatenate([edge_a, edge_b, edge_a, edge_b])
    cols = np.concatenate([edge_a, edge_b, edge_b, edge_a])
    vals = np.concatenate([g_edges, g_edges, -g_edges, -g_edges])
    lap = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    droop = problem.droop_resistance_ohm or 0.0
    rel_residual = 0.0
    if droop > 0.0:
        g_d = 1.0 / droop
        fanout = problem.source_fanout or {int(i): (int(i),) for i in source_idx}
        diag_idx: list[int] = []
        diag_val: list[float] = []
        rhs = injections.copy()
        for idx, v_src in zip(source_idx, source_v):
            contacts = fanout.get(int(idx), (int(idx),))
            g_branch = g_d / len(contacts)
            for c in contacts:
                diag_idx.append(c)
                diag_val.append(g_branch)
                rhs[c] += g_branch * v_src
        diag = sp.csr_matrix((diag_val, (diag_idx, diag_idx)), shape=(n, n))
        system = (lap + diag).tocsc()
        voltages = spla.spsolve(system, rhs)
        norm_rhs = float(np.linalg.norm(rhs))
        if norm_rhs > 0:
            rel_residual = float(np.linalg.norm(system @ voltages - rhs)) / norm_rhs
            if rel_residual > _RESIDUAL_TOL:
                raise SingularSystem(
                    f"nodal solve residual {rel_residual:.2e} exceeds {_RESIDUAL_TOL:.0e}"
                )
        vr_list = []
        plane_v_list = []
        for idx, v_src in zip(source_idx, source_v):
            contacts = fanout.get(int(idx), (int(idx),))
            g_branch = g_d / len(contacts)
            branch_i = g_branch * (v_src - voltages[list(contacts)])
            i_site = float(branch_i.sum())
            p_site = float((branch_i * voltages[list(contacts)]).sum())
            vr_list.append(i_site)
            # Effective terminal voltage: power-weighted plane-side potential.
            plane_v_list.append(p_site / i_site if abs(i_site) > 1e-30
                                else float(np.mean(voltages[list(contacts)])))
        vr = np.array(vr_list)
        plane_voltages = np.array(plane_v_list)
    else:
        is_source = np.zeros(n, dtype=bool)
        is_source[source_idx] = True
        free = np.flatnonzero(~is_source)
        if free.size == 0:
            voltages = np.zeros(n)
            voltages[source_idx] = source_v
        else:
            lap_ff = lap[free][:, free]
            lap_fs = lap[free][:, source_idx]
            rhs = injections[free] - lap_fs @ source_v
            v_free = spla.spsolve(lap_ff.tocsc(), rhs)
            norm_rhs = float(np.linalg.norm(rhs))
            if norm_rhs > 0:
                rel_residual = float(np.linalg.norm(lap_ff @ v_free - rhs)) / norm_rhs
                if rel_residual > _RESIDUAL_TOL:
                    raise SingularSystem(
                        f"nodal solve residual {rel_residual:.2e} exceeds {_RESIDUAL_TOL:.0e}"
                    )
            voltages = np.zeros(n)
            voltages[free] = v_free
            voltages[source_idx] = source_v
        # Current injected into the plane by each pinned node.
        dv_pin = voltages[edge_a] - voltages[edge_b]
        pin_currents = dv_pin * g_edges
        net_out = np.zeros(n)
        np.add.at(net_out, edge_a, pin_currents)
        np.add.at(net_out, edge_b, -pin_currents)
        vr = net_out[source_idx]
        plane_voltages = source_v.copy()

    dv = voltages[edge_a] - voltages[edge_b]
    edge_currents = dv * g_edges
    plane_loss = float(np.sum(dv * dv * g_edges))

    return GridSolution(
        node_voltages=voltages,
        vr_currents=vr,
        source_nodes=tuple(int(i) for i in source_idx),
        edge_a=edge_a,
        edge_b=edge_b,
        edge_currents=edge_currents,
        horizontal_loss_w=2.0 * plane_loss,
        vr_plane_voltages=plane_voltages,
        residual=rel_residual,
        vr_by_node={int(i): float(c) for i, c in zip(source_idx, vr)},
    )


def current_spread(solution: GridSolution) -> CurrentSpread:
    """Order statistics of the per-VR currents."""
    vr = solution.vr_currents
    if vr.size == 0:
        raise ValueError("solution has no source nodes")
    return CurrentSpread(float(vr.min()), float(vr.max()), float(vr.mean()))


def solution_to_csv(problem: GridProblem, solution: GridSolution) -> str:
    """Node voltage map plus edge current map, plot-ready."""
    lines = ["record,x_mm,y_mm,x2_mm,y2_mm,value"]
    grid = problem.grid
    for idx in range(grid.n_nodes):
        x, y = grid.node_xy(idx)
        lines.append(f"node_v,{x!r},{y!r},,,{solution.node_voltages[idx]!r}")
    for a, b, cur in zip(solution.edge_a, solution.edge_b, solution.edge_currents):
        xa, ya = grid.node_xy(int(a))
        xb, yb = grid.node_xy(int(b))
        lines.append(f"edge_i,{xa!r},{ya!r},{xb!r},{yb!r},{cur!r}")
    return "\n".join(lines) + "\n"
