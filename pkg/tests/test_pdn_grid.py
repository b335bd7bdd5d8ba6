"""Resistive grid solver: hand-checkable cases, conservation, and oracles.

The small-grid oracle builds the dense nodal system with plain loops and
numpy's dense solver, independent of the sparse path under test.
"""

import math

import numpy as np
import pytest

from pdnx.errors import DegenerateGrid
from pdnx.pdn_grid import (GridProblem, ResistiveGrid, build_problem, current_spread,
                           solve_dc, solution_to_csv)
from pdnx.placement import DieFloorplan, VrSite, place_periphery, place_under_die


class TestHandCases:
    def test_two_node_divider(self):
        # source 1 V at node 0, 10 A sink at node 1 through 1 mOhm
        grid = ResistiveGrid(2, 1, 1.0, 0.001)
        problem = GridProblem(grid, {0: 1.0}, {1: 10.0})
        sol = solve_dc(problem)
        assert sol.node_voltages[1] == pytest.approx(0.99, rel=1e-12)
        assert sol.vr_currents[0] == pytest.approx(10.0, rel=1e-12)
        # 0.1 W in the plane, doubled for the ground return
        assert sol.horizontal_loss_w == pytest.approx(0.2, rel=1e-12)

    def test_single_source_carries_everything(self):
        grid = ResistiveGrid(5, 5, 1.0, 0.002)
        sinks = {i: 2.0 for i in range(25) if i != 12}
        problem = GridProblem(grid, {12: 1.0}, sinks)
        sol = solve_dc(problem)
        spread = current_spread(sol)
        assert spread.min_a == spread.max_a == pytest.approx(48.0, rel=1e-10)

    def test_fourfold_symmetric_sources_share_equally(self):
        # sources at the four mid-edges of a 9x9 grid, sink at the center
        grid = ResistiveGrid(9, 9, 1.0, 0.001)
        mid = 4
        sources = {
            grid.node_index(mid, 0): 1.0,
            grid.node_index(0, mid): 1.0,
            grid.node_index(8, mid): 1.0,
            grid.node_index(mid, 8): 1.0,
        }
        problem = GridProblem(grid, sources, {grid.node_index(mid, mid): 100.0})
        sol = solve_dc(problem)
        assert sol.vr_currents == pytest.approx([25.0] * 4, rel=1e-10)


class TestConservationAndBounds:
    def _a1_like_problem(self, weight=0.0):
        plan = DieFloorplan(500.0, 8.0)
        sites = place_periphery(plan, 48, 5 / 0.69)
        return build_problem(plan, sites, 1000.0, sheet_resistance_ohm_sq=5e-4,
                             grid_resolution=32, demand_weight=weight)

    def test_current_conservation(self):
        problem = self._a1_like_problem()
        sol = solve_dc(problem)
        total_sink = sum(problem.sink_currents.values())
        assert abs(sol.vr_currents.sum() - total_sink) <= 1e-8 * total_sink

    def test_kirchhoff_at_free_nodes(self):
        problem = self._a1_like_problem()
        sol = solve_dc(problem)
        n = problem.grid.n_nodes
        net = np.zeros(n)
        np.add.at(net, sol.edge_a, -sol.edge_currents)
        np.add.at(net, sol.edge_b, sol.edge_currents)
        for idx, cur in problem.sink_currents.items():
            net[idx] -= cur
        free = np.ones(n, dtype=bool)
        free[list(problem.source_nodes)] = False
        assert np.max(np.abs(net[free])) <= 1e-8

    def test_maximum_principle(self):
        problem = self._a1_like_problem(weight=1.5)
        sol = solve_dc(problem)
        assert sol.node_voltages.max() <= 1.0 + 1e-12

    def test_sheet_resistance_scaling(self):
        plan = DieFloorplan(500.0, 8.0)
        sites = place_periphery(plan, 48, 5 / 0.69)
        base = solve_dc(build_problem(plan, sites, 1000.0, 5e-4, 32))
        scaled = solve_dc(build_problem(plan, sites, 1000.0, 1e-3, 32))
        assert scaled.horizontal_loss_w == pytest.approx(
            2.0 * base.horizontal_loss_w, rel=1e-12)
        assert scaled.vr_currents == pytest.approx(base.vr_currents, rel=1e-12)

    def test_refinement_changes_loss_mildly(self):
        # The shipped calibration fixture: periphery bank, radial demand,
        # droop sharing. Doubling the lattice must not move the loss much.
        plan = DieFloorplan(500.0, 8.0)
        sites = place_periphery(plan, 48, 5 / 0.69)
        droop = 0.6 * 0.004644808743169397
        coarse = solve_dc(build_problem(plan, sites, 1000.0, 5e-4, 32,
                                        demand_weight=2.0, droop_resistance_ohm=droop))
        fine = solve_dc(build_problem(plan, sites, 1000.0, 5e-4, 63,
                                      demand_weight=2.0, droop_resistance_ohm=droop))
        rel = abs(fine.horizontal_loss_w - coarse.horizontal_loss_w)
        assert rel / coarse.horizontal_loss_w < 0.05


def _dense_oracle(grid: ResistiveGrid, sources: dict, sinks: dict) -> np.ndarray:
    """Dense Gaussian-elimination solution, built with plain loops."""
    n = grid.n_nodes
    g = 1.0 / grid.sheet_resistance_ohm_sq
    lap = np.zeros((n, n))
    for j in range(grid.ny):
        for i in range(grid.nx):
            a = grid.node_index(i, j)
            for (i2, j2) in ((i + 1, j), (i, j + 1)):
                if i2 < grid.nx and j2 < grid.ny:
                    b = grid.node_index(i2, j2)
                    lap[a, a] += g
                    lap[b, b] += g
                    lap[a, b] -= g
                    lap[b, a] -= g
    rhs = np.zeros(n)
    for idx, cur in sinks.items():
        rhs[idx] -= cur
    free = [i for i in range(n) if i not in sources]
    fixed = list(sources)
    v_fixed = np.array([sources[i] for i in fixed])
    a_ff = lap[np.ix_(free, free)]
    a_fs = lap[np.ix_(free, fixed)]
    v_free = np.linalg.solve(a_ff, rhs[free] - a_fs @ v_fixed)
    voltages = np.zeros(n)
    voltages[free] = v_free
    voltages[fixed] = v_fixed
    return voltages


class TestDenseOracle:
    @pytest.mark.parametrize("nx,ny", [(2, 2), (3, 3), (4, 4), (4, 3)])
    def test_matches_dense_elimination(self, nx, ny):
        grid = ResistiveGrid(nx, ny, 0.7, 0.0013)
        sources = {0: 1.0, grid.n_nodes - 1: 1.0}
        sinks = {i: 1.5 for i in range(1, grid.n_nodes - 1)}
        sol = solve_dc(GridProblem(grid, sources, sinks))
        expected = _dense_oracle(grid, sources, sinks)
        assert sol.node_voltages == pytest.approx(expected, abs=1e-12)


class TestBuildProblem:
    def test_48_sites_snap_to_distinct_nodes(self):
        plan = DieFloorplan(500.0, 8.0)
        sites = place_periphery(plan, 48, 5 / 0.69)
        problem = build_problem(plan, sites, 1000.0, 5e-4, 32)
        assert len(problem.source_nodes) == 48

    def test_under_die_sites_snap_distinct(self):
        plan = DieFloorplan(500.0, 8.0)
        placed = place_under_die(plan, 48, 5 / 0.69)
        problem = build_problem(plan, list(placed.sites), 1000.0, 5e-4, 32)
        assert len(problem.source_nodes) == 48

    def test_center_site_on_even_grid_refines(self):
        # the exact center of a 2x2 lattice ties all four nodes; one
        # refinement puts a node at the center
        plan = DieFloorplan(100.0, 8.0)
        site = VrSite(0.0, 0.0, 4.0, 0, "under_die")
        problem = build_problem(plan, [site], 50.0, 1e-3, grid_resolution=2)
        assert problem.grid.nx == 3
        node = next(iter(problem.source_nodes))
        assert problem.grid.node_xy(node) == (pytest.approx(0.0), pytest.approx(0.0))

    def test_coincident_sites_degenerate(self):
        plan = DieFloorplan(100.0, 8.0)
        sites = [VrSite(1.0, 1.0, 4.0, 0, "under_die"),
                 VrSite(1.0, 1.0, 4.0, 0, "under_die")]
        with pytest.raises(DegenerateGrid):
            build_problem(plan, sites, 50.0, 1e-3, grid_resolution=8)

    def test_demand_profile_total_preserved(self):
        plan = DieFloorplan(500.0, 8.0)
        sites = place_periphery(plan, 8, 5 / 0.69)
        for weight in (0.0, 2.0):
            problem = build_problem(plan, sites, 777.0, 5e-4, 32, demand_weight=weight)
            assert sum(problem.sink_currents.values()) == pytest.approx(777.0, rel=1e-12)

    def test_explicit_sinks(self):
        plan = DieFloorplan(500.0, 8.0)
        sites = place_periphery(plan, 8, DPMIH := 8 / 0.15)
        inner = place_under_die(plan, 4, 7.0).sites
        explicit = [(s.x_mm, s.y_mm, 10.0) for s in inner]
        problem = build_problem(plan, sites, 80.0, 5e-4, 32, explicit_sinks=explicit)
        assert len(problem.sink_currents) == 4
        assert sum(problem.sink_currents.values()) == pytest.approx(80.0)


class TestDroop:
    def test_droop_conserves_current(self):
        plan = DieFloorplan(500.0, 8.0)
        sites = place_periphery(plan, 48, 5 / 0.69)
        problem = build_problem(plan, sites, 1000.0, 5e-4, 32,
                                droop_resistance_ohm=3e-3)
        sol = solve_dc(problem)
        assert sol.vr_currents.sum() == pytest.approx(1000.0, rel=1e-10)

    def test_droop_terminal_voltage_identity(self):
        # Footprint below one lattice pitch: each VR touches one node, so
        # the terminal voltage is exactly the drooped rail.
        plan = DieFloorplan(500.0, 8.0)
        sites = place_periphery(plan, 24, 0.25)
        r_d = 3e-3
        problem = build_problem(plan, sites, 1000.0, 5e-4, 32,
                                droop_resistance_ohm=r_d)
        sol = solve_dc(problem)
        assert all(len(f) == 1 for f in problem.source_fanout.values())
        expected = 1.0 - r_d * sol.vr_currents
        assert sol.vr_plane_voltages == pytest.approx(expected, rel=1e-12)

    def test_droop_narrows_the_spread(self):
        plan = DieFloorplan(500.0, 8.0)
        sites = place_periphery(plan, 48, 5 / 0.69)
        free = solve_dc(build_problem(plan, sites, 1000.0, 5e-4, 32))
        drooped = solve_dc(build_problem(plan, sites, 1000.0, 5e-4, 32,
                                         droop_resistance_ohm=3e-3))
        s0, s1 = current_spread(free), current_spread(drooped)
        assert (s1.max_a - s1.min_a) < (s0.max_a - s0.min_a)


class TestCsv:
    def test_solution_csv_shape(self):
        grid = ResistiveGrid(3, 3, 1.0, 0.001)
        problem = GridProblem(grid, {0: 1.0}, {8: 5.0})
        sol = solve_dc(problem)
        text = solution_to_csv(problem, sol)
        lines = text.strip().split("\n")
        assert lines[0].startswith("record,")
        assert sum(1 for x in lines if x.startswith("node_v")) == 9
        assert sum(1 for x in lines if x.startswith("edge_i")) == 12
