#!/usr/bin/env python
# -*- coding: utf-8 -*-
# Copyright (C) 2026, deux authors
#
# This program is free software; you can redistribute it and/or
# modify it under the terms of the GNU General Public License
# version 2 as published by the Free Software Foundation.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License along
# with this program; if not, write to the Free Software Foundation, Inc.,
# 51 Franklin Street, Fifth Floor, Boston, MA  02110-1301, USA.
#
# SPDX-License-Identifier: GPL-2.0-only

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from deux.enums import Action, CellState, MAX_DEPTH
from deux.errors import ArgumentError, DatasetFormatError
from deux.geometry import Pose, PixelCoord, backproject
from deux.mapping import (OBSTACLE_BAND, SURFACE_PUSH, Frontier, OccupancyGrid, extract_frontiers, frontier_targets,
                          integrate, process_map, read_pgm, write_pgm)
from deux.world import AgentState, generate_scene, observe, step
from test.helpers import box_scene, small_intrinsics

FREE, OCCUPIED, UNKNOWN = CellState.FREE, CellState.OCCUPIED, CellState.UNKNOWN


def random_grid(rng: np.random.Generator, shape=(24, 24), p=(0.4, 0.4, 0.2)) -> OccupancyGrid:
    cells = rng.choice([UNKNOWN, FREE, OCCUPIED], size=shape, p=p).astype(np.int8)
    return OccupancyGrid(cells, 0.25)


def brute_force_frontier_cells(grid: OccupancyGrid) -> set:
    cells = set()
    for row in range(grid.shape[0]):
        for col in range(grid.shape[1]):
            if grid.cells[row, col] != FREE:
                continue
            for r, c in ((row + 1, col), (row - 1, col), (row, col + 1), (row, col - 1)):
                if grid.in_bounds(r, c) and grid.cells[r, c] == UNKNOWN:
                    cells.add((row, col))
    return cells


def brute_force_inflation(grid: OccupancyGrid) -> np.ndarray:
    blocked = grid.cells == UNKNOWN
    for row, col in np.argwhere(grid.cells == OCCUPIED):
        blocked[max(row - 1, 0):row + 2, max(col - 1, 0):col + 2] = True
    return blocked


def heading_zero_pose(x: float, y: float, z: float) -> Pose:
    return Pose(np.array([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]]), [x, y, z])


class TestOccupancyGrid:

    @staticmethod
    def test_resolution_must_be_positive():
        with pytest.raises(ArgumentError):
            OccupancyGrid.empty((4, 4), 0.0)

    @staticmethod
    def test_cells_follow_floor_division():
        grid = OccupancyGrid.empty((10, 10), 0.25)
        assert grid.cell_of(0.3, 0.74) == (1, 2)
        assert grid.cell_center(1, 2) == (0.375, 0.625)
        assert grid.in_bounds(9, 0) and not grid.in_bounds(10, 0) and not grid.in_bounds(-1, 3)

    @staticmethod
    def test_pgm_round_trip(tmpdir):
        grid = random_grid(np.random.default_rng(0))
        grid.origin = (1.0, -2.0)
        path = tmpdir / 'grid.pgm'
        write_pgm(grid, path)
        assert read_pgm(path) == grid

    @staticmethod
    def test_bad_pgm_raises(tmpdir):
        path = tmpdir / 'grid.pgm'
        path.write_binary(b'P6\n2 2\n255\n' + bytes(12))
        with pytest.raises(DatasetFormatError):
            read_pgm(path)


class TestIntegrate:

    @staticmethod
    def test_wall_ahead():
        scene = box_scene()
        state = AgentState(2.75, 1.375, 0)
        frame = observe(scene, state, small_intrinsics())
        grid = integrate(OccupancyGrid.for_scene(scene), frame.pose, frame.depth_gt, frame.intrinsics,
                         scene.floor_height)
        # agent in row 11, the far wall is row 19
        assert grid.cells[19, 5] == OCCUPIED
        assert all(grid.cells[row, 5] == FREE for row in range(11, 19))
        assert grid.cells[5, 5] == UNKNOWN

    @staticmethod
    def test_clipped_depth_frees_without_obstacles():
        k = small_intrinsics()
        grid = integrate(OccupancyGrid.empty((100, 100), 0.25), heading_zero_pose(12.5, 12.5, 1.5),
                         np.full(k.shape, MAX_DEPTH), k)
        assert grid.count(OCCUPIED) == 0
        assert grid.cells[86, 50] == FREE
        assert grid.cells[40, 50] == UNKNOWN
        assert grid.cells[grid.cell_of(12.5, 12.5)] == FREE

    @staticmethod
    def test_obstacle_cells_match_per_pixel_classification():
        scene = generate_scene(3)
        k = small_intrinsics()
        state = AgentState.spawn(scene)
        for _ in range(5):
            state = step(scene, state, Action.TURN_LEFT)
        frame = observe(scene, state, k)
        grid = integrate(OccupancyGrid.for_scene(scene), frame.pose, frame.depth_gt, k, scene.floor_height)

        expected = set()
        for v in range(k.height):
            for u in range(k.width):
                d = frame.depth_gt[v, u]
                if not 0.1 < d < MAX_DEPTH:
                    continue
                point = frame.pose.apply(backproject(PixelCoord(u, v), d + SURFACE_PUSH, k))
                if OBSTACLE_BAND[0] <= point[2] - scene.floor_height <= OBSTACLE_BAND[1]:
                    cell = grid.cell_of(point[0], point[1])
                    if grid.in_bounds(*cell):
                        expected.add(cell)
        assert set(map(tuple, np.argwhere(grid.cells == OCCUPIED))) == expected

    @staticmethod
    def test_occupied_cells_stay_occupied():
        scene = generate_scene(5)
        k = small_intrinsics()
        grid = OccupancyGrid.for_scene(scene)
        state = AgentState.spawn(scene)
        rng = np.random.default_rng(0)
        for _ in range(30):
            frame = observe(scene, state, k)
            updated = integrate(grid, frame.pose, frame.depth_gt, k, scene.floor_height)
            assert np.all(updated.cells[grid.cells == OCCUPIED] == OCCUPIED)
            assert updated.cells[updated.cell_of(state.x, state.y)] == FREE
            grid = updated
            state = step(scene, state, [Action.FORWARD, Action.TURN_LEFT][int(rng.integers(2))])

    @staticmethod
    def test_input_grid_is_not_modified():
        scene = box_scene()
        frame = observe(scene, AgentState(2.75, 1.375, 0), small_intrinsics())
        grid = OccupancyGrid.for_scene(scene)
        integrate(grid, frame.pose, frame.depth_gt, frame.intrinsics, scene.floor_height)
        assert grid.count(UNKNOWN) == grid.cells.size


class TestFrontiers:

    @staticmethod
    def test_fully_known_grid_has_none():
        cells = np.full((8, 8), FREE, dtype=np.int8)
        cells[0] = OCCUPIED
        assert extract_frontiers(OccupancyGrid(cells, 0.25)) == []

    @staticmethod
    def test_single_free_cell_is_a_small_cluster():
        grid = OccupancyGrid.empty((5, 5), 0.25)
        grid.cells[2, 3] = FREE
        assert extract_frontiers(grid) == []
        assert extract_frontiers(grid, min_cluster_size=1) == [Frontier((2, 3), 0, 1)]

    @staticmethod
    def test_random_grids_match_definition():
        rng = np.random.default_rng(1)
        for _ in range(20):
            grid = random_grid(rng)
            brute = brute_force_frontier_cells(grid)
            assert {f.cell for f in extract_frontiers(grid, min_cluster_size=1)} == brute
            for frontier in extract_frontiers(grid):
                assert frontier.cell in brute
                assert frontier.cluster_size >= 3

    @staticmethod
    def test_clusters_are_eight_connected():
        grid = OccupancyGrid.empty((6, 6), 0.25)
        for cell in ((1, 1), (2, 2), (3, 3)):
            grid.cells[cell] = FREE
        frontiers = extract_frontiers(grid)
        assert len(frontiers) == 3
        assert {f.cluster_id for f in frontiers} == {0}

    @staticmethod
    def test_targets_are_cluster_centres():
        grid = OccupancyGrid.empty((7, 7), 0.25)
        grid.cells[3, 1:6] = FREE
        targets = frontier_targets(extract_frontiers(grid))
        assert targets == [(3, 3)]
        allowed = np.zeros((7, 7), dtype=bool)
        allowed[3, 5] = True
        assert frontier_targets(extract_frontiers(grid), allowed) == [(3, 5)]
        assert frontier_targets(extract_frontiers(grid), np.zeros((7, 7), dtype=bool)) == []


class TestProcessMap:

    @staticmethod
    def test_single_obstacle_becomes_a_block():
        cells = np.full((7, 7), FREE, dtype=np.int8)
        cells[3, 3] = OCCUPIED
        processed = process_map(OccupancyGrid(cells, 0.25))
        expected = np.full((7, 7), FREE, dtype=np.int8)
        expected[2:5, 2:5] = OCCUPIED
        assert_array_equal(processed.cells, expected)

    @staticmethod
    def test_all_free_grid_is_unchanged():
        grid = OccupancyGrid(np.full((5, 5), FREE, dtype=np.int8), 0.25)
        assert process_map(grid) == grid

    @staticmethod
    def test_random_grids_match_dilation():
        rng = np.random.default_rng(2)
        for _ in range(20):
            grid = random_grid(rng, p=(0.2, 0.7, 0.1))
            processed = process_map(grid)
            assert_array_equal(processed.cells == OCCUPIED, brute_force_inflation(grid))

    @staticmethod
    def test_keep_free_cell():
        cells = np.full((5, 5), FREE, dtype=np.int8)
        cells[2, 3] = OCCUPIED
        processed = process_map(OccupancyGrid(cells, 0.25), keep_free=(2, 2))
        assert processed.cells[2, 2] == FREE
        assert processed.cells[1, 2] == OCCUPIED
