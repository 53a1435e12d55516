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

"""
A* on the planning view of the occupancy grid and conversion of waypoints into discrete actions
"""

import csv
import heapq
import logging
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from deux.enums import Action, CellState, MOVE_ACTIONS
from deux.errors import PlanningError
from deux.mapping import OccupancyGrid

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]

DEFAULT_LOOKAHEAD = 3
HEADING_TOLERANCE = np.deg2rad(5.0)
_NEIGHBOURS = ((-1, 0), (1, 0), (0, -1), (0, 1))


@dataclass
class PlanResult:
    path: List[Cell]
    next_index: int = DEFAULT_LOOKAHEAD
    cost: int = 0


def _passable(grid: OccupancyGrid, cell: Cell) -> bool:
    return grid.in_bounds(*cell) and grid.cells[cell] != CellState.OCCUPIED


def astar(planning_grid: OccupancyGrid, start: Cell, goal: Cell,
          lookahead: int = DEFAULT_LOOKAHEAD) -> Optional[PlanResult]:
    """
    4-connected A* with unit costs and the Manhattan heuristic. The open list is keyed by
    (f, row, col) so equal-f nodes expand in (row, col) order.

    :return: the minimal cost path or None when the goal cannot be reached
    """
    start, goal = tuple(int(c) for c in start), tuple(int(c) for c in goal)
    if not _passable(planning_grid, start):
        raise PlanningError(f'A* start {start} is occupied or outside of the grid')
    if not _passable(planning_grid, goal):
        return None

    def heuristic(cell: Cell) -> int:
        return abs(cell[0] - goal[0]) + abs(cell[1] - goal[1])

    open_list = [(heuristic(start), start[0], start[1])]
    g_score = {start: 0}
    came_from = {}
    closed = set()
    while open_list:
        _, row, col = heapq.heappop(open_list)
        current = (row, col)
        if current in closed:
            continue
        if current == goal:
            return PlanResult(_reconstruct_path(came_from, current), lookahead, g_score[current])
        closed.add(current)
        for d_row, d_col in _NEIGHBOURS:
            neighbour = (row + d_row, col + d_col)
            if neighbour in closed or not _passable(planning_grid, neighbour):
                continue
            tentative = g_score[current] + 1
            if tentative < g_score.get(neighbour, np.inf):
                came_from[neighbour] = current
                g_score[neighbour] = tentative
                heapq.heappush(open_list, (tentative + heuristic(neighbour), neighbour[0], neighbour[1]))
    return None


def _reconstruct_path(came_from: dict, current: Cell) -> List[Cell]:
    path = [current]
    while current in came_from:
        current = came_from[current]
        path.append(current)
    return path[::-1]


def distance_field(grid: OccupancyGrid, start: Cell) -> np.ndarray:
    """
    BFS step counts from start over non-Occupied cells, -1 where unreachable
    """
    distances = np.full(grid.shape, -1, dtype=np.int64)
    start = tuple(int(c) for c in start)
    if not _passable(grid, start):
        return distances
    distances[start] = 0
    queue = deque([start])
    while queue:
        row, col = queue.popleft()
        for d_row, d_col in _NEIGHBOURS:
            neighbour = (row + d_row, col + d_col)
            if _passable(grid, neighbour) and distances[neighbour] < 0:
                distances[neighbour] = distances[row, col] + 1
                queue.append(neighbour)
    return distances


def next_waypoint(plan: PlanResult) -> Cell:
    if not plan.path:
        raise PlanningError('Cannot take a waypoint from an empty path')
    return plan.path[min(plan.next_index, len(plan.path) - 1)]


def heading_error(state, waypoint: Tuple[float, float]) -> float:
    """Signed angle in (-pi, pi] from the agent heading to the waypoint direction"""
    desired = np.arctan2(waypoint[1] - state.y, waypoint[0] - state.x)
    error = (desired - state.heading) % (2 * np.pi)
    return float(error - 2 * np.pi if error > np.pi else error)


def action_toward(state, waypoint: Tuple[float, float]) -> Action:
    """
    Forward when the waypoint lies within half a turn step of the heading, otherwise the
    turn that closes the smaller angle; a waypoint straight behind turns left
    """
    error = heading_error(state, waypoint)
    if abs(error) <= HEADING_TOLERANCE + 1e-12:
        return Action.FORWARD
    if np.isclose(abs(error), np.pi):
        return Action.TURN_LEFT
    return Action.TURN_LEFT if error > 0 else Action.TURN_RIGHT


def line_of_sight(grid: OccupancyGrid, start: Tuple[float, float], end: Tuple[float, float]) -> bool:
    """True when every cell the straight segment start-end passes through is non-Occupied"""
    start, end = np.asarray(start, dtype=np.float64), np.asarray(end, dtype=np.float64)
    samples = max(int(np.ceil(4 * np.linalg.norm(end - start) / grid.resolution)), 1)
    return all(_passable(grid, grid.cell_of(*(start + fraction * (end - start))))
               for fraction in np.linspace(0.0, 1.0, samples + 1))


def visible_waypoint(plan: PlanResult, grid: OccupancyGrid, position: Tuple[float, float]) -> Cell:
    """
    next_waypoint pulled back along the path until the straight line from position to its
    center stays on non-Occupied cells, so heading for it does not cut an inflated corner.
    Falls back to the cell after the start.
    """
    last = len(plan.path) - 1
    for index in range(plan.path.index(next_waypoint(plan)), 1, -1):
        if line_of_sight(grid, position, grid.cell_center(*plan.path[index])):
            return plan.path[index]
    return plan.path[min(1, last)]


def unstuck_action(rng: np.random.Generator) -> Action:
    return MOVE_ACTIONS[int(rng.integers(len(MOVE_ACTIONS)))]


def write_plan_csv(plan: PlanResult, path: Path):
    with open(path, 'w', newline='') as fp:
        writer = csv.writer(fp)
        writer.writerow(['index', 'row', 'col'])
        for index, (row, col) in enumerate(plan.path):
            writer.writerow([index, row, col])
