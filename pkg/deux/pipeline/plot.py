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
Top-down trajectory images: one pixel per map cell, black for unexplored, green for explored
free space, white for obstacles. The trajectory is drawn over the map with a hue going from
blue at the first pose to red at the last one.
"""

import colorsys
import logging
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from deux.enums import CellState
from deux.errors import ArgumentError
from deux.mapping import OccupancyGrid
from deux.pipeline.episode import EpisodeRecord
from deux.pipeline.frame_io import write_ppm

logger = logging.getLogger(__name__)

MAP_COLORS = {
    CellState.UNKNOWN: (0.0, 0.0, 0.0),
    CellState.FREE: (0.0, 1.0, 0.0),
    CellState.OCCUPIED: (1.0, 1.0, 1.0),
}
START_HUE = 2.0 / 3.0
END_HUE = 0.0


def bresenham_line(r0: int, c0: int, r1: int, c1: int) -> Iterator[Tuple[int, int]]:
    """Cells of the digital line from (r0, c0) to (r1, c1), both ends included"""
    dr, dc = abs(r1 - r0), -abs(c1 - c0)
    step_r = 1 if r0 < r1 else -1
    step_c = 1 if c0 < c1 else -1
    err = dr + dc
    while True:
        yield r0, c0
        if r0 == r1 and c0 == c1:
            return
        e2 = 2 * err
        if e2 >= dc:
            err += dc
            r0 += step_r
        if e2 <= dr:
            err += dr
            c0 += step_c


def time_color(index: int, count: int) -> Tuple[float, float, float]:
    fraction = index / (count - 1) if count > 1 else 0.0
    return colorsys.hsv_to_rgb(START_HUE + (END_HUE - START_HUE) * fraction, 1.0, 1.0)


def map_image(grid: OccupancyGrid) -> np.ndarray:
    image = np.zeros(grid.shape + (3,), dtype=np.float64)
    for state, color in MAP_COLORS.items():
        image[grid.cells == state] = color
    return image


def trajectory_cells(grid: OccupancyGrid, positions: Sequence[Tuple[float, float]]) -> List[Tuple[int, int]]:
    cells = [grid.cell_of(x, y) for x, y in positions]
    return [cell for cell in cells if grid.in_bounds(*cell)]


def render_trajectory_image(grid: OccupancyGrid, positions: Sequence[Tuple[float, float]]) -> np.ndarray:
    if not positions:
        raise ArgumentError('A trajectory plot needs at least one pose')
    image = map_image(grid)
    cells = trajectory_cells(grid, positions)
    for index, (start, end) in enumerate(zip(cells, cells[1:] + cells[-1:])):
        color = time_color(index, len(cells))
        for row, col in bresenham_line(*start, *end):
            image[row, col] = color
    return image


def render_trajectory_plot(record: EpisodeRecord, path: Path, grid: Optional[OccupancyGrid] = None) -> Path:
    """
    Writes the PPM of the episode over grid (the final map of the episode when grid is None)
    """
    grid = record.grid if grid is None else grid
    if grid is None:
        raise ArgumentError('The episode carries no map snapshot to draw on')
    image = render_trajectory_image(grid, [(step.x, step.y) for step in record.steps])
    path = Path(path)
    write_ppm(path, image)
    logger.info(f'Wrote trajectory plot of {len(record)} poses to {path}')
    return path
