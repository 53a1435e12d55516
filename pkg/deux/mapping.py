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
2D top-down occupancy mapping from depth frames, frontier extraction and the planning view
(obstacle inflation, unknown treated as occupied)
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from scipy import ndimage

from deux.enums import CellState, MIN_DEPTH, MAX_DEPTH
from deux.errors import ArgumentError, DatasetFormatError
from deux.geometry import Intrinsics, Pose, backproject_map

logger = logging.getLogger(__name__)

OBSTACLE_BAND = (0.1, 1.5)
# points are pushed this far along their ray so faces on cell borders land in the hit cell
SURFACE_PUSH = 0.01
RAY_SAMPLES_PER_CELL = 4
MIN_FRONTIER_CLUSTER = 3

PGM_VALUES = {CellState.UNKNOWN: 0, CellState.FREE: 128, CellState.OCCUPIED: 255}

_FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)
_EIGHT_CONNECTED = ndimage.generate_binary_structure(2, 2)


class OccupancyGrid:
    """
    h x w cells of CellState values; cell (row, col) covers
    [origin_x + row * res, origin_x + (row + 1) * res) x [origin_y + col * res, ...)
    """

    def __init__(self, cells: np.ndarray, resolution: float, origin: Tuple[float, float] = (0.0, 0.0)):
        if resolution <= 0:
            raise ArgumentError(f'Grid resolution must be positive, got {resolution}')
        self.cells = np.asarray(cells, dtype=np.int8)
        self.resolution = float(resolution)
        self.origin = (float(origin[0]), float(origin[1]))

    @classmethod
    def empty(cls, shape: Tuple[int, int], resolution: float, origin: Tuple[float, float] = (0.0, 0.0)):
        return cls(np.full(shape, CellState.UNKNOWN, dtype=np.int8), resolution, origin)

    @classmethod
    def for_scene(cls, scene) -> 'OccupancyGrid':
        """Unknown grid aligned with the scene voxels, origin at the bounding box corner"""
        return cls.empty(scene.shape[:2], scene.cell_size)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.cells.shape

    def copy(self) -> 'OccupancyGrid':
        return OccupancyGrid(self.cells.copy(), self.resolution, self.origin)

    def cell_of(self, x: float, y: float) -> Tuple[int, int]:
        return (int(np.floor((x - self.origin[0]) / self.resolution)),
                int(np.floor((y - self.origin[1]) / self.resolution)))

    def cell_center(self, row: int, col: int) -> Tuple[float, float]:
        return (self.origin[0] + (row + 0.5) * self.resolution,
                self.origin[1] + (col + 0.5) * self.resolution)

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.shape[0] and 0 <= col < self.shape[1]

    def count(self, state: CellState) -> int:
        return int(np.count_nonzero(self.cells == state))

    def __eq__(self, other):
        return isinstance(other, OccupancyGrid) and np.array_equal(self.cells, other.cells) and \
            self.resolution == other.resolution and self.origin == other.origin


@dataclass(frozen=True)
class Frontier:
    cell: Tuple[int, int]
    cluster_id: int
    cluster_size: int


@dataclass
class PointClasses:
    """Backprojected depth pixels classified for integration, all arrays flattened"""
    xy: np.ndarray
    obstacle: np.ndarray
    floor: np.ndarray
    clipped: np.ndarray
    used: np.ndarray


def classify_points(pose: Pose, depth: np.ndarray, k: Intrinsics, floor_height: float) -> PointClasses:
    """
    Splits depth pixels into obstacle hits (height above floor inside OBSTACLE_BAND), floor
    returns (below the band) and clipped readings (at the far limit). Pixels at the near
    limit are unused.
    """
    rays = backproject_map(np.ones_like(depth), k).reshape(-1, 3)
    d = depth.reshape(-1)
    used = np.isfinite(d) & (d > MIN_DEPTH)
    clipped = used & (d >= MAX_DEPTH)
    measured = used & ~clipped
    points = pose.apply(rays * (np.minimum(d, MAX_DEPTH) + SURFACE_PUSH)[:, None])
    height = points[:, 2] - floor_height
    obstacle = measured & (height >= OBSTACLE_BAND[0]) & (height <= OBSTACLE_BAND[1])
    floor = measured & (height < OBSTACLE_BAND[0])
    return PointClasses(xy=points[:, :2], obstacle=obstacle, floor=floor, clipped=clipped, used=used)


def _trace_free(grid: OccupancyGrid, start: Tuple[float, float], ends: np.ndarray,
                include_end: np.ndarray) -> np.ndarray:
    """
    Cells crossed by the horizontal segments start -> ends (sampled densely), as a boolean mask
    """
    free = np.zeros(grid.shape, dtype=bool)
    if len(ends) == 0:
        return free
    start = np.asarray(start)
    lengths = np.linalg.norm(ends - start, axis=1)
    n_samples = int(np.ceil(lengths.max() / grid.resolution * RAY_SAMPLES_PER_CELL)) + 1
    fractions = np.linspace(0.0, 1.0, n_samples)
    samples = start + (ends - start)[:, None, :] * fractions[None, :, None]
    rows = np.floor((samples[..., 0] - grid.origin[0]) / grid.resolution).astype(np.int64)
    cols = np.floor((samples[..., 1] - grid.origin[1]) / grid.resolution).astype(np.int64)

    end_rows = np.floor((ends[:, 0] - grid.origin[0]) / grid.resolution).astype(np.int64)
    end_cols = np.floor((ends[:, 1] - grid.origin[1]) / grid.resolution).astype(np.int64)
    keep = (rows >= 0) & (rows < grid.shape[0]) & (cols >= 0) & (cols < grid.shape[1])
    at_end = (rows == end_rows[:, None]) & (cols == end_cols[:, None])
    keep &= ~at_end | include_end[:, None]
    free[rows[keep], cols[keep]] = True
    return free


def integrate(grid: OccupancyGrid, frame_pose: Pose, depth: np.ndarray, k: Intrinsics,
              floor_height: float = 0.25) -> OccupancyGrid:
    """
    Returns a new grid with the frame's evidence added. Obstacle points mark their cell
    Occupied, the 2D rays from the camera to every endpoint mark Free (floor endpoints
    included, obstacle and clipped endpoints excluded). Occupied cells never change back.
    """
    result = grid.copy()
    points = classify_points(frame_pose, depth, k, floor_height)
    start = (float(frame_pose.translation[0]), float(frame_pose.translation[1]))

    ray_end = points.used & ~(points.floor | points.obstacle | points.clipped)
    segments = []
    for mask, include in ((points.floor, True), (points.obstacle | points.clipped | ray_end, False)):
        if not mask.any():
            continue
        # one ray per endpoint cell, aimed at the cell center
        cells = np.unique(np.floor((points.xy[mask] - grid.origin) / grid.resolution).astype(np.int64), axis=0)
        centers = (cells + 0.5) * grid.resolution + np.asarray(grid.origin)
        segments.append((centers, np.full(len(cells), include)))
    if segments:
        ends = np.concatenate([s[0] for s in segments])
        include_end = np.concatenate([s[1] for s in segments])
        free = _trace_free(grid, start, ends, include_end)
        result.cells[free & (result.cells != CellState.OCCUPIED)] = CellState.FREE

    if points.obstacle.any():
        xy = points.xy[points.obstacle]
        rows = np.floor((xy[:, 0] - grid.origin[0]) / grid.resolution).astype(np.int64)
        cols = np.floor((xy[:, 1] - grid.origin[1]) / grid.resolution).astype(np.int64)
        inside = (rows >= 0) & (rows < grid.shape[0]) & (cols >= 0) & (cols < grid.shape[1])
        result.cells[rows[inside], cols[inside]] = CellState.OCCUPIED

    agent = result.cell_of(*start)
    if result.in_bounds(*agent):
        result.cells[agent] = CellState.FREE
    return result


def frontier_mask(grid: OccupancyGrid) -> np.ndarray:
    """Free cells 4-adjacent to at least one Unknown cell"""
    unknown = grid.cells == CellState.UNKNOWN
    near_unknown = ndimage.binary_dilation(unknown, structure=_FOUR_CONNECTED)
    return (grid.cells == CellState.FREE) & near_unknown


def extract_frontiers(grid: OccupancyGrid, min_cluster_size: int = MIN_FRONTIER_CLUSTER) -> List[Frontier]:
    """
    Frontier cells grouped into 8-connected clusters; clusters below min_cluster_size are
    dropped. Returned in (row, col) order, cluster ids numbered from 0 in raster order.
    """
    labels, n_labels = ndimage.label(frontier_mask(grid), structure=_EIGHT_CONNECTED)
    if n_labels == 0:
        return []
    sizes = np.bincount(labels.reshape(-1), minlength=n_labels + 1)
    frontiers = []
    cluster_ids = {}
    for row, col in np.argwhere(labels > 0):
        label = labels[row, col]
        if sizes[label] < min_cluster_size:
            continue
        cluster_id = cluster_ids.setdefault(label, len(cluster_ids))
        frontiers.append(Frontier((int(row), int(col)), cluster_id, int(sizes[label])))
    return frontiers


def frontier_targets(frontiers: List[Frontier], allowed: Optional[np.ndarray] = None) -> List[Tuple[int, int]]:
    """
    One representative per cluster: the member closest to the cluster centroid,
    ties broken by the lower (row, col). With an allowed mask the representative is chosen
    among the allowed members only and clusters without any are skipped.
    """
    clusters = {}
    for frontier in frontiers:
        clusters.setdefault(frontier.cluster_id, []).append(frontier.cell)
    targets = []
    for cluster_id in sorted(clusters):
        members = np.array(sorted(clusters[cluster_id]))
        centroid = members.mean(axis=0)
        cells = members if allowed is None else members[allowed[members[:, 0], members[:, 1]]]
        if len(cells) == 0:
            continue
        distances = np.linalg.norm(cells - centroid, axis=1)
        targets.append(tuple(int(c) for c in cells[int(np.argmin(distances))]))
    return targets


def process_map(grid: OccupancyGrid, keep_free: Optional[Tuple[int, int]] = None) -> OccupancyGrid:
    """
    Planning view: Occupied cells inflated by one cell (Chebyshev), Unknown treated as
    Occupied. keep_free (the agent's cell) is left Free so planning can start from it.
    """
    occupied = grid.cells == CellState.OCCUPIED
    blocked = ndimage.binary_dilation(occupied, structure=_EIGHT_CONNECTED) | (grid.cells == CellState.UNKNOWN)
    cells = np.where(blocked, CellState.OCCUPIED, CellState.FREE).astype(np.int8)
    if keep_free is not None and grid.in_bounds(*keep_free):
        cells[keep_free] = CellState.FREE
    return OccupancyGrid(cells, grid.resolution, grid.origin)


# --- persistence ---------------------------------------------------------------------------------

def write_pgm(grid: OccupancyGrid, path: Path):
    """Binary PGM, 0 = Unknown, 128 = Free, 255 = Occupied"""
    image = np.zeros(grid.shape, dtype=np.uint8)
    for state, value in PGM_VALUES.items():
        image[grid.cells == state] = value
    with open(path, 'wb') as fp:
        fp.write(f'P5\n{grid.shape[1]} {grid.shape[0]}\n255\n'.encode('ascii'))
        fp.write(image.tobytes())
    meta = {'origin': list(grid.origin), 'resolution': grid.resolution}
    Path(path).with_suffix('.json').write_text(json.dumps(meta, indent=4))


def read_pgm(path: Path) -> OccupancyGrid:
    path = Path(path)
    data = path.read_bytes()
    parts = data.split(maxsplit=4)
    if len(parts) < 5 or parts[0] != b'P5':
        raise DatasetFormatError(f'{path} is not a binary PGM file')
    width, height = int(parts[1]), int(parts[2])
    pixels = np.frombuffer(data[-width * height:], dtype=np.uint8).reshape(height, width)
    cells = np.full(pixels.shape, CellState.UNKNOWN, dtype=np.int8)
    for state, value in PGM_VALUES.items():
        cells[pixels == value] = state
    meta_path = path.with_suffix('.json')
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {'origin': [0.0, 0.0], 'resolution': 0.25}
    return OccupancyGrid(cells, meta['resolution'], tuple(meta['origin']))
