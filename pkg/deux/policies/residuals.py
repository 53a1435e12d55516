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
Residual registry: the (timestep, pose, delta) records a DEUX episode accumulates, and the
depth-guided target choice built on it
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from deux.errors import ArgumentError
from deux.geometry import Pose

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]

DEFAULT_TOP_FRACTION = 0.1


@dataclass(frozen=True)
class ResidualRecord:
    timestep: int
    pose: Pose
    delta: float


class ResidualRegistry:
    """Time ordered, at most one record per timestep, delta in [0, 1)"""

    def __init__(self):
        self.records: List[ResidualRecord] = []

    def add(self, timestep: int, pose: Pose, delta: float):
        if not 0.0 <= delta < 1.0:
            raise ArgumentError(f'Residual {delta} outside of [0, 1)')
        if self.records and timestep <= self.records[-1].timestep:
            raise ArgumentError(f'Residual for timestep {timestep} is not newer than {self.records[-1].timestep}')
        self.records.append(ResidualRecord(int(timestep), pose, float(delta)))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def deltas(self) -> np.ndarray:
        return np.array([r.delta for r in self.records], dtype=np.float64)

    def positions(self) -> np.ndarray:
        """(N, 2) floor plane positions of the records"""
        return np.array([r.pose.translation[:2] for r in self.records], dtype=np.float64).reshape(-1, 2)

    def top_records(self, top_fraction: float = DEFAULT_TOP_FRACTION) -> Tuple[np.ndarray, np.ndarray]:
        """Positions and deltas of the records at or above the (1 - top_fraction) quantile"""
        deltas = self.deltas()
        if deltas.size == 0:
            return np.empty((0, 2)), deltas
        threshold = np.quantile(deltas, 1.0 - top_fraction)
        keep = deltas >= threshold
        return self.positions()[keep], deltas[keep]


def target_scores(candidates: List[Cell], registry: ResidualRegistry, resolution: float,
                  origin: Tuple[float, float] = (0.0, 0.0), top_fraction: float = DEFAULT_TOP_FRACTION) -> np.ndarray:
    """
    score(f) = max_i delta_i / (1 + distance in meters between f and pose_i), over the top
    records of the registry
    """
    positions, deltas = registry.top_records(top_fraction)
    cells = np.array(candidates, dtype=np.float64).reshape(-1, 2)
    centers = np.asarray(origin) + (cells + 0.5) * resolution
    distances = np.linalg.norm(centers[:, None, :] - positions[None, :, :], axis=2)
    return (deltas[None, :] / (1.0 + distances)).max(axis=1)


def deux_sample_target(frontiers: List[Cell], registry: ResidualRegistry, grid, agent_cell: Cell,
                       top_fraction: float = DEFAULT_TOP_FRACTION,
                       distances: Optional[np.ndarray] = None) -> Optional[Cell]:
    """
    Picks the frontier representative closest to the most uncertain places seen so far.
    Highest score wins, ties by the lower (row, col). An empty registry falls back to the
    frontier nearest to the agent (path distance when given, straight line otherwise).
    Returns None without frontiers.
    """
    if not frontiers:
        return None
    ordered = sorted(frontiers)
    if len(registry) == 0:
        def distance(cell):
            if distances is not None and distances[cell] >= 0:
                return distances[cell]
            return np.hypot(cell[0] - agent_cell[0], cell[1] - agent_cell[1])
        return min(ordered, key=lambda cell: (distance(cell), cell))
    scores = target_scores(ordered, registry, grid.resolution, grid.origin, top_fraction)
    # argmax returns the first maximum, ordered by (row, col)
    return ordered[int(np.argmax(scores))]
