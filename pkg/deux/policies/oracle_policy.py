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

import logging
from typing import List, Optional

import numpy as np

from deux.enums import Action, CellState, PolicyName
from deux.errors import ArgumentError
from deux.mapping import OccupancyGrid, process_map
from deux.planning import distance_field
from deux.policies.base import Cell, StepContext, TargetedPolicy
from deux.world import Scene

logger = logging.getLogger(__name__)

DEFAULT_N_TARGETS = 10


def true_grid(scene: Scene) -> OccupancyGrid:
    """The privileged map: every navigable cell Free, everything else Occupied"""
    cells = np.where(scene.navigable, CellState.FREE, CellState.OCCUPIED).astype(np.int8)
    return OccupancyGrid(cells, scene.cell_size)


def sample_oracle_targets(scene: Scene, rng: np.random.Generator, n_targets: int = DEFAULT_N_TARGETS) -> List[Cell]:
    """
    Uniform draw without replacement over the cells reachable from spawn in the processed
    true map
    """
    spawn_cell = scene.cell_of(scene.spawn[0], scene.spawn[1])
    planning = process_map(true_grid(scene), keep_free=spawn_cell)
    reachable = np.argwhere(distance_field(planning, spawn_cell) > 0)
    if len(reachable) == 0:
        raise ArgumentError(f'No reachable oracle targets in {scene}')
    chosen = rng.choice(len(reachable), size=min(n_targets, len(reachable)), replace=False)
    return [tuple(int(c) for c in reachable[i]) for i in chosen]


class OraclePolicy(TargetedPolicy):
    """
    Visits pre-sampled reachable targets in list order, planning on the true map.
    Emits Stop once every target was visited.
    """
    name = PolicyName.ORACLE

    def __init__(self, n_targets: int = DEFAULT_N_TARGETS, targets: Optional[List[Cell]] = None, **kwargs):
        super().__init__(**kwargs)
        if n_targets < 1:
            raise ArgumentError('The oracle needs at least one target')
        self.n_targets = n_targets
        self.fixed_targets = None if targets is None else [tuple(t) for t in targets]
        self.queue: List[Cell] = []
        self._true_grid: Optional[OccupancyGrid] = None

    def reset(self, scene: Scene, rng: np.random.Generator):
        super().reset(scene, rng)
        self._true_grid = true_grid(scene)
        if self.fixed_targets is not None:
            self.queue = list(self.fixed_targets)
        else:
            self.queue = sample_oracle_targets(scene, rng, self.n_targets)
        logger.debug(f'Oracle targets: {self.queue}')

    def planning_grid(self, ctx: StepContext, agent_cell: Cell) -> OccupancyGrid:
        return process_map(self._true_grid, keep_free=agent_cell)

    def on_target_reached(self):
        if self.queue:
            self.queue.pop(0)

    def select_target(self, ctx: StepContext, agent_cell: Cell, planning: OccupancyGrid) -> Optional[Cell]:
        while self.queue:
            self.target = self.queue[0]
            if not self.reached(agent_cell):
                return self.queue[0]
            self.queue.pop(0)
        return None

    def no_target_action(self, ctx: StepContext) -> Action:
        return Action.STOP
