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
Shared policy interface, the per-step context a policy sees and the MDP reward
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Set, Tuple

import numpy as np

from deux.enums import Action, CellState, PolicyName
from deux.errors import ArgumentError
from deux.losses import SparseDepth
from deux.mapping import OccupancyGrid, extract_frontiers, frontier_mask, frontier_targets, process_map
from deux.planning import (astar, distance_field, action_toward, unstuck_action, visible_waypoint, write_plan_csv,
                           DEFAULT_LOOKAHEAD)
from deux.world import AgentState, Frame, Scene
from deux.world.agent import FORWARD_STEP

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]

DEFAULT_REACH_RADIUS = 2


@dataclass(frozen=True)
class EpisodeBudget:
    """T_exp, the number of actions an episode may take"""
    max_steps: int = 500

    def __post_init__(self):
        if self.max_steps < 1:
            raise ArgumentError(f'Episode budget must be at least one step, got {self.max_steps}')


@dataclass
class StepContext:
    """
    What a policy sees at timestep t: the state, the map integrated up to t and the latest
    frames in time order (at most three, the current one last)
    """
    scene: Scene
    state: AgentState
    grid: OccupancyGrid
    frames: Sequence[Frame]
    sparse: Optional[SparseDepth]
    timestep: int
    rng: np.random.Generator

    @property
    def frame(self) -> Frame:
        return self.frames[-1]


def reward(delta: float) -> float:
    """r_t = -delta_t"""
    if not 0.0 <= delta < 1.0:
        raise ArgumentError(f'Uncertainty residual must lie in [0, 1), got {delta}')
    return -float(delta)


class ExplorationPolicy(ABC):
    """
    One instance drives exactly one episode: reset() is called with the scene and the
    episode rng, then act() once per timestep.
    """
    name: PolicyName = None

    def __init__(self):
        self.target: Optional[Cell] = None
        self.last_delta: Optional[float] = None
        self.last_breakdown = None

    def reset(self, scene: Scene, rng: np.random.Generator):
        self.target = None
        self.last_delta = None
        self.last_breakdown = None

    @abstractmethod
    def act(self, ctx: StepContext) -> Action:
        pass


class TargetedPolicy(ExplorationPolicy):
    """
    Target following loop shared by the map based policies: pick a target when there is
    none (or it was reached), plan on the processed map every step, walk toward the
    lookahead waypoint, fall back to a random move when nothing can be planned.
    Cells a Forward move bumped into stay blocked in the planning view for the episode.
    """

    def __init__(self, reach_radius_cells: float = DEFAULT_REACH_RADIUS, lookahead: int = DEFAULT_LOOKAHEAD):
        super().__init__()
        self.reach_radius_cells = reach_radius_cells
        self.lookahead = lookahead
        self.blocked_cells: Set[Cell] = set()
        # when set, every plan is written there as plan_<t>.csv
        self.plan_dir: Optional[Path] = None

    def reset(self, scene: Scene, rng: np.random.Generator):
        super().reset(scene, rng)
        self.blocked_cells = set()

    def reached(self, agent_cell: Cell) -> bool:
        return self.target is not None and \
            np.hypot(agent_cell[0] - self.target[0], agent_cell[1] - self.target[1]) <= self.reach_radius_cells

    def planning_grid(self, ctx: StepContext, agent_cell: Cell) -> OccupancyGrid:
        return process_map(ctx.grid, keep_free=agent_cell)

    def target_is_stale(self, ctx: StepContext) -> bool:
        return False

    @abstractmethod
    def select_target(self, ctx: StepContext, agent_cell: Cell, planning: OccupancyGrid) -> Optional[Cell]:
        pass

    def on_target_reached(self):
        pass

    def no_target_action(self, ctx: StepContext) -> Action:
        return unstuck_action(ctx.rng)

    def remember_collision(self, ctx: StepContext, agent_cell: Cell):
        """Blocks the first cell the failed Forward move tried to enter"""
        state = ctx.state
        for distance in (FORWARD_STEP / 2, FORWARD_STEP):
            cell = ctx.grid.cell_of(state.x + distance * np.cos(state.heading),
                                    state.y + distance * np.sin(state.heading))
            if cell != agent_cell:
                if ctx.grid.in_bounds(*cell):
                    self.blocked_cells.add(cell)
                return

    def with_blocked_cells(self, planning: OccupancyGrid, agent_cell: Cell) -> OccupancyGrid:
        if not self.blocked_cells:
            return planning
        cells = planning.cells.copy()
        for cell in self.blocked_cells - {agent_cell}:
            cells[cell] = CellState.OCCUPIED
        return OccupancyGrid(cells, planning.resolution, planning.origin)

    def act(self, ctx: StepContext) -> Action:
        agent_cell = ctx.grid.cell_of(ctx.state.x, ctx.state.y)
        if ctx.state.collided_last:
            self.remember_collision(ctx, agent_cell)
        if self.reached(agent_cell):
            logger.debug(f't={ctx.timestep}: reached target {self.target}')
            self.target = None
            self.on_target_reached()
        elif self.target is not None and self.target_is_stale(ctx):
            self.target = None

        planning = self.with_blocked_cells(self.planning_grid(ctx, agent_cell), agent_cell)
        if self.target is None:
            self.target = self.select_target(ctx, agent_cell, planning)
            if self.target is None:
                return self.no_target_action(ctx)
            logger.debug(f't={ctx.timestep}: new target {self.target}')

        plan = astar(planning, agent_cell, self.target, self.lookahead)
        if plan is None:
            logger.debug(f't={ctx.timestep}: no path to {self.target}, unstuck')
            self.target = None
            return unstuck_action(ctx.rng)
        if self.plan_dir is not None:
            write_plan_csv(plan, Path(self.plan_dir) / f'plan_{ctx.timestep:05d}.csv')
        waypoint = visible_waypoint(plan, planning, (ctx.state.x, ctx.state.y))
        action = action_toward(ctx.state, planning.cell_center(*waypoint))
        if action == Action.FORWARD and ctx.state.collided_last:
            # the same move was just blocked
            return Action.TURN_LEFT if ctx.rng.integers(2) == 0 else Action.TURN_RIGHT
        return action


class FrontierSeekingPolicy(TargetedPolicy):
    """Targets are representatives of the current frontier clusters"""

    def target_is_stale(self, ctx: StepContext) -> bool:
        return not frontier_mask(ctx.grid)[self.target]

    @staticmethod
    def reachable_frontier_targets(ctx: StepContext, agent_cell: Cell,
                                   planning: OccupancyGrid) -> Tuple[List[Cell], np.ndarray]:
        distances = distance_field(planning, agent_cell)
        targets = frontier_targets(extract_frontiers(ctx.grid), allowed=distances >= 0)
        return targets, distances


def nearest_target(targets: List[Cell], distances: np.ndarray) -> Optional[Cell]:
    """Smallest path distance, ties by (row, col)"""
    if not targets:
        return None
    return min(targets, key=lambda cell: (distances[cell], cell))
