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
Depth uncertainty guided exploration: the seed completor scores every frame with the
uncertainty residual, frontier targets are drawn toward the most uncertain places
"""

import logging
from typing import Optional

import numpy as np

from deux.enums import PolicyName
from deux.errors import ResidualUndefinedError, UndefinedLossError
from deux.losses import MAX_DELTA, LossBreakdown, LossWeights, total_loss, uncertainty_residual
from deux.mapping import OccupancyGrid
from deux.policies.base import Cell, FrontierSeekingPolicy, StepContext
from deux.policies.residuals import DEFAULT_TOP_FRACTION, ResidualRegistry, deux_sample_target

logger = logging.getLogger(__name__)


class DeuxPolicy(FrontierSeekingPolicy):
    name = PolicyName.DEUX

    def __init__(self, seed_completor, top_fraction: float = DEFAULT_TOP_FRACTION,
                 residual_metric: str = 'l1', loss_weights: LossWeights = LossWeights(), **kwargs):
        super().__init__(**kwargs)
        self.seed_completor = seed_completor
        self.top_fraction = top_fraction
        self.residual_metric = residual_metric
        self.loss_weights = loss_weights
        self.registry = ResidualRegistry()

    def reset(self, scene, rng: np.random.Generator):
        super().reset(scene, rng)
        self.registry = ResidualRegistry()

    def record_residual(self, ctx: StepContext) -> Optional[float]:
        """delta of the current frame against the two previous ones, None during warm-up"""
        self.last_breakdown = None
        if len(ctx.frames) < 3 or ctx.sparse is None or len(ctx.sparse) == 0:
            return None
        frame_tm2, frame_tm1, frame_t = ctx.frames[-3:]
        pred = self.seed_completor.predict(frame_t, ctx.sparse)
        self.last_breakdown = self.loss_breakdown(ctx, pred)
        try:
            delta = uncertainty_residual(frame_t, frame_tm1, frame_tm2, pred, self.residual_metric)
        except ResidualUndefinedError as e:
            logger.debug(f't={ctx.timestep}: {e}, treating the frame as maximally uncertain')
            delta = MAX_DELTA
        self.registry.add(ctx.timestep, frame_t.pose, delta)
        return delta

    def loss_breakdown(self, ctx: StepContext, pred: np.ndarray) -> Optional[LossBreakdown]:
        """Loss terms of the seed prediction, logged per step; None when a term is undefined"""
        frame_tm2, frame_tm1, frame_t = ctx.frames[-3:]
        try:
            return total_loss(frame_t, frame_tm1, frame_tm2, pred, ctx.sparse, self.loss_weights)
        except UndefinedLossError as e:
            logger.debug(f't={ctx.timestep}: no loss breakdown, {e}')
            return None

    def act(self, ctx: StepContext):
        self.last_delta = self.record_residual(ctx)
        return super().act(ctx)

    def select_target(self, ctx: StepContext, agent_cell: Cell, planning: OccupancyGrid) -> Optional[Cell]:
        targets, distances = self.reachable_frontier_targets(ctx, agent_cell, planning)
        return deux_sample_target(targets, self.registry, ctx.grid, agent_cell, self.top_fraction, distances)
