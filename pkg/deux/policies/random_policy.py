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
from typing import List

import numpy as np

from deux.enums import Action, PolicyName
from deux.planning import unstuck_action
from deux.policies.base import ExplorationPolicy, StepContext

logger = logging.getLogger(__name__)

MAX_UNSTUCK_TURNS = 9


class RandomPolicy(ExplorationPolicy):
    """
    Uniform random moves. After a blocked Forward the agent turns 1-9 times in the
    episode's turn direction, then retries Forward.
    """
    name = PolicyName.RANDOM

    def __init__(self):
        super().__init__()
        self.turn = Action.TURN_LEFT
        self.pending: List[Action] = []

    def reset(self, scene, rng: np.random.Generator):
        super().reset(scene, rng)
        self.turn = Action.TURN_LEFT if rng.integers(2) == 0 else Action.TURN_RIGHT
        self.pending = []

    def act(self, ctx: StepContext) -> Action:
        if ctx.state.collided_last and not self.pending:
            n_turns = int(ctx.rng.integers(1, MAX_UNSTUCK_TURNS + 1))
            self.pending = [self.turn] * n_turns + [Action.FORWARD]
            logger.debug(f't={ctx.timestep}: collided, turning {n_turns}x {self.turn}')
        if self.pending:
            return self.pending.pop(0)
        return unstuck_action(ctx.rng)
