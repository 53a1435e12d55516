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
from typing import Optional

from deux.enums import PolicyName
from deux.mapping import OccupancyGrid
from deux.policies.base import Cell, FrontierSeekingPolicy, StepContext, nearest_target

logger = logging.getLogger(__name__)


class FrontierPolicy(FrontierSeekingPolicy):
    """Classic frontier exploration: always head for the nearest reachable frontier"""
    name = PolicyName.FRONTIER

    def select_target(self, ctx: StepContext, agent_cell: Cell, planning: OccupancyGrid) -> Optional[Cell]:
        targets, distances = self.reachable_frontier_targets(ctx, agent_cell, planning)
        return nearest_target(targets, distances)
