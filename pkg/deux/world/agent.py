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
The embodied agent: its state, the discrete action transition and the observed Frame
"""

import logging
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from deux.enums import Action
from deux.geometry import Intrinsics, Pose
from deux.world.scene import Scene, HEADING_STEPS

logger = logging.getLogger(__name__)

FORWARD_STEP = 0.25
TURN_STEP = 2 * np.pi / HEADING_STEPS


@dataclass(frozen=True)
class AgentState:
    """
    Position in meters on the floor plane, heading as a count of 10 degree turns
    (0 looks along +x, turning left increases it)
    """
    x: float
    y: float
    heading_index: int = 0
    collided_last: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'heading_index', int(self.heading_index) % HEADING_STEPS)

    @property
    def heading(self) -> float:
        """Radians in [0, 2 pi)"""
        return self.heading_index * TURN_STEP

    @property
    def position(self) -> Tuple[float, float]:
        return self.x, self.y

    @classmethod
    def spawn(cls, scene: Scene) -> 'AgentState':
        x, y, heading_index = scene.spawn
        return cls(x, y, heading_index)

    def cell(self, scene: Scene) -> Tuple[int, int]:
        return scene.cell_of(self.x, self.y)

    def camera_pose(self, scene: Scene) -> Pose:
        """World-from-camera pose, camera axes right / down / forward"""
        c, s = np.cos(self.heading), np.sin(self.heading)
        rotation = np.array([[s, 0.0, c],
                             [-c, 0.0, s],
                             [0.0, -1.0, 0.0]])
        return Pose(rotation, [self.x, self.y, scene.camera_z], validate=False)


@dataclass
class Frame:
    """One RGB-D observation"""
    rgb: np.ndarray
    depth_gt: np.ndarray
    pose: Pose
    intrinsics: Intrinsics
    timestep: int = 0


def step(scene: Scene, state: AgentState, a: Action) -> AgentState:
    if a == Action.STOP:
        return state
    if a == Action.TURN_LEFT:
        return replace(state, heading_index=state.heading_index + 1, collided_last=False)
    if a == Action.TURN_RIGHT:
        return replace(state, heading_index=state.heading_index - 1, collided_last=False)

    dx, dy = FORWARD_STEP * np.cos(state.heading), FORWARD_STEP * np.sin(state.heading)
    target = (state.x + dx, state.y + dy)
    midpoint = (state.x + dx / 2, state.y + dy / 2)
    if not all(scene.is_navigable(*scene.cell_of(*point)) for point in (midpoint, target)):
        logger.debug(f'Forward from ({state.x:.2f}, {state.y:.2f}) blocked')
        return replace(state, collided_last=True)
    return replace(state, x=float(target[0]), y=float(target[1]), collided_last=False)
