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

from enum import Enum, IntEnum


class Action(Enum):
    FORWARD = "forward"
    TURN_LEFT = "turn_left"
    TURN_RIGHT = "turn_right"
    STOP = "stop"

    def __str__(self):
        return str(self.value)


MOVE_ACTIONS = (Action.FORWARD, Action.TURN_LEFT, Action.TURN_RIGHT)


class CellState(IntEnum):
    UNKNOWN = 0
    FREE = 1
    OCCUPIED = 2


class PolicyName(Enum):
    RANDOM = "random"
    FRONTIER = "frontier"
    ORACLE = "oracle"
    DEUX = "deux"
    # scripted test trajectories, not selectable as a training policy
    SWEEP = "sweep"

    def __str__(self):
        return str(self.value)


class WorldFamily(Enum):
    APARTMENT = "apartment"
    WAREHOUSE = "warehouse"

    def __str__(self):
        return str(self.value)


class CompletorKind(Enum):
    CLASSICAL = "classical"
    GROUND_TRUTH = "ground_truth"

    def __str__(self):
        return str(self.value)


MIN_DEPTH = 0.1
MAX_DEPTH = 10.0

SCENE_MAGIC = b'DEUXWRLD'
SCENE_FORMAT_VERSION = 1
DEPTH_MAGIC = b'DEUXDPTH'
DATASET_LAYOUT_VERSION = 1

MANIFEST_FILENAME = 'manifest.json'
SEED_MODEL_CONFIG_FILENAME = 'conf.ini'
SEED_MODEL_PARAMS_FILENAME = 'params.json'
REPORT_CSV_FILENAME = 'report.csv'
REPORT_JSON_FILENAME = 'report.json'
PREDICTIONS_FILENAME = 'predictions.h5'
PLANS_DIRNAME = 'plans'

if __name__ == '__main__':
    pass
