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
Hand-built scenes and small cameras shared by the tests
"""
from typing import Tuple

import numpy as np

from deux.enums import WorldFamily
from deux.geometry import Intrinsics
from deux.world import Room, Scene


def small_intrinsics(size: int = 32) -> Intrinsics:
    """90 degree field of view, like the default camera"""
    return Intrinsics(fx=size / 2, fy=size / 2, cx=size / 2, cy=size / 2, width=size, height=size)


def box_scene(nx: int = 20, ny: int = 12, nz: int = 12, spawn: Tuple[float, float, int] = (2.75, 1.375, 0),
              seed: int = 0, obstacles=()) -> Scene:
    """
    Closed empty room: one ring of wall cells, floor and ceiling slabs, textured albedo.
    obstacles are (row, col) floor cells filled up to the ceiling.
    """
    occupied = np.zeros((nx, ny, nz), dtype=bool)
    occupied[0], occupied[-1] = True, True
    occupied[:, 0], occupied[:, -1] = True, True
    occupied[:, :, 0], occupied[:, :, -1] = True, True
    for row, col in obstacles:
        occupied[row, col, :] = True
    albedo = np.random.default_rng(seed).integers(60, 200, size=(nx, ny, nz, 3)).astype(np.uint8)
    room = Room(1, 1, nx - 1, ny - 1, 0.15)
    return Scene(occupied, albedo, [room], spawn, seed, WorldFamily.APARTMENT)


def corridor_scene(length: int = 24) -> Scene:
    """Two free rows wide corridor along +x"""
    occupied = np.ones((length, 6, 12), dtype=bool)
    occupied[1:-1, 2:4, 1:-1] = False
    albedo = np.random.default_rng(1).integers(60, 200, size=occupied.shape + (3,)).astype(np.uint8)
    return Scene(occupied, albedo, [Room(1, 2, length - 1, 4, 0.15)], (0.375, 0.625, 0), 1)
