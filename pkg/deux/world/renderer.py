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
Raycasting RGB-D renderer: every pixel ray walks the voxel grid with a vectorised 3D DDA
(Amanatides-Woo traversal) until it enters an occupied voxel.
"""

import logging

import numpy as np

from deux.enums import MIN_DEPTH, MAX_DEPTH
from deux.errors import RenderError
from deux.geometry import Intrinsics, Pose, pixel_rays
from deux.world.agent import Frame
from deux.world.scene import Scene

logger = logging.getLogger(__name__)

# shading by the axis of the face that was hit; z faces depend on the side
X_FACE_SHADE = 0.8
Y_FACE_SHADE = 0.9
TOP_FACE_SHADE = 1.0
BOTTOM_FACE_SHADE = 0.7


def _traverse(scene: Scene, origin: np.ndarray, directions: np.ndarray):
    """
    :return: ray parameter of the hit, hit voxel indices (N, 3), hit axis and step sign along
             that axis; rays that leave the grid get t = inf and index -1
    """
    cell = scene.cell_size
    bounds = np.array(scene.shape)
    n_rays = len(directions)

    voxel = np.tile(np.floor(origin / cell).astype(np.int64), (n_rays, 1))
    step = np.where(directions >= 0, 1, -1)
    with np.errstate(divide='ignore', invalid='ignore'):
        t_delta = np.where(directions != 0, cell / np.abs(directions), np.inf)
        boundary = (voxel + (step > 0)) * cell
        t_max = np.where(directions != 0, (boundary - origin) / directions, np.inf)

    t_hit = np.full(n_rays, np.inf)
    hit_voxel = np.full((n_rays, 3), -1, dtype=np.int64)
    hit_axis = np.zeros(n_rays, dtype=np.int64)
    hit_step = np.zeros(n_rays, dtype=np.int64)

    active = np.arange(n_rays)
    for _ in range(int(bounds.sum()) + 3):
        if active.size == 0:
            break
        current_t_max = t_max[active]
        axis = np.argmin(current_t_max, axis=1)
        t = current_t_max[np.arange(active.size), axis]
        voxel[active, axis] += step[active, axis]
        t_max[active, axis] += t_delta[active, axis]

        position = voxel[active]
        inside = np.all((position >= 0) & (position < bounds), axis=1)
        hit = np.zeros(active.size, dtype=bool)
        hit[inside] = scene.occupied[position[inside, 0], position[inside, 1], position[inside, 2]]

        rays = active[hit]
        t_hit[rays] = t[hit]
        hit_voxel[rays] = position[hit]
        hit_axis[rays] = axis[hit]
        hit_step[rays] = step[rays, axis[hit]]
        active = active[inside & ~hit]
    return t_hit, hit_voxel, hit_axis, hit_step


def _shade(hit_axis: np.ndarray, hit_step: np.ndarray) -> np.ndarray:
    shade = np.where(hit_axis == 0, X_FACE_SHADE, Y_FACE_SHADE)
    # descending rays see the top face (floor), ascending ones the bottom face (ceiling)
    z_shade = np.where(hit_step < 0, TOP_FACE_SHADE, BOTTOM_FACE_SHADE)
    return np.where(hit_axis == 2, z_shade, shade)


def render(scene: Scene, pose: Pose, k: Intrinsics, timestep: int = 0) -> Frame:
    """
    Renders rgb and z-depth seen from the world-from-camera pose. Camera rays are K^-1 q with
    unit z, so the traversal parameter at the hit is the z-depth itself.
    """
    origin = np.asarray(pose.translation, dtype=np.float64)
    start = np.floor(origin / scene.cell_size).astype(np.int64)
    if np.any(start < 0) or np.any(start >= np.array(scene.shape)):
        raise RenderError(f'Camera position {origin.tolist()} is outside of the scene')
    if scene.occupied[tuple(start)]:
        raise RenderError(f'Camera position {origin.tolist()} lies inside an occupied voxel')

    directions = pixel_rays(k).reshape(-1, 3) @ pose.rotation.T
    t_hit, hit_voxel, hit_axis, hit_step = _traverse(scene, origin, directions)

    missed = ~np.isfinite(t_hit)
    depth = np.clip(np.where(missed, MAX_DEPTH, t_hit), MIN_DEPTH, MAX_DEPTH)

    colors = np.zeros((len(t_hit), 3))
    found = ~missed
    albedo = scene.albedo[hit_voxel[found, 0], hit_voxel[found, 1], hit_voxel[found, 2]] / 255.0
    colors[found] = albedo * _shade(hit_axis[found], hit_step[found])[:, None]
    rgb = np.round(colors * 255.0) / 255.0

    return Frame(rgb=rgb.reshape(k.height, k.width, 3), depth_gt=depth.reshape(k.height, k.width),
                 pose=pose, intrinsics=k, timestep=timestep)


def observe(scene: Scene, state, k: Intrinsics, timestep: int = 0) -> Frame:
    """Renders the view of an AgentState"""
    return render(scene, state.camera_pose(scene), k, timestep)
