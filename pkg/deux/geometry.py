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
Pinhole camera model, rigid body poses and the differentiable image reconstruction warp.

Conventions: camera +z forward, +x right, +y down; poses are stored world-from-camera.
Pixel coordinates are continuous (u, v) = (column, row).
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, NamedTuple, Tuple

import numpy as np

from deux.enums import MIN_DEPTH, MAX_DEPTH
from deux.errors import GeometryError, ShapeError

logger = logging.getLogger(__name__)

ORTHONORMAL_TOLERANCE = 1e-9
# reprojected coordinates this close outside the image are clipped back in
BORDER_TOLERANCE = 1e-6


class PixelCoord(NamedTuple):
    u: float
    v: float


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise GeometryError(f'Focal lengths must be positive, got fx={self.fx}, fy={self.fy}')
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise GeometryError(
                f'Principal point ({self.cx}, {self.cy}) outside of a {self.width}x{self.height} image')

    @classmethod
    def default(cls, width: int = 400, height: int = 400) -> 'Intrinsics':
        """90 degree horizontal field of view"""
        return cls(fx=width / 2.0, fy=width / 2.0, cx=width / 2.0, cy=height / 2.0, width=width, height=height)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx],
                         [0.0, self.fy, self.cy],
                         [0.0, 0.0, 1.0]])

    def to_dict(self) -> dict:
        return {'fx': self.fx, 'fy': self.fy, 'cx': self.cx, 'cy': self.cy,
                'width': self.width, 'height': self.height}

    @classmethod
    def from_dict(cls, values: dict) -> 'Intrinsics':
        return cls(fx=float(values['fx']), fy=float(values['fy']), cx=float(values['cx']), cy=float(values['cy']),
                   width=int(values['width']), height=int(values['height']))

    def save(self, path: Path):
        with open(path, 'w', encoding='utf8') as json_file:
            json.dump(self.to_dict(), json_file)

    @classmethod
    def load(cls, path: Path) -> 'Intrinsics':
        with open(path, mode='r', encoding='utf8') as json_file:
            return cls.from_dict(json.load(json_file))


class Pose:
    """
    Rigid body transform (rotation, translation), world-from-camera when used as a camera pose.
    Immutable: the arrays are copied and flagged read-only.
    """

    __slots__ = ('rotation', 'translation')

    def __init__(self, rotation: np.ndarray = None, translation: np.ndarray = None, validate: bool = True):
        rotation = np.eye(3) if rotation is None else np.array(rotation, dtype=np.float64)
        translation = np.zeros(3) if translation is None else np.array(translation, dtype=np.float64).reshape(-1)
        if rotation.shape != (3, 3):
            raise ShapeError(f'Rotation matrix must be 3x3, got {rotation.shape}')
        if translation.shape != (3,):
            raise ShapeError(f'Translation vector must have 3 elements, got {translation.shape}')
        if validate:
            if not np.allclose(rotation.T @ rotation, np.eye(3), rtol=0.0, atol=ORTHONORMAL_TOLERANCE):
                raise GeometryError('Rotation matrix is not orthonormal')
            if abs(np.linalg.det(rotation) - 1.0) > ORTHONORMAL_TOLERANCE:
                raise GeometryError('Rotation matrix must have determinant 1')
        rotation.setflags(write=False)
        translation.setflags(write=False)
        object.__setattr__(self, 'rotation', rotation)
        object.__setattr__(self, 'translation', translation)

    def __setattr__(self, key, value):
        raise AttributeError('Pose is immutable')

    def __reduce__(self):
        return Pose, (np.array(self.rotation), np.array(self.translation), False)

    def __repr__(self):
        return f'Pose(rotation={self.rotation.tolist()}, translation={self.translation.tolist()})'

    @classmethod
    def identity(cls) -> 'Pose':
        return cls()

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> 'Pose':
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape != (4, 4):
            raise ShapeError(f'Homogeneous matrix must be 4x4, got {matrix.shape}')
        return cls(matrix[:3, :3], matrix[:3, 3])

    @property
    def matrix(self) -> np.ndarray:
        """4x4 homogeneous transformation matrix"""
        transform = np.eye(4)
        transform[:3, :3] = self.rotation
        transform[:3, 3] = self.translation
        return transform

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transforms points of shape (..., 3)"""
        return points @ self.rotation.T + self.translation

    def to_row(self) -> List[float]:
        """12 row-major values: rotation rows with the translation appended to each"""
        return self.matrix[:3, :].reshape(-1).tolist()

    @classmethod
    def from_row(cls, values) -> 'Pose':
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (12,):
            raise ShapeError(f'Pose rows need 12 values, got {values.shape}')
        matrix = np.eye(4)
        matrix[:3, :] = values.reshape(3, 4)
        rotation = matrix[:3, :3]
        if np.allclose(rotation.T @ rotation, np.eye(3), rtol=0.0, atol=ORTHONORMAL_TOLERANCE) and \
                abs(np.linalg.det(rotation) - 1.0) <= ORTHONORMAL_TOLERANCE:
            return cls(rotation, matrix[:3, 3], validate=False)
        # rounded text input, re-orthonormalise instead of failing validation
        u, _, vt = np.linalg.svd(rotation)
        return cls(u @ vt, matrix[:3, 3])


def compose(a: Pose, b: Pose) -> Pose:
    """a o b, i.e. first apply b then a"""
    return Pose(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation, validate=False)


def invert(a: Pose) -> Pose:
    inv_rotation = a.rotation.T
    return Pose(inv_rotation, -inv_rotation @ a.translation, validate=False)


def relative_pose(pose_target: Pose, pose_source: Pose) -> Pose:
    """
    Motion p_{tau,t} that maps points from the camera at time t (pose_target) into the camera
    at time tau (pose_source), both poses world-from-camera
    """
    return compose(invert(pose_source), pose_target)


def backproject(q: PixelCoord, depth: float, k: Intrinsics) -> np.ndarray:
    if depth <= 0:
        raise GeometryError(f'Cannot backproject non-positive depth {depth}')
    return np.array([(q.u - k.cx) / k.fx * depth, (q.v - k.cy) / k.fy * depth, depth])


def project(p: np.ndarray, k: Intrinsics) -> PixelCoord:
    x, y, z = (float(c) for c in p)
    if z <= 0:
        raise GeometryError(f'Point {tuple(p)} is behind the camera')
    return PixelCoord(k.fx * x / z + k.cx, k.fy * y / z + k.cy)


def pixel_rays(k: Intrinsics) -> np.ndarray:
    """
    K^-1 q for every pixel, shape (H, W, 3) with unit z component
    """
    v, u = np.mgrid[0:k.height, 0:k.width].astype(np.float64)
    return np.stack([(u - k.cx) / k.fx, (v - k.cy) / k.fy, np.ones_like(u)], axis=-1)


def backproject_map(depth: np.ndarray, k: Intrinsics) -> np.ndarray:
    """Camera frame points for a full depth map, shape (H, W, 3)"""
    check_shape(depth, k, 'depth')
    return pixel_rays(k) * depth[..., None]


def check_shape(array: np.ndarray, k: Intrinsics, name: str):
    if array.shape[:2] != k.shape:
        raise ShapeError(f'{name} has shape {array.shape[:2]}, intrinsics expect {k.shape}')


def check_depth_map(depth: np.ndarray, valid_range: Tuple[float, float] = (MIN_DEPTH, MAX_DEPTH)):
    """DepthMap invariant: every finite value lies in valid_range"""
    if depth.ndim != 2:
        raise ShapeError(f'Depth map must be 2D, got {depth.shape}')
    finite = depth[np.isfinite(depth)]
    if finite.size and (finite.min() < valid_range[0] or finite.max() > valid_range[1]):
        raise GeometryError(f'Depth values outside of {valid_range}: [{finite.min()}, {finite.max()}]')


def check_image(image: np.ndarray):
    """Image invariant: (H, W, 3) intensities in [0, 1]"""
    if image.ndim != 3 or image.shape[2] != 3:
        raise ShapeError(f'Image must be HxWx3, got {image.shape}')
    if image.size and (image.min() < 0.0 or image.max() > 1.0):
        raise GeometryError('Image intensities must lie in [0, 1]')


@dataclass
class Reprojection:
    """
    Where every target pixel lands in the source image, plus the derivatives of the
    landing position with respect to the target pixel's depth
    """
    u: np.ndarray
    v: np.ndarray
    z: np.ndarray
    valid: np.ndarray
    du_dd: np.ndarray
    dv_dd: np.ndarray


def reproject(depth: np.ndarray, relative: Pose, k: Intrinsics) -> Reprojection:
    """
    pi(p_{tau,t} K^-1 q d(q)) for all pixels q
    """
    check_shape(depth, k, 'depth')
    rays = pixel_rays(k) @ relative.rotation.T
    points = rays * depth[..., None] + relative.translation
    x, y, z = points[..., 0], points[..., 1], points[..., 2]

    in_front = z > 0
    safe_z = np.where(in_front, z, 1.0)
    u = k.fx * x / safe_z + k.cx
    v = k.fy * y / safe_z + k.cy
    du_dd = k.fx * (rays[..., 0] * safe_z - x * rays[..., 2]) / safe_z ** 2
    dv_dd = k.fy * (rays[..., 1] * safe_z - y * rays[..., 2]) / safe_z ** 2

    inside = (u >= -BORDER_TOLERANCE) & (u <= k.width - 1 + BORDER_TOLERANCE) & \
             (v >= -BORDER_TOLERANCE) & (v <= k.height - 1 + BORDER_TOLERANCE)
    valid = in_front & inside & np.isfinite(u) & np.isfinite(v)
    u = np.clip(np.where(valid, u, 0.0), 0.0, k.width - 1)
    v = np.clip(np.where(valid, v, 0.0), 0.0, k.height - 1)
    return Reprojection(u=u, v=v, z=z, valid=valid, du_dd=du_dd, dv_dd=dv_dd)


def sample_bilinear(image: np.ndarray, u: np.ndarray, v: np.ndarray, with_gradient: bool = False):
    """
    Bilinear lookup of image (H, W, C) at continuous coordinates already clipped into the image.
    Returns the samples and optionally dI/du, dI/dv of shape (..., C).
    """
    height, width = image.shape[:2]
    u0 = np.clip(np.floor(u).astype(np.int64), 0, max(width - 2, 0))
    v0 = np.clip(np.floor(v).astype(np.int64), 0, max(height - 2, 0))
    u1 = np.minimum(u0 + 1, width - 1)
    v1 = np.minimum(v0 + 1, height - 1)
    a = (u - u0)[..., None]
    b = (v - v0)[..., None]

    top_left, top_right = image[v0, u0], image[v0, u1]
    bottom_left, bottom_right = image[v1, u0], image[v1, u1]
    top = top_left + a * (top_right - top_left)
    bottom = bottom_left + a * (bottom_right - bottom_left)
    samples = top + b * (bottom - top)
    if not with_gradient:
        return samples
    d_du = (1.0 - b) * (top_right - top_left) + b * (bottom_right - bottom_left)
    d_dv = bottom - top
    return samples, d_du, d_dv


def warp_reconstruct(source: np.ndarray, depth: np.ndarray, relative: Pose, k: Intrinsics):
    """
    Reconstructs the target frame from the source frame I_tau:
    I_hat(q) = I_tau(pi p_{tau,t} K^-1 q d(q)).

    :return: (reconstruction, validity mask); invalid pixels are 0 in the reconstruction
    """
    check_shape(source, k, 'source')
    check_shape(depth, k, 'depth')
    reprojection = reproject(depth, relative, k)
    recon = sample_bilinear(source, reprojection.u, reprojection.v)
    recon[~reprojection.valid] = 0.0
    return recon, reprojection.valid


if __name__ == '__main__':
    pass
