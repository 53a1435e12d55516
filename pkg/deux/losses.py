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
Unsupervised depth completion objective:

* color consistency (L1) and structural consistency (1 - SSIM) between the target frame and
  its reconstructions from the two previous frames, combined into the photometric loss
* edge-aware local smoothness of the predicted depth
* L1 grounding of the prediction to the sparse depth points
* their weighted sum, the total loss, and its analytic gradient with respect to the depth map

plus the scalar uncertainty residual used to steer exploration.
"""

import logging
from dataclasses import dataclass, field, asdict
from typing import List, Sequence, Tuple

import numpy as np
from scipy.ndimage import uniform_filter

from deux.enums import MIN_DEPTH, MAX_DEPTH
from deux.errors import ArgumentError, ResidualUndefinedError, ShapeError, UndefinedLossError, ConfigError
from deux.geometry import Pose, reproject, relative_pose, sample_bilinear

logger = logging.getLogger(__name__)

SSIM_WINDOW = 7
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2
# the largest residual, 1 - exp(-e) rounds to 1.0 for large errors
MAX_DELTA = float(np.nextafter(1.0, 0.0))


@dataclass(frozen=True)
class LossWeights:
    lambda_co: float = 0.15
    lambda_st: float = 0.85
    lambda_sz: float = 1.0
    lambda_sm: float = 0.1

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value < 0:
                raise ConfigError(f'Loss weight {name} must be non-negative, got {value}')

    @classmethod
    def from_dict(cls, values: dict) -> 'LossWeights':
        return cls(**{key: float(value) for key, value in values.items()})


@dataclass
class LossBreakdown:
    """l_co and l_st are summed over both source frames, l_ph = lambda_co * l_co + lambda_st * l_st"""
    l_co: float
    l_st: float
    l_ph: float
    l_sz: float
    l_sm: float
    l_d: float
    residual_map: np.ndarray = field(repr=False)

    def as_row(self) -> List[float]:
        return [self.l_co, self.l_st, self.l_ph, self.l_sz, self.l_sm, self.l_d]


class SparseDepth:
    """
    Depth values z on the pixel subset Omega_z, stored as parallel (row, col, depth) arrays.

    :ivar n_corners: how many points came from the corner detector (the rest is padding)
    """

    def __init__(self, rows, cols, depths, shape: Tuple[int, int], n_corners: int = None):
        self.rows = np.asarray(rows, dtype=np.int64).reshape(-1)
        self.cols = np.asarray(cols, dtype=np.int64).reshape(-1)
        self.depths = np.asarray(depths, dtype=np.float64).reshape(-1)
        self.shape = (int(shape[0]), int(shape[1]))
        self.n_corners = len(self.rows) if n_corners is None else int(n_corners)
        self._validate()

    def _validate(self):
        if not (len(self.rows) == len(self.cols) == len(self.depths)):
            raise ShapeError('Sparse depth rows, cols and depths differ in length')
        if len(self.rows) == 0:
            return
        if self.rows.min() < 0 or self.cols.min() < 0 or \
                self.rows.max() >= self.shape[0] or self.cols.max() >= self.shape[1]:
            raise ShapeError(f'Sparse depth coordinates outside of the {self.shape} image')
        if self.depths.min() < MIN_DEPTH or self.depths.max() > MAX_DEPTH:
            raise ArgumentError(f'Sparse depths must lie in [{MIN_DEPTH}, {MAX_DEPTH}]')
        flat = self.rows * self.shape[1] + self.cols
        if len(np.unique(flat)) != len(flat):
            raise ArgumentError('Sparse depth contains duplicate coordinates')

    def __len__(self):
        return len(self.rows)

    def __eq__(self, other):
        return isinstance(other, SparseDepth) and self.shape == other.shape and \
            np.array_equal(self.rows, other.rows) and np.array_equal(self.cols, other.cols) and \
            np.array_equal(self.depths, other.depths)

    def mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[self.rows, self.cols] = True
        return mask


# --- SSIM ----------------------------------------------------------------------------------------

_PAD = SSIM_WINDOW // 2


def _pad_indices(n: int) -> np.ndarray:
    return np.pad(np.arange(n), _PAD, mode='reflect')


def _box(x: np.ndarray) -> np.ndarray:
    """Mean over the 7x7 window around each pixel, reflect padded"""
    rows, cols = _pad_indices(x.shape[0]), _pad_indices(x.shape[1])
    padded = x[rows][:, cols]
    return uniform_filter(padded, size=SSIM_WINDOW, mode='constant')[_PAD:-_PAD, _PAD:-_PAD]


def _box_adjoint(g: np.ndarray) -> np.ndarray:
    """Exact transpose of _box"""
    height, width = g.shape
    padded = np.zeros((height + 2 * _PAD, width + 2 * _PAD))
    padded[_PAD:-_PAD, _PAD:-_PAD] = g
    spread = uniform_filter(padded, size=SSIM_WINDOW, mode='constant')
    rows, cols = _pad_indices(height), _pad_indices(width)
    folded_rows = np.zeros((height, width + 2 * _PAD))
    np.add.at(folded_rows, rows, spread)
    result = np.zeros((width, height))
    np.add.at(result, cols, folded_rows.T)
    return result.T


def _ssim_terms(x: np.ndarray, y: np.ndarray) -> dict:
    mu_x, mu_y = _box(x), _box(y)
    sigma_x = _box(x * x) - mu_x ** 2
    sigma_y = _box(y * y) - mu_y ** 2
    sigma_xy = _box(x * y) - mu_x * mu_y
    a1 = 2 * mu_x * mu_y + SSIM_C1
    a2 = 2 * sigma_xy + SSIM_C2
    b1 = mu_x ** 2 + mu_y ** 2 + SSIM_C1
    b2 = sigma_x + sigma_y + SSIM_C2
    return {'mu_x': mu_x, 'mu_y': mu_y, 'a1': a1, 'a2': a2, 'b1': b1, 'b2': b2, 'ssim': a1 * a2 / (b1 * b2)}


def _ssim_channel_gradient(x: np.ndarray, y: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """d(sum(upstream * SSIM(x, y)))/dx for a single channel"""
    t = _ssim_terms(x, y)
    s, denominator = t['ssim'], t['b1'] * t['b2']
    ds_dmu_x = (2 * t['mu_y'] * (t['a2'] - t['a1'])) / denominator \
        - 2 * t['mu_x'] * s / t['b1'] + 2 * t['mu_x'] * s / t['b2']
    ds_dexx = -s / t['b2']
    ds_dexy = 2 * t['a1'] / denominator
    return _box_adjoint(upstream * ds_dmu_x) + 2 * x * _box_adjoint(upstream * ds_dexx) \
        + y * _box_adjoint(upstream * ds_dexy)


def ssim_map(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Per-pixel SSIM over 7x7 uniform windows, computed per channel and averaged over channels
    """
    _check_pair(a, b)
    if a.shape[0] < SSIM_WINDOW or a.shape[1] < SSIM_WINDOW:
        raise ShapeError(f'Images of shape {a.shape[:2]} are smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window')
    return np.mean([_ssim_terms(a[..., c], b[..., c])['ssim'] for c in range(a.shape[2])], axis=0)


# --- loss terms ----------------------------------------------------------------------------------

def _check_pair(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise ShapeError(f'Shape mismatch: {a.shape} vs {b.shape}')


def _masked_count(mask: np.ndarray, name: str) -> int:
    count = int(np.count_nonzero(mask))
    if count == 0:
        raise UndefinedLossError(f'{name} is undefined on an empty mask')
    return count


def color_consistency(target: np.ndarray, recon: np.ndarray, mask: np.ndarray) -> float:
    _check_pair(target, recon)
    count = _masked_count(mask, 'Color consistency')
    per_pixel = np.abs(recon - target).mean(axis=2)
    return float(per_pixel[mask].sum() / count)


def structural_consistency(target: np.ndarray, recon: np.ndarray, mask: np.ndarray) -> float:
    similarity = ssim_map(recon, target)
    count = _masked_count(mask, 'Structural consistency')
    return float((1.0 - similarity)[mask].sum() / count)


def photometric_loss(target: np.ndarray, recons: Sequence[Tuple[np.ndarray, np.ndarray]],
                     w: LossWeights = LossWeights()) -> float:
    if not recons:
        raise ArgumentError('Photometric loss needs at least one reconstruction')
    return float(sum(w.lambda_co * color_consistency(target, recon, mask)
                     + w.lambda_st * structural_consistency(target, recon, mask)
                     for recon, mask in recons))


def _forward_differences(array: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """x and y forward differences, zero in the final column / row"""
    dx = np.zeros_like(array)
    dy = np.zeros_like(array)
    dx[:, :-1] = array[:, 1:] - array[:, :-1]
    dy[:-1, :] = array[1:, :] - array[:-1, :]
    return dx, dy


def _smoothness_weights(image: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    ix, iy = _forward_differences(image)
    return np.exp(-np.abs(ix).mean(axis=2)), np.exp(-np.abs(iy).mean(axis=2))


def smoothness_loss(image: np.ndarray, depth: np.ndarray) -> float:
    if image.shape[:2] != depth.shape:
        raise ShapeError(f'Image {image.shape[:2]} and depth {depth.shape} differ in size')
    weight_x, weight_y = _smoothness_weights(image)
    dx, dy = _forward_differences(depth)
    return float((weight_x * np.abs(dx) + weight_y * np.abs(dy)).sum() / depth.size)


def _smoothness_gradient(image: np.ndarray, depth: np.ndarray) -> np.ndarray:
    weight_x, weight_y = _smoothness_weights(image)
    dx, dy = _forward_differences(depth)
    gx = weight_x * np.sign(dx) / depth.size
    gy = weight_y * np.sign(dy) / depth.size
    grad = np.zeros_like(depth)
    grad[:, 1:] += gx[:, :-1]
    grad[:, :-1] -= gx[:, :-1]
    grad[1:, :] += gy[:-1, :]
    grad[:-1, :] -= gy[:-1, :]
    return grad


def sparse_depth_loss(pred: np.ndarray, z: SparseDepth) -> float:
    if len(z) == 0:
        raise UndefinedLossError('Sparse depth loss is undefined without sparse points')
    if pred.shape != z.shape:
        raise ShapeError(f'Prediction {pred.shape} and sparse depth {z.shape} differ in size')
    return float(np.abs(pred[z.rows, z.cols] - z.depths).sum() / len(z))


# --- total loss ----------------------------------------------------------------------------------

def _reconstruct(frame_t, frame_tau, pred: np.ndarray, with_gradient: bool = False):
    relative: Pose = relative_pose(frame_t.pose, frame_tau.pose)
    reprojection = reproject(pred, relative, frame_t.intrinsics)
    if with_gradient:
        recon, d_du, d_dv = sample_bilinear(frame_tau.rgb, reprojection.u, reprojection.v, with_gradient=True)
        d_dd = d_du * reprojection.du_dd[..., None] + d_dv * reprojection.dv_dd[..., None]
        d_dd[~reprojection.valid] = 0.0
    else:
        recon, d_dd = sample_bilinear(frame_tau.rgb, reprojection.u, reprojection.v), None
    recon[~reprojection.valid] = 0.0
    return recon, reprojection.valid, d_dd


def total_loss(frame_t, frame_tm1, frame_tm2, pred: np.ndarray, z: SparseDepth,
               w: LossWeights = LossWeights()) -> LossBreakdown:
    """
    l_d = l_ph + lambda_sz * l_sz + lambda_sm * l_sm over the frame triplet (t, t-1, t-2)
    """
    target = frame_t.rgb
    l_co = l_st = 0.0
    error_sum = np.zeros(pred.shape)
    error_count = np.zeros(pred.shape)
    for frame_tau in (frame_tm1, frame_tm2):
        recon, mask, _ = _reconstruct(frame_t, frame_tau, pred)
        l_co += color_consistency(target, recon, mask)
        l_st += structural_consistency(target, recon, mask)
        error_sum += np.where(mask, np.abs(recon - target).mean(axis=2), 0.0)
        error_count += mask
    l_ph = w.lambda_co * l_co + w.lambda_st * l_st
    l_sz = sparse_depth_loss(pred, z)
    l_sm = smoothness_loss(target, pred)
    residual_map = np.divide(error_sum, error_count, out=np.zeros(pred.shape), where=error_count > 0)
    return LossBreakdown(l_co=l_co, l_st=l_st, l_ph=l_ph, l_sz=l_sz, l_sm=l_sm,
                         l_d=l_ph + w.lambda_sz * l_sz + w.lambda_sm * l_sm,
                         residual_map=residual_map)


def loss_gradient(frame_t, frame_tm1, frame_tm2, pred: np.ndarray, z: SparseDepth,
                  w: LossWeights = LossWeights()) -> np.ndarray:
    """
    Analytic d l_d / d pred through the bilinear warp, the L1 terms (subgradient 0 at ties),
    SSIM and the smoothness term
    """
    target = frame_t.rgb
    channels = target.shape[2]
    grad = np.zeros(pred.shape)
    for frame_tau in (frame_tm1, frame_tm2):
        recon, mask, d_recon_dd = _reconstruct(frame_t, frame_tau, pred, with_gradient=True)
        count = _masked_count(mask, 'Photometric loss')
        upstream = np.zeros(recon.shape)
        if w.lambda_co:
            upstream += w.lambda_co * np.sign(recon - target) * mask[..., None] / (channels * count)
        if w.lambda_st:
            if target.shape[0] < SSIM_WINDOW or target.shape[1] < SSIM_WINDOW:
                raise ShapeError(f'Images of shape {target.shape[:2]} are smaller than the SSIM window')
            ssim_upstream = -mask.astype(np.float64) / (channels * count)
            for c in range(channels):
                upstream[..., c] += w.lambda_st * _ssim_channel_gradient(recon[..., c], target[..., c], ssim_upstream)
        grad += (upstream * d_recon_dd).sum(axis=2)

    if w.lambda_sz:
        if len(z) == 0:
            raise UndefinedLossError('Sparse depth loss is undefined without sparse points')
        np.add.at(grad, (z.rows, z.cols), w.lambda_sz * np.sign(pred[z.rows, z.cols] - z.depths) / len(z))
    if w.lambda_sm:
        grad += w.lambda_sm * _smoothness_gradient(target, pred)
    return grad


# --- uncertainty residual ------------------------------------------------------------------------

RESIDUAL_METRICS = ('l1', 'ssim')


def residual_from_error(mean_error: float) -> float:
    """delta = 1 - exp(-mean error), in [0, 1)"""
    return min(float(-np.expm1(-mean_error)), MAX_DELTA)


def uncertainty_residual(frame_t, frame_tm1, frame_tm2, pred: np.ndarray, metric: str = 'l1') -> float:
    """
    Scalar residual delta of the frame at time t: 1 - exp(-e) where e is the masked mean
    reconstruction error, pooled over the reconstructions from t-1 and t-2.
    Source frames without any valid reprojection are skipped.
    """
    if metric not in RESIDUAL_METRICS:
        raise ArgumentError(f'Unknown residual metric "{metric}", use one of {RESIDUAL_METRICS}')
    target = frame_t.rgb
    errors = []
    for frame_tau in (frame_tm1, frame_tm2):
        recon, mask, _ = _reconstruct(frame_t, frame_tau, pred)
        if not mask.any():
            continue
        if metric == 'l1':
            errors.append(np.abs(recon - target).mean(axis=2)[mask].mean())
        else:
            errors.append((1.0 - ssim_map(recon, target))[mask].mean())
    if not errors:
        raise ResidualUndefinedError(f'No pixel of frame {getattr(frame_t, "timestep", "?")} reprojects validly')
    return residual_from_error(max(float(np.mean(errors)), 0.0))


