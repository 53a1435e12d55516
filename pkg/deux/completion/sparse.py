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
Sparse depth sampling at Harris corners
"""

import logging
from typing import List, Optional

import numpy as np
from scipy import ndimage

from deux.errors import ShapeError
from deux.geometry import PixelCoord, check_image
from deux.losses import SparseDepth

logger = logging.getLogger(__name__)

HARRIS_K = 0.04
MIN_IMAGE_SIZE = 7
DEFAULT_TARGET_COUNT = 1500
_BINOMIAL = np.outer([1.0, 2.0, 1.0], [1.0, 2.0, 1.0]) / 16.0


def harris_response(image: np.ndarray, k: float = HARRIS_K) -> np.ndarray:
    """
    R = det(M) - k trace(M)^2 with Sobel gradients of the channel mean and the structure
    tensor M smoothed by a 3x3 binomial (Gaussian) window
    """
    gray = image.mean(axis=2) if image.ndim == 3 else image
    ix = ndimage.sobel(gray, axis=1)
    iy = ndimage.sobel(gray, axis=0)
    sxx = ndimage.convolve(ix * ix, _BINOMIAL, mode='reflect')
    syy = ndimage.convolve(iy * iy, _BINOMIAL, mode='reflect')
    sxy = ndimage.convolve(ix * iy, _BINOMIAL, mode='reflect')
    return sxx * syy - sxy ** 2 - k * (sxx + syy) ** 2


def harris_corners(image: np.ndarray, target_count: int = DEFAULT_TARGET_COUNT) -> List[PixelCoord]:
    """
    Local maxima (3x3) of the positive Harris response, strongest first, ties by (row, col).
    Returns fewer than target_count points when the image has fewer corners.
    """
    check_image(image)
    if image.shape[0] < MIN_IMAGE_SIZE or image.shape[1] < MIN_IMAGE_SIZE:
        raise ShapeError(f'Corner detection needs at least {MIN_IMAGE_SIZE}x{MIN_IMAGE_SIZE} pixels, '
                         f'got {image.shape[:2]}')
    response = harris_response(image)
    peaks = (response > 0) & (response == ndimage.maximum_filter(response, size=3, mode='constant', cval=-np.inf))
    rows, cols = np.nonzero(peaks)
    order = np.lexsort((cols, rows, -response[rows, cols]))[:target_count]
    return [PixelCoord(float(cols[i]), float(rows[i])) for i in order]


def sample_sparse_depth(frame, target_count: int = DEFAULT_TARGET_COUNT,
                        rng: Optional[np.random.Generator] = None) -> SparseDepth:
    """
    Ground truth depth at the Harris corners of the frame. With an rng, missing points are
    padded with distinct uniformly drawn pixels of valid depth.
    """
    corners = harris_corners(frame.rgb, target_count)
    rows = np.array([int(c.v) for c in corners], dtype=np.int64)
    cols = np.array([int(c.u) for c in corners], dtype=np.int64)
    n_corners = len(rows)

    depth = frame.depth_gt
    if rng is not None and n_corners < target_count:
        taken = np.zeros(depth.shape, dtype=bool)
        taken[rows, cols] = True
        candidates = np.flatnonzero(~taken & np.isfinite(depth))
        extra = rng.choice(candidates, size=min(target_count - n_corners, len(candidates)), replace=False)
        rows = np.concatenate([rows, extra // depth.shape[1]])
        cols = np.concatenate([cols, extra % depth.shape[1]])
        logger.debug(f'Padded {n_corners} corners with {len(extra)} random pixels')
    return SparseDepth(rows, cols, depth[rows, cols], depth.shape, n_corners=n_corners)
