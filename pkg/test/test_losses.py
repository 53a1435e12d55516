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

import time

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import spearmanr

from deux.errors import ArgumentError, ResidualUndefinedError, ShapeError, UndefinedLossError
from deux.geometry import Intrinsics, Pose
from deux.losses import (MAX_DELTA, SSIM_C1, LossWeights, SparseDepth, color_consistency, loss_gradient,
                         photometric_loss, residual_from_error, smoothness_loss, sparse_depth_loss, ssim_map,
                         structural_consistency, total_loss, uncertainty_residual)
from deux.policies.base import reward
from deux.world import Frame

PLANE_DEPTH = 2.0
# with fx = 16 and the plane at 2 m, a camera shift of 0.125 m moves the image by one pixel
PIXEL_SHIFT = 0.125


@pytest.fixture(scope="module")
def k():
    return Intrinsics(fx=16.0, fy=16.0, cx=16.0, cy=16.0, width=32, height=32)


def plane_frame(k: Intrinsics, tx: float, ty: float = 0.0, timestep: int = 0, phase=(0.0, 0.0, 0.0)) -> Frame:
    """Camera looking at a smoothly textured wall PLANE_DEPTH ahead, shifted by (tx, ty)"""
    v, u = np.mgrid[0:k.height, 0:k.width].astype(np.float64)
    x = tx + (u - k.cx) * PLANE_DEPTH / k.fx
    y = ty + (v - k.cy) * PLANE_DEPTH / k.fy
    rgb = np.stack([0.5 + 0.25 * np.sin(2 * np.pi * x / 1.5 + phase[0]),
                    0.5 + 0.25 * np.cos(2 * np.pi * y / 1.3 + phase[1]),
                    0.5 + 0.2 * np.sin(2 * np.pi * (x + y) / 1.7 + phase[2])], axis=2)
    return Frame(rgb, np.full(k.shape, PLANE_DEPTH), Pose(translation=[tx, ty, 0.0]), k, timestep)


def triplet(k: Intrinsics):
    """(t, t-1, t-2) frames one and two pixels apart"""
    return (plane_frame(k, 0.0, timestep=2), plane_frame(k, -PIXEL_SHIFT, timestep=1),
            plane_frame(k, -2 * PIXEL_SHIFT, PIXEL_SHIFT, timestep=0))


def grid_sparse(k: Intrinsics, depth: float = PLANE_DEPTH, step: int = 4) -> SparseDepth:
    rows, cols = np.mgrid[0:k.height:step, 0:k.width:step]
    return SparseDepth(rows.ravel(), cols.ravel(), np.full(rows.size, depth), k.shape)


def random_triplet(k: Intrinsics, seed: int):
    """Triplet with a random wall texture and random sub-pixel camera shifts of up to two pixels"""
    rng = np.random.default_rng(seed)
    phase = tuple(rng.uniform(0.0, 2 * np.pi, size=3))
    shifts = rng.uniform(-2 * PIXEL_SHIFT, 2 * PIXEL_SHIFT, size=(2, 2))
    return (plane_frame(k, 0.0, timestep=2, phase=phase),
            plane_frame(k, *shifts[0], timestep=1, phase=phase),
            plane_frame(k, *shifts[1], timestep=0, phase=phase))


def scaled(frame: Frame, factor: float) -> Frame:
    """Same image seen from the camera translation scaled by factor"""
    return Frame(frame.rgb, frame.depth_gt * factor, Pose(frame.pose.rotation, frame.pose.translation * factor),
                 frame.intrinsics, frame.timestep)


class TestSparseDepth:

    @staticmethod
    def test_out_of_image_raises():
        with pytest.raises(ShapeError):
            SparseDepth([0, 4], [0, 1], [1.0, 1.0], (4, 4))

    @staticmethod
    def test_duplicates_raise():
        with pytest.raises(ArgumentError):
            SparseDepth([1, 1], [2, 2], [1.0, 2.0], (4, 4))

    @staticmethod
    @pytest.mark.parametrize('depth', [0.05, 10.5])
    def test_depth_out_of_range_raises(depth):
        with pytest.raises(ArgumentError):
            SparseDepth([0], [0], [depth], (4, 4))

    @staticmethod
    def test_mask_and_default_corner_count():
        z = SparseDepth([0, 3], [1, 2], [1.0, 2.0], (4, 4))
        assert z.n_corners == 2
        assert z.mask().sum() == 2 and z.mask()[3, 2]


class TestPhotometricTerms:

    @staticmethod
    def test_color_consistency_of_constant_images():
        target = np.full((8, 8, 3), 0.3)
        recon = np.full((8, 8, 3), 0.4)
        assert color_consistency(target, recon, np.ones((8, 8), dtype=bool)) == pytest.approx(0.1, abs=1e-12)

    @staticmethod
    def test_color_consistency_only_counts_masked_pixels():
        target = np.zeros((8, 8, 3))
        recon = np.zeros((8, 8, 3))
        recon[:, 4:] = 1.0
        mask = np.zeros((8, 8), dtype=bool)
        mask[:, :4] = True
        assert color_consistency(target, recon, mask) == 0.0

    @staticmethod
    @pytest.mark.parametrize('term', [color_consistency, structural_consistency])
    def test_empty_mask_is_undefined(term):
        image = np.full((8, 8, 3), 0.5)
        with pytest.raises(UndefinedLossError):
            term(image, image, np.zeros((8, 8), dtype=bool))

    @staticmethod
    def test_ssim_of_constant_images_has_closed_form():
        a, b = 0.2, 0.7
        expected = (2 * a * b + SSIM_C1) / (a ** 2 + b ** 2 + SSIM_C1)
        result = ssim_map(np.full((10, 10, 3), a), np.full((10, 10, 3), b))
        assert_allclose(result, expected, atol=1e-9)

    @staticmethod
    def test_identical_images_have_no_structural_loss():
        image = np.random.default_rng(0).uniform(size=(12, 12, 3))
        assert structural_consistency(image, image, np.ones((12, 12), dtype=bool)) == pytest.approx(0.0, abs=1e-9)

    @staticmethod
    def test_ssim_rejects_images_smaller_than_the_window():
        with pytest.raises(ShapeError):
            ssim_map(np.zeros((6, 6, 3)), np.zeros((6, 6, 3)))

    @staticmethod
    def test_photometric_loss_sums_over_reconstructions():
        rng = np.random.default_rng(1)
        target = rng.uniform(size=(12, 12, 3))
        recons = [(rng.uniform(size=(12, 12, 3)), rng.uniform(size=(12, 12)) > 0.3) for _ in range(2)]
        w = LossWeights()
        expected = sum(w.lambda_co * color_consistency(target, recon, mask)
                       + w.lambda_st * structural_consistency(target, recon, mask) for recon, mask in recons)
        assert photometric_loss(target, recons, w) == pytest.approx(expected, abs=1e-12)

    @staticmethod
    def test_photometric_loss_needs_a_reconstruction():
        with pytest.raises(ArgumentError):
            photometric_loss(np.zeros((8, 8, 3)), [])


class TestSmoothnessAndSparseTerms:

    @staticmethod
    def test_horizontal_ramp_on_flat_image():
        height, width, slope = 6, 10, 0.3
        depth = np.tile(slope * np.arange(width, dtype=np.float64), (height, 1))
        result = smoothness_loss(np.full((height, width, 3), 0.5), depth)
        assert result == pytest.approx(slope * (width - 1) / width, abs=1e-12)

    @staticmethod
    def test_image_edges_lower_the_smoothness_penalty():
        depth = np.tile(np.arange(8, dtype=np.float64), (8, 1))
        striped = np.zeros((8, 8, 3))
        striped[:, 1::2] = 1.0
        assert smoothness_loss(striped, depth) < smoothness_loss(np.zeros((8, 8, 3)), depth)

    @staticmethod
    def test_smoothness_shape_mismatch_raises():
        with pytest.raises(ShapeError):
            smoothness_loss(np.zeros((8, 8, 3)), np.zeros((8, 7)))

    @staticmethod
    def test_sparse_loss_of_constant_offset(k):
        z = grid_sparse(k)
        assert sparse_depth_loss(np.full(k.shape, PLANE_DEPTH + 0.25), z) == pytest.approx(0.25, abs=1e-12)

    @staticmethod
    def test_sparse_loss_without_points_is_undefined(k):
        with pytest.raises(UndefinedLossError):
            sparse_depth_loss(np.ones(k.shape), SparseDepth([], [], [], k.shape))


class TestTotalLoss:

    @staticmethod
    def test_breakdown_is_additive(k):
        frame_t, frame_tm1, frame_tm2 = triplet(k)
        pred = PLANE_DEPTH + np.random.default_rng(2).uniform(-0.1, 0.1, size=k.shape)
        w = LossWeights(lambda_co=0.2, lambda_st=0.8, lambda_sz=0.5, lambda_sm=0.3)
        result = total_loss(frame_t, frame_tm1, frame_tm2, pred, grid_sparse(k), w)
        assert result.l_ph == pytest.approx(w.lambda_co * result.l_co + w.lambda_st * result.l_st, abs=1e-9)
        assert result.l_d == pytest.approx(result.l_ph + w.lambda_sz * result.l_sz + w.lambda_sm * result.l_sm,
                                           abs=1e-9)
        assert result.residual_map.shape == k.shape
        assert len(result.as_row()) == 6

    @staticmethod
    def test_true_depth_has_lower_loss_than_a_wrong_one(k):
        frames = triplet(k)
        exact = total_loss(*frames, np.full(k.shape, PLANE_DEPTH), grid_sparse(k))
        wrong = total_loss(*frames, np.full(k.shape, 1.5 * PLANE_DEPTH), grid_sparse(k))
        assert exact.l_d < wrong.l_d
        assert exact.l_sz == 0.0

    @staticmethod
    def test_no_valid_reprojection_is_undefined(k):
        frame_t = plane_frame(k, 0.0)
        behind = Frame(frame_t.rgb, frame_t.depth_gt, Pose(translation=[0.0, 0.0, 20.0]), k)
        with pytest.raises(UndefinedLossError):
            total_loss(frame_t, behind, behind, np.full(k.shape, PLANE_DEPTH), grid_sparse(k))


class TestLossGradient:

    @staticmethod
    def test_sparse_only_gradient(k):
        frames = triplet(k)
        z = grid_sparse(k)
        pred = np.full(k.shape, PLANE_DEPTH + 0.5)
        grad = loss_gradient(*frames, pred, z, LossWeights(lambda_co=0.0, lambda_st=0.0, lambda_sz=1.0,
                                                           lambda_sm=0.0))
        expected = np.where(z.mask(), 1.0 / len(z), 0.0)
        assert_allclose(grad, expected, atol=1e-15)

    @staticmethod
    @pytest.mark.parametrize('seed', range(20))
    def test_matches_central_differences(k, seed):
        frames = random_triplet(k, seed)
        z = grid_sparse(k)
        rng = np.random.default_rng(100 + seed)
        pred = PLANE_DEPTH + rng.uniform(-0.1, 0.1, size=k.shape)
        w = LossWeights()
        started = time.perf_counter()
        analytic = loss_gradient(*frames, pred, z, w)
        assert time.perf_counter() - started < 1.5

        h = 1e-4
        pixels = [(int(r), int(c)) for r, c in zip(rng.integers(0, k.height, 100), rng.integers(0, k.width, 100))]
        close = 0
        for row, col in pixels:
            up, down = pred.copy(), pred.copy()
            up[row, col] += h
            down[row, col] -= h
            numeric = (total_loss(*frames, up, z, w).l_d - total_loss(*frames, down, z, w).l_d) / (2 * h)
            if abs(numeric - analytic[row, col]) <= 1e-3 * abs(analytic[row, col]) + 1e-8:
                close += 1
        assert close >= 0.95 * len(pixels)


class TestScaleAmbiguity:

    @staticmethod
    @pytest.mark.parametrize('factor', [0.5, 0.8, 1.25, 2.0])
    def test_photometric_loss_ignores_a_common_scale(k, factor):
        frames = random_triplet(k, 7)
        pred = PLANE_DEPTH + np.random.default_rng(8).uniform(-0.1, 0.1, size=k.shape)
        w = LossWeights(lambda_sz=0.0)
        unit = total_loss(*frames, pred, grid_sparse(k), w)
        rescaled = total_loss(*(scaled(frame, factor) for frame in frames), pred * factor, grid_sparse(k), w)
        assert rescaled.l_ph == pytest.approx(unit.l_ph, abs=1e-9)

    @staticmethod
    @pytest.mark.parametrize('factor', [0.5, 0.8, 1.25, 2.0])
    def test_sparse_term_pins_the_scale(k, factor):
        frames = random_triplet(k, 7)
        pred = PLANE_DEPTH + np.random.default_rng(9).uniform(-0.01, 0.01, size=k.shape)
        unit = total_loss(*frames, pred, grid_sparse(k))
        rescaled = total_loss(*(scaled(frame, factor) for frame in frames), pred * factor, grid_sparse(k))
        assert rescaled.l_d > unit.l_d


class TestUncertaintyResidual:

    @staticmethod
    def test_residual_from_error():
        assert residual_from_error(0.0) == 0.0
        assert residual_from_error(np.log(2.0)) == pytest.approx(0.5, abs=1e-12)
        assert residual_from_error(50.0) < 1.0
        assert residual_from_error(1e6) == MAX_DELTA
        assert reward(residual_from_error(50.0)) == -MAX_DELTA

    @staticmethod
    @pytest.mark.parametrize('seed', range(20))
    def test_grows_with_image_noise(k, seed):
        frame_t, frame_tm1, frame_tm2 = triplet(k)
        rng = np.random.default_rng(seed)
        levels = np.linspace(0.0, 0.2, 20)
        deltas = []
        for sigma in levels:
            noisy = [Frame(np.clip(frame.rgb + rng.normal(0.0, sigma, size=frame.rgb.shape), 0.0, 1.0),
                           frame.depth_gt, frame.pose, k, frame.timestep) for frame in (frame_tm1, frame_tm2)]
            deltas.append(uncertainty_residual(frame_t, *noisy, np.full(k.shape, PLANE_DEPTH)))
        assert spearmanr(levels, deltas).correlation >= 0.95

    @staticmethod
    def test_perfect_reconstruction_has_zero_residual(k):
        frames = triplet(k)
        delta = uncertainty_residual(*frames, np.full(k.shape, PLANE_DEPTH))
        assert delta == pytest.approx(0.0, abs=1e-6)

    @staticmethod
    def test_grows_with_the_depth_error(k):
        frames = triplet(k)
        deltas = [uncertainty_residual(*frames, np.full(k.shape, PLANE_DEPTH * (1 + scale)))
                  for scale in (0.0, 0.1, 0.3, 0.6)]
        assert all(a < b for a, b in zip(deltas, deltas[1:]))
        assert all(0.0 <= d < 1.0 for d in deltas)

    @staticmethod
    def test_no_valid_reprojection_raises(k):
        frame_t = plane_frame(k, 0.0)
        behind = Frame(frame_t.rgb, frame_t.depth_gt, Pose(translation=[0.0, 0.0, 20.0]), k)
        with pytest.raises(ResidualUndefinedError):
            uncertainty_residual(frame_t, behind, behind, np.full(k.shape, PLANE_DEPTH))

    @staticmethod
    def test_unknown_metric_raises(k):
        with pytest.raises(ArgumentError):
            uncertainty_residual(*triplet(k), np.full(k.shape, PLANE_DEPTH), 'l2')
