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
Depth completion error metrics: MAE / RMSE over depth in millimeters, iMAE / iRMSE over
inverse depth in 1/km
"""

from dataclasses import dataclass, astuple
from typing import Iterable

import numpy as np

from deux.errors import ArgumentError, GeometryError, ShapeError

METRIC_NAMES = ('mae_mm', 'rmse_mm', 'imae_per_km', 'irmse_per_km')


@dataclass(frozen=True)
class EvalMetrics:
    mae_mm: float
    rmse_mm: float
    imae_per_km: float
    irmse_per_km: float

    def as_row(self):
        return list(astuple(self))


def evaluate(pred: np.ndarray, gt: np.ndarray) -> EvalMetrics:
    if pred.shape != gt.shape:
        raise ShapeError(f'Prediction {pred.shape} and ground truth {gt.shape} differ in size')
    if np.any(pred <= 0) or np.any(gt <= 0):
        raise GeometryError('Depth metrics are undefined for non-positive depths')
    error = pred.astype(np.float64) - gt
    inverse_error = 1.0 / pred.astype(np.float64) - 1.0 / gt
    return EvalMetrics(mae_mm=float(np.mean(np.abs(error)) * 1000.0),
                       rmse_mm=float(np.sqrt(np.mean(error ** 2)) * 1000.0),
                       imae_per_km=float(np.mean(np.abs(inverse_error)) * 1000.0),
                       irmse_per_km=float(np.sqrt(np.mean(inverse_error ** 2)) * 1000.0))


def mean_metrics(metrics: Iterable[EvalMetrics]) -> EvalMetrics:
    """Per-metric mean over frames"""
    rows = np.array([m.as_row() for m in metrics], dtype=np.float64)
    if rows.size == 0:
        raise ArgumentError('Cannot average an empty list of metrics')
    return EvalMetrics(*(float(v) for v in rows.mean(axis=0)))
