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
Classical depth completor h_theta(I, z): inverse distance weighted interpolation of the sparse
points followed by edge-aware Jacobi smoothing, and its fitting by grid search on the
unsupervised loss
"""

import json
import logging
from abc import ABC, abstractmethod
from concurrent.futures import ProcessPoolExecutor
from configparser import ConfigParser
from dataclasses import dataclass, asdict, replace, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from deux import utils
from deux.enums import (CompletorKind, MIN_DEPTH, MAX_DEPTH, SEED_MODEL_CONFIG_FILENAME,
                        SEED_MODEL_PARAMS_FILENAME)
from deux.errors import ArgumentError, FittingError, UndefinedLossError, DatasetFormatError
from deux.losses import LossWeights, SparseDepth, total_loss

logger = logging.getLogger(__name__)

# axis order is the coordinate search order
DEFAULT_GRID = {
    'idw_power': [1.0, 2.0, 3.0],
    'refine_iters': [0, 25, 50, 100],
    'edge_weight': [0.25, 0.5, 0.75, 1.0],
    'idw_neighbors': [1, 4, 8],
}


@dataclass(frozen=True)
class CompletorParams:
    idw_neighbors: int = 4
    idw_power: float = 2.0
    refine_iters: int = 25
    edge_weight: float = 0.5
    weights: LossWeights = field(default_factory=LossWeights)

    def __post_init__(self):
        if self.idw_neighbors < 1:
            raise ArgumentError(f'idw_neighbors must be >= 1, got {self.idw_neighbors}')
        if self.refine_iters < 0:
            raise ArgumentError(f'refine_iters must be >= 0, got {self.refine_iters}')
        if self.edge_weight < 0:
            raise ArgumentError(f'edge_weight must be >= 0, got {self.edge_weight}')

    def key(self) -> tuple:
        return self.idw_neighbors, self.idw_power, self.refine_iters, self.edge_weight

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> 'CompletorParams':
        values = dict(values)
        weights = LossWeights.from_dict(values.pop('weights', {}))
        return cls(idw_neighbors=int(values.get('idw_neighbors', 4)), idw_power=float(values.get('idw_power', 2.0)),
                   refine_iters=int(values.get('refine_iters', 25)),
                   edge_weight=float(values.get('edge_weight', 0.5)), weights=weights)

    def save(self, path: Path):
        Path(path).write_text(utils.to_json(self, pretty=True))

    @classmethod
    def load(cls, path: Path) -> 'CompletorParams':
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, ValueError, TypeError) as e:
            raise DatasetFormatError(f'Cannot read completor parameters from {path}: {e}') from e


@dataclass
class TrainingTriplet:
    """Frames t, t-1, t-2 and the sparse depth of frame t"""
    frame_t: object
    frame_tm1: object
    frame_tm2: object
    sparse: SparseDepth


# --- completion ----------------------------------------------------------------------------------

def _idw(shape, z: SparseDepth, neighbors: int, power: float) -> np.ndarray:
    tree = cKDTree(np.stack([z.rows, z.cols], axis=1).astype(np.float64))
    k = min(neighbors, len(z))
    rows, cols = np.mgrid[0:shape[0], 0:shape[1]]
    distances, indices = tree.query(np.stack([rows.ravel(), cols.ravel()], axis=1), k=k)
    distances = distances.reshape(len(distances), -1)
    indices = indices.reshape(len(indices), -1)
    values = z.depths[indices]
    exact = distances[:, 0] == 0
    weights = 1.0 / np.where(distances == 0, 1.0, distances) ** power
    dense = (weights * values).sum(axis=1) / weights.sum(axis=1)
    dense[exact] = values[exact, 0]
    return dense.reshape(shape)


def _neighbour_weights(image: np.ndarray):
    weight_x = np.exp(-np.abs(np.diff(image, axis=1)).mean(axis=2))
    weight_y = np.exp(-np.abs(np.diff(image, axis=0)).mean(axis=2))
    return weight_x, weight_y


def _jacobi_step(depth: np.ndarray, weight_x: np.ndarray, weight_y: np.ndarray, strength: float) -> np.ndarray:
    total = np.zeros_like(depth)
    norm = np.zeros_like(depth)
    total[:, :-1] += weight_x * depth[:, 1:]
    norm[:, :-1] += weight_x
    total[:, 1:] += weight_x * depth[:, :-1]
    norm[:, 1:] += weight_x
    total[:-1, :] += weight_y * depth[1:, :]
    norm[:-1, :] += weight_y
    total[1:, :] += weight_y * depth[:-1, :]
    norm[1:, :] += weight_y
    neighbour_mean = np.divide(total, norm, out=depth.copy(), where=norm > 0)
    return (1.0 - strength) * depth + strength * neighbour_mean


def complete_depth(image: np.ndarray, z: SparseDepth, params: CompletorParams = CompletorParams()) -> np.ndarray:
    """
    Dense depth from the image and sparse depth. Sparse pixels keep their value exactly,
    the output lies in [MIN_DEPTH, MAX_DEPTH].
    """
    if len(z) == 0:
        raise ArgumentError('Depth completion needs at least one sparse point')
    shape = image.shape[:2]
    if z.shape != shape:
        raise ArgumentError(f'Sparse depth of shape {z.shape} does not match the image {shape}')
    depth = _idw(shape, z, params.idw_neighbors, params.idw_power)
    depth[z.rows, z.cols] = z.depths
    if params.refine_iters:
        weight_x, weight_y = _neighbour_weights(image)
        for _ in range(params.refine_iters):
            depth = _jacobi_step(depth, weight_x, weight_y, params.edge_weight)
            depth[z.rows, z.cols] = z.depths
    return np.clip(depth, MIN_DEPTH, MAX_DEPTH)


class DepthCompletor(ABC):
    """
    Interface of the models that turn (frame, sparse depth) into dense depth. The concrete
    kind is written to conf.ini so CompletorFactory can rebuild it.
    """
    kind: CompletorKind = None

    @abstractmethod
    def predict(self, frame, sparse: SparseDepth) -> np.ndarray:
        pass

    def _params_dict(self) -> dict:
        return {}

    def save(self, model_dir: Path):
        model_dir = Path(model_dir)
        model_dir.mkdir(parents=True, exist_ok=True)
        config = ConfigParser()
        config['deux'] = {'version': utils.get_module_version(), 'completor': self.kind.value,
                          'params': SEED_MODEL_PARAMS_FILENAME}
        with open(model_dir / SEED_MODEL_CONFIG_FILENAME, 'w') as fp:
            config.write(fp)
        (model_dir / SEED_MODEL_PARAMS_FILENAME).write_text(json.dumps(self._params_dict(), indent=4, sort_keys=True))
        logger.info(f'Saved {self.kind} completor to {model_dir}')


class ClassicalCompletor(DepthCompletor):
    kind = CompletorKind.CLASSICAL

    def __init__(self, params: CompletorParams = CompletorParams()):
        self.params = params

    def predict(self, frame, sparse: SparseDepth) -> np.ndarray:
        return complete_depth(frame.rgb, sparse, self.params)

    def _params_dict(self) -> dict:
        return self.params.to_dict()


class GroundTruthCompletor(DepthCompletor):
    """Returns the simulator depth, the zero-error reference for A/B rollouts"""
    kind = CompletorKind.GROUND_TRUTH

    def predict(self, frame, sparse: SparseDepth) -> np.ndarray:
        return np.array(frame.depth_gt, dtype=np.float64)


# --- fitting -------------------------------------------------------------------------------------

def triplet_loss(triplet: TrainingTriplet, params: CompletorParams) -> float:
    pred = complete_depth(triplet.frame_t.rgb, triplet.sparse, params)
    return total_loss(triplet.frame_t, triplet.frame_tm1, triplet.frame_tm2, pred, triplet.sparse,
                      params.weights).l_d


def mean_training_loss(triplets: Sequence[TrainingTriplet], params: CompletorParams) -> float:
    """
    Mean l_d over the triplets; triplets whose loss is undefined (nothing reprojects) are skipped
    """
    losses = []
    for triplet in triplets:
        try:
            losses.append(triplet_loss(triplet, params))
        except UndefinedLossError as e:
            logger.debug(f'Skipping triplet at t={getattr(triplet.frame_t, "timestep", "?")}: {e}')
    if not losses:
        raise FittingError('The loss is undefined on every training triplet')
    return float(np.mean(losses))


_worker_triplets: List[TrainingTriplet] = []


def _init_worker(triplets):
    global _worker_triplets
    _worker_triplets = triplets


def _worker_loss(params: CompletorParams) -> float:
    return mean_training_loss(_worker_triplets, params)


def subsample_triplets(triplets: Sequence[TrainingTriplet], max_triplets: Optional[int]) -> List[TrainingTriplet]:
    """Evenly spaced subset, first and last triplet always kept"""
    triplets = list(triplets)
    if not max_triplets or len(triplets) <= max_triplets:
        return triplets
    indices = np.unique(np.round(np.linspace(0, len(triplets) - 1, max_triplets)).astype(int))
    return [triplets[i] for i in indices]


def fit_completor(dataset: Sequence[TrainingTriplet], init: CompletorParams = CompletorParams(),
                  grid: Optional[Dict[str, list]] = None, max_triplets: Optional[int] = None,
                  jobs: int = 1) -> CompletorParams:
    """
    Coordinate grid search minimising the mean unsupervised loss l_d over the training
    triplets. Axes are searched in grid order, each axis holds its grid values plus the
    value of init; ties go to the earlier grid value. Deterministic for any jobs.
    """
    triplets = subsample_triplets(dataset, max_triplets)
    if not triplets:
        raise FittingError('Fitting needs at least one frame triplet (an episode with 3 consecutive frames)')
    grid = DEFAULT_GRID if grid is None else grid

    cache: Dict[tuple, float] = {}
    executor = ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(triplets,)) \
        if jobs > 1 else None
    try:
        def losses_of(candidates: List[CompletorParams]) -> List[float]:
            missing = [c for c in candidates if c.key() not in cache]
            if executor is not None:
                values = list(executor.map(_worker_loss, missing))
            else:
                values = [mean_training_loss(triplets, c) for c in missing]
            for candidate, value in zip(missing, values):
                cache[candidate.key()] = value
                logger.info(f'l_d = {value:.6f} for {candidate.key()} (neighbors, power, iters, edge weight)')
            return [cache[c.key()] for c in candidates]

        current = init
        for axis, values in grid.items():
            axis_values = list(values)
            if getattr(init, axis) not in axis_values:
                axis_values.append(getattr(init, axis))
            candidates = [replace(current, **{axis: value}) for value in axis_values]
            losses = losses_of(candidates)
            current = candidates[int(np.argmin(losses))]
    finally:
        if executor is not None:
            executor.shutdown()

    logger.info(f'Fitted completor {current.key()} with l_d = {cache[current.key()]:.6f} '
                f'on {len(triplets)} triplets')
    return current
