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
Episode orchestration: exploration, sparse depth sampling, map integration, data verification
and logging for one (scene, policy, seed)
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from deux.completion.completor import TrainingTriplet, subsample_triplets
from deux.completion.sparse import DEFAULT_TARGET_COUNT, sample_sparse_depth
from deux.enums import Action, CellState, PolicyName, WorldFamily
from deux.errors import EmptyEpisodeError
from deux.geometry import Intrinsics, Pose
from deux.losses import SparseDepth
from deux.mapping import OccupancyGrid, integrate
from deux.policies.base import EpisodeBudget, ExplorationPolicy, StepContext, reward
from deux.pipeline.frame_io import FrameRef
from deux.utils import derive_seed
from deux.world import AgentState, Scene, observe, step

logger = logging.getLogger(__name__)

DEFAULT_MIN_POINTS = 100
LOG_COLUMNS = ['timestep', 'action', 'x', 'y', 'heading', 'delta', 'reward', 'target_row', 'target_col',
               'n_corners', 'kept']
LOSS_COLUMNS = ['timestep', 'l_co', 'l_st', 'l_ph', 'l_sz', 'l_sm', 'l_d', 'delta']


@dataclass
class StepLog:
    timestep: int
    action: Action
    x: float
    y: float
    heading: float
    delta: Optional[float] = None
    reward: Optional[float] = None
    target: Optional[tuple] = None
    n_corners: int = 0
    kept: bool = True
    # l_co, l_st, l_ph, l_sz, l_sm, l_d of the seed prediction, DEUX only
    losses: Optional[tuple] = None


@dataclass
class EpisodeRecord:
    """
    One episode. steps, frames, sparse and poses all have one entry per timestep; frames
    failing verification stay in the record (they are context for their successors) with
    kept = False.
    """
    scene_seed: int
    family: WorldFamily
    policy: PolicyName
    seed: int
    steps: List[StepLog] = field(default_factory=list)
    frames: List[FrameRef] = field(default_factory=list)
    sparse: List[SparseDepth] = field(default_factory=list)
    grid: Optional[OccupancyGrid] = None

    def __len__(self):
        return len(self.steps)

    @property
    def poses(self) -> List[Pose]:
        return [f.pose for f in self.frames]

    @property
    def deltas(self) -> List[Optional[float]]:
        return [s.delta for s in self.steps]

    @property
    def actions(self) -> List[Action]:
        return [s.action for s in self.steps]

    @property
    def episode_return(self) -> float:
        """J = sum of the rewards, steps without a residual contribute nothing"""
        return float(sum(s.reward for s in self.steps if s.reward is not None))

    @property
    def kept_timesteps(self) -> List[int]:
        return [s.timestep for s in self.steps if s.kept]


def episode_rngs(seed: int, scene_seed: int, policy: PolicyName):
    """Independent streams for the policy and for sparse depth padding"""
    return (np.random.default_rng(derive_seed(seed, scene_seed, policy.value, 'policy')),
            np.random.default_rng(derive_seed(seed, scene_seed, policy.value, 'sparse')))


def collect_episode(scene: Scene, policy: ExplorationPolicy, budget: EpisodeBudget, seed: int,
                    k: Optional[Intrinsics] = None, target_count: int = DEFAULT_TARGET_COUNT,
                    min_points: int = DEFAULT_MIN_POINTS, episode_dir: Optional[Path] = None) -> EpisodeRecord:
    """
    Runs the policy for at most budget.max_steps actions. A Stop is logged and ends the
    episode; a Stop as the very first action raises EmptyEpisodeError. With episode_dir the
    frames are written there as they are observed instead of being kept in memory.
    """
    k = Intrinsics.default() if k is None else k
    policy_rng, sparse_rng = episode_rngs(seed, scene.seed, policy.name)
    policy.reset(scene, policy_rng)
    if episode_dir is not None:
        Path(episode_dir).mkdir(parents=True, exist_ok=True)

    record = EpisodeRecord(scene_seed=scene.seed, family=scene.family, policy=policy.name, seed=seed)
    state = AgentState.spawn(scene)
    grid = OccupancyGrid.for_scene(scene)
    window = deque(maxlen=3)

    for t in range(budget.max_steps):
        frame = observe(scene, state, k, t)
        sparse = sample_sparse_depth(frame, target_count, sparse_rng)
        grid = integrate(grid, frame.pose, frame.depth_gt, k, scene.floor_height)
        window.append(frame)

        action = policy.act(StepContext(scene=scene, state=state, grid=grid, frames=tuple(window),
                                        sparse=sparse, timestep=t, rng=policy_rng))
        if action == Action.STOP and t == 0:
            raise EmptyEpisodeError(f'{policy.name} policy stopped before taking a single step')

        delta = policy.last_delta
        record.steps.append(StepLog(timestep=t, action=action, x=state.x, y=state.y, heading=state.heading,
                                    delta=delta, reward=None if delta is None else reward(delta),
                                    target=policy.target, n_corners=sparse.n_corners,
                                    kept=sparse.n_corners >= min_points,
                                    losses=None if policy.last_breakdown is None
                                    else tuple(policy.last_breakdown.as_row())))
        record.frames.append(FrameRef.stored(frame, episode_dir) if episode_dir is not None
                             else FrameRef.in_memory(frame))
        record.sparse.append(sparse)
        logger.debug(f't={t} {action} at ({state.x:.2f}, {state.y:.2f}) delta={delta}')

        if action == Action.STOP:
            break
        state = step(scene, state, action)

    record.grid = grid
    dropped = len(record) - len(record.kept_timesteps)
    logger.info(f'{policy.name} episode on scene {scene.seed}: {len(record)} steps, {dropped} frames failed '
                f'verification, {grid.count(CellState.FREE)} free cells mapped, return {record.episode_return:.4f}')
    return record


def training_triplets(records: Sequence[EpisodeRecord], max_triplets: Optional[int] = None) -> List[TrainingTriplet]:
    """
    (t, t-1, t-2) triplets for every kept frame with two predecessors, subsampled before
    any frame is loaded
    """
    candidates = [(record, t) for record in records for t in record.kept_timesteps if t >= 2]
    chosen = subsample_triplets(candidates, max_triplets)
    return [TrainingTriplet(frame_t=record.frames[t].load(), frame_tm1=record.frames[t - 1].load(),
                            frame_tm2=record.frames[t - 2].load(), sparse=record.sparse[t])
            for record, t in chosen]
