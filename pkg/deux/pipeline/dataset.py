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
Serialized episode collections.

Layout of a dataset directory::

    manifest.json                 layout version, config hash, world seeds, episode list
    ep_<k>/frame_%05d.ppm         rgb (P6)
    ep_<k>/depth_%05d.bin         ground truth depth (DEUXDPTH, u32 h, w, f32 row-major)
    ep_<k>/sparse_%05d.csv        row,col,depth_m
    ep_<k>/poses.csv              timestep + 12 row-major [R|t] values
    ep_<k>/log.csv                per-step log
    ep_<k>/losses.csv             loss terms of the seed prediction per step (DEUX episodes)
    ep_<k>/intrinsics.json
    ep_<k>/grid.pgm, grid.json    final occupancy map
"""

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from deux import utils
from deux.enums import Action, DATASET_LAYOUT_VERSION, MANIFEST_FILENAME, PolicyName, WorldFamily
from deux.errors import DatasetFormatError
from deux.geometry import Intrinsics, Pose
from deux.mapping import read_pgm, write_pgm
from deux.pipeline.episode import EpisodeRecord, LOG_COLUMNS, LOSS_COLUMNS, StepLog
from deux.pipeline.frame_io import FrameRef, SPARSE_FILENAME, read_sparse, write_sparse

logger = logging.getLogger(__name__)

POSES_FILENAME = 'poses.csv'
LOG_FILENAME = 'log.csv'
LOSSES_FILENAME = 'losses.csv'
INTRINSICS_FILENAME = 'intrinsics.json'
GRID_FILENAME = 'grid.pgm'


@dataclass
class Dataset:
    directory: Path
    episodes: List[dict] = field(default_factory=list)
    world_seeds: List[int] = field(default_factory=list)
    config_hash: Optional[str] = None
    layout_version: int = DATASET_LAYOUT_VERSION

    def manifest(self) -> dict:
        return {'layout_version': self.layout_version, 'config_hash': self.config_hash,
                'world_seeds': self.world_seeds, 'episodes': self.episodes}


def episode_dirname(index: int) -> str:
    return f'ep_{index}'


def _optional(value) -> str:
    return '' if value is None else repr(float(value))


def _write_log(path: Path, record: EpisodeRecord):
    with open(path, 'w', newline='') as fp:
        writer = csv.writer(fp)
        writer.writerow(LOG_COLUMNS)
        for s in record.steps:
            target_row, target_col = ('', '') if s.target is None else s.target
            writer.writerow([s.timestep, s.action.value, repr(float(s.x)), repr(float(s.y)), repr(float(s.heading)),
                             _optional(s.delta), _optional(s.reward), target_row, target_col, s.n_corners,
                             int(s.kept)])


def _read_log(path: Path) -> List[StepLog]:
    with open(path, newline='') as fp:
        rows = list(csv.DictReader(fp))
    steps = []
    for row in rows:
        target = None if row['target_row'] == '' else (int(row['target_row']), int(row['target_col']))
        steps.append(StepLog(timestep=int(row['timestep']), action=Action(row['action']), x=float(row['x']),
                             y=float(row['y']), heading=float(row['heading']),
                             delta=None if row['delta'] == '' else float(row['delta']),
                             reward=None if row['reward'] == '' else float(row['reward']),
                             target=target, n_corners=int(row['n_corners']), kept=bool(int(row['kept']))))
    return steps


def _write_losses(path: Path, record: EpisodeRecord):
    with open(path, 'w', newline='') as fp:
        writer = csv.writer(fp)
        writer.writerow(LOSS_COLUMNS)
        for s in record.steps:
            if s.losses is not None:
                writer.writerow([s.timestep] + [repr(float(v)) for v in s.losses] + [_optional(s.delta)])


def _read_losses(path: Path, steps: List[StepLog]):
    by_timestep = {s.timestep: s for s in steps}
    with open(path, newline='') as fp:
        for row in csv.DictReader(fp):
            by_timestep[int(row['timestep'])].losses = tuple(float(row[name]) for name in LOSS_COLUMNS[1:-1])


def _write_poses(path: Path, frames: Sequence[FrameRef]):
    with open(path, 'w', newline='') as fp:
        writer = csv.writer(fp)
        writer.writerow(['timestep'] + [f'm{r}{c}' for r in range(3) for c in range(4)])
        for ref in frames:
            writer.writerow([ref.timestep] + [repr(v) for v in ref.pose.to_row()])


def _read_poses(path: Path) -> List[Pose]:
    with open(path, newline='') as fp:
        reader = csv.reader(fp)
        next(reader)
        return [Pose.from_row([float(v) for v in row[1:]]) for row in reader]


def write_episode(record: EpisodeRecord, episode_dir: Path):
    episode_dir = Path(episode_dir)
    episode_dir.mkdir(parents=True, exist_ok=True)
    for ref, sparse in zip(record.frames, record.sparse):
        if not (ref.on_disk and ref.directory == episode_dir):
            FrameRef.stored(ref.load(), episode_dir)
        write_sparse(episode_dir / SPARSE_FILENAME.format(ref.timestep), sparse)
    _write_poses(episode_dir / POSES_FILENAME, record.frames)
    _write_log(episode_dir / LOG_FILENAME, record)
    if any(s.losses is not None for s in record.steps):
        _write_losses(episode_dir / LOSSES_FILENAME, record)
    if record.frames:
        record.frames[0].intrinsics.save(episode_dir / INTRINSICS_FILENAME)
    if record.grid is not None:
        write_pgm(record.grid, episode_dir / GRID_FILENAME)


@utils.log_time
def write_dataset(records: Sequence[EpisodeRecord], directory: Path, config_hash: Optional[str] = None) -> Dataset:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    dataset = Dataset(directory, config_hash=config_hash)
    for index, record in enumerate(records):
        name = episode_dirname(index)
        write_episode(record, directory / name)
        dataset.episodes.append({'dir': name, 'scene_seed': record.scene_seed, 'family': record.family.value,
                                 'policy': record.policy.value, 'seed': record.seed, 'n_steps': len(record),
                                 'kept': record.kept_timesteps, 'episode_return': record.episode_return})
        if record.scene_seed not in dataset.world_seeds:
            dataset.world_seeds.append(record.scene_seed)
    (directory / MANIFEST_FILENAME).write_text(json.dumps(dataset.manifest(), indent=4, sort_keys=True))
    logger.info(f'Wrote {len(records)} episode(s) to {directory}')
    return dataset


def load_manifest(directory: Path, expected_hash: Optional[str] = None) -> Dataset:
    directory = Path(directory)
    manifest_file = directory / MANIFEST_FILENAME
    try:
        manifest = json.loads(manifest_file.read_text())
    except OSError as e:
        raise DatasetFormatError(f'No dataset manifest at {manifest_file}: {e}') from e
    except ValueError as e:
        raise DatasetFormatError(f'Dataset manifest {manifest_file} is not valid JSON: {e}') from e
    version = manifest.get('layout_version')
    if version != DATASET_LAYOUT_VERSION:
        raise DatasetFormatError(f'Dataset layout version {version} in {manifest_file} is not supported, '
                                 f'expected {DATASET_LAYOUT_VERSION}')
    if expected_hash is not None and manifest.get('config_hash') != expected_hash:
        raise DatasetFormatError(f'Dataset {directory} was produced by a different config '
                                 f'({manifest.get("config_hash")} != {expected_hash})')
    return Dataset(directory, episodes=manifest.get('episodes', []), world_seeds=manifest.get('world_seeds', []),
                   config_hash=manifest.get('config_hash'), layout_version=version)


def read_episode(entry: dict, episode_dir: Path) -> EpisodeRecord:
    episode_dir = Path(episode_dir)
    try:
        intrinsics = Intrinsics.load(episode_dir / INTRINSICS_FILENAME)
        steps = _read_log(episode_dir / LOG_FILENAME)
        poses = _read_poses(episode_dir / POSES_FILENAME)
        if (episode_dir / LOSSES_FILENAME).is_file():
            _read_losses(episode_dir / LOSSES_FILENAME, steps)
    except (OSError, KeyError, ValueError) as e:
        raise DatasetFormatError(f'Episode {episode_dir} is incomplete or corrupted: {e}') from e
    if not (len(steps) == len(poses) == entry.get('n_steps', len(steps))):
        raise DatasetFormatError(f'Episode {episode_dir}: log, poses and manifest disagree on the episode length')

    record = EpisodeRecord(scene_seed=entry['scene_seed'], family=WorldFamily(entry['family']),
                           policy=PolicyName(entry['policy']), seed=entry['seed'], steps=steps)
    for step_log, pose in zip(steps, poses):
        ref = FrameRef(pose, intrinsics, step_log.timestep, directory=episode_dir)
        for path in (ref.rgb_path(), ref.depth_path()):
            if not path.is_file():
                raise DatasetFormatError(f'Missing frame file {path}')
        record.frames.append(ref)
        record.sparse.append(read_sparse(episode_dir / SPARSE_FILENAME.format(step_log.timestep),
                                         intrinsics.shape, step_log.n_corners))
    if (episode_dir / GRID_FILENAME).is_file():
        record.grid = read_pgm(episode_dir / GRID_FILENAME)
    return record


@utils.log_time
def read_dataset(directory: Path, expected_hash: Optional[str] = None) -> List[EpisodeRecord]:
    """Episodes with frames referenced on disk, loaded lazily"""
    dataset = load_manifest(directory, expected_hash)
    return [read_episode(entry, dataset.directory / entry['dir']) for entry in dataset.episodes]
