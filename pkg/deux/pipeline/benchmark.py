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
The policy comparison: for every master seed each policy explores the same training scenes,
a completor is fitted on each policy's data and all completors are evaluated on one shared
scripted test set. Random runs first because its data fits the DEUX seed model.

Run directory layout::

    seed_<s>/test_<family>/       sweep test set (dataset layout)
    seed_<s>/<policy>/            training dataset of the policy
    seed_<s>/<policy>/completor/  fitted completor (conf.ini, params.json)
    seed_<s>/seed_model/          DEUX seed model
    predictions.h5                /seed_<s>/<family>/ground_truth and /seed_<s>/<family>/<policy>
    report.csv, report.json
"""

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import h5py
import numpy as np

from deux import utils
from deux.completion.completor import (ClassicalCompletor, DepthCompletor, GroundTruthCompletor, CompletorParams,
                                       fit_completor)
from deux.completion.completor_factory import CompletorFactory
from deux.completion.metrics import EvalMetrics, METRIC_NAMES, evaluate, mean_metrics
from deux.enums import (CompletorKind, PolicyName, PLANS_DIRNAME, PREDICTIONS_FILENAME, REPORT_CSV_FILENAME,
                        REPORT_JSON_FILENAME, WorldFamily)
from deux.errors import DependencyError
from deux.geometry import Intrinsics
from deux.pipeline.config import (RunConfig, completor_params_from_config, intrinsics_from_config,
                                  run_config_hash, world_params_from_config)
from deux.pipeline.dataset import episode_dirname, write_dataset
from deux.pipeline.episode import EpisodeRecord, collect_episode, training_triplets
from deux.pipeline.test_set import TestSet, build_test_set, scene_seeds
from deux.policies.base import EpisodeBudget, TargetedPolicy
from deux.policies.policy_factory import make_policy
from deux.world import WorldParams, generate_scene

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ['seed', 'policy', 'train_family', 'test_family', 'n_episodes', 'n_train_frames',
                  'n_test_samples', 'episode_return', 'idw_neighbors', 'idw_power', 'refine_iters',
                  'edge_weight'] + list(METRIC_NAMES)
BASELINES = (PolicyName.RANDOM, PolicyName.FRONTIER, PolicyName.ORACLE)


@dataclass(frozen=True)
class EpisodeJob:
    """Everything one worker needs to collect one training episode"""
    scene_seed: int
    world: WorldParams
    policy: PolicyName
    config: dict
    seed: int
    intrinsics: Intrinsics
    episode_dir: Path
    seed_completor: Optional[DepthCompletor] = None
    dump_plans: bool = False


def run_episode_job(job: EpisodeJob) -> EpisodeRecord:
    scene = generate_scene(job.scene_seed, job.world)
    policy = make_policy(job.policy, job.config, job.seed_completor)
    if job.dump_plans and isinstance(policy, TargetedPolicy):
        policy.plan_dir = Path(job.episode_dir) / PLANS_DIRNAME
        policy.plan_dir.mkdir(parents=True, exist_ok=True)
    return collect_episode(scene, policy, EpisodeBudget(job.config['budget']['max_steps']), job.seed,
                           job.intrinsics, target_count=job.config['sparse']['target_count'],
                           min_points=job.config['sparse']['min_points'], episode_dir=job.episode_dir)


def collect_episodes(jobs_list: Sequence[EpisodeJob], jobs: int = 1) -> List[EpisodeRecord]:
    """Records in job order for any number of workers"""
    if jobs > 1 and len(jobs_list) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            return list(executor.map(run_episode_job, jobs_list))
    return [run_episode_job(job) for job in jobs_list]


def predict_float32(completor: DepthCompletor, sample) -> np.ndarray:
    """Predictions are rounded to float32, the precision they are stored in"""
    return completor.predict(sample.frame_t, sample.sparse).astype(np.float32)


def evaluate_completor(completor: DepthCompletor, test_set: TestSet,
                       store: Optional[h5py.Dataset] = None) -> EvalMetrics:
    """Mean metrics over the test samples, predictions optionally written row by row to store"""
    metrics = []
    for index, sample in enumerate(test_set):
        pred = predict_float32(completor, sample)
        if store is not None:
            store[index] = pred
        metrics.append(evaluate(pred.astype(np.float64), sample.gt))
    return mean_metrics(metrics)


@dataclass
class BenchmarkRow:
    seed: int
    policy: PolicyName
    train_family: WorldFamily
    test_family: WorldFamily
    n_episodes: int
    n_train_frames: int
    n_test_samples: int
    episode_return: float
    params: CompletorParams
    metrics: EvalMetrics

    def as_row(self) -> list:
        return [self.seed, self.policy.value, self.train_family.value, self.test_family.value, self.n_episodes,
                self.n_train_frames, self.n_test_samples, repr(self.episode_return), self.params.idw_neighbors,
                repr(self.params.idw_power), self.params.refine_iters, repr(self.params.edge_weight)] + \
            [repr(v) for v in self.metrics.as_row()]

    def to_dict(self) -> dict:
        return {'seed': self.seed, 'policy': self.policy.value, 'train_family': self.train_family.value,
                'test_family': self.test_family.value, 'n_episodes': self.n_episodes,
                'n_train_frames': self.n_train_frames, 'n_test_samples': self.n_test_samples,
                'episode_return': self.episode_return, 'params': self.params.to_dict(), **self.metrics.__dict__}


@dataclass
class BenchmarkReport:
    """
    Per (seed, policy, test family) rows, their means over seeds and the relative improvement
    of DEUX over every baseline in percent of the baseline value (positive is better)
    """
    config_hash: str
    rows: List[BenchmarkRow] = field(default_factory=list)

    def aggregates(self) -> Dict[tuple, EvalMetrics]:
        groups: Dict[tuple, List[EvalMetrics]] = {}
        for row in self.rows:
            groups.setdefault((row.policy, row.test_family), []).append(row.metrics)
        return {key: mean_metrics(values) for key, values in groups.items()}

    def improvements(self) -> List[dict]:
        aggregates = self.aggregates()
        result = []
        for (policy, family), deux_metrics in aggregates.items():
            if policy != PolicyName.DEUX:
                continue
            for baseline in BASELINES:
                if (baseline, family) not in aggregates:
                    continue
                base_metrics = aggregates[(baseline, family)]
                for name in METRIC_NAMES:
                    base, ours = getattr(base_metrics, name), getattr(deux_metrics, name)
                    percent = 100.0 * (base - ours) / base if base > 0 else 0.0
                    result.append({'baseline': baseline.value, 'test_family': family.value, 'metric': name,
                                   'percent': percent})
        return result

    def to_dict(self) -> dict:
        return {
            'config_hash': self.config_hash,
            'rows': [row.to_dict() for row in self.rows],
            'means': [{'policy': policy.value, 'test_family': family.value, **metrics.__dict__}
                      for (policy, family), metrics in self.aggregates().items()],
            'improvements': self.improvements(),
        }

    def write(self, out_dir: Path):
        out_dir = Path(out_dir)
        with open(out_dir / REPORT_CSV_FILENAME, 'w', newline='') as fp:
            writer = csv.writer(fp)
            writer.writerow(REPORT_COLUMNS)
            for row in self.rows:
                writer.writerow(row.as_row())
            for (policy, family), metrics in self.aggregates().items():
                writer.writerow(['mean', policy.value, '', family.value] + [''] * 8 +
                                [repr(v) for v in metrics.as_row()])
        (out_dir / REPORT_JSON_FILENAME).write_text(json.dumps(self.to_dict(), indent=4, sort_keys=True))
        logger.info(f'Wrote {REPORT_CSV_FILENAME} and {REPORT_JSON_FILENAME} to {out_dir}')


def ordered_policies(names: Sequence[str]) -> List[PolicyName]:
    """Config order, with Random moved in front of DEUX"""
    policies = [PolicyName(name) for name in names]
    if PolicyName.RANDOM in policies and PolicyName.DEUX in policies:
        policies.remove(PolicyName.RANDOM)
        policies.insert(policies.index(PolicyName.DEUX), PolicyName.RANDOM)
    return policies


def check_seed_model_dependency(policies: Sequence[PolicyName], seed_model: Optional[Path]):
    if PolicyName.DEUX in policies and PolicyName.RANDOM not in policies and seed_model is None:
        raise DependencyError('The DEUX policy needs a seed model: add "random" to the policies '
                              'or pass --seed-model <dir>')


def make_seed_model(config: RunConfig, random_params: CompletorParams) -> DepthCompletor:
    if config['deux']['seed_completor'] == CompletorKind.GROUND_TRUTH.value:
        return GroundTruthCompletor()
    return ClassicalCompletor(random_params)


def _family_store(h5: Optional[h5py.File], seed: int, family: WorldFamily, test_set: TestSet):
    if h5 is None:
        return None
    group = h5.require_group(f'seed_{seed}/{family.value}')
    shape = (len(test_set),) + tuple(test_set.shape)
    # ground truth is read back from float32 depth files, so float32 storage is exact
    truth = group.create_dataset('ground_truth', shape=shape, dtype='f4', compression='gzip')
    for index, sample in enumerate(test_set):
        truth[index] = sample.gt
    return group


class Benchmark:
    """One bench run: config, output directory and the worker count"""

    def __init__(self, config: RunConfig, out_dir: Path, jobs: int = 1, seed_model: Optional[Path] = None):
        self.config = config
        self.out_dir = Path(out_dir)
        self.jobs = max(1, int(jobs))
        self.policies = ordered_policies(config['policies'])
        check_seed_model_dependency(self.policies, seed_model)
        self.supplied_seed_model = None if seed_model is None else CompletorFactory(seed_model).build()
        self.world = world_params_from_config(config)
        self.transfer_family = config['world']['transfer_family']
        self.k = intrinsics_from_config(config)
        self.init_params = completor_params_from_config(config)
        self.report = BenchmarkReport(run_config_hash(config))

    def master_seed(self, bench_seed: int) -> int:
        return utils.derive_seed(self.config['seed'], 'bench', bench_seed)

    def test_sets(self, seed_dir: Path, master: int, train_seeds: List[int]) -> Dict[WorldFamily, TestSet]:
        bench = self.config['bench']
        families = [self.world.family]
        if self.transfer_family is not None and WorldFamily(self.transfer_family) != self.world.family:
            families.append(WorldFamily(self.transfer_family))
        return {family: build_test_set(family, bench['n_test_scenes'], master,
                                       world_params_from_config(self.config, family.value), self.k,
                                       steps=bench['test_steps'], stride=bench['test_stride'],
                                       directory=seed_dir / f'test_{family.value}', exclude=train_seeds,
                                       target_count=self.config['sparse']['target_count'],
                                       min_points=self.config['sparse']['min_points'])
                for family in families}

    def train_policy(self, policy: PolicyName, seed_dir: Path, master: int, train_seeds: List[int],
                     seed_completor: Optional[DepthCompletor]):
        dataset_dir = seed_dir / policy.value
        jobs_list = [EpisodeJob(scene_seed=scene_seed, world=self.world, policy=policy, config=self.config,
                                seed=master, intrinsics=self.k, episode_dir=dataset_dir / episode_dirname(i),
                                seed_completor=seed_completor)
                     for i, scene_seed in enumerate(train_seeds)]
        records = collect_episodes(jobs_list, self.jobs)
        write_dataset(records, dataset_dir, self.report.config_hash)

        completor_config = self.config['completor']
        triplets = training_triplets(records, completor_config['max_triplets'])
        params = fit_completor(triplets, self.init_params, completor_config['grid'],
                               completor_config['max_triplets'], self.jobs)
        completor = ClassicalCompletor(params)
        completor.save(dataset_dir / 'completor')
        return records, completor

    def run_seed(self, bench_seed: int, h5: Optional[h5py.File]):
        master = self.master_seed(bench_seed)
        seed_dir = self.out_dir / f'seed_{bench_seed}'
        train_seeds = scene_seeds(master, self.world.family, 'train', self.config['bench']['n_train_scenes'])
        test_sets = self.test_sets(seed_dir, master, train_seeds)
        stores = {family: _family_store(h5, bench_seed, family, test_set) for family, test_set in test_sets.items()}
        logger.info(f'Seed {bench_seed} (master {master}): training scenes {train_seeds}')

        seed_completor = self.supplied_seed_model
        for policy in self.policies:
            records, completor = self.train_policy(policy, seed_dir, master, train_seeds,
                                                   seed_completor if policy == PolicyName.DEUX else None)
            if policy == PolicyName.RANDOM and seed_completor is None:
                seed_completor = make_seed_model(self.config, completor.params)
                seed_completor.save(seed_dir / 'seed_model')

            n_frames = sum(len([t for t in r.kept_timesteps if t >= 2]) for r in records)
            returns = float(np.mean([r.episode_return for r in records]))
            for family, test_set in test_sets.items():
                store = None
                if stores[family] is not None:
                    store = stores[family].create_dataset(policy.value, shape=(len(test_set),) + tuple(test_set.shape),
                                                          dtype='f4', compression='gzip')
                metrics = evaluate_completor(completor, test_set, store)
                if store is not None:
                    for name, value in metrics.__dict__.items():
                        store.attrs[name] = value
                self.report.rows.append(BenchmarkRow(bench_seed, policy, self.world.family, family, len(records),
                                                     n_frames, len(test_set), returns, completor.params, metrics))
                logger.info(f'seed {bench_seed} {policy} on {family}: MAE {metrics.mae_mm:.2f} mm, '
                            f'RMSE {metrics.rmse_mm:.2f} mm')

    @utils.log_time
    def run(self) -> BenchmarkReport:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        h5 = h5py.File(self.out_dir / PREDICTIONS_FILENAME, 'w') if self.config['bench']['save_predictions'] else None
        try:
            for bench_seed in self.config['bench']['seeds']:
                self.run_seed(bench_seed, h5)
        finally:
            if h5 is not None:
                h5.close()
        self.report.write(self.out_dir)
        return self.report


def run_benchmark(config: RunConfig, out_dir: Optional[Path] = None, jobs: int = 1,
                  seed_model: Optional[Path] = None) -> BenchmarkReport:
    out_dir = Path(config['output_dir']) if out_dir is None else Path(out_dir)
    return Benchmark(config, out_dir, jobs, seed_model).run()


def metrics_from_predictions(path: Path, seed: int, family: WorldFamily, policy: PolicyName) -> EvalMetrics:
    """Recomputes a report row from predictions.h5"""
    with h5py.File(path, 'r') as h5:
        group = h5[f'seed_{seed}/{WorldFamily(family).value}']
        truth, preds = group['ground_truth'], group[PolicyName(policy).value]
        return mean_metrics(evaluate(preds[i].astype(np.float64), truth[i].astype(np.float64))
                            for i in range(preds.shape[0]))
