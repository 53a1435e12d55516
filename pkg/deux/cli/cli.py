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
Main module handling CLI interaction
"""
import datetime
import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import List, Optional

import click
import click_log

from deux import utils
from deux.completion.completor import ClassicalCompletor, DepthCompletor, fit_completor
from deux.completion.completor_factory import CompletorFactory
from deux.enums import PolicyName, WorldFamily
from deux.errors import DependencyError, DeuxException
from deux.pipeline.benchmark import EpisodeJob, collect_episodes, evaluate_completor, run_benchmark
from deux.pipeline.config import (completor_params_from_config, intrinsics_from_config, load_config,
                                  run_config_hash, world_params_from_config)
from deux.pipeline.dataset import episode_dirname, read_dataset, write_dataset
from deux.pipeline.episode import training_triplets
from deux.pipeline.plot import render_trajectory_plot
from deux.pipeline.test_set import build_test_set, load_test_set, scene_seeds
from deux.world import generate_scene, write_scene

version = utils.get_module_version()
logger = logging.getLogger("deux")
click_log.basic_config(logger)

context_settings = dict(help_option_names=['-h', '--help'])

POLICY_CHOICE = click.Choice([p.value for p in PolicyName if p != PolicyName.SWEEP])


class CommandFailed(click.ClickException):
    """Unexpected failure inside a command, reported with the log location"""
    exit_code = 2


@contextmanager
def command_banner(name: str):
    try:
        logger.info(f'{datetime.datetime.now().strftime("%Y-%m-%d %H:%M:%S")} *** START deux {name} {version} ***')
        yield
    except DeuxException:
        raise
    except click.ClickException:
        raise
    except Exception as e:
        logger.error(e, exc_info=True)
        raise CommandFailed(f'{e}. \nSee stacktrace in: {utils.get_logs_dir()}') from e
    finally:
        logger.info(f'{datetime.datetime.now().strftime("%Y-%m-%d %H:%M:%S")} *** END deux {name} {version} ***')


def config_option(function):
    return click.option('--config', '-c', 'config_path', type=click.Path(exists=True, dir_okay=False),
                        help='JSON run config, defaults apply to every missing key')(function)


def seed_option(function):
    return click.option('--seed', '-s', type=click.IntRange(0, 2 ** 32 - 1),
                        help='Master seed, overrides "seed" of the config')(function)


def out_option(function):
    return click.option('--out', '-o', type=click.Path(file_okay=False),
                        help='Output directory, overrides "output_dir" of the config')(function)


def jobs_option(function):
    return click.option('--jobs', '-j', type=click.IntRange(1), default=1, show_default=True,
                        help='Worker processes for episodes and fitting, results do not depend on it')(function)


def seed_model_option(function):
    return click.option('--seed-model', type=click.Path(exists=True, file_okay=False),
                        help='Directory of a saved seed completor (conf.ini), needed by the DEUX policy')(function)


def load_seed_model(path: Optional[str]) -> Optional[DepthCompletor]:
    return None if path is None else CompletorFactory(Path(path)).build()


@click.group(context_settings=context_settings)
@click.version_option(version=version)
@click_log.simple_verbosity_option(logger, default=logging.getLevelName(utils.get_env_log_level()))
@click.option('--quiet', '-q', is_flag=True, help='Suppress logging to console')
def cli(quiet: bool):
    """
    Depth uncertainty guided exploration testbed

    Explores procedural voxel worlds with different policies, collects RGB-D datasets,
    fits depth completors on them and compares the completors on a shared test set.
    """
    utils.setup_logger(logger, quiet)


@cli.group(context_settings=context_settings)
def world():
    """Procedural scenes"""


@world.command('gen', context_settings=context_settings)
@config_option
@seed_option
@out_option
@click.option('--family', type=click.Choice([f.value for f in WorldFamily]), help='World family, overrides the config')
def world_gen(config_path, seed, out, family):
    """Generates the scene of the master seed and writes it as scene_<seed>.bin"""
    with command_banner('world gen'):
        config = load_config(config_path, seed=seed, out=out)
        scene = generate_scene(config['seed'], world_params_from_config(config, family))
        out_dir = Path(config['output_dir'])
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f'scene_{scene.seed}.bin'
        write_scene(scene, path)
        click.echo(str(path))


@cli.command(context_settings=context_settings)
@config_option
@seed_option
@click.option('--policy', '-p', type=POLICY_CHOICE, required=True, help='Exploration policy')
@click.option('--steps', type=click.IntRange(1), help='Episode budget, overrides budget.max_steps')
@out_option
@click.option('--dump-plans', is_flag=True, help='Write every A* plan to plans/plan_<t>.csv of the episode')
@seed_model_option
def explore(config_path, seed, policy, steps, out, seed_model, dump_plans):
    """Runs one policy on the first training scene, writes the episode logs and its trajectory plot"""
    with command_banner('explore'):
        config = load_config(config_path, seed=seed, steps=steps, policy=policy, out=out)
        if PolicyName(policy) == PolicyName.DEUX and seed_model is None:
            raise DependencyError('Exploring with the DEUX policy needs --seed-model <dir>')
        out_dir = Path(config['output_dir'])
        world_params = world_params_from_config(config)
        scene_seed = scene_seeds(config['seed'], world_params.family, 'train', 1)[0]
        job = EpisodeJob(scene_seed=scene_seed, world=world_params, policy=PolicyName(policy), config=config,
                         seed=config['seed'], intrinsics=intrinsics_from_config(config),
                         episode_dir=out_dir / episode_dirname(0), seed_completor=load_seed_model(seed_model),
                         dump_plans=dump_plans)
        records = collect_episodes([job])
        write_dataset(records, out_dir, run_config_hash(config))
        render_trajectory_plot(records[0], out_dir / 'trajectory.ppm')
        click.echo(utils.to_json({'steps': len(records[0]), 'episode_return': records[0].episode_return,
                                  'out': out_dir}))


@cli.command(context_settings=context_settings)
@config_option
@seed_option
@click.option('--policy', '-p', type=POLICY_CHOICE, help='Collect with this policy only')
@click.option('--steps', type=click.IntRange(1), help='Episode budget, overrides budget.max_steps')
@out_option
@jobs_option
@seed_model_option
def collect(config_path, seed, policy, steps, out, jobs, seed_model):
    """Collects one dataset per configured policy on the training scenes of the master seed"""
    with command_banner('collect'):
        config = load_config(config_path, seed=seed, steps=steps, policy=policy, out=out)
        policies = [PolicyName(name) for name in config['policies']]
        if PolicyName.DEUX in policies and seed_model is None:
            raise DependencyError('Collecting with the DEUX policy needs --seed-model <dir>')
        completor = load_seed_model(seed_model)
        world_params = world_params_from_config(config)
        train_seeds = scene_seeds(config['seed'], world_params.family, 'train', config['bench']['n_train_scenes'])
        for name in policies:
            dataset_dir = Path(config['output_dir']) / name.value
            jobs_list = [EpisodeJob(scene_seed=scene_seed, world=world_params, policy=name, config=config,
                                    seed=config['seed'], intrinsics=intrinsics_from_config(config),
                                    episode_dir=dataset_dir / episode_dirname(i),
                                    seed_completor=completor if name == PolicyName.DEUX else None)
                         for i, scene_seed in enumerate(train_seeds)]
            write_dataset(collect_episodes(jobs_list, jobs), dataset_dir, run_config_hash(config))
            click.echo(str(dataset_dir))


@cli.command(context_settings=context_settings)
@click.option('--dataset', '-d', type=click.Path(exists=True, file_okay=False), required=True,
              help='Dataset directory written by collect')
@config_option
@out_option
@jobs_option
def fit(dataset, config_path, out, jobs):
    """
    Fits the classical completor on DATASET by minimising the unsupervised loss and saves it
    (conf.ini, params.json) to the output directory. With --config the dataset must have
    been collected with the same config.
    """
    with command_banner('fit'):
        config = load_config(config_path, out=out)
        records = read_dataset(Path(dataset), run_config_hash(config) if config_path else None)
        section = config['completor']
        params = fit_completor(training_triplets(records, section['max_triplets']),
                               completor_params_from_config(config), section['grid'], section['max_triplets'], jobs)
        ClassicalCompletor(params).save(Path(config['output_dir']))
        click.echo(utils.to_json(params.to_dict()))


@cli.command('eval', context_settings=context_settings)
@click.option('--model', '-m', type=click.Path(exists=True, file_okay=False), required=True,
              help='Completor directory written by fit or bench')
@click.option('--test-set', type=click.Path(exists=True, file_okay=False),
              help='Stored test set, built from the config and seed when missing')
@config_option
@seed_option
@out_option
def evaluate(model, test_set, config_path, seed, out):
    """Evaluates a completor on a test set and writes metrics.json"""
    with command_banner('eval'):
        config = load_config(config_path, seed=seed, out=out)
        out_dir = Path(config['output_dir'])
        out_dir.mkdir(parents=True, exist_ok=True)
        bench = config['bench']
        if test_set is not None:
            samples = load_test_set(Path(test_set), bench['test_stride'])
        else:
            family = WorldFamily(config['world']['family'])
            samples = build_test_set(family, bench['n_test_scenes'], config['seed'],
                                     world_params_from_config(config), intrinsics_from_config(config),
                                     steps=bench['test_steps'], stride=bench['test_stride'],
                                     directory=out_dir / f'test_{family.value}',
                                     target_count=config['sparse']['target_count'],
                                     min_points=config['sparse']['min_points'])
        metrics = evaluate_completor(CompletorFactory(Path(model)).build(), samples)
        (out_dir / 'metrics.json').write_text(json.dumps(metrics.__dict__, indent=4, sort_keys=True))
        click.echo(utils.to_json(metrics))


@cli.command(context_settings=context_settings)
@config_option
@seed_option
@click.option('--steps', type=click.IntRange(1), help='Episode budget, overrides budget.max_steps')
@out_option
@jobs_option
@seed_model_option
def bench(config_path, seed, steps, out, jobs, seed_model):
    """Full comparison of the configured policies, writes report.csv and report.json"""
    with command_banner('bench'):
        config = load_config(config_path, seed=seed, steps=steps, out=out)
        report = run_benchmark(config, Path(config['output_dir']), jobs,
                               None if seed_model is None else Path(seed_model))
        click.echo(utils.to_json(report.to_dict()['means'], pretty=True))


@cli.command(context_settings=context_settings)
@click.option('--dataset', '-d', type=click.Path(exists=True, file_okay=False), required=True,
              help='Dataset directory written by explore or collect')
@out_option
def plot(dataset, out):
    """Writes a top-down trajectory image per episode of DATASET"""
    with command_banner('plot'):
        out_dir = Path(out) if out else Path(dataset)
        out_dir.mkdir(parents=True, exist_ok=True)
        for index, record in enumerate(read_dataset(Path(dataset))):
            click.echo(str(render_trajectory_plot(record, out_dir / f'{episode_dirname(index)}.ppm')))


def main(argv: Optional[List[str]] = None) -> int:
    """
    Runs the CLI and returns its exit code: 0 on success, 1 for usage and dependency errors,
    2 for data, format and unexpected errors
    """
    try:
        result = cli.main(args=argv, prog_name='deux', standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.exceptions.Abort:
        click.echo('Aborted!', err=True)
        return 1
    except click.UsageError as e:
        e.show()
        return 1
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except DependencyError as e:
        click.echo(f'Error: {e.message}', err=True)
        return 1
    except DeuxException as e:
        logger.error(e.message)
        click.echo(f'Error: {e.message}', err=True)
        return 2
    return result if isinstance(result, int) else 0


def run():
    sys.exit(main())


if __name__ == '__main__':
    run()
