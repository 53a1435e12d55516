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

import csv
import json
from unittest.mock import patch

import pytest
from click.testing import CliRunner

import deux.cli.cli
from deux import utils
from deux.completion.completor import GroundTruthCompletor
from deux.enums import MANIFEST_FILENAME, PLANS_DIRNAME, SEED_MODEL_CONFIG_FILENAME

TINY = {
    'world': {'grid_cells': [32, 32], 'room_count': [1, 2], 'room_size': [10, 12], 'clutter_density': 0.0},
    'camera': {'width': 16, 'height': 16, 'fx': 8.0, 'fy': 8.0, 'cx': 8.0, 'cy': 8.0},
    'budget': {'max_steps': 6},
    'completor': {'grid': {'idw_power': [2.0], 'refine_iters': [0], 'edge_weight': [0.5], 'idw_neighbors': [4]},
                  'refine_iters': 0, 'max_triplets': 4},
    'sparse': {'target_count': 40, 'min_points': 0},
    'bench': {'n_train_scenes': 1, 'n_test_scenes': 1, 'test_steps': 8, 'test_stride': 4, 'seeds': [0]},
}


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(autouse=True)
def deux_home(monkeypatch, tmpdir):
    monkeypatch.setenv('DEUX_DIR', str(tmpdir / 'home'))


@pytest.fixture()
def config_file(tmpdir):
    path = tmpdir / 'config.json'
    path.write_text(json.dumps(TINY), encoding='utf8')
    return path.strpath


def test_print_version_succeeds(runner):
    result = runner.invoke(deux.cli.cli.cli, ['--version'])

    assert result.exit_code == 0
    assert utils.get_module_version() in result.output


def test_print_help_succeeds(runner):
    result = runner.invoke(deux.cli.cli.cli, ['--help'])

    expected_text = deux.cli.cli.cli.__doc__.strip().split('\n')[0]

    assert result.exit_code == 0
    assert expected_text in result.output
    for command in ('world', 'explore', 'collect', 'fit', 'eval', 'bench', 'plot'):
        assert command in result.output


def test_missing_policy_is_a_usage_error(tmpdir):
    assert deux.cli.cli.main(['explore', '--out', str(tmpdir)]) == 1


def test_unknown_command_is_a_usage_error():
    assert deux.cli.cli.main(['teleport']) == 1


def test_deux_without_seed_model_exits_with_1(tmpdir, config_file):
    assert deux.cli.cli.main(['explore', '-c', config_file, '-p', 'deux', '-o', str(tmpdir / 'out')]) == 1


def test_bench_without_random_or_seed_model_exits_with_1(tmpdir):
    path = tmpdir / 'deux_only.json'
    path.write_text(json.dumps({**TINY, 'policies': ['frontier', 'deux']}), encoding='utf8')
    assert deux.cli.cli.main(['bench', '-c', str(path), '-o', str(tmpdir / 'out')]) == 1


def test_bad_dataset_exits_with_2(tmpdir):
    empty = tmpdir.mkdir('empty')
    assert deux.cli.cli.main(['plot', '-d', str(empty)]) == 2


def test_invalid_config_exits_with_2(tmpdir):
    path = tmpdir / 'config.json'
    path.write_text(json.dumps({'budget': {'max_steps': -3}}), encoding='utf8')
    assert deux.cli.cli.main(['world', 'gen', '-c', str(path)]) == 2


def test_main_returns_error_on_unhandled_exception(tmpdir):
    with patch('deux.cli.cli.load_config', side_effect=Exception('My Dummy Test Exception')):
        assert deux.cli.cli.main(['world', 'gen', '-o', str(tmpdir)]) == 2


def test_world_gen_writes_the_scene(tmpdir):
    assert deux.cli.cli.main(['world', 'gen', '-s', '3', '-o', str(tmpdir)]) == 0
    assert (tmpdir / 'scene_3.bin').isfile()


def test_explore_fit_eval_plot(runner, tmpdir, config_file):
    explore_dir = tmpdir / 'explore'
    result = runner.invoke(deux.cli.cli.cli, ['explore', '-c', config_file, '-p', 'random', '-o', str(explore_dir)])
    assert result.exit_code == 0, result.output
    assert (explore_dir / MANIFEST_FILENAME).isfile()
    assert (explore_dir / 'trajectory.ppm').isfile()
    summary = next(line for line in result.output.splitlines() if line.startswith('{'))
    assert json.loads(summary)['steps'] == 6

    model_dir = tmpdir / 'model'
    result = runner.invoke(deux.cli.cli.cli, ['fit', '-d', str(explore_dir), '-c', config_file, '-o', str(model_dir)])
    assert result.exit_code == 0, result.output
    assert (model_dir / SEED_MODEL_CONFIG_FILENAME).isfile()

    eval_dir = tmpdir / 'eval'
    result = runner.invoke(deux.cli.cli.cli, ['eval', '-m', str(model_dir), '-c', config_file, '-o', str(eval_dir)])
    assert result.exit_code == 0, result.output
    metrics = json.loads((eval_dir / 'metrics.json').read_text(encoding='utf8'))
    assert metrics['rmse_mm'] >= metrics['mae_mm'] >= 0.0

    result = runner.invoke(deux.cli.cli.cli, ['eval', '-m', str(model_dir), '--test-set',
                                              str(eval_dir / 'test_apartment'), '-c', config_file,
                                              '-o', str(tmpdir / 'eval_again')])
    assert result.exit_code == 0, result.output
    assert json.loads((tmpdir / 'eval_again' / 'metrics.json').read_text(encoding='utf8')) == metrics

    plot_dir = tmpdir / 'plots'
    result = runner.invoke(deux.cli.cli.cli, ['plot', '-d', str(explore_dir), '-o', str(plot_dir)])
    assert result.exit_code == 0, result.output
    assert (plot_dir / 'ep_0.ppm').isfile()


def test_explore_with_a_seed_model(runner, tmpdir, config_file):
    GroundTruthCompletor().save(tmpdir / 'seed')
    result = runner.invoke(deux.cli.cli.cli, ['explore', '-c', config_file, '-p', 'deux', '--seed-model',
                                              str(tmpdir / 'seed'), '-o', str(tmpdir / 'out')])
    assert result.exit_code == 0, result.output
    assert (tmpdir / 'out' / 'ep_0' / 'log.csv').isfile()


def test_explore_dumps_plans(runner, tmpdir, config_file):
    out_dir = tmpdir / 'out'
    result = runner.invoke(deux.cli.cli.cli, ['explore', '-c', config_file, '-p', 'frontier', '--steps', '20',
                                              '--dump-plans', '-o', str(out_dir)])
    assert result.exit_code == 0, result.output
    plans = sorted((out_dir / 'ep_0' / PLANS_DIRNAME).listdir())
    assert plans and all(p.basename.startswith('plan_') and p.ext == '.csv' for p in plans)
    with open(plans[0], newline='') as fp:
        rows = list(csv.reader(fp))
    assert rows[0] == ['index', 'row', 'col'] and rows[1][0] == '0'


def test_explore_without_dump_plans_writes_no_plans(runner, tmpdir, config_file):
    out_dir = tmpdir / 'out'
    result = runner.invoke(deux.cli.cli.cli, ['explore', '-c', config_file, '-p', 'frontier', '-o', str(out_dir)])
    assert result.exit_code == 0, result.output
    assert not (out_dir / 'ep_0' / PLANS_DIRNAME).exists()
