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

import copy
import json

import pytest

from deux.enums import WorldFamily
from deux.errors import ConfigError
from deux.pipeline.config import (DEFAULTS, completor_params_from_config, intrinsics_from_config, load_config,
                                  run_config_hash, validate_config, world_params_from_config)


def write_config(tmpdir, values) -> str:
    path = tmpdir / 'config.json'
    path.write_text(json.dumps(values), encoding='utf8')
    return str(path)


class TestLoadConfig:

    @staticmethod
    def test_defaults_are_valid():
        config = load_config()
        assert config == DEFAULTS
        assert config is not DEFAULTS

    @staticmethod
    def test_file_values_are_merged_into_defaults(tmpdir):
        config = load_config(write_config(tmpdir, {'seed': 7, 'world': {'family': 'warehouse'},
                                                   'bench': {'seeds': [3]}}))
        assert config['seed'] == 7
        assert config['world']['family'] == 'warehouse'
        assert config['world']['grid_cells'] == DEFAULTS['world']['grid_cells']
        assert config['bench']['seeds'] == [3]
        assert config['bench']['n_train_scenes'] == DEFAULTS['bench']['n_train_scenes']

    @staticmethod
    def test_overrides_win_over_the_file(tmpdir):
        path = write_config(tmpdir, {'seed': 7, 'budget': {'max_steps': 50}})
        config = load_config(path, seed=9, steps=20, policy='frontier', out=tmpdir / 'out')
        assert config['seed'] == 9
        assert config['budget']['max_steps'] == 20
        assert config['policies'] == ['frontier']
        assert config['output_dir'] == str(tmpdir / 'out')

    @staticmethod
    def test_none_overrides_are_ignored():
        assert load_config(seed=None, steps=None) == DEFAULTS

    @staticmethod
    @pytest.mark.parametrize('values', [
        {'colour': 'red'},
        {'world': {'rooms': 3}},
        {'world': 'apartment'},
        {'seed': -1},
        {'seed': 1.5},
        {'world': {'family': 'castle'}},
        {'world': {'room_count': [5, 3]}},
        {'policies': []},
        {'policies': ['random', 'random']},
        {'policies': ['sweep']},
        {'budget': {'max_steps': 0}},
        {'deux': {'top_fraction': 0.0}},
        {'deux': {'residual_metric': 'l2'}},
        {'bench': {'save_predictions': 'yes'}},
        {'camera': {'cx': 500.0}},
        {'loss_weights': {'lambda_sm': -1.0}},
    ])
    def test_invalid_values_raise(tmpdir, values):
        with pytest.raises(ConfigError):
            load_config(write_config(tmpdir, values))

    @staticmethod
    def test_unknown_override_raises():
        with pytest.raises(ConfigError):
            load_config(colour='red')

    @staticmethod
    def test_unreadable_files_raise(tmpdir):
        with pytest.raises(ConfigError):
            load_config(tmpdir / 'missing.json')
        broken = tmpdir / 'broken.json'
        broken.write_text('{"seed": ', encoding='utf8')
        with pytest.raises(ConfigError):
            load_config(str(broken))
        with pytest.raises(ConfigError):
            load_config(write_config(tmpdir, [1, 2, 3]))

    @staticmethod
    def test_validate_rejects_unknown_keys():
        config = copy.deepcopy(DEFAULTS)
        config['extra'] = True
        with pytest.raises(ConfigError):
            validate_config(config)


class TestDerivedValues:

    @staticmethod
    def test_hash_tracks_the_content():
        config = load_config()
        assert run_config_hash(config) == run_config_hash(copy.deepcopy(config))
        assert run_config_hash(config) != run_config_hash(load_config(seed=1))
        assert run_config_hash(config) == run_config_hash(load_config(policy='random', out='elsewhere'))

    @staticmethod
    def test_intrinsics():
        k = intrinsics_from_config(load_config())
        assert (k.width, k.height, k.fx, k.cx) == (400, 400, 200.0, 200.0)

    @staticmethod
    def test_world_params_for_another_family():
        config = load_config()
        assert world_params_from_config(config).family == WorldFamily.APARTMENT
        assert world_params_from_config(config, 'warehouse').family == WorldFamily.WAREHOUSE

    @staticmethod
    def test_completor_params_carry_the_loss_weights(tmpdir):
        config = load_config(write_config(tmpdir, {'completor': {'refine_iters': 50},
                                                   'loss_weights': {'lambda_sz': 2.0}}))
        params = completor_params_from_config(config)
        assert params.refine_iters == 50
        assert params.weights.lambda_sz == 2.0
