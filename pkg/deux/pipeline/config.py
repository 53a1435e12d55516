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
Run configuration: defaults, JSON loading with command line overrides and validation
against SCHEMA. Unknown keys anywhere are rejected.
"""

import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from deux.completion.completor import CompletorParams
from deux.enums import CompletorKind, PolicyName, WorldFamily
from deux.errors import ConfigError
from deux.geometry import Intrinsics
from deux.losses import LossWeights
from deux.utils import config_hash
from deux.world import WorldParams

logger = logging.getLogger(__name__)

RunConfig = Dict[str, Any]

DEFAULTS: RunConfig = {
    'seed': 0,
    'world': {
        'family': 'apartment',
        'transfer_family': None,
        'grid_cells': [48, 48],
        'height_cells': 12,
        'room_count': [3, 5],
        'room_size': [6, 12],
        'clutter_density': 0.04,
        'texture_noise': 0.15,
        'hard_room_noise': 0.0,
    },
    'camera': {'width': 400, 'height': 400, 'fx': 200.0, 'fy': 200.0, 'cx': 200.0, 'cy': 200.0},
    'policies': ['random', 'frontier', 'oracle', 'deux'],
    'budget': {'max_steps': 500},
    'loss_weights': {'lambda_co': 0.15, 'lambda_st': 0.85, 'lambda_sz': 1.0, 'lambda_sm': 0.1},
    'completor': {
        'idw_neighbors': 4,
        'idw_power': 2.0,
        'refine_iters': 25,
        'edge_weight': 0.5,
        'grid': {
            'idw_power': [1.0, 2.0, 3.0],
            'refine_iters': [0, 25, 50, 100],
            'edge_weight': [0.25, 0.5, 0.75, 1.0],
            'idw_neighbors': [1, 4, 8],
        },
        'max_triplets': 16,
    },
    'sparse': {'target_count': 1500, 'min_points': 100},
    'deux': {
        'top_fraction': 0.1,
        'reach_radius_cells': 2,
        'lookahead': 3,
        'residual_metric': 'l1',
        'seed_completor': 'classical',
    },
    'oracle': {'n_targets': 10},
    'bench': {
        'n_train_scenes': 5,
        'n_test_scenes': 2,
        'test_steps': 120,
        'test_stride': 4,
        'seeds': [0, 1, 2],
        'save_predictions': True,
    },
    'output_dir': 'runs',
}


class _Spec:
    def check(self, value, path: str):
        raise NotImplementedError

    @staticmethod
    def fail(path: str, message: str):
        raise ConfigError(f'Invalid config value for "{path}": {message}')


class Int(_Spec):
    def __init__(self, minimum=None, maximum=None):
        self.minimum, self.maximum = minimum, maximum

    def check(self, value, path):
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(path, f'expected an integer, got {value!r}')
        if self.minimum is not None and value < self.minimum:
            self.fail(path, f'{value} < {self.minimum}')
        if self.maximum is not None and value > self.maximum:
            self.fail(path, f'{value} > {self.maximum}')


class Float(Int):
    def check(self, value, path):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path, f'expected a number, got {value!r}')
        if self.minimum is not None and value < self.minimum:
            self.fail(path, f'{value} < {self.minimum}')
        if self.maximum is not None and value > self.maximum:
            self.fail(path, f'{value} > {self.maximum}')


class Bool(_Spec):
    def check(self, value, path):
        if not isinstance(value, bool):
            self.fail(path, f'expected true or false, got {value!r}')


class Str(_Spec):
    def check(self, value, path):
        if not isinstance(value, str) or not value:
            self.fail(path, f'expected a non-empty string, got {value!r}')


class Choice(_Spec):
    def __init__(self, choices, nullable=False):
        self.choices, self.nullable = list(choices), nullable

    def check(self, value, path):
        if value is None and self.nullable:
            return
        if value not in self.choices:
            self.fail(path, f'{value!r} is not one of {self.choices}')


class ListOf(_Spec):
    def __init__(self, item: _Spec, min_length=1, max_length=None, unique=False):
        self.item, self.min_length, self.max_length, self.unique = item, min_length, max_length, unique

    def check(self, value, path):
        if not isinstance(value, list):
            self.fail(path, f'expected a list, got {value!r}')
        if len(value) < self.min_length or (self.max_length is not None and len(value) > self.max_length):
            self.fail(path, f'list length {len(value)} outside of [{self.min_length}, {self.max_length}]')
        if self.unique and len(set(map(str, value))) != len(value):
            self.fail(path, 'list entries must be unique')
        for index, item in enumerate(value):
            self.item.check(item, f'{path}[{index}]')


class Range(ListOf):
    """[low, high] pair of integers"""

    def __init__(self, minimum=1):
        super().__init__(Int(minimum), 2, 2)

    def check(self, value, path):
        super().check(value, path)
        if value[0] > value[1]:
            self.fail(path, f'low {value[0]} exceeds high {value[1]}')


_FAMILIES = [f.value for f in WorldFamily]

SCHEMA = {
    'seed': Int(0, 2 ** 32 - 1),
    'world': {
        'family': Choice(_FAMILIES),
        'transfer_family': Choice(_FAMILIES, nullable=True),
        'grid_cells': ListOf(Int(5, 1024), 2, 2),
        'height_cells': Int(8, 256),
        'room_count': Range(1),
        'room_size': Range(1),
        'clutter_density': Float(0.0, 0.5),
        'texture_noise': Float(0.0, 0.5),
        'hard_room_noise': Float(0.0, 0.5),
    },
    'camera': {'width': Int(8), 'height': Int(8), 'fx': Float(1e-6), 'fy': Float(1e-6),
               'cx': Float(0.0), 'cy': Float(0.0)},
    'policies': ListOf(Choice([p.value for p in PolicyName if p != PolicyName.SWEEP]), unique=True),
    'budget': {'max_steps': Int(1)},
    'loss_weights': {name: Float(0.0) for name in ('lambda_co', 'lambda_st', 'lambda_sz', 'lambda_sm')},
    'completor': {
        'idw_neighbors': Int(1),
        'idw_power': Float(0.0),
        'refine_iters': Int(0),
        'edge_weight': Float(0.0),
        'grid': {
            'idw_power': ListOf(Float(0.0)),
            'refine_iters': ListOf(Int(0)),
            'edge_weight': ListOf(Float(0.0)),
            'idw_neighbors': ListOf(Int(1)),
        },
        'max_triplets': Int(1),
    },
    'sparse': {'target_count': Int(1), 'min_points': Int(0)},
    'deux': {
        'top_fraction': Float(1e-6, 1.0),
        'reach_radius_cells': Float(0.0),
        'lookahead': Int(0),
        'residual_metric': Choice(['l1', 'ssim']),
        'seed_completor': Choice([k.value for k in CompletorKind]),
    },
    'oracle': {'n_targets': Int(1)},
    'bench': {
        'n_train_scenes': Int(1),
        'n_test_scenes': Int(1),
        'test_steps': Int(3),
        'test_stride': Int(1),
        'seeds': ListOf(Int(0, 2 ** 32 - 1), unique=True),
        'save_predictions': Bool(),
    },
    'output_dir': Str(),
}


def _merge(base: dict, override: dict, schema: dict, path: str = '') -> dict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        key_path = f'{path}.{key}' if path else key
        if key not in schema:
            raise ConfigError(f'Unknown config key "{key_path}"')
        if isinstance(schema[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f'Config section "{key_path}" must be an object')
            merged[key] = _merge(base[key], value, schema[key], key_path)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _validate(config: dict, schema: dict, path: str = ''):
    for key, spec in schema.items():
        key_path = f'{path}.{key}' if path else key
        if isinstance(spec, dict):
            _validate(config[key], spec, key_path)
        else:
            spec.check(config[key], key_path)


def validate_config(config: RunConfig) -> RunConfig:
    """Checks types and ranges of a fully merged config, cross-field rules included"""
    _merge(DEFAULTS, config, SCHEMA)
    _validate(config, SCHEMA)
    camera = config['camera']
    if not (camera['cx'] < camera['width'] and camera['cy'] < camera['height']):
        raise ConfigError('Invalid config value for "camera": principal point outside of the image')
    return config


def load_config(path: Optional[Path] = None, **overrides) -> RunConfig:
    """
    Defaults, updated by the JSON file at path, updated by the non-None keyword overrides
    (seed, steps, policy, out)
    """
    config = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text())
        except OSError as e:
            raise ConfigError(f'Cannot read config file {path}: {e}') from e
        except ValueError as e:
            raise ConfigError(f'Config file {path} is not valid JSON: {e}') from e
        if not isinstance(loaded, dict):
            raise ConfigError(f'Config file {path} must hold a JSON object')
        config = _merge(config, loaded, SCHEMA)

    flag_updates = {
        'seed': ('seed',),
        'steps': ('budget', 'max_steps'),
        'out': ('output_dir',),
    }
    for name, value in overrides.items():
        if value is None:
            continue
        if name == 'policy':
            config['policies'] = [str(value)]
        elif name in flag_updates:
            *sections, key = flag_updates[name]
            target = config
            for section in sections:
                target = target[section]
            target[key] = str(value) if name == 'out' else value
        else:
            raise ConfigError(f'Unknown config override "{name}"')
    return validate_config(config)


# where to write and which policies to run do not change the episodes of a policy
HASH_EXCLUDED_KEYS = ('output_dir', 'policies')


def run_config_hash(config: RunConfig) -> str:
    return config_hash({key: value for key, value in config.items() if key not in HASH_EXCLUDED_KEYS})


def intrinsics_from_config(config: RunConfig) -> Intrinsics:
    return Intrinsics.from_dict(config['camera'])


def world_params_from_config(config: RunConfig, family: Optional[str] = None) -> WorldParams:
    """The world section as WorldParams, optionally for another family"""
    values = dict(config['world'])
    if family is not None:
        values['family'] = str(family)
    return WorldParams.from_dict(values)


def completor_params_from_config(config: RunConfig) -> CompletorParams:
    section = config['completor']
    return CompletorParams(idw_neighbors=section['idw_neighbors'], idw_power=float(section['idw_power']),
                           refine_iters=section['refine_iters'], edge_weight=float(section['edge_weight']),
                           weights=LossWeights.from_dict(config['loss_weights']))
