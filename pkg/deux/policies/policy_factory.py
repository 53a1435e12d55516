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
Builds a fresh policy instance per episode from its name and the run configuration
"""
import logging
from typing import Optional

from deux.enums import PolicyName
from deux.errors import DependencyError
from deux.losses import LossWeights
from deux.policies.base import ExplorationPolicy
from deux.policies.deux_policy import DeuxPolicy
from deux.policies.frontier_policy import FrontierPolicy
from deux.policies.oracle_policy import OraclePolicy
from deux.policies.random_policy import RandomPolicy

logger = logging.getLogger(__name__)


def make_policy(name, config: Optional[dict] = None, seed_completor=None) -> ExplorationPolicy:
    """
    :param config: the validated run config (sections "deux" and "oracle" are used)
    :param seed_completor: required for the DEUX policy
    """
    name = PolicyName(str(name))
    config = config or {}
    deux_config = config.get('deux', {})
    targeted = {'reach_radius_cells': deux_config.get('reach_radius_cells', 2),
                'lookahead': deux_config.get('lookahead', 3)}
    if name == PolicyName.RANDOM:
        return RandomPolicy()
    if name == PolicyName.FRONTIER:
        return FrontierPolicy(**targeted)
    if name == PolicyName.ORACLE:
        return OraclePolicy(n_targets=config.get('oracle', {}).get('n_targets', 10), **targeted)
    if seed_completor is None:
        raise DependencyError('The DEUX policy needs a seed model: fit one on Random-policy data '
                              'or pass --seed-model <dir>')
    return DeuxPolicy(seed_completor, top_fraction=deux_config.get('top_fraction', 0.1),
                      residual_metric=deux_config.get('residual_metric', 'l1'),
                      loss_weights=LossWeights.from_dict(config.get('loss_weights', {})), **targeted)
