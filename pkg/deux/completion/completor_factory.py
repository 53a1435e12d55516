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
Rebuilds a saved depth completor (the DEUX seed model) from its model directory and serves as
extendable endpoint in case further completor types are added
"""
import logging
from configparser import ConfigParser, NoSectionError, NoOptionError
from pathlib import Path

from deux import utils
from deux.completion.completor import ClassicalCompletor, CompletorParams, DepthCompletor, GroundTruthCompletor
from deux.enums import CompletorKind, SEED_MODEL_CONFIG_FILENAME, SEED_MODEL_PARAMS_FILENAME
from deux.errors import DependencyError

logger = logging.getLogger(__name__)
module_version = utils.get_module_version()


class CompletorFactory:

    def __init__(self, model_dir: Path):
        self.model_dir = Path(model_dir)
        self.config_file = self.model_dir / SEED_MODEL_CONFIG_FILENAME
        if not self.config_file.is_file():
            raise DependencyError(f'No seed model found: {self.config_file} does not exist')
        self.config = ConfigParser()
        self.config.read(str(self.config_file))
        self._validate_version()

    def _validate_version(self):
        try:
            config_version = self.config.get('deux', 'version')
        except NoSectionError as e:
            raise DependencyError(
                f'Error while loading the seed model, error or missing model configuration file {self.config_file}: {e}') from e
        except NoOptionError:
            logger.warning(
                f'No model version definition in: {self.config_file}. Proceeding without validation might cause unexpected errors!')
            config_version = module_version

        if config_version != module_version:
            raise DependencyError(
                f'Seed model version incompatibility. Model version: {config_version} differs from deux module version: {module_version}')

    def build(self) -> DepthCompletor:
        try:
            kind = self.config.get('deux', 'completor')
        except NoOptionError as e:
            raise DependencyError(
                f'Error while loading the seed model, error in configuration file {self.config_file}: {e}') from e

        if kind == CompletorKind.CLASSICAL.value:
            params_file = self.model_dir / self.config.get('deux', 'params', fallback=SEED_MODEL_PARAMS_FILENAME)
            return ClassicalCompletor(CompletorParams.load(params_file))
        elif kind == CompletorKind.GROUND_TRUTH.value:
            return GroundTruthCompletor()
        else:
            raise DependencyError(f'Unknown completor definition: "{kind}" in: {self.config_file}')
