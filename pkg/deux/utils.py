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
Collection of utility functions (logging, directory handling, json, ...)
"""

import functools
import hashlib
import json
import logging
import os
import time
from dataclasses import asdict, is_dataclass
from enum import Enum
from logging.handlers import TimedRotatingFileHandler
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)
LOG_FORMATER = logging.Formatter(
    "%(asctime)s - [%(name)s] - %(levelname)s - %(message)s", "%Y-%m-%d %H:%M:%S")
LOG_LEVEL_ENV = 'DEUX_LOG'


def get_module_version(module: str = 'deux') -> str:
    try:
        from importlib.metadata import version, PackageNotFoundError
        return version(module)
    except (ImportError, PackageNotFoundError):
        # running from a source checkout
        from deux import __version__
        return __version__


def get_env_log_level(default: int = logging.INFO) -> int:
    """
    Reads the log level from $DEUX_LOG, falls back to default for unset or unknown names
    """
    name = os.environ.get(LOG_LEVEL_ENV, '').strip().upper()
    level = logging.getLevelName(name) if name else default
    if not isinstance(level, int):
        logger.warning(f'Unknown log level in ${LOG_LEVEL_ENV}: "{name}", using {logging.getLevelName(default)}')
        return default
    return level


def setup_logger(logger: logging.Logger, quiet_mode: bool):
    """
    Convenience function to setup the logging behavior. Adds file handler to get log into respective file.::
    :param quiet_mode: True if the console output should be suppressed.
    """
    # silence console handlers, file handlers keep logging
    for handler in logger.handlers:
        if not isinstance(handler, logging.FileHandler):
            handler.setLevel(logging.CRITICAL + 1 if quiet_mode else logging.NOTSET)
    # add file handler
    add_file_handler_for_logger(logger)


def add_file_handler_for_logger(logger: logging.Logger):
    """
    Adds a new file handler to logger
    """
    log_file = get_logs_dir() / str(logger.name + '.log')
    if any(isinstance(h, logging.FileHandler) and Path(h.baseFilename) == log_file.resolve() for h in logger.handlers):
        return
    fh = TimedRotatingFileHandler(log_file,
                                  when="midnight",
                                  interval=1,
                                  backupCount=10)

    fh.setLevel(logger.level)
    fh.setFormatter(LOG_FORMATER)
    logger.addHandler(fh)


def get_deux_dir() -> Path:
    """
    Returns the working directory of deux ($DEUX_DIR or ~/deux), created on demand
    """
    try:
        deux_dir = Path(os.environ['DEUX_DIR'])
    except KeyError:
        deux_dir = Path.home() / "deux"
    deux_dir.mkdir(parents=True, exist_ok=True)
    return deux_dir


def get_logs_dir() -> Path:
    """
    Create logs dir if it doesn't exist.
    """
    logs_dir = Path(get_deux_dir() / 'logs')
    if not logs_dir.exists():
        logs_dir.mkdir(parents=True)
    return logs_dir


def _json_default(value):
    if is_dataclass(value):
        return asdict(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    return value.__dict__


def to_json(my_object, pretty=False) -> str:
    """
    Returns object and subobjects as serialized JSON string
    :param my_object:
    :return:
    """
    if pretty:
        return json.dumps(my_object, indent=4, sort_keys=True, default=_json_default)
    else:
        return json.dumps(my_object, sort_keys=True, default=_json_default)


def config_hash(config: dict) -> str:
    """
    SHA-256 of the canonical json dump, used to tie datasets to the config that produced them
    """
    canonical = json.dumps(config, sort_keys=True, separators=(',', ':'), default=_json_default)
    return hashlib.sha256(canonical.encode('utf8')).hexdigest()


def derive_seed(*keys) -> int:
    """
    Deterministic 32 bit seed from a tuple of ints/strings, stable across processes
    (hash() is salted per interpreter, sha256 is not)
    """
    digest = hashlib.sha256('/'.join(str(k) for k in keys).encode('utf8')).digest()
    return int.from_bytes(digest[:4], 'little')


def log_time(timed_function):
    """Decorator logging the wall time of the wrapped call at INFO"""
    @functools.wraps(timed_function)
    def wrapper(*args, **kwargs):
        start = time.time()
        result = timed_function(*args, **kwargs)
        logger.info(f"It took {time.time() - start:.2f} seconds to execute {timed_function.__name__}")
        return result
    return wrapper


if __name__ == '__main__':
    logger = logging.getLogger(__name__)
