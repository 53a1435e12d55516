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
Exceptions raised by deux. Everything derives from DeuxException so the CLI can map
failures to exit codes in one place.
"""


class DeuxException(Exception):
    """Base class, carries a human readable message"""

    def __init__(self, msg=''):
        self.message = msg
        Exception.__init__(self, msg)

    def __repr__(self):
        return self.message

    __str__ = __repr__


class GeometryError(DeuxException):
    """Raised for non-positive depths and points behind the camera"""
    pass


class ShapeError(DeuxException):
    """Raised when array dimensions don't agree"""
    pass


class ArgumentError(DeuxException):
    """Raised when an operation gets an empty or otherwise unusable argument"""
    pass


class UndefinedLossError(DeuxException):
    """Raised when a loss term has an empty domain (empty mask, no sparse points)"""
    pass


class ResidualUndefinedError(UndefinedLossError):
    """Raised when no pixel reprojects validly, the frame is then treated as maximally uncertain"""
    pass


class SceneGenerationError(DeuxException):
    pass


class RenderError(DeuxException):
    pass


class PlanningError(DeuxException):
    pass


class EmptyEpisodeError(DeuxException):
    pass


class FittingError(DeuxException):
    pass


class DatasetFormatError(DeuxException):
    """Raised for corrupted, missing or version-incompatible files on disk"""
    pass


class ConfigError(DeuxException):
    pass


class DependencyError(DeuxException):
    """Raised when a run needs an artifact (e.g. the DEUX seed model) that is not available"""
    pass
