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

from deux.world.scene import Scene, Room, WorldParams, generate_scene, read_scene, write_scene
from deux.world.agent import AgentState, Frame, step
from deux.world.renderer import render, observe

__all__ = ['Scene', 'Room', 'WorldParams', 'generate_scene', 'read_scene', 'write_scene',
           'AgentState', 'Frame', 'step', 'render', 'observe']
