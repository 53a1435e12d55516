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
On-disk formats of single observations: rgb as binary PPM (P6), depth as DEUXDPTH float32
maps, sparse depth as (row, col, depth_m) csv. FrameRef lets records point at frames that
live either in memory or on disk.
"""

import csv
import logging
import struct
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from deux.enums import DEPTH_MAGIC
from deux.errors import DatasetFormatError
from deux.geometry import Intrinsics, Pose
from deux.losses import SparseDepth
from deux.world import Frame

logger = logging.getLogger(__name__)

FRAME_FILENAME = 'frame_{:05d}.ppm'
DEPTH_FILENAME = 'depth_{:05d}.bin'
SPARSE_FILENAME = 'sparse_{:05d}.csv'

_DEPTH_HEADER = struct.Struct('<8sII')


def _read_ppm_header(data: bytes, path: Path) -> Tuple[int, int, int]:
    """Returns width, height and the offset of the pixel data"""
    fields = []
    offset = 0
    while len(fields) < 4:
        while offset < len(data) and data[offset:offset + 1].isspace():
            offset += 1
        if data[offset:offset + 1] == b'#':
            offset = data.index(b'\n', offset) + 1
            continue
        end = offset
        while end < len(data) and not data[end:end + 1].isspace():
            end += 1
        if end == offset:
            raise DatasetFormatError(f'{path} has a truncated PPM header')
        fields.append(data[offset:end])
        offset = end
    if fields[0] != b'P6' or fields[3] != b'255':
        raise DatasetFormatError(f'{path} is not an 8 bit binary PPM file')
    return int(fields[1]), int(fields[2]), offset + 1


def write_ppm(path: Path, rgb: np.ndarray):
    pixels = np.round(np.clip(rgb, 0.0, 1.0) * 255.0).astype(np.uint8)
    with open(path, 'wb') as fp:
        fp.write(f'P6\n{pixels.shape[1]} {pixels.shape[0]}\n255\n'.encode('ascii'))
        fp.write(pixels.tobytes())


def read_ppm_bytes(path: Path) -> np.ndarray:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise DatasetFormatError(f'Cannot read image {path}: {e}') from e
    width, height, offset = _read_ppm_header(data, path)
    if len(data) - offset < width * height * 3:
        raise DatasetFormatError(f'{path} holds fewer pixels than its header announces')
    return np.frombuffer(data, dtype=np.uint8, count=width * height * 3, offset=offset).reshape(height, width, 3)


def read_ppm(path: Path) -> np.ndarray:
    """rgb in [0, 1], exactly k / 255"""
    return read_ppm_bytes(path) / 255.0


def write_depth(path: Path, depth: np.ndarray):
    height, width = depth.shape
    with open(path, 'wb') as fp:
        fp.write(_DEPTH_HEADER.pack(DEPTH_MAGIC, height, width))
        fp.write(depth.astype('<f4').tobytes())


def read_depth(path: Path) -> np.ndarray:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise DatasetFormatError(f'Cannot read depth map {path}: {e}') from e
    if len(data) < _DEPTH_HEADER.size:
        raise DatasetFormatError(f'{path} is too short for a depth map')
    magic, height, width = _DEPTH_HEADER.unpack_from(data)
    if magic != DEPTH_MAGIC:
        raise DatasetFormatError(f'{path} is not a depth map (bad magic {magic!r})')
    if len(data) - _DEPTH_HEADER.size != 4 * height * width:
        raise DatasetFormatError(f'{path} does not hold {height}x{width} float32 values')
    return np.frombuffer(data, dtype='<f4', offset=_DEPTH_HEADER.size).reshape(height, width).astype(np.float64)


def write_sparse(path: Path, sparse: SparseDepth):
    with open(path, 'w', newline='') as fp:
        writer = csv.writer(fp)
        writer.writerow(['row', 'col', 'depth_m'])
        for row, col, depth in zip(sparse.rows, sparse.cols, sparse.depths):
            writer.writerow([int(row), int(col), repr(float(depth))])


def read_sparse(path: Path, shape: Tuple[int, int], n_corners: Optional[int] = None) -> SparseDepth:
    try:
        with open(path, newline='') as fp:
            rows = list(csv.DictReader(fp))
    except OSError as e:
        raise DatasetFormatError(f'Cannot read sparse depth {path}: {e}') from e
    try:
        return SparseDepth([int(r['row']) for r in rows], [int(r['col']) for r in rows],
                           [float(r['depth_m']) for r in rows], shape, n_corners)
    except (KeyError, ValueError) as e:
        raise DatasetFormatError(f'Malformed sparse depth file {path}: {e}') from e


class FrameRef:
    """
    A frame kept in memory or stored as frame/depth files in an episode directory.
    Pose and intrinsics are always held in memory.
    """

    def __init__(self, pose: Pose, intrinsics: Intrinsics, timestep: int,
                 frame: Optional[Frame] = None, directory: Optional[Path] = None):
        self.pose = pose
        self.intrinsics = intrinsics
        self.timestep = int(timestep)
        self._frame = frame
        self.directory = None if directory is None else Path(directory)

    @classmethod
    def in_memory(cls, frame: Frame) -> 'FrameRef':
        return cls(frame.pose, frame.intrinsics, frame.timestep, frame=frame)

    @classmethod
    def stored(cls, frame: Frame, directory: Path) -> 'FrameRef':
        """Writes the frame files and returns a reference to them"""
        directory = Path(directory)
        write_ppm(directory / FRAME_FILENAME.format(frame.timestep), frame.rgb)
        write_depth(directory / DEPTH_FILENAME.format(frame.timestep), frame.depth_gt)
        return cls(frame.pose, frame.intrinsics, frame.timestep, directory=directory)

    @property
    def on_disk(self) -> bool:
        return self._frame is None

    def rgb_path(self) -> Path:
        return self.directory / FRAME_FILENAME.format(self.timestep)

    def depth_path(self) -> Path:
        return self.directory / DEPTH_FILENAME.format(self.timestep)

    def load(self) -> Frame:
        if self._frame is not None:
            return self._frame
        return Frame(rgb=read_ppm(self.rgb_path()), depth_gt=read_depth(self.depth_path()),
                     pose=self.pose, intrinsics=self.intrinsics, timestep=self.timestep)
