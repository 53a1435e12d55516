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
Procedurally generated voxel indoor worlds and their binary file format.

The scene is a closed box of 0.25 m voxels indexed [ix, iy, iz] with ix = floor(x / cell),
iy = floor(y / cell). Layer 0 is the floor slab, the top layer the ceiling slab.
"""

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from scipy import ndimage

from deux.enums import SCENE_MAGIC, SCENE_FORMAT_VERSION, WorldFamily
from deux.errors import ArgumentError, DatasetFormatError, SceneGenerationError

logger = logging.getLogger(__name__)

CELL_SIZE = 0.25
CAMERA_HEIGHT = 1.25
MIN_FREE_CELLS = 100
MAX_ATTEMPTS = 25
MAX_PLACEMENTS = 60
HEADING_STEPS = 36
# corridors stay passable after one cell of obstacle inflation
CORRIDOR_WIDTH = 3

_HEADER = struct.Struct('<8sIIIIdqddII')
_ROOM = struct.Struct('<iiiid')
_VOXEL = np.dtype([('occupied', 'u1'), ('r', 'u1'), ('g', 'u1'), ('b', 'u1')])


@dataclass(frozen=True)
class Room:
    """Axis aligned rectangle of floor cells, [row0, row1) x [col0, col1)"""
    row0: int
    col0: int
    row1: int
    col1: int
    noise: float

    @property
    def area(self) -> int:
        return (self.row1 - self.row0) * (self.col1 - self.col0)

    @property
    def center(self) -> Tuple[int, int]:
        return (self.row0 + self.row1) // 2, (self.col0 + self.col1) // 2

    def contains(self, row: int, col: int) -> bool:
        return self.row0 <= row < self.row1 and self.col0 <= col < self.col1

    def overlaps(self, other: 'Room', margin: int = 1) -> bool:
        return not (self.row1 + margin <= other.row0 or other.row1 + margin <= self.row0 or
                    self.col1 + margin <= other.col0 or other.col1 + margin <= self.col0)


@dataclass(frozen=True)
class WorldParams:
    family: WorldFamily = WorldFamily.APARTMENT
    grid_cells: Tuple[int, int] = (48, 48)
    height_cells: int = 12
    room_count: Tuple[int, int] = (3, 5)
    room_size: Tuple[int, int] = (6, 12)
    clutter_density: float = 0.04
    texture_noise: float = 0.15
    hard_room_noise: float = 0.0

    def __post_init__(self):
        if min(self.grid_cells) < 5:
            raise ArgumentError(f'World grid must be at least 5x5 cells, got {self.grid_cells}')
        if self.height_cells < 8:
            raise ArgumentError(f'World needs at least 8 height cells to fit the camera, got {self.height_cells}')
        for name in ('room_count', 'room_size'):
            low, high = getattr(self, name)
            if low < 1 or high < low:
                raise ArgumentError(f'{name} must be a range [low, high] with 1 <= low <= high')
        if not 0.0 <= self.clutter_density <= 0.5:
            raise ArgumentError(f'clutter_density must lie in [0, 0.5], got {self.clutter_density}')
        for name in ('texture_noise', 'hard_room_noise'):
            if not 0.0 <= getattr(self, name) <= 0.5:
                raise ArgumentError(f'{name} must lie in [0, 0.5], got {getattr(self, name)}')

    @classmethod
    def from_dict(cls, values: dict) -> 'WorldParams':
        values = dict(values)
        values.pop('transfer_family', None)
        if 'family' in values:
            values['family'] = WorldFamily(values['family'])
        for name in ('grid_cells', 'room_count', 'room_size'):
            if name in values:
                values[name] = tuple(int(v) for v in values[name])
        return cls(**values)


class Scene:
    """
    Immutable voxel world.

    :ivar occupied: bool array (nx, ny, nz)
    :ivar albedo: uint8 array (nx, ny, nz, 3)
    :ivar rooms: room rectangles, rooms[0] is the hard room when its noise differs
    :ivar spawn: (x, y, heading index) of the initial pose p_0
    """

    def __init__(self, occupied: np.ndarray, albedo: np.ndarray, rooms: List[Room],
                 spawn: Tuple[float, float, int], seed: int, family: WorldFamily = WorldFamily.APARTMENT,
                 cell_size: float = CELL_SIZE):
        self.occupied = np.ascontiguousarray(occupied, dtype=bool)
        self.albedo = np.ascontiguousarray(albedo, dtype=np.uint8)
        self.occupied.setflags(write=False)
        self.albedo.setflags(write=False)
        self.rooms = list(rooms)
        self.spawn = (float(spawn[0]), float(spawn[1]), int(spawn[2]) % HEADING_STEPS)
        self.seed = int(seed)
        self.family = WorldFamily(family)
        self.cell_size = float(cell_size)
        navigable = ~self.occupied[:, :, 1:-1].any(axis=2)
        navigable.setflags(write=False)
        self.navigable = navigable

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.occupied.shape

    @property
    def floor_height(self) -> float:
        """Top surface of the floor slab"""
        return self.cell_size

    @property
    def ceiling_height(self) -> float:
        return (self.shape[2] - 1) * self.cell_size

    @property
    def camera_z(self) -> float:
        return self.floor_height + CAMERA_HEIGHT

    def cell_of(self, x: float, y: float) -> Tuple[int, int]:
        return int(np.floor(x / self.cell_size)), int(np.floor(y / self.cell_size))

    def cell_center(self, row: int, col: int) -> Tuple[float, float]:
        return (row + 0.5) * self.cell_size, (col + 0.5) * self.cell_size

    def is_navigable(self, row: int, col: int) -> bool:
        nx, ny = self.navigable.shape
        return 0 <= row < nx and 0 <= col < ny and bool(self.navigable[row, col])

    def room_at(self, row: int, col: int) -> Optional[int]:
        for index, room in enumerate(self.rooms):
            if room.contains(row, col):
                return index
        return None

    def reachable_cells(self) -> np.ndarray:
        """Navigable cells 4-connected to the spawn cell"""
        labels, _ = ndimage.label(self.navigable)
        spawn_label = labels[self.cell_of(self.spawn[0], self.spawn[1])]
        return labels == spawn_label

    def __eq__(self, other):
        return isinstance(other, Scene) and np.array_equal(self.occupied, other.occupied) and \
            np.array_equal(self.albedo, other.albedo) and self.rooms == other.rooms and \
            self.spawn == other.spawn and self.seed == other.seed and self.family == other.family and \
            self.cell_size == other.cell_size

    def __repr__(self):
        return f'Scene(seed={self.seed}, family={self.family}, shape={self.shape}, rooms={len(self.rooms)})'


# --- generation ----------------------------------------------------------------------------------

def _place_rooms(rng: np.random.Generator, params: WorldParams, count: int, size_range) -> List[Tuple]:
    nx, ny = params.grid_cells
    rects = []
    for _ in range(count):
        for _ in range(MAX_PLACEMENTS):
            h, w = (int(s) for s in rng.integers(size_range[0], size_range[1] + 1, size=2))
            if h > nx - 2 or w > ny - 2:
                continue
            r0 = int(rng.integers(1, nx - 1 - h + 1))
            c0 = int(rng.integers(1, ny - 1 - w + 1))
            candidate = Room(r0, c0, r0 + h, c0 + w, 0.0)
            if not any(candidate.overlaps(other) for other in rects):
                rects.append(candidate)
                break
    return rects


def _carve_corridor(solid: np.ndarray, start: Tuple[int, int], end: Tuple[int, int], row_first: bool):
    """L-shaped corridor CORRIDOR_WIDTH cells wide, the outer ring of the grid stays solid"""
    (r0, c0), (r1, c1) = start, end
    half = CORRIDOR_WIDTH // 2
    nx, ny = solid.shape

    def carve(rows: Tuple[int, int], cols: Tuple[int, int]):
        solid[max(rows[0] - half, 1):min(rows[1] + half, nx - 2) + 1,
              max(cols[0] - half, 1):min(cols[1] + half, ny - 2) + 1] = False

    if row_first:
        carve((min(r0, r1), max(r0, r1)), (c0, c0))
        carve((r1, r1), (min(c0, c1), max(c0, c1)))
    else:
        carve((r0, r0), (min(c0, c1), max(c0, c1)))
        carve((min(r0, r1), max(r0, r1)), (c1, c1))


def _clutter(rng: np.random.Generator, occupied: np.ndarray, rooms: List[Room], params: WorldParams):
    nz = occupied.shape[2]
    for room in rooms:
        n_boxes = int(round(params.clutter_density * room.area))
        for _ in range(n_boxes):
            if params.family == WorldFamily.WAREHOUSE:
                # pillars reach the ceiling
                h = w = 1
                top = nz - 1
            else:
                h, w = (int(s) for s in rng.integers(1, 3, size=2))
                top = 1 + int(rng.integers(2, 5))
            if room.row1 - room.row0 <= h or room.col1 - room.col0 <= w:
                continue
            r = int(rng.integers(room.row0, room.row1 - h + 1))
            c = int(rng.integers(room.col0, room.col1 - w + 1))
            occupied[r:r + h, c:c + w, 1:top] = True


def _albedo(rng: np.random.Generator, occupied: np.ndarray, rooms: List[Room], params: WorldParams) -> np.ndarray:
    nx, ny, nz = occupied.shape
    base = np.empty((nx, ny, nz, 3))
    base[:] = rng.uniform(0.35, 0.75, size=3)
    base[:, :, 0] = rng.uniform(0.25, 0.55, size=3)
    base[:, :, -1] = rng.uniform(0.7, 0.9, size=3)
    # walls and clutter around a room take that room's paint
    for room in rooms:
        color = rng.uniform(0.3, 0.8, size=3)
        base[max(room.row0 - 1, 0):room.row1 + 1, max(room.col0 - 1, 0):room.col1 + 1, 1:-1] = color

    amplitude = np.full((nx, ny, 1, 1), params.texture_noise)
    if params.hard_room_noise > 0 and rooms:
        hard = rooms[0]
        amplitude[max(hard.row0 - 1, 0):hard.row1 + 1, max(hard.col0 - 1, 0):hard.col1 + 1] = params.hard_room_noise
    noise = rng.uniform(-1.0, 1.0, size=(nx, ny, nz, 3)) * amplitude
    return np.round(np.clip(base + noise, 0.0, 1.0) * 255).astype(np.uint8)


def _attempt(rng: np.random.Generator, params: WorldParams) -> Optional[Tuple]:
    nx, ny = params.grid_cells
    nz = params.height_cells
    if params.family == WorldFamily.WAREHOUSE:
        low, high = params.room_count
        count = int(rng.integers(max(1, low // 2), max(1, high // 2) + 1))
        high = min(2 * params.room_size[1], nx - 2, ny - 2)
        size_range = (min(2 * params.room_size[0], high), high)
    else:
        count = int(rng.integers(params.room_count[0], params.room_count[1] + 1))
        size_range = params.room_size
    rects = _place_rooms(rng, params, count, size_range)
    if not rects:
        return None

    solid = np.ones((nx, ny), dtype=bool)
    for room in rects:
        solid[room.row0:room.row1, room.col0:room.col1] = False
    for previous, room in zip(rects, rects[1:]):
        _carve_corridor(solid, previous.center, room.center, row_first=bool(rng.integers(2)))

    occupied = np.zeros((nx, ny, nz), dtype=bool)
    occupied[:, :, 0] = True
    occupied[:, :, -1] = True
    occupied[solid] = True
    _clutter(rng, occupied, rects, params)

    navigable = ~occupied[:, :, 1:-1].any(axis=2)
    labels, n_labels = ndimage.label(navigable)
    if n_labels == 0:
        return None
    sizes = ndimage.sum(navigable, labels, index=np.arange(1, n_labels + 1))
    largest = int(np.argmax(sizes)) + 1
    if sizes[largest - 1] < MIN_FREE_CELLS:
        return None

    region = labels == largest
    # prefer spawn cells with free 8-neighbourhood, inflation then keeps them plannable
    roomy = ndimage.binary_erosion(region, structure=np.ones((3, 3), dtype=bool))
    candidates = np.argwhere(roomy if roomy.any() else region)
    row, col = candidates[int(rng.integers(len(candidates)))]
    spawn = ((row + 0.5) * CELL_SIZE, (col + 0.5) * CELL_SIZE, int(rng.integers(HEADING_STEPS)))

    noise = [params.hard_room_noise if (i == 0 and params.hard_room_noise > 0) else params.texture_noise
             for i in range(len(rects))]
    rooms = [Room(r.row0, r.col0, r.row1, r.col1, n) for r, n in zip(rects, noise)]
    return occupied, _albedo(rng, occupied, rooms, params), rooms, spawn


def generate_scene(seed: int, params: WorldParams = WorldParams()) -> Scene:
    """
    Deterministic per (seed, params). Rooms are carved out of solid rock, chained by L-shaped
    corridors and cluttered with boxes (apartment) or pillars (warehouse). Attempts are
    repeated until the largest connected free region holds at least MIN_FREE_CELLS cells.
    """
    rng = np.random.default_rng(seed)
    for attempt in range(MAX_ATTEMPTS):
        result = _attempt(rng, params)
        if result is not None:
            occupied, albedo, rooms, spawn = result
            logger.debug(f'Scene {seed} generated after {attempt + 1} attempt(s), {len(rooms)} rooms')
            return Scene(occupied, albedo, rooms, spawn, seed, params.family)
    raise SceneGenerationError(f'Could not generate a scene for seed {seed} within {MAX_ATTEMPTS} attempts, '
                               f'check the room size against the grid size {params.grid_cells}')


# --- binary I/O ----------------------------------------------------------------------------------

def write_scene(scene: Scene, path: Path):
    """
    Little-endian layout: header (magic, version, nx, ny, nz, cell size, seed, spawn x/y,
    spawn heading, room count), family name, room records, then one (occupied, r, g, b)
    record per voxel in C order.
    """
    nx, ny, nz = scene.shape
    family = scene.family.value.encode('utf8')
    records = np.empty(nx * ny * nz, dtype=_VOXEL)
    records['occupied'] = scene.occupied.reshape(-1)
    albedo = scene.albedo.reshape(-1, 3)
    records['r'], records['g'], records['b'] = albedo[:, 0], albedo[:, 1], albedo[:, 2]
    with open(path, 'wb') as fp:
        fp.write(_HEADER.pack(SCENE_MAGIC, SCENE_FORMAT_VERSION, nx, ny, nz, scene.cell_size, scene.seed,
                              scene.spawn[0], scene.spawn[1], scene.spawn[2], len(scene.rooms)))
        fp.write(struct.pack('<B', len(family)) + family)
        for room in scene.rooms:
            fp.write(_ROOM.pack(room.row0, room.col0, room.row1, room.col1, room.noise))
        fp.write(records.tobytes())


def read_scene(path: Path) -> Scene:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise DatasetFormatError(f'Cannot read scene file {path}: {e}') from e
    if len(data) < _HEADER.size or data[:len(SCENE_MAGIC)] != SCENE_MAGIC:
        raise DatasetFormatError(f'{path} is not a scene file (bad magic)')
    _, version, nx, ny, nz, cell_size, seed, spawn_x, spawn_y, heading, n_rooms = _HEADER.unpack_from(data)
    if version != SCENE_FORMAT_VERSION:
        raise DatasetFormatError(f'Scene file version {version} is not supported, expected {SCENE_FORMAT_VERSION}')
    offset = _HEADER.size
    try:
        (name_length,) = struct.unpack_from('<B', data, offset)
        offset += 1
        family = WorldFamily(data[offset:offset + name_length].decode('utf8'))
        offset += name_length
        rooms = []
        for _ in range(n_rooms):
            rooms.append(Room(*_ROOM.unpack_from(data, offset)))
            offset += _ROOM.size
        records = np.frombuffer(data, dtype=_VOXEL, count=nx * ny * nz, offset=offset)
    except (struct.error, ValueError) as e:
        raise DatasetFormatError(f'Scene file {path} is truncated or corrupted: {e}') from e
    occupied = records['occupied'].astype(bool).reshape(nx, ny, nz)
    albedo = np.stack([records['r'], records['g'], records['b']], axis=-1).reshape(nx, ny, nz, 3)
    return Scene(occupied, albedo, rooms, (spawn_x, spawn_y, heading), seed, family, cell_size)
