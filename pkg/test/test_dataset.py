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

import json

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from deux.completion.completor import GroundTruthCompletor
from deux.enums import MANIFEST_FILENAME
from deux.errors import DatasetFormatError
from deux.losses import SparseDepth
from deux.pipeline.dataset import LOSSES_FILENAME, load_manifest, read_dataset, write_dataset
from deux.pipeline.episode import collect_episode
from deux.pipeline.frame_io import read_depth, read_ppm, read_sparse, write_depth, write_ppm, write_sparse
from deux.policies.base import EpisodeBudget
from deux.policies.deux_policy import DeuxPolicy
from deux.policies.random_policy import RandomPolicy
from deux.world import generate_scene
from test.helpers import small_intrinsics


def episode(policy, steps: int = 6, scene_seed: int = 1, episode_dir=None):
    return collect_episode(generate_scene(scene_seed), policy, EpisodeBudget(steps), 0, small_intrinsics(16),
                           target_count=40, min_points=5, episode_dir=episode_dir)


class TestFrameFiles:

    @staticmethod
    def test_ppm_holds_8_bit_values(tmpdir):
        rgb = np.random.default_rng(0).integers(0, 256, size=(5, 7, 3)) / 255.0
        write_ppm(tmpdir / 'a.ppm', rgb)
        assert_array_equal(read_ppm(tmpdir / 'a.ppm'), rgb)

    @staticmethod
    def test_ppm_header_comments_are_skipped(tmpdir):
        path = tmpdir / 'b.ppm'
        path.write_binary(b'P6\n# written by hand\n2 1\n255\n' + bytes([255, 0, 0, 0, 0, 255]))
        assert_array_equal(read_ppm(path), [[[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]])

    @staticmethod
    @pytest.mark.parametrize('data', [b'P5\n2 2\n255\n' + bytes(4), b'P6\n2 2\n255\n' + bytes(5), b'P6\n2'])
    def test_bad_ppm_raises(tmpdir, data):
        path = tmpdir / 'c.ppm'
        path.write_binary(data)
        with pytest.raises(DatasetFormatError):
            read_ppm(path)

    @staticmethod
    def test_depth_is_stored_as_float32(tmpdir):
        depth = np.random.default_rng(1).uniform(0.1, 10.0, size=(4, 6))
        write_depth(tmpdir / 'd.bin', depth)
        assert_array_equal(read_depth(tmpdir / 'd.bin'), depth.astype(np.float32))

    @staticmethod
    def test_bad_depth_raises(tmpdir):
        path = tmpdir / 'd.bin'
        write_depth(path, np.ones((3, 3)))
        path.write_binary(path.read_binary()[:-4])
        with pytest.raises(DatasetFormatError):
            read_depth(path)
        path.write_binary(b'NOTDEPTH' + bytes(16))
        with pytest.raises(DatasetFormatError):
            read_depth(path)

    @staticmethod
    def test_sparse_csv(tmpdir):
        sparse = SparseDepth([0, 3, 2], [1, 1, 4], [0.5, 2.25, 9.125], (5, 5), n_corners=2)
        write_sparse(tmpdir / 's.csv', sparse)
        loaded = read_sparse(tmpdir / 's.csv', (5, 5), 2)
        assert_array_equal(loaded.rows, sparse.rows)
        assert_array_equal(loaded.depths, sparse.depths)
        assert loaded.n_corners == 2

    @staticmethod
    def test_malformed_sparse_csv_raises(tmpdir):
        path = tmpdir / 's.csv'
        path.write_text('row,col,depth_m\n1,x,2.0\n', encoding='utf8')
        with pytest.raises(DatasetFormatError):
            read_sparse(path, (5, 5))


class TestDataset:

    @staticmethod
    def test_round_trip(tmpdir):
        records = [episode(RandomPolicy()), episode(RandomPolicy(), steps=4, scene_seed=2)]
        write_dataset(records, tmpdir, config_hash='abc')
        loaded = read_dataset(tmpdir, expected_hash='abc')

        assert len(loaded) == 2
        for original, copy in zip(records, loaded):
            assert (copy.scene_seed, copy.family, copy.policy, copy.seed) == \
                (original.scene_seed, original.family, original.policy, original.seed)
            assert copy.actions == original.actions
            assert copy.kept_timesteps == original.kept_timesteps
            assert copy.grid == original.grid
            for a, b in zip(original.poses, copy.poses):
                assert_array_equal(a.matrix, b.matrix)
            for a, b in zip(original.sparse, copy.sparse):
                assert_array_equal(a.rows, b.rows)
                assert_array_equal(a.depths, b.depths)
                assert a.n_corners == b.n_corners
            frame_a, frame_b = original.frames[3].load(), copy.frames[3].load()
            assert_array_equal(frame_b.depth_gt, frame_a.depth_gt.astype(np.float32))
            assert np.abs(frame_b.rgb - frame_a.rgb).max() <= 0.5 / 255 + 1e-12

    @staticmethod
    def test_manifest(tmpdir):
        records = [episode(RandomPolicy(), steps=3), episode(RandomPolicy(), steps=3)]
        dataset = write_dataset(records, tmpdir, config_hash='abc')
        manifest = json.loads((tmpdir / MANIFEST_FILENAME).read_text(encoding='utf8'))
        assert manifest == dataset.manifest()
        assert manifest['world_seeds'] == [1]
        assert [e['dir'] for e in manifest['episodes']] == ['ep_0', 'ep_1']
        assert manifest['episodes'][0]['n_steps'] == 3

    @staticmethod
    def test_deux_losses_survive(tmpdir):
        record = episode(DeuxPolicy(GroundTruthCompletor()))
        write_dataset([record], tmpdir)
        loaded = read_dataset(tmpdir)[0]
        assert [s.delta for s in loaded.steps] == record.deltas
        assert [s.losses for s in loaded.steps] == [s.losses for s in record.steps]
        assert (tmpdir / 'ep_0' / LOSSES_FILENAME).isfile() == any(s.losses for s in record.steps)

    @staticmethod
    def test_stored_episodes_are_not_rewritten(tmpdir):
        record = episode(RandomPolicy(), steps=3, episode_dir=tmpdir / 'ep_0')
        write_dataset([record], tmpdir)
        assert read_dataset(tmpdir)[0].frames[2].load().rgb.shape == (16, 16, 3)

    @staticmethod
    def test_empty_dataset(tmpdir):
        write_dataset([], tmpdir)
        assert read_dataset(tmpdir) == []

    @staticmethod
    def test_config_hash_mismatch_raises(tmpdir):
        write_dataset([episode(RandomPolicy(), steps=3)], tmpdir, config_hash='abc')
        with pytest.raises(DatasetFormatError):
            read_dataset(tmpdir, expected_hash='def')

    @staticmethod
    def test_missing_or_broken_manifest_raises(tmpdir):
        with pytest.raises(DatasetFormatError):
            load_manifest(tmpdir)
        (tmpdir / MANIFEST_FILENAME).write_text('{', encoding='utf8')
        with pytest.raises(DatasetFormatError):
            load_manifest(tmpdir)
        (tmpdir / MANIFEST_FILENAME).write_text('{"layout_version": 99}', encoding='utf8')
        with pytest.raises(DatasetFormatError):
            load_manifest(tmpdir)

    @staticmethod
    def test_missing_frame_raises(tmpdir):
        write_dataset([episode(RandomPolicy(), steps=3)], tmpdir)
        (tmpdir / 'ep_0' / 'depth_00001.bin').remove()
        with pytest.raises(DatasetFormatError):
            read_dataset(tmpdir)

    @staticmethod
    def test_truncated_log_raises(tmpdir):
        write_dataset([episode(RandomPolicy(), steps=3)], tmpdir)
        log = tmpdir / 'ep_0' / 'log.csv'
        log.write_text('\n'.join(log.read_text(encoding='utf8').splitlines()[:-1]) + '\n', encoding='utf8')
        with pytest.raises(DatasetFormatError):
            read_dataset(tmpdir)
