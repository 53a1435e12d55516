#!/usr/bin/env python
# -*- encoding: utf-8 -*-
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

from setuptools import setup, find_packages

__VERSION__ = "0.1.0"
__NAME__ = 'deux'

with open('README.rst') as readme_file:
    README = readme_file.read()

setup(
    name=__NAME__,
    version=__VERSION__,
    python_requires='>=3.8',
    author='deux authors',
    description='Depth uncertainty guided exploration testbed',
    long_description=README,
    license='GPL-2.0',
    platforms=['Linux'],
    packages=find_packages(exclude=['test', 'test.*', 'examples', 'examples.*']),
    include_package_data=True,
    install_requires=[
        'click>=7.0',
        'click-log>=0.3.2',
        'h5py>=2.9.0',
        'numpy>=1.22.0',
        'scipy>=1.2.1',
        'Sphinx>=1.8.0',
    ],
    test_suite='test',
    tests_require=[
        'pytest',
    ],
    entry_points={
        'console_scripts': [
            'deux=deux.cli.cli:run',
        ]
    }
)
