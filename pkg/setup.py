#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""Setup module for CutPlan.
"""

# Always prefer setuptools over distutils
from setuptools import setup, find_packages
# To use a consistent encoding
from codecs import open
from os import path

here = path.abspath(path.dirname(__file__))

with open(path.join(here, "README.md"), "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name='cutplan',
    version='1.0.0',
    description='Cut order planning for garment production with a learned LSTM policy and classical baselines',
    long_description=long_description,
    long_description_content_type='text/markdown',

    author='The CutPlan Developers',
    license='GPLv3+',

    classifiers=[
        #The most important stuff.
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'Intended Audience :: Manufacturing',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
        'License :: OSI Approved :: GNU General Public License v3 or later (GPLv3+)',

        #Python versions.
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',

        #Misc.
        'Environment :: Console',
        'Natural Language :: English',
        'Operating System :: OS Independent',
        'Topic :: Utilities'

    ],

    keywords='cut order planning garment marker reinforcement-learning lstm',
    packages=find_packages(),
    package_data={'cutplan': ['data/*.json', 'data/*.csv', 'data/*.cfg']},
    install_requires=['numpy'],
    extras_require={'tests': ['hypothesis']},
    entry_points={'console_scripts': ['cutplan=cutplan.cutplan:run']},
    python_requires='>=3.8',
)
