"""Equivalence checking of masked arithmetic programs over GF(2^n).

Normalizes the difference of a reference procedure and its masked version by
term rewriting, with random testing and exhaustive enumeration as fallbacks.
"""

from os import path

from setuptools import find_packages, setup

here = path.abspath(path.dirname(__file__))

with open(path.join(here, 'README.md'), encoding='utf-8') as f:
  long_description = f.read()

setup(
    name='maskeq',
    version='0.0.20261017.dev1',
    description='Equivalence checking of masked programs over GF(2^n)',
    long_description=long_description,
    long_description_content_type='text/markdown',
    classifiers=[
        'Development Status :: 2 - Pre-Alpha',
        'Intended Audience :: Developers',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3 :: Only',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Topic :: Security :: Cryptography',
    ],
    packages=find_packages(exclude=(
        'tests.*',
        'tests',
    )),
    package_data={
        'maskeq': ['corpus/*.msl', 'corpus/mutants/*.msl'],
    },
    python_requires='>=3.8',
    install_requires=[
        'absl-py',
        'cached_property',
        'numpy',
        'textx',
    ],
    extras_require={
        'test': ['hypothesis'],
    },
    entry_points={
        'console_scripts': ['maskeq=maskeq.cli:main'],
    },
)
