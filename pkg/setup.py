# -*- encoding: utf-8 -*-
# flake8: noqa
# pylint: skip-file
"""
Python setup file for the takens_nf package.

Build a source distribution and check that no temp files end up in it:

    python -m build --sdist

For new releases, bump the version number in takens_nf/__init__.py, add an entry to CHANGELOG.txt and build again.
The command line tool is installed as ``takens-nf``.
"""
import os

from setuptools import find_packages, setup

import takens_nf as app

dev_requires = [
    "black",
    "flake8",
    "isort",
    "mypy",
    "pylint",
    "pytest",
]

install_requires = ["numpy", "scipy", "pydantic", "python-dateutil"]


def read(fname):
    try:
        return open(os.path.join(os.path.dirname(__file__), fname)).read()
    except IOError:
        return ""


setup(
    name="python-takens-nf",
    version=app.__version__,
    description="Dichotomy spectra, center manifolds and Takens normal forms of nonautonomous difference equations.",
    long_description=read("README.md"),
    long_description_content_type="text/markdown",
    license="The MIT License",
    platforms=["OS Independent"],
    keywords="normal form, center manifold, dichotomy spectrum, nonautonomous, difference equations",
    packages=find_packages(exclude=["examples", "examples.*"]),
    include_package_data=True,
    package_data={"takens_nf": ["py.typed"]},
    python_requires=">=3.10",
    install_requires=install_requires,
    extras_require={
        "dev": dev_requires,
    },
    entry_points={
        "console_scripts": ["takens-nf=takens_nf.cli:main"],
    },
)
