#!/usr/bin/env python

from setuptools import find_packages, setup

setup(
    description="Space-time video super-resolution in a single network",
    name="Zooming_SlowMo",
    packages=find_packages(exclude=["tests"]),
)
