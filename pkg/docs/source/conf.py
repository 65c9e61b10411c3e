# Configuration file for the Sphinx documentation builder.

import os
import sys

# make the src package importable by autodoc
sys.path.insert(0, os.path.abspath(os.path.join("..", "..")))

project = "Zooming_SlowMo"
release = "0.0.1"

extensions = ["sphinx.ext.autodoc"]

# the docs build does not need the numeric stack installed
autodoc_mock_imports = ["git", "numpy", "PIL", "scipy", "torch", "torchvision", "yaml"]

html_theme = "sphinx_rtd_theme"
