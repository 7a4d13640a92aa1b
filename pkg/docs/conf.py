# ruff: noqa: PTH100
# Configuration file for the Sphinx documentation builder.
# https://www.sphinx-doc.org/en/master/usage/configuration.html

import os
import sys

import django

sys.path.insert(0, os.path.abspath(".."))
os.environ.setdefault("DATABASE_URL", "sqlite:///docs.db")
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings.local")
django.setup()

import core  # noqa: E402

# -- Project information -----------------------------------------------------

project = "kahler-bounds-lab"
copyright = "2026, kahler-bounds-lab developers"  # noqa: A001
author = "kahler-bounds-lab developers"
release = core.__version__

# -- General configuration ---------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.mathjax",
]

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

# -- Options for HTML output -------------------------------------------------

html_theme = "alabaster"
