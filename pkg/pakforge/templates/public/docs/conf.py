#!/usr/bin/env python
# Sphinx configuration for {{ conda_pypi_package_dist_name }}.

import sys
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

# Make the package importable without installing it.
sys.path.insert(0, str(Path("../../src").resolve()))

project = "{{ conda_pypi_package_dist_name }}"
copyright = "{{ license_holders }}"
author = "{{ maintainer_name }}"

try:
    release = version(project)
except PackageNotFoundError:
    release = "0.0.0"
version = ".".join(release.split(".")[:2])

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.todo",
    "sphinx.ext.viewcode",
    "sphinx.ext.intersphinx",
    "sphinx_rtd_theme",
    "sphinx_copybutton",
    "m2r",
]

templates_path = ["_templates"]
source_suffix = [".rst", ".md"]
master_doc = "index"
language = "en"
exclude_patterns = ["build"]
pygments_style = "sphinx"

html_theme = "sphinx_rtd_theme"
html_static_path = ["_static"]
html_logo = "img/scikit-package-logo-text.png"
html_theme_options = {
    "navigation_with_keys": True,
}

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
}
