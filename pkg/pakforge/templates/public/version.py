"""Definition of __version__."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("{{ conda_pypi_package_dist_name }}")
except PackageNotFoundError:
    __version__ = "0.0.0"
