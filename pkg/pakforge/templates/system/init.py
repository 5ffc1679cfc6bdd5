"""{{ conda_pypi_package_dist_name }}: reusable code installed system-wide."""
