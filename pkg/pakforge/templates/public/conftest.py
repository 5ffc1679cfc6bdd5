import pytest


@pytest.fixture
def example_vectors():
    """Two small vectors shared by the tests in this directory."""
    return [1, 2, 3], [4, 5, 6]
