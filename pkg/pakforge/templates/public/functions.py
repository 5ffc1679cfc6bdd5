"""Example functions of {{ conda_pypi_package_dist_name }}.

Replace them with your own code and document every public function with
a docstring: the API pages of the documentation are generated from them.
"""


def dot_product(a, b):
    """Return the dot product of two equal-length sequences.

    Parameters
    ----------
    a : sequence of numbers
        The first vector.
    b : sequence of numbers
        The second vector.

    Returns
    -------
    number
        The sum of the element-wise products of ``a`` and ``b``.
    """
    if len(a) != len(b):
        raise ValueError("Vectors must have the same length.")
    return sum(x * y for x, y in zip(a, b))
