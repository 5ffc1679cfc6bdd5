"""Functions shared by your analysis code. Replace them with your own."""


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
