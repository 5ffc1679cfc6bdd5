"""Example analysis code that reuses the shared workspace functions."""

from shared_functions import dot_product


def main():
    a = [1, 2, 3]
    b = [1, 2, 3]
    print(dot_product(a, b))


if __name__ == "__main__":
    main()
