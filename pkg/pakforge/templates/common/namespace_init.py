"""Namespace package shared by every project released under this name."""

__path__ = __import__("pkgutil").extend_path(__path__, __name__)
