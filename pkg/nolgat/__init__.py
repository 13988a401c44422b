"""
NOL-GAT package: GATv2 node classification with learned per-node hop orders.
"""

from importlib.metadata import PackageNotFoundError, version

from .app import NolGatApp


def get_version() -> str:
    """Return the installed package version."""
    try:
        return version("nolgat")
    except PackageNotFoundError:
        return "0.0.0"


__all__ = ["NolGatApp", "get_version"]
