"""Select the compiled kernels when available, else the pure-Python ones."""

try:
    from gim1n import _core as kernels

    NAME = "cython"
except ImportError:  # extension not built
    from gim1n import _fallback as kernels

    NAME = "python"

from gim1n import _fallback as python_kernels

__all__ = ["kernels", "python_kernels", "NAME"]
