"""Local homology tools for point clouds: intrinsic dimension and Euclidicity."""
from __future__ import annotations

__version__ = "0.1.0"
