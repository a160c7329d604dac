"""Exact and certified numerics for GL(4) x GL(1) hybrid subconvexity bookkeeping."""

from __future__ import annotations

__version__ = "0.1.0"

from . import cyclo, exponent, expsum, identity, modcore, transform  # noqa: F401

__all__ = ["cyclo", "exponent", "expsum", "identity", "modcore", "transform", "__version__"]
