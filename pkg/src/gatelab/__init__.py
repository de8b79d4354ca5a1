"""Numerical laboratory for replicating, compressing and super-generating
unknown unitary gates through explicit block decompositions of tensor-power
spaces."""

__version__ = "0.1.0"

from . import protocols, repchan, schur, tensorcore, young  # noqa: F401
