"""Numerical core: geometry, kernels, layer potentials, DtN and transfer operators,
the contour eigensolver, polarization tensors, shift asymptotics and the disk oracle.

Submodules are imported explicitly (``from resonance_mcp.core import nep``); ``nep``
depends on ``resonance_mcp.config``, which itself imports ``core.geometry``.
"""
