"""API modules for the Resonance MCP Server."""

from . import polarization, resonances, sweep, validation

__all__ = ["resonances", "polarization", "sweep", "validation"]
