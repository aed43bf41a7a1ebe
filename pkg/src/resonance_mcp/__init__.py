"""Resonance MCP Server - scattering resonances of bodies with small anisotropic inclusions."""

__version__ = "0.1.0"
