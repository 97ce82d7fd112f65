"""Vortex-method simulator and confinement diagnostics on the infinite cylinder."""

__version__ = '0.4.0'
