"""
Utility functions for the Direction Set Toolkit.

This package contains helpers for logging, block-parallel kernels, file
formats and SVG figures.
"""
