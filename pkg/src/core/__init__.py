"""
Core computations of the Direction Set Toolkit.

This package contains the geometry primitives, direction set enumeration,
cap analysis, the trichotomy classifier and secant slope machinery.
"""
