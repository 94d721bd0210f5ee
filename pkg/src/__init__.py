"""
Direction Set Toolkit.

Direction sets of finite point clouds, their projective quotient, empty caps,
and a finite-resolution trichotomy classifier for graphs of functions.
"""

__version__ = "0.1.0"
