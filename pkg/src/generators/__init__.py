"""
Fixture generators: point clouds and function profiles.

Both are registered with `src.registry`; look them up there rather than
importing the functions directly.
"""
