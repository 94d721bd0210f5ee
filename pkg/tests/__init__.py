"""
Tests for the Direction Set Toolkit.
"""
