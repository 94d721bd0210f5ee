"""
Configuration settings for the Direction Set Toolkit.

This module handles loading configuration from environment variables and provides
default values for thresholds, tolerances and kernel sizing.
"""

import math
import os
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

from .errors import InputValidationError

# Load environment variables from .env file
load_dotenv()

# Logging settings
LOG_LEVEL = os.getenv("DIRSET_LOG_LEVEL", "INFO")

# Development settings
DEV_MODE = os.getenv("DEV_MODE", "FALSE").upper() == "TRUE"

# Kernel settings (0 threads = one per CPU)
THREADS = int(os.getenv("DIRSET_THREADS", "0"))
BLOCK_SIZE = int(os.getenv("DIRSET_BLOCK_SIZE", "1048576"))
NET_SIZE_LIMIT = int(os.getenv("DIRSET_NET_LIMIT", "2000000"))
GRAPH_INLINE_LIMIT = int(os.getenv("DIRSET_GRAPH_INLINE_LIMIT", "10000"))

# Numerical constants
DEFAULT_TOL = 1e-9
DELTA_MIN = 1e-12
CANONICAL_TOL = 1e-12
DEFAULT_EPS_HOLE = math.pi / 16
DEFAULT_EPS_COVER = math.pi / 256
DEFAULT_SEED = 0
DEFAULT_SAMPLED_K = 20000

# Keys a YAML profile may set, by section
PROFILE_KEYS = {
    "thresholds": {"tol", "eps_hole", "eps_cover", "net_density", "M", "eps"},
    "runtime": {"threads", "seed", "k", "pair_budget"},
}


def get_config() -> Dict[str, Any]:
    """
    Get the current configuration as a dictionary.

    Returns:
        Dict[str, Any]: The current configuration.
    """
    return {
        "log_level": LOG_LEVEL,
        "dev_mode": DEV_MODE,
        "threads": THREADS,
        "block_size": BLOCK_SIZE,
        "net_size_limit": NET_SIZE_LIMIT,
        "graph_inline_limit": GRAPH_INLINE_LIMIT,
        "default_tol": DEFAULT_TOL,
        "delta_min": DELTA_MIN,
        "canonical_tol": CANONICAL_TOL,
        "default_eps_hole": DEFAULT_EPS_HOLE,
        "default_eps_cover": DEFAULT_EPS_COVER,
        "default_seed": DEFAULT_SEED,
        "default_sampled_k": DEFAULT_SAMPLED_K,
    }


def validate_config() -> Optional[str]:
    """
    Validate the current configuration.

    Returns:
        Optional[str]: An error message if the configuration is invalid, None otherwise.
    """
    if THREADS < 0:
        return "DIRSET_THREADS must be >= 0"
    if BLOCK_SIZE <= 0:
        return "DIRSET_BLOCK_SIZE must be positive"
    if NET_SIZE_LIMIT <= 0:
        return "DIRSET_NET_LIMIT must be positive"
    if GRAPH_INLINE_LIMIT < 0:
        return "DIRSET_GRAPH_INLINE_LIMIT must be >= 0"
    if not DEFAULT_EPS_COVER <= DEFAULT_EPS_HOLE:
        return "default eps_cover must not exceed default eps_hole"

    return None


def print_config() -> None:
    """Print the current configuration."""
    config = get_config()

    print("Current Configuration:")
    for key, value in config.items():
        print(f"  {key}: {value}")


def load_profile(path: str) -> Dict[str, Any]:
    """
    Load a YAML environment profile and flatten its known sections.

    Args:
        path: Path to the YAML file.

    Returns:
        Dict[str, Any]: Flat mapping of setting name to value.

    Raises:
        InputValidationError: If the profile has unknown sections or keys.
    """
    try:
        with open(path, encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as e:
        raise InputValidationError(f"Cannot read profile {path}: {e}") from e

    if not isinstance(raw, dict):
        raise InputValidationError(f"Profile {path} must be a mapping")

    flat: Dict[str, Any] = {}
    for section, values in raw.items():
        if section == "environment":
            continue
        if section not in PROFILE_KEYS:
            raise InputValidationError(f"Unknown profile section '{section}' in {path}")
        for key, value in (values or {}).items():
            if key not in PROFILE_KEYS[section]:
                raise InputValidationError(f"Unknown key '{section}.{key}' in {path}")
            flat[key] = value
    return flat
