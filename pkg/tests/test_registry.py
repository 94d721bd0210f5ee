"""
Unit tests for the registry module.

This module contains unit tests for the generator and function profile registry.
"""

import os
import sys
import pytest
import numpy as np
from unittest.mock import patch, MagicMock
from pydantic import BaseModel, Field

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src import registry
from src.registry import (
    GeneratorSpec,
    generate,
    get_generator,
    get_profile,
    list_generator_kinds,
    list_profiles,
    register_generator,
    register_profile,
)
from src.errors import BadSpec, UnknownGenerator


class DummyParams(BaseModel):
    model_config = {"extra": "forbid"}

    n: int = Field(3, ge=2)


@pytest.fixture
def clear_registry():
    """Fixture to empty both registries for one test and restore the built-ins afterwards."""
    with patch.dict(registry._generator_registry, clear=True), patch.dict(registry._profile_registry, clear=True):
        yield


@pytest.fixture
def mock_generator_factory():
    """Fixture for a mock generator returning a mock cloud."""
    mock_cloud = MagicMock()
    mock_cloud.n, mock_cloud.dim = 3, 2
    mock_factory = MagicMock(return_value=mock_cloud)
    return mock_factory, mock_cloud


def test_register_generator(clear_registry, mock_generator_factory):
    """Test registering a generator kind."""
    mock_factory, _ = mock_generator_factory

    register_generator("test", mock_factory, DummyParams)

    assert "test" in registry._generator_registry
    assert registry._generator_registry["test"].factory == mock_factory


def test_register_duplicate_generator(clear_registry, mock_generator_factory):
    """Test registering a duplicate generator kind."""
    mock_factory, _ = mock_generator_factory
    register_generator("test", mock_factory, DummyParams)

    with pytest.raises(ValueError):
        register_generator("test", mock_factory, DummyParams)


def test_get_nonexistent_generator(clear_registry):
    """Test getting a nonexistent generator."""
    with pytest.raises(UnknownGenerator):
        get_generator("nonexistent")


def test_generate_validates_and_passes_seed(clear_registry, mock_generator_factory):
    """Test that generate validates params and calls the factory with the model and seed."""
    mock_factory, mock_cloud = mock_generator_factory
    register_generator("test", mock_factory, DummyParams)

    cloud = generate(kind="test", seed=11, n=5)

    assert cloud == mock_cloud
    params, seed = mock_factory.call_args[0]
    assert params == DummyParams(n=5)
    assert seed == 11


def test_generate_accepts_spec_and_mapping(clear_registry, mock_generator_factory):
    """Test the GeneratorSpec and dict forms of generate."""
    mock_factory, _ = mock_generator_factory
    register_generator("test", mock_factory, DummyParams)

    generate(GeneratorSpec(kind="test", params={"n": 4}, seed=2))
    generate({"kind": "test", "params": {"n": 4}, "seed": 2})

    assert mock_factory.call_count == 2
    assert mock_factory.call_args_list[0] == mock_factory.call_args_list[1]


def test_generate_bad_params_names_the_field(clear_registry, mock_generator_factory):
    """Test that validation failures carry the field path."""
    mock_factory, _ = mock_generator_factory
    register_generator("test", mock_factory, DummyParams)

    with pytest.raises(BadSpec, match="n:") as excinfo:
        generate(kind="test", n=1)
    assert excinfo.value.details["fields"] == ["n"]

    with pytest.raises(BadSpec, match="bogus"):
        generate(kind="test", bogus=1)
    mock_factory.assert_not_called()


def test_generate_unknown_kind_is_bad_spec(clear_registry):
    """Test that an unknown kind is reported as a spec error."""
    with pytest.raises(BadSpec, match="kind"):
        generate(kind="nonexistent")


def test_list_generator_kinds(clear_registry, mock_generator_factory):
    """Test listing generator kinds."""
    mock_factory, _ = mock_generator_factory
    register_generator("test1", mock_factory, DummyParams)
    register_generator("test2", mock_factory, DummyParams)

    kinds = list_generator_kinds()

    assert kinds == ["test1", "test2"]


def test_register_and_sample_profile(clear_registry):
    """Test that profiles are sampled through validated params."""
    profile = MagicMock(return_value=(np.zeros(2), np.zeros(2)))
    register_profile("flat", profile, DummyParams)

    sample = get_profile("flat")
    sample(3, n=4)

    profile.assert_called_once_with(3, DummyParams(n=4))
    assert list_profiles() == ["flat"]
    with pytest.raises(ValueError):
        register_profile("flat", profile, DummyParams)


def test_profile_depth_error_becomes_bad_spec(clear_registry):
    """Test that a ValueError from the profile is reported as a spec error."""
    register_profile("flat", MagicMock(side_effect=ValueError("depth must lie in [0, 24], got 30")), DummyParams)
    with pytest.raises(BadSpec, match="depth"):
        get_profile("flat")(30)


def test_get_unknown_profile(clear_registry):
    """Test getting a nonexistent profile."""
    with pytest.raises(UnknownGenerator):
        get_profile("nonexistent")


def test_built_in_kinds_are_registered():
    """Test that every fixture kind and function profile is available."""
    assert set(list_generator_kinds()) == {
        "lipschitz_random",
        "weierstrass",
        "absolute_value",
        "line",
        "circle",
        "collinear_plus_point",
        "random_ball",
        "cantor_graph",
        "plane_slice",
    }
    assert set(list_profiles()) == {"identity", "absolute_value", "weierstrass", "cantor"}
