"""
Registry for fixture generators and function profiles.

Generators build point clouds (`gen` command); function profiles sample a
function on dyadic grids (`refine` command). New kinds can be registered
without touching the CLI.
"""

from typing import Any, Callable, Dict, List, NamedTuple, Optional, Tuple, Type

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from .config import DEFAULT_SEED
from .errors import BadSpec, UnknownGenerator
from .utils.logging import get_logger

logger = get_logger(__name__)

# factory(params, seed) -> PointCloud
GeneratorFactory = Callable[[Any, int], Any]

# profile(depth, params) -> (xs, ys)
FunctionProfile = Callable[[int, Any], Tuple[np.ndarray, np.ndarray]]


class _Entry(NamedTuple):
    factory: Callable[..., Any]
    params_model: Type[BaseModel]


_generator_registry: Dict[str, _Entry] = {}
_profile_registry: Dict[str, _Entry] = {}


class GeneratorSpec(BaseModel):
    """A generator kind, its parameters and the seed."""

    model_config = {"extra": "forbid"}

    kind: str
    params: Dict[str, Any] = Field(default_factory=dict)
    seed: int = DEFAULT_SEED


def validate_params(params_model: Type[BaseModel], params: Dict[str, Any], kind: str) -> BaseModel:
    """
    Validate kind-specific parameters.

    Raises:
        BadSpec: With one "field: message" entry per failing field.
    """
    try:
        return params_model(**params)
    except ValidationError as e:
        fields = [".".join(str(p) for p in err["loc"]) or "params" for err in e.errors()]
        problems = "; ".join(f"{field}: {err['msg']}" for field, err in zip(fields, e.errors()))
        raise BadSpec(f"Invalid parameters for '{kind}': {problems}", details={"fields": fields}) from e


def register_generator(kind: str, factory: GeneratorFactory, params_model: Type[BaseModel]) -> None:
    """
    Register a cloud generator.

    Raises:
        ValueError: If the kind is already registered.
    """
    if kind in _generator_registry:
        raise ValueError(f"Generator '{kind}' is already registered.")
    _generator_registry[kind] = _Entry(factory, params_model)
    logger.debug(f"Registered generator: {kind}")


def get_generator(kind: str) -> _Entry:
    """
    Look up a cloud generator.

    Raises:
        UnknownGenerator: If the kind is not registered.
    """
    if kind not in _generator_registry:
        raise UnknownGenerator(f"Generator '{kind}' is not registered. Known: {', '.join(list_generator_kinds())}")
    return _generator_registry[kind]


def generate(spec: Any = None, *, kind: Optional[str] = None, seed: int = DEFAULT_SEED, **params: Any) -> Any:
    """
    Build a fixture cloud.

    Accepts a GeneratorSpec, a mapping with the same fields, or keyword form
    `generate(kind="circle", n=8)`.

    Raises:
        BadSpec: If the kind is unknown or the parameters do not validate.
    """
    if spec is None:
        spec = GeneratorSpec(kind=kind or "", params=params, seed=seed)
    elif isinstance(spec, dict):
        try:
            spec = GeneratorSpec(**spec)
        except ValidationError as e:
            raise BadSpec(f"Invalid generator spec: {e.errors()[0]['msg']}") from e

    try:
        entry = get_generator(spec.kind)
    except UnknownGenerator as e:
        raise BadSpec(f"kind: {e}") from e
    validated = validate_params(entry.params_model, spec.params, spec.kind)
    cloud = entry.factory(validated, spec.seed)
    logger.info(f"Generated {spec.kind} cloud: {cloud.n} points in R^{cloud.dim} (seed {spec.seed})")
    return cloud


def list_generator_kinds() -> List[str]:
    """Registered generator kinds."""
    return list(_generator_registry.keys())


def register_profile(name: str, profile: FunctionProfile, params_model: Type[BaseModel]) -> None:
    """
    Register a function profile.

    Raises:
        ValueError: If the name is already registered.
    """
    if name in _profile_registry:
        raise ValueError(f"Profile '{name}' is already registered.")
    _profile_registry[name] = _Entry(profile, params_model)
    logger.debug(f"Registered function profile: {name}")


def get_profile(name: str) -> Callable[..., Tuple[np.ndarray, np.ndarray]]:
    """
    Look up a function profile.

    Returns:
        sample(depth, **params) -> (xs, ys), validating params on every call.

    Raises:
        UnknownGenerator: If the name is not registered.
    """
    if name not in _profile_registry:
        raise UnknownGenerator(f"Function profile '{name}' is not registered. Known: {', '.join(list_profiles())}")
    entry = _profile_registry[name]

    def sample(depth: int, **params: Any) -> Tuple[np.ndarray, np.ndarray]:
        validated = validate_params(entry.params_model, params, name)
        try:
            return entry.factory(depth, validated)
        except ValueError as e:
            raise BadSpec(f"depth: {e}") from e

    return sample


def list_profiles() -> List[str]:
    """Registered function profile names."""
    return list(_profile_registry.keys())


# Register built-in generators and profiles
from .generators import clouds, profiles  # noqa: E402

register_generator("lipschitz_random", clouds.lipschitz_random, clouds.LipschitzRandomParams)
register_generator("weierstrass", clouds.weierstrass, clouds.WeierstrassCloudParams)
register_generator("absolute_value", clouds.absolute_value, clouds.AbsoluteValueParams)
register_generator("line", clouds.line, clouds.LineParams)
register_generator("circle", clouds.circle, clouds.CircleParams)
register_generator("collinear_plus_point", clouds.collinear_plus_point, clouds.CollinearPlusPointParams)
register_generator("random_ball", clouds.random_ball, clouds.RandomBallParams)
register_generator("cantor_graph", clouds.cantor_graph, clouds.CantorGraphParams)
register_generator("plane_slice", clouds.plane_slice, clouds.PlaneSliceParams)

register_profile("identity", profiles.identity, profiles.NoParams)
register_profile("absolute_value", profiles.absolute_value, profiles.NoParams)
register_profile("weierstrass", profiles.weierstrass, profiles.WeierstrassParams)
register_profile("cantor", profiles.cantor, profiles.NoParams)
