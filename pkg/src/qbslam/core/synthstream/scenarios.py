"""
Built-in flight scenarios and custom scenario files.

- flight1: perimeter corridor, between the outer walls and the shelves
- flight2: inner aisles only, where shelf faces repeat
- flight3: flight1 followed by flight2
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

from qbslam.core.synthstream.flight import FlightPlan, FlightRecord, simulate_flight
from qbslam.core.synthstream.world import DEFAULT_IMAGE_SIZE, MARGIN, WorldSpec, generate_world
from qbslam.exceptions.config import ConfigurationError
from qbslam.exceptions.datasets import UnknownScenarioError
from qbslam.utils.config import ConfigLoader
from qbslam.utils.logging import get_configured_logger

logger = get_configured_logger('Scenarios')

BUILTIN_NAMES = ('flight1', 'flight2', 'flight3')
DEFAULT_ODOM_NOISE = (0.02, 0.002)


@dataclass(frozen=True)
class Scenario:
    """A world plus one or more plans flown back to back."""

    name: str
    world: WorldSpec
    plans: tuple[FlightPlan, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            'name': self.name,
            'world': self.world.to_dict(),
            'plans': [plan.to_dict() for plan in self.plans],
        }


def _perimeter_waypoints(spec: WorldSpec) -> tuple[tuple[float, float], ...]:
    lo = MARGIN / 2
    right, top = spec.width - lo, spec.height - lo
    middle = spec.width / 2 + lo
    return ((lo, lo), (right, lo), (right, top), (lo, top), (lo, lo), (middle, lo))


def _aisle_waypoints(spec: WorldSpec) -> tuple[tuple[float, float], ...]:
    centres = spec.aisle_centres()
    first, last = centres[0], centres[-1]
    lo = MARGIN / 2
    right = spec.width - lo
    middle = spec.width / 2 + lo
    return ((lo, first), (right, first), (right, last), (lo, last), (lo, first), (middle, first))


def builtin_scenarios(
    seed: int = 0,
    image_size: tuple[int, int] = DEFAULT_IMAGE_SIZE,
    odom_noise: tuple[float, float] = DEFAULT_ODOM_NOISE,
) -> dict[str, Scenario]:
    """
    The three built-in scenarios over the default warehouse.

    flight3 reuses the plans of flight1 and flight2, so its record is their concatenation.
    """
    world = WorldSpec(image_size=image_size, seed=seed)
    flight1 = FlightPlan(_perimeter_waypoints(world), odom_noise=odom_noise, seed=seed)
    flight2 = FlightPlan(_aisle_waypoints(world), odom_noise=odom_noise, seed=seed + 1)
    return {
        'flight1': Scenario('flight1', world, (flight1,)),
        'flight2': Scenario('flight2', world, (flight2,)),
        'flight3': Scenario('flight3', world, (flight1, flight2)),
    }


def _as_tuple(value: Any) -> Any:
    """JSON lists become tuples, nested one level (waypoint lists)."""
    if isinstance(value, list):
        return tuple(_as_tuple(v) for v in value)
    return value


def _build(cls: type, values: Mapping[str, Any], prefix: str) -> Any:
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigurationError(f'Unknown {prefix} key(s): {", ".join(unknown)}', config_key=f'{prefix}_{unknown[0]}')
    converted = {key: _as_tuple(value) for key, value in values.items()}
    try:
        return cls(**converted)
    except TypeError as e:
        raise ConfigurationError(f'Invalid {prefix} section: {e}', config_key=prefix) from e


def load_custom_scenario(path: str | Path, seed: int = 0, image_size: tuple[int, int] | None = None) -> Scenario:
    """
    Read a custom scenario file with ``world`` and ``plan`` sections.

    ``seed`` and ``image_size`` fill in the world when the file leaves them out.

    Raises:
        UnknownScenarioError: If the file does not exist
        ConfigurationError: If a section has unknown keys or invalid values
    """
    path = Path(path)
    if not path.is_file():
        raise UnknownScenarioError(f'No such scenario file: {path}', scenario=str(path))

    flat = ConfigLoader.read(path)
    world_values: dict[str, Any] = {}
    plan_values: dict[str, Any] = {}
    for key, value in flat.items():
        section, _, name = key.partition('_')
        if section == 'world' and name:
            world_values[name] = value
        elif section == 'plan' and name:
            plan_values[name] = value
        else:
            raise ConfigurationError(f'Unexpected key {key!r} in {path}', config_key=key)

    world_values.setdefault('seed', seed)
    if image_size is not None:
        world_values.setdefault('image_size', image_size)
    plan_values.setdefault('seed', seed)
    if 'waypoints' not in plan_values:
        raise ConfigurationError(f'{path}: plan.waypoints is required', config_key='plan_waypoints')

    world = _build(WorldSpec, world_values, 'world')
    plan = _build(FlightPlan, plan_values, 'plan')
    return Scenario(path.stem, world, (plan,))


def resolve_scenario(
    name: str,
    seed: int = 0,
    image_size: tuple[int, int] | None = None,
    odom_noise: tuple[float, float] = DEFAULT_ODOM_NOISE,
) -> Scenario:
    """Look ``name`` up among the built-ins, else treat it as a custom scenario file."""
    if name in BUILTIN_NAMES:
        return builtin_scenarios(seed, image_size or DEFAULT_IMAGE_SIZE, odom_noise)[name]
    if Path(name).suffix:
        return load_custom_scenario(name, seed, image_size)
    raise UnknownScenarioError(
        f'Unknown scenario {name!r}: expected one of {", ".join(BUILTIN_NAMES)} or a scenario file', scenario=name
    )


def fly_scenario(scenario: Scenario) -> FlightRecord:
    """Generate the world once and fly every plan, concatenating the records."""
    world = generate_world(scenario.world)
    record: FlightRecord | None = None
    for plan in scenario.plans:
        flown = simulate_flight(world, plan)
        record = flown if record is None else record.concatenate(flown, plan.odom_noise, plan.seed)
    assert record is not None
    logger.info(f'Scenario {scenario.name}: {len(record)} frames, seams at {list(record.seams)}')
    return record
