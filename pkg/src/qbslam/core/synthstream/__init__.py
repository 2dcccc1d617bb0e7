from qbslam.core.synthstream.dataset import Dataset, load_dataset, load_ground_truth, write_dataset
from qbslam.core.synthstream.flight import FlightPlan, FlightRecord, simulate_flight
from qbslam.core.synthstream.scenarios import (
    BUILTIN_NAMES,
    Scenario,
    builtin_scenarios,
    fly_scenario,
    load_custom_scenario,
    resolve_scenario,
)
from qbslam.core.synthstream.world import World, WorldSpec, generate_world, render

__all__ = [
    'BUILTIN_NAMES',
    'Dataset',
    'FlightPlan',
    'FlightRecord',
    'Scenario',
    'World',
    'WorldSpec',
    'builtin_scenarios',
    'fly_scenario',
    'generate_world',
    'load_custom_scenario',
    'load_dataset',
    'load_ground_truth',
    'render',
    'resolve_scenario',
    'simulate_flight',
    'write_dataset',
]
