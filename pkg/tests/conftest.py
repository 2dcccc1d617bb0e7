import json
from pathlib import Path

import numpy as np
import pytest

from qbslam.core.models import Frame
from qbslam.core.pipeline import generate_dataset
from qbslam.utils.logging import log_manager

TINY_WORLD = {'aisle_count': 1, 'aisle_length': 4.0, 'texture_bank_size': 1, 'image_size': [16, 12]}
TINY_LOOP = [[1.5, 1.5], [8.5, 1.5], [8.5, 9.5], [1.5, 9.5], [1.5, 1.5], [5.0, 1.5]]


@pytest.fixture(autouse=True)
def _quiet_console():
    """Keep progress bars out of test output."""
    previous = log_manager.quiet
    log_manager.quiet = True
    yield
    log_manager.quiet = previous


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_frame(pixels, index=0, timestamp=None):
    """A one-row frame from a flat pixel vector in [0, 1]."""
    pixels = np.asarray(pixels, dtype=np.float64)
    return Frame(
        index=index,
        timestamp=float(index) / 10.0 if timestamp is None else timestamp,
        pixels=pixels,
        width=pixels.size,
        height=1,
    )


def smooth_image(width=64, height=48, phase=0.0):
    """Deterministic smooth grayscale image in [0.1, 0.9]."""
    u = np.linspace(0.0, 2.0 * np.pi, width)
    v = np.linspace(0.0, np.pi, height)
    image = 0.5 + 0.25 * np.sin(u[None, :] + phase) + 0.15 * np.cos(2.0 * v[:, None])
    return np.clip(image, 0.1, 0.9)


@pytest.fixture(scope='session')
def tiny_scenario_file(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp('scenarios') / 'tiny_loop.json'
    document = {'world': TINY_WORLD, 'plan': {'waypoints': TINY_LOOP, 'odom_noise': [0.02, 0.002]}}
    path.write_text(json.dumps(document), encoding='utf-8')
    return path


@pytest.fixture(scope='session')
def tiny_dataset(tmp_path_factory, tiny_scenario_file) -> Path:
    """A short synthetic loop around a one-aisle warehouse at 16x12 pixels."""
    previous = log_manager.quiet
    log_manager.quiet = True
    try:
        return generate_dataset(str(tiny_scenario_file), seed=3, out=tmp_path_factory.mktemp('data') / 'tiny')
    finally:
        log_manager.quiet = previous
