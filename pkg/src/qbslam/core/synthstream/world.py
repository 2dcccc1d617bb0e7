"""
Procedural aliased warehouse and its ray-cast renderer.

Layout (meters, y up): a perimeter corridor of width ``MARGIN`` surrounds
``aisle_count + 1`` shelf rows of depth ``SHELF_DEPTH`` separated by aisles of width
``AISLE_WIDTH``. Shelf row k spans y ∈ [MARGIN + k·PITCH, MARGIN + k·PITCH + SHELF_DEPTH]
and x ∈ [MARGIN, MARGIN + aisle_length].

Perimeter walls carry unique textures at evenly spread brightness levels, so each side
of the perimeter corridor looks different. Shelf faces draw from a small texture bank in
shuffled round-robin order, inner-aisle faces first, so that a bank smaller than the
number of inner-aisle faces makes distinct aisles look alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from qbslam.core.models.pose import Pose
from qbslam.exceptions.config import ConfigurationError
from qbslam.utils.logging import get_configured_logger

logger = get_configured_logger('World')

MARGIN = 3.0
SHELF_DEPTH = 1.0
AISLE_WIDTH = 3.0
PITCH = SHELF_DEPTH + AISLE_WIDTH

FOV = math.radians(60.0)
CAMERA_HEIGHT = 1.0
WALL_HEIGHT = 2.0
MAX_RANGE = 8.0
CEILING = 0.08
FLOOR = 0.15
BACKGROUND = 0.3

# texture synthesis
SINUSOIDS = 3
FREQ_RANGE = (0.25, 0.75)  # cycles per meter along the wall
AMPLITUDE_SUM = 0.35
BASE_RANGE = (0.35, 0.65)
PERIMETER_BASE_RANGE = (0.25, 0.75)
LEVEL_SPACING = 0.5  # shelf boards, meters
LEVEL_AMPLITUDE = 0.05

PERIMETER_WALLS = 4
DEFAULT_IMAGE_SIZE = (64, 48)
SENSOR_IMAGE_SIZE = (346, 260)


@dataclass(frozen=True)
class WorldSpec:
    """Parameters of a generated warehouse."""

    aisle_count: int = 3
    aisle_length: float = 12.0
    texture_bank_size: int = 2
    image_size: tuple[int, int] = DEFAULT_IMAGE_SIZE
    seed: int = 0

    def __post_init__(self) -> None:
        if self.aisle_count < 1:
            raise ConfigurationError(f'aisle_count must be ≥ 1, got {self.aisle_count}', config_key='aisle_count')
        if not self.aisle_length > 0:
            raise ConfigurationError(f'aisle_length must be positive, got {self.aisle_length}', config_key='aisle_length')
        if self.texture_bank_size < 1:
            raise ConfigurationError(
                f'texture_bank_size must be ≥ 1, got {self.texture_bank_size}', config_key='texture_bank_size'
            )
        width, height = self.image_size
        if width < 1 or height < 1:
            raise ConfigurationError(f'image_size must be positive, got {self.image_size}', config_key='image_size')
        object.__setattr__(self, 'image_size', (int(width), int(height)))

    @property
    def width(self) -> float:
        return 2 * MARGIN + self.aisle_length

    @property
    def height(self) -> float:
        return 2 * MARGIN + (self.aisle_count + 1) * SHELF_DEPTH + self.aisle_count * AISLE_WIDTH

    def aisle_centres(self) -> list[float]:
        """y coordinate of every inner aisle's centre line."""
        return [MARGIN + SHELF_DEPTH + i * PITCH + AISLE_WIDTH / 2 for i in range(self.aisle_count)]

    def to_dict(self) -> dict[str, object]:
        return {
            'aisle_count': self.aisle_count,
            'aisle_length': self.aisle_length,
            'texture_bank_size': self.texture_bank_size,
            'image_size': list(self.image_size),
            'seed': self.seed,
        }


@dataclass(frozen=True)
class TextureBank:
    """Row t describes texture t: base level plus ``SINUSOIDS`` sinusoids along the wall."""

    base: np.ndarray
    amplitudes: np.ndarray
    frequencies: np.ndarray
    phases: np.ndarray

    def __len__(self) -> int:
        return self.base.size

    def sample(self, texture: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Intensity of ``texture`` at along-wall coordinate ``u`` and height ``v`` (broadcast)."""
        waves = self.amplitudes[texture] * np.sin(
            2.0 * np.pi * self.frequencies[texture] * u[..., None] + self.phases[texture]
        )
        levels = LEVEL_AMPLITUDE * np.cos(2.0 * np.pi * v / LEVEL_SPACING)
        return np.clip(self.base[texture] + waves.sum(axis=-1) + levels, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class World:
    """
    Wall segments with their textures.

    ``segments`` rows are ``(x0, y0, x1, y1)`` with x0 ≤ x1 and y0 ≤ y1 (axis-aligned);
    the along-wall coordinate is x for horizontal walls and y for vertical ones.
    """

    spec: WorldSpec
    segments: np.ndarray
    segment_textures: np.ndarray
    textures: TextureBank
    shelves: tuple[tuple[float, float, float, float], ...]
    inner_faces: tuple[int, ...] = field(default=())

    @property
    def width(self) -> float:
        return self.spec.width

    @property
    def height(self) -> float:
        return self.spec.height

    def aisle_centres(self) -> list[float]:
        return self.spec.aisle_centres()

    def contains(self, x: float, y: float) -> bool:
        """Whether (x, y) is strictly inside the walls and outside every shelf."""
        if not (0.0 < x < self.width and 0.0 < y < self.height):
            return False
        return not any(x0 <= x <= x1 and y0 <= y <= y1 for x0, y0, x1, y1 in self.shelves)


def _make_textures(rng: np.random.Generator, bank: int, perimeter: int) -> TextureBank:
    """Bank textures first, then one texture per perimeter wall."""
    count = bank + perimeter
    base = rng.uniform(*BASE_RANGE, size=count)
    # perimeter walls take evenly spaced levels, darkest on the south wall
    base[bank:] = np.linspace(*PERIMETER_BASE_RANGE, perimeter)
    weights = rng.uniform(0.5, 1.0, size=(count, SINUSOIDS))
    amplitudes = AMPLITUDE_SUM * weights / weights.sum(axis=1, keepdims=True)
    frequencies = rng.uniform(*FREQ_RANGE, size=(count, SINUSOIDS))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(count, SINUSOIDS))
    return TextureBank(base, amplitudes, frequencies, phases)


def generate_world(spec: WorldSpec) -> World:
    """Build the warehouse described by ``spec``. Same spec, same world."""
    rng = np.random.default_rng(spec.seed)
    bank = spec.texture_bank_size
    textures = _make_textures(rng, bank, PERIMETER_WALLS)

    w, h = spec.width, spec.height
    x_lo, x_hi = MARGIN, MARGIN + spec.aisle_length

    segments: list[tuple[float, float, float, float]] = [
        (0.0, 0.0, w, 0.0),
        (w, 0.0, w, h),
        (0.0, h, w, h),
        (0.0, 0.0, 0.0, h),
    ]
    segment_textures: list[int] = [bank + i for i in range(PERIMETER_WALLS)]

    shelves = []
    inner: list[int] = []
    outer: list[int] = []
    for k in range(spec.aisle_count + 1):
        y_lo = MARGIN + k * PITCH
        y_hi = y_lo + SHELF_DEPTH
        shelves.append((x_lo, y_lo, x_hi, y_hi))

        south = len(segments)
        segments.append((x_lo, y_lo, x_hi, y_lo))
        north = len(segments)
        segments.append((x_lo, y_hi, x_hi, y_hi))
        west = len(segments)
        segments.append((x_lo, y_lo, x_lo, y_hi))
        east = len(segments)
        segments.append((x_hi, y_lo, x_hi, y_hi))

        (inner if k > 0 else outer).append(south)
        (inner if k < spec.aisle_count else outer).append(north)
        outer.extend((west, east))
        segment_textures.extend((-1, -1, -1, -1))

    # shuffled round-robin over the bank, inner-aisle faces first
    order = rng.permutation(bank)
    for slot, face in enumerate(inner + outer):
        segment_textures[face] = int(order[slot % bank])

    logger.info(
        f'Generated {w:g}x{h:g} m warehouse: {spec.aisle_count} aisles, {len(segments)} walls, '
        f'bank of {bank} texture(s)'
    )
    return World(
        spec=spec,
        segments=np.array(segments, dtype=np.float64),
        segment_textures=np.array(segment_textures, dtype=np.intp),
        textures=textures,
        shelves=tuple(shelves),
        inner_faces=tuple(inner),
    )


def render(world: World, pose: Pose, image_size: tuple[int, int] | None = None) -> np.ndarray:
    """
    Ray-cast the view from ``pose`` into an ``(h, w)`` float image in [0, 1].

    Column c looks along θ + atan((w/2 − c − ½)/f), so the leftmost column sees the
    left-hand side of the heading. Walls beyond ``MAX_RANGE`` show as background.
    """
    width, height = image_size or world.spec.image_size
    focal = (width / 2.0) / math.tan(FOV / 2.0)

    offsets = np.arctan((width / 2.0 - (np.arange(width) + 0.5)) / focal)
    angles = pose.theta + offsets
    rays = np.column_stack((np.cos(angles), np.sin(angles)))

    seg = world.segments
    start = seg[:, :2]
    direction = seg[:, 2:] - start
    rel = start - np.array([pose.x, pose.y])

    # camera + t·ray = start + s·direction, solved per (ray, segment)
    denom = rays[:, 0, None] * direction[None, :, 1] - rays[:, 1, None] * direction[None, :, 0]
    parallel = np.abs(denom) < 1e-12
    safe = np.where(parallel, 1.0, denom)
    t = (rel[None, :, 0] * direction[None, :, 1] - rel[None, :, 1] * direction[None, :, 0]) / safe
    s = (rel[None, :, 0] * rays[:, 1, None] - rel[None, :, 1] * rays[:, 0, None]) / safe
    hit = ~parallel & (t > 1e-9) & (s >= 0.0) & (s <= 1.0)
    t = np.where(hit, t, np.inf)

    nearest = np.argmin(t, axis=1)
    distance = t[np.arange(width), nearest]
    depth = distance * np.cos(offsets)

    # rays that miss every segment fall back to MAX_RANGE
    reach = np.where(np.isfinite(distance), distance, MAX_RANGE)
    hit_seg = seg[nearest]
    horizontal = hit_seg[:, 1] == hit_seg[:, 3]
    u = np.where(horizontal, pose.x + reach * rays[:, 0], pose.y + reach * rays[:, 1])
    texture = world.segment_textures[nearest]

    rows = height / 2.0 - (np.arange(height) + 0.5)
    # walls past MAX_RANGE are drawn as background at MAX_RANGE
    clipped = np.minimum(depth, MAX_RANGE * np.cos(offsets))
    v = CAMERA_HEIGHT + rows[:, None] * clipped[None, :] / focal

    walls = world.textures.sample(np.broadcast_to(texture, v.shape), np.broadcast_to(u, v.shape), v)
    wall_or_background = np.where((distance <= MAX_RANGE)[None, :], walls, BACKGROUND)
    return np.where(v > WALL_HEIGHT, CEILING, np.where(v < 0.0, FLOOR, wall_or_background))
