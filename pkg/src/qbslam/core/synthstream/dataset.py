"""
On-disk dataset layout shared by synthetic and recorded data.

    <root>/frames/NNNNNN.pgm   8-bit grayscale (``.ppm`` or ``.png`` for RGB), zero-padded index
    <root>/odometry.csv        timestamp,dx,dy,dtheta
    <root>/ground_truth.csv    timestamp,x,y
    <root>/meta.json           width, height, frame_rate, seed, scenario, ...
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from PIL import Image

from qbslam.core.models.frame import Frame
from qbslam.core.models.pose import OdometrySample
from qbslam.core.synthstream.flight import FlightRecord
from qbslam.exceptions.datasets import DatasetError, DatasetLayoutError, SequenceGapError
from qbslam.exceptions.models import InvalidFrameError
from qbslam.utils.logging import get_configured_logger, trackerator

logger = get_configured_logger('Dataset')

FRAMES_DIR = 'frames'
ODOMETRY_FILE = 'odometry.csv'
GROUND_TRUTH_FILE = 'ground_truth.csv'
META_FILE = 'meta.json'

ODOMETRY_HEADER = ('timestamp', 'dx', 'dy', 'dtheta')
GROUND_TRUTH_HEADER = ('timestamp', 'x', 'y')
REQUIRED_META = ('width', 'height', 'frame_rate')
FRAME_SUFFIXES = ('.pgm', '.ppm', '.png')


@dataclass(eq=False)
class Dataset:
    """A dataset loaded from disk. ``ground_truth`` rows are ``(timestamp, x, y)``."""

    path: Path
    frames: list[Frame]
    odometry: list[OdometrySample]
    ground_truth: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def scenario(self) -> str:
        return str(self.meta.get('scenario', self.path.name))


# ── Writing ──────────────────────────────────────────────────────────────────


def _write_rows(path: Path, header: tuple[str, ...], rows: list[tuple[float, ...]]) -> None:
    with path.open('w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        writer.writerows([repr(float(v)) for v in row] for row in rows)


def write_dataset(record: FlightRecord, out: str | Path, meta: dict[str, Any] | None = None) -> Path:
    """
    Write ``record`` in the dataset layout under ``out``.

    Identical records and metadata give byte-identical directories.
    """
    root = Path(out)
    frames_dir = root / FRAMES_DIR
    frames_dir.mkdir(parents=True, exist_ok=True)

    for frame in trackerator(record.frames, len(record.frames), 'Writing frames'):
        pixels = np.round(frame.image() * 255.0).astype(np.uint8)
        suffix = '.pgm' if frame.channels == 1 else '.ppm'
        Image.fromarray(pixels).save(frames_dir / f'{frame.index:06d}{suffix}', format='PPM')

    _write_rows(root / ODOMETRY_FILE, ODOMETRY_HEADER, [(o.timestamp, o.dx, o.dy, o.dtheta) for o in record.odometry])
    _write_rows(root / GROUND_TRUTH_FILE, GROUND_TRUTH_HEADER, [tuple(row) for row in record.ground_truth])

    first = record.frames[0] if record.frames else None
    document: dict[str, Any] = {
        'width': first.width if first else 0,
        'height': first.height if first else 0,
        'channels': first.channels if first else 1,
        'frame_rate': record.frame_rate,
        'frame_count': len(record),
        'seams': list(record.seams),
    }
    document.update(meta or {})
    with (root / META_FILE).open('w', encoding='utf-8') as handle:
        json.dump(document, handle, indent=2, sort_keys=True)
        handle.write('\n')

    logger.info(f'Wrote {len(record)} frames to {root}')
    return root


# ── Reading ──────────────────────────────────────────────────────────────────


def is_frame_healthy(path: Path) -> bool:
    """A frame file is healthy when it is non-empty and Pillow can verify it."""
    if not path.is_file() or path.stat().st_size == 0:
        return False
    try:
        with Image.open(path) as img:
            img.verify()
    except Exception:  # noqa: BLE001 - any decoder error means unusable
        return False
    else:
        return True


def _read_rows(path: Path, header: tuple[str, ...], root: Path) -> np.ndarray:
    if not path.is_file():
        raise DatasetLayoutError(f'Missing {path.name}', dataset_path=root)
    with path.open(encoding='utf-8', newline='') as handle:
        reader = csv.reader(handle)
        found = tuple(next(reader, ()))
        if found != header:
            raise DatasetLayoutError(f'{path.name}: expected header {",".join(header)}, got {",".join(found)}', root)
        try:
            rows = [[float(v) for v in row] for row in reader if row]
        except ValueError as e:
            raise DatasetLayoutError(f'{path.name}: {e}', dataset_path=root) from e
    if any(len(row) != len(header) for row in rows):
        raise DatasetLayoutError(f'{path.name}: every row needs {len(header)} columns', dataset_path=root)
    table = np.array(rows, dtype=np.float64).reshape(-1, len(header))
    if not np.all(np.isfinite(table)):
        raise DatasetLayoutError(f'{path.name} contains non-finite values', dataset_path=root)
    if np.any(np.diff(table[:, 0]) < 0):
        raise DatasetLayoutError(f'{path.name}: timestamps must be nondecreasing', dataset_path=root)
    return table


def _frame_files(root: Path) -> list[Path]:
    frames_dir = root / FRAMES_DIR
    if not frames_dir.is_dir():
        raise DatasetLayoutError(f'Missing {FRAMES_DIR}/ directory', dataset_path=root)
    files = sorted(p for p in frames_dir.iterdir() if p.suffix.lower() in FRAME_SUFFIXES)
    if not files:
        raise DatasetLayoutError(f'No frames in {frames_dir}', dataset_path=root)
    for expected, path in enumerate(files):
        try:
            found = int(path.stem)
        except ValueError as e:
            raise DatasetLayoutError(f'Frame file {path.name} is not named by its index', dataset_path=root) from e
        if found != expected:
            raise SequenceGapError(
                f'Frame {expected} is missing (next file is {path.name})',
                dataset_path=root,
                expected_index=expected,
                found_index=found,
            )
    return files


def load_ground_truth(path: str | Path) -> np.ndarray:
    """Read only ``ground_truth.csv`` of a dataset: rows ``(timestamp, x, y)``."""
    root = Path(path)
    if not root.is_dir():
        raise DatasetLayoutError(f'Dataset directory not found: {root}', dataset_path=root)
    return _read_rows(root / GROUND_TRUTH_FILE, GROUND_TRUTH_HEADER, root)


def load_dataset(path: str | Path, *, color: bool = False) -> Dataset:
    """
    Load a dataset directory, frames in index order.

    Args:
        path: Dataset root
        color: Keep RGB frames (N = 3·w·h) instead of converting to grayscale

    Raises:
        DatasetLayoutError: Missing files, bad headers, mismatched stream lengths or frame sizes
        SequenceGapError: Frame indices are not 0, 1, 2, ...
    """
    root = Path(path)
    if not root.is_dir():
        raise DatasetLayoutError(f'Dataset directory not found: {root}', dataset_path=root)

    meta_path = root / META_FILE
    if not meta_path.is_file():
        raise DatasetLayoutError(f'Missing {META_FILE}', dataset_path=root)
    try:
        meta = json.loads(meta_path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise DatasetLayoutError(f'{META_FILE} is not valid JSON: {e}', dataset_path=root) from e
    missing = [key for key in REQUIRED_META if key not in meta]
    if missing:
        raise DatasetLayoutError(f'{META_FILE} lacks {", ".join(missing)}', dataset_path=root)

    files = _frame_files(root)
    odometry_table = _read_rows(root / ODOMETRY_FILE, ODOMETRY_HEADER, root)
    ground_truth = _read_rows(root / GROUND_TRUTH_FILE, GROUND_TRUTH_HEADER, root)
    if not len(files) == len(odometry_table) == len(ground_truth):
        raise DatasetLayoutError(
            f'{len(files)} frames, {len(odometry_table)} odometry rows and {len(ground_truth)} ground-truth rows',
            dataset_path=root,
        )

    width, height = int(meta['width']), int(meta['height'])
    mode = 'RGB' if color else 'L'
    frames: list[Frame] = []
    for k, file in enumerate(trackerator(files, len(files), f'Loading {root.name}')):
        if not is_frame_healthy(file):
            raise DatasetLayoutError(f'Frame {file.name} is unreadable', dataset_path=root)
        with Image.open(file) as img:
            pixels = np.asarray(img.convert(mode))
        if pixels.shape[:2] != (height, width):
            raise DatasetLayoutError(
                f'Frame {file.name} is {pixels.shape[1]}x{pixels.shape[0]}, meta says {width}x{height}',
                dataset_path=root,
            )
        try:
            frames.append(Frame.from_image(k, float(odometry_table[k, 0]), pixels))
        except InvalidFrameError as e:
            raise DatasetError(f'Frame {file.name}: {e}', dataset_path=root) from e

    odometry = [OdometrySample(float(t), float(dx), float(dy), float(dth)) for t, dx, dy, dth in odometry_table]
    logger.info(f'Loaded {len(frames)} frames ({width}x{height}, {mode}) from {root}')
    return Dataset(path=root, frames=frames, odometry=odometry, ground_truth=ground_truth, meta=meta)
