"""
Run artifact files. Every run directory holds the same fixed file names; floats are
written with ``repr`` so identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from qbslam.core.evaluation import Trajectory
from qbslam.exceptions.evaluation import EvaluationError

TRAJECTORY_FILE = 'trajectory.csv'
MAP_FILE = 'map.csv'
LINKS_FILE = 'links.csv'
TEMPLATES_FILE = 'templates.csv'
SURPRISE_FILE = 'surprise.csv'
DICTIONARY_FILE = 'dictionary.dlsc'
METRICS_FILE = 'metrics.json'
REPLAY_FILE = 'replay.csv'
SWEEP_FILE = 'sweep.json'
ABLATION_FILE = 'ablation.json'

TRAJECTORY_HEADER = ('timestamp', 'x', 'y', 'theta')
MAP_HEADER = ('experience_id', 'x', 'y', 'theta')
LINKS_HEADER = ('from_id', 'to_id', 'kind')
SURPRISE_HEADER = ('k', 'timestamp', 'e_k', 's2_raw', 's2_filtered', 'gate_open', 'learned')
REPLAY_HEADER = ('k', 'e_k')


def _cell(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, bool | np.bool_):
        return '1' if value else '0'
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    with path.open('w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        writer.writerows([_cell(v) for v in row] for row in rows)
    return path


def write_json(path: Path, document: dict[str, Any]) -> Path:
    """Keys keep their insertion order."""
    path.write_text(json.dumps(document, indent=2) + '\n', encoding='utf-8')
    return path


def templates_header(n_atoms: int) -> tuple[str, ...]:
    return ('template_id', 'experience_id', 'timestamp', *(f'c{i}' for i in range(n_atoms)))


def read_table(path: Path, header: Sequence[str]) -> np.ndarray:
    """
    Read a numeric artifact CSV whose first columns match ``header``.

    Raises:
        EvaluationError: If the file is missing, the header differs or a value is not numeric
    """
    if not path.is_file():
        raise EvaluationError(f'Missing artifact {path}')
    with path.open(encoding='utf-8', newline='') as handle:
        reader = csv.reader(handle)
        found = tuple(next(reader, ()))
        if found[: len(header)] != tuple(header):
            raise EvaluationError(f'{path.name}: expected header {",".join(header)}, got {",".join(found)}')
        try:
            rows = [[float(v) for v in row[: len(header)]] for row in reader if row]
        except ValueError as e:
            raise EvaluationError(f'{path.name}: {e}') from e
    return np.array(rows, dtype=np.float64).reshape(-1, len(header))


def read_trajectory(run_dir: Path) -> Trajectory:
    table = read_table(run_dir / TRAJECTORY_FILE, TRAJECTORY_HEADER)
    return Trajectory(table[:, :3])


def read_map_points(run_dir: Path) -> np.ndarray:
    """Experience positions ``(x, y)`` from ``map.csv``."""
    return read_table(run_dir / MAP_FILE, MAP_HEADER)[:, 1:3]
