"""Dictionary checkpoint files: a ``DLSC v1 N M`` header followed by N rows of M floats."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from qbslam.core.dlsc.encoder import Dictionary
from qbslam.exceptions.models import InvalidDictionaryError
from qbslam.utils.logging import get_configured_logger

logger = get_configured_logger('Checkpoint')

MAGIC = 'DLSC'
VERSION = 'v1'


def save_dictionary(path: str | Path, dictionary: Dictionary) -> Path:
    """Write ``dictionary`` with 17 significant digits so that loading it back is exact."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = f'{MAGIC} {VERSION} {dictionary.n_inputs} {dictionary.n_atoms}'
    np.savetxt(path, dictionary.atoms, fmt='%.17g', delimiter=' ', header=header, comments='')
    logger.info(f'Saved {dictionary.n_inputs}x{dictionary.n_atoms} dictionary to {path}')
    return path


def load_dictionary(path: str | Path) -> Dictionary:
    """
    Read a checkpoint written by :func:`save_dictionary`.

    Raises:
        InvalidDictionaryError: On a bad header or when the body disagrees with it
    """
    path = Path(path)
    with path.open(encoding='utf-8') as handle:
        header = handle.readline().split()
        if len(header) != 4 or header[0] != MAGIC or header[1] != VERSION:
            raise InvalidDictionaryError(f'{path} is not a {MAGIC} {VERSION} checkpoint (header {header!r})')
        try:
            n, m = int(header[2]), int(header[3])
        except ValueError as e:
            raise InvalidDictionaryError(f'{path}: malformed dimensions in header {header!r}') from e
        atoms = np.loadtxt(handle, dtype=np.float64, ndmin=2)

    if atoms.shape != (n, m):
        raise InvalidDictionaryError(f'{path}: header says {n}x{m}, body is {atoms.shape[0]}x{atoms.shape[1]}', atoms.shape)
    return Dictionary(atoms)
