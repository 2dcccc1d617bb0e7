import json
from pathlib import Path
from typing import Any, ClassVar

from qbslam.utils.config.handlers.base import BaseFormatHandler


def flatten(data: dict[str, Any], prefix: str = '') -> dict[str, Any]:
    """Join nested object keys with underscores: ``{"world": {"seed": 1}}`` → ``{"world_seed": 1}``."""
    flat: dict[str, Any] = {}
    for key, value in data.items():
        name = f'{prefix}_{key}' if prefix else str(key)
        if isinstance(value, dict):
            flat.update(flatten(value, name))
        else:
            flat[name] = value
    return flat


class JsonHandler(BaseFormatHandler):
    """JSON run configs and scenario files; the top level must be an object."""

    extensions: ClassVar[frozenset[str]] = frozenset({'.json'})

    def parse(self, text: str, source: Path) -> dict[str, Any]:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValueError(f'Invalid JSON in {source}: {e}') from e
        if not isinstance(data, dict):
            raise ValueError(f'Top level of {source} must be a JSON object')
        return flatten(data)
