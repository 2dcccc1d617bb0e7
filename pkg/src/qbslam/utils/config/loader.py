from collections.abc import Iterable
from pathlib import Path
from typing import Any, ClassVar

from qbslam.exceptions.config import ConfigurationError
from qbslam.utils.config.handlers import BaseFormatHandler, JsonHandler, KeyValueHandler
from qbslam.utils.logging import get_configured_logger

logger = get_configured_logger('ConfigLoader')


class ConfigLoader:
    """
    Finds and reads run config files.

    A logical name such as ``run`` is looked up in every search directory under each
    supported extension; the most recently modified match wins.
    """

    # First match wins on extension lookup
    _handlers: ClassVar[tuple[BaseFormatHandler, ...]] = (KeyValueHandler(), JsonHandler())

    def __init__(self, search_dirs: Iterable[Path | str | None]):
        self._search_dirs = [Path(d) for d in search_dirs if d is not None]

    @classmethod
    def supported_extensions(cls) -> list[str]:
        return sorted({ext for handler in cls._handlers for ext in handler.extensions})

    def candidates(self, logical_name: str) -> list[Path]:
        """Existing files for ``logical_name``, in search order."""
        return [
            d / f'{logical_name}{ext}'
            for d in self._search_dirs
            for ext in self.supported_extensions()
            if (d / f'{logical_name}{ext}').is_file()
        ]

    def resolve(self, logical_name: str) -> Path | None:
        """Newest existing file for ``logical_name``; ties go to the earlier search directory."""
        found = self.candidates(logical_name)
        if not found:
            return None
        return max(found, key=lambda p: p.stat().st_mtime)

    @classmethod
    def get_handler(cls, path: Path) -> BaseFormatHandler:
        for handler in cls._handlers:
            if handler.handles(path):
                return handler
        raise ConfigurationError(f"No handler registered for extension '{path.suffix}' (file: {path})")

    @classmethod
    def read(cls, path: str | Path) -> dict[str, Any]:
        """
        Read one config file into a flat mapping.

        Raises:
            ConfigurationError: If the file is missing, has an unknown extension or fails to parse
        """
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f'Config file not found: {path}')
        handler = cls.get_handler(path)
        try:
            data = handler.read(path)
        except (ValueError, OSError) as e:
            raise ConfigurationError(f'Could not read config {path}: {e}') from e
        logger.info(f'Loaded {len(data)} config key(s) from {path}')
        return data

    def load(self, logical_name: str) -> dict[str, Any]:
        """Contents of the resolved config, or an empty mapping when there is none."""
        path = self.resolve(logical_name)
        return {} if path is None else self.read(path)
