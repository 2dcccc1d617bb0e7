from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, ClassVar


class BaseFormatHandler(ABC):
    """
    Parser for one config file format.

    Subclasses list the extensions they own and turn file text into a flat
    ``dict[str, Any]``; malformed input raises ``ValueError``.
    """

    extensions: ClassVar[frozenset[str]] = frozenset()

    def handles(self, path: Path) -> bool:
        return path.suffix.lower() in self.extensions

    def read(self, path: Path) -> dict[str, Any]:
        return self.parse(path.read_text(encoding='utf-8'), path)

    @abstractmethod
    def parse(self, text: str, source: Path) -> dict[str, Any]:
        """Parse ``text`` read from ``source`` (used in error messages only)."""
