from pathlib import Path
from typing import Any, ClassVar

from qbslam.utils.config.handlers.base import BaseFormatHandler

TRUE_WORDS = frozenset({'true', 'yes', 'on'})
FALSE_WORDS = frozenset({'false', 'no', 'off'})
NONE_WORDS = frozenset({'none', 'null', ''})


def parse_value(text: str) -> Any:
    """bool, then None, then int, then float; anything else stays a string."""
    lowered = text.lower()
    if lowered in TRUE_WORDS:
        return True
    if lowered in FALSE_WORDS:
        return False
    if lowered in NONE_WORDS:
        return None
    for convert in (int, float):
        try:
            return convert(text)
        except ValueError:
            continue
    return text


class KeyValueHandler(BaseFormatHandler):
    """
    Flat ``key = value`` text configs.

    ``#`` starts a comment, blank lines are skipped and dashes in keys become
    underscores. A repeated key is an error.
    """

    extensions: ClassVar[frozenset[str]] = frozenset({'.cfg', '.conf', '.txt'})

    def parse(self, text: str, source: Path) -> dict[str, Any]:
        result: dict[str, Any] = {}
        for lineno, raw_line in enumerate(text.splitlines(), start=1):
            line = raw_line.split('#', 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition('=')
            key = key.strip().replace('-', '_')
            if not sep:
                raise ValueError(f'{source}:{lineno}: expected "key = value", got {raw_line!r}')
            if not key:
                raise ValueError(f'{source}:{lineno}: empty key')
            if key in result:
                raise ValueError(f'{source}:{lineno}: duplicate key {key!r}')
            result[key] = parse_value(value.strip())
        return result
