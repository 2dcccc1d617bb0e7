from pathlib import Path
from typing import Any

from platformdirs import user_config_dir

from qbslam.utils.config import ConfigLoader

# Logical config name; the extension is resolved at runtime
CF_RUN = 'run'


class QbslamSettings:
    """
    Locates default run settings.

    Search order (newest file wins across all of them): an explicit directory,
    the per-user config dir (``platformdirs``), then ``./configs``.
    """

    def __init__(self, explicit_path: str | Path | None = None):
        explicit = Path(explicit_path) if explicit_path else None
        self.search_dirs = [
            explicit,
            Path(user_config_dir('qbslam')),
            Path.cwd() / 'configs',
        ]
        self._loader = ConfigLoader(self.search_dirs)

    @property
    def run_config_path(self) -> Path | None:
        return self._loader.resolve(CF_RUN)

    @property
    def run_defaults(self) -> dict[str, Any]:
        """Flat run settings from the resolved ``run`` config, empty when none exists."""
        return self._loader.load(CF_RUN)
