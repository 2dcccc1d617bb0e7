"""
Run configuration: one flat key space over the DLSC, surprise, matcher and back-end
parameters plus the run switches.

A config file (``run.cfg`` or ``run.json``) supplies a flat mapping; command-line
flags are merged over it before :meth:`RunConfig.from_mapping` builds the frozen
configuration, so flags win.
"""

from __future__ import annotations

import hashlib
import json
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from qbslam.core.backend import BackendParams
from qbslam.core.dlsc import DlscParams
from qbslam.core.matcher import MatcherParams
from qbslam.core.surprise import DEFAULT_WINDOW
from qbslam.exceptions.config import ConfigurationError

MAP_NORMALISATIONS = ('map', 'frames')

# ── Key → section routing ────────────────────────────────────────────────────

_SECTIONS: dict[str, type] = {
    **{f.name: DlscParams for f in fields(DlscParams)},
    **{f.name: MatcherParams for f in fields(MatcherParams)},
    **{f.name: BackendParams for f in fields(BackendParams)},
}


def _to_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in {'true', 'yes', 'on', '1'}:
        return True
    if isinstance(value, str) and value.strip().lower() in {'false', 'no', 'off', '0'}:
        return False
    if isinstance(value, int) and value in {0, 1}:
        return bool(value)
    raise ValueError(f'not a boolean: {value!r}')


def _to_int(value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError(f'not an integer: {value!r}')
    if isinstance(value, float) and not value.is_integer():
        raise ValueError(f'not an integer: {value!r}')
    return int(value)


def _to_optional_float(value: Any) -> float | None:
    return None if value is None else float(value)


def _to_optional_path(value: Any) -> Path | None:
    return None if value in {None, ''} else Path(value)


_CONVERTERS: dict[str, Callable[[Any], Any]] = {
    'eta_c': float,
    'eta_d': float,
    'lambda1': float,
    'n_c': _to_int,
    'n_d': _to_int,
    'n_atoms': _to_int,
    'sigma_w': float,
    'clip_atom_norm': _to_optional_float,
    'check_descent': _to_bool,
    'resolution_scaling': _to_bool,
    'mu': float,
    'sample_period': float,
    'exclusion_window': float,
    'search_radius': _to_optional_float,
    'radius_growth': float,
    'heading_tolerance': float,
    'alpha': float,
    'iterations': _to_int,
    'max_halvings': _to_int,
    'dataset': _to_optional_path,
    'out': _to_optional_path,
    'window': _to_int,
    'gating': _to_bool,
    'seed': _to_int,
    'color': _to_bool,
    'replay': _to_bool,
    'refine': _to_int,
    'map_normalisation': str,
}


@dataclass(frozen=True)
class RunConfig:
    """Everything one SLAM run depends on."""

    dataset: Path | None = None
    out: Path | None = None
    dlsc: DlscParams = field(default_factory=DlscParams)
    resolution_scaling: bool = True
    matcher: MatcherParams = field(default_factory=MatcherParams)
    backend: BackendParams = field(default_factory=BackendParams)
    window: int = DEFAULT_WINDOW
    gating: bool = True
    seed: int = 0
    color: bool = False
    replay: bool = False
    refine: int = 0
    map_normalisation: str = 'map'

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ConfigurationError(f'window must be ≥ 1, got {self.window}', config_key='window')
        if self.refine < 0:
            raise ConfigurationError(f'refine must be ≥ 0, got {self.refine}', config_key='refine')
        if self.map_normalisation not in MAP_NORMALISATIONS:
            raise ConfigurationError(
                f'map_normalisation must be one of {", ".join(MAP_NORMALISATIONS)}, got {self.map_normalisation!r}',
                config_key='map_normalisation',
            )

    @classmethod
    def keys(cls) -> tuple[str, ...]:
        return tuple(_CONVERTERS)

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> RunConfig:
        """
        Build a configuration from a flat mapping; missing keys keep their defaults.

        Raises:
            ConfigurationError: On unknown keys, unconvertible values or out-of-range values
        """
        unknown = sorted(set(values) - set(_CONVERTERS))
        if unknown:
            raise ConfigurationError(f'Unknown config key(s): {", ".join(unknown)}', config_key=unknown[0])

        converted: dict[str, Any] = {}
        for key, value in values.items():
            try:
                converted[key] = _CONVERTERS[key](value)
            except (TypeError, ValueError) as e:
                raise ConfigurationError(f'Invalid value for {key}: {e}', config_key=key) from e

        sections: dict[type, dict[str, Any]] = {DlscParams: {}, MatcherParams: {}, BackendParams: {}}
        top: dict[str, Any] = {}
        for key, value in converted.items():
            section = _SECTIONS.get(key)
            if section is None:
                top[key] = value
            else:
                sections[section][key] = value

        return cls(
            dlsc=DlscParams(**sections[DlscParams]),
            matcher=MatcherParams(**sections[MatcherParams]),
            backend=BackendParams(**sections[BackendParams]),
            **top,
        )

    def with_mu(self, mu: float) -> RunConfig:
        return replace(self, matcher=replace(self.matcher, mu=mu))

    def parameters(self) -> dict[str, Any]:
        """Flat numerical parameters and switches that shape the results; paths and output switches excluded."""
        flat: dict[str, Any] = {}
        for section in (self.dlsc, self.matcher, self.backend):
            flat.update({f.name: getattr(section, f.name) for f in fields(section)})
        flat.update(
            resolution_scaling=self.resolution_scaling,
            window=self.window,
            gating=self.gating,
            seed=self.seed,
            color=self.color,
            refine=self.refine,
            map_normalisation=self.map_normalisation,
        )
        return flat

    def to_mapping(self) -> dict[str, Any]:
        """Inverse of :meth:`from_mapping`, paths as strings."""
        flat = self.parameters()
        flat['replay'] = self.replay
        flat['dataset'] = str(self.dataset) if self.dataset else None
        flat['out'] = str(self.out) if self.out else None
        return flat

    def params_hash(self) -> str:
        """SHA-256 of the canonical JSON of :meth:`parameters`."""
        canonical = json.dumps(self.parameters(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()
