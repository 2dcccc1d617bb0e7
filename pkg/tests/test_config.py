import json
import os
from pathlib import Path

import pytest

from qbslam.cli import build_config, build_parser
from qbslam.core.pipeline import RunConfig
from qbslam.exceptions import ConfigurationError
from qbslam.utils.config import ConfigLoader
from qbslam.utils.settings import QbslamSettings

EXAMPLE_CFG = Path(__file__).resolve().parents[1] / 'configs' / 'run.example.cfg'


class TestRunConfig:
    def test_example_file_matches_defaults(self):
        config = RunConfig.from_mapping(ConfigLoader.read(EXAMPLE_CFG))
        assert config.params_hash() == RunConfig().params_hash()
        assert set(ConfigLoader.read(EXAMPLE_CFG)) | {'dataset', 'out'} == set(RunConfig.keys())

    def test_keys_are_routed_to_sections(self):
        config = RunConfig.from_mapping({'eta_c': 0.01, 'mu': 0.8, 'alpha': 0.25, 'window': 3, 'out': 'runs/x'})
        assert config.dlsc.eta_c == 0.01
        assert config.matcher.mu == 0.8
        assert config.backend.alpha == 0.25
        assert config.window == 3
        assert config.out == Path('runs/x')

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError) as excinfo:
            RunConfig.from_mapping({'eta_c': 0.01, 'zeta': 1})
        assert excinfo.value.config_key == 'zeta'

    @pytest.mark.parametrize(
        'values, key',
        [
            ({'n_c': 'ten'}, 'n_c'),
            ({'n_c': 2.5}, 'n_c'),
            ({'gating': 'maybe'}, 'gating'),
            ({'eta_c': -1.0}, 'eta_c'),
            ({'alpha': 1.5}, 'alpha'),
            ({'window': 0}, 'window'),
            ({'map_normalisation': 'points'}, 'map_normalisation'),
            ({'search_radius': 0.0}, 'search_radius'),
            ({'heading_tolerance': 4.0}, 'heading_tolerance'),
            ({'resolution_scaling': 'sometimes'}, 'resolution_scaling'),
        ],
    )
    def test_bad_values_name_the_key(self, values, key):
        with pytest.raises(ConfigurationError) as excinfo:
            RunConfig.from_mapping(values)
        assert excinfo.value.config_key == key

    def test_hash_ignores_paths(self):
        a = RunConfig.from_mapping({'dataset': 'data/a', 'out': 'runs/a', 'replay': True})
        b = RunConfig.from_mapping({'dataset': 'data/b'})
        assert a.params_hash() == b.params_hash()
        assert len(a.params_hash()) == 64

    def test_hash_tracks_parameters(self):
        assert RunConfig().params_hash() != RunConfig().with_mu(0.8).params_hash()

    def test_mapping_round_trip(self):
        config = RunConfig.from_mapping({'eta_d': 0.002, 'gating': False, 'dataset': 'data/x'})
        again = RunConfig.from_mapping(config.to_mapping())
        assert again == config

    def test_pose_gate_and_scaling_keys(self):
        config = RunConfig.from_mapping(
            {'search_radius': None, 'radius_growth': '0.1', 'heading_tolerance': 1.0, 'resolution_scaling': 'off'}
        )
        assert config.matcher.search_radius is None
        assert config.matcher.radius_growth == 0.1
        assert config.matcher.heading_tolerance == 1.0
        assert config.resolution_scaling is False
        assert RunConfig.from_mapping(config.to_mapping()) == config
        assert config.params_hash() != RunConfig().params_hash()

    def test_with_mu_leaves_the_rest(self):
        config = RunConfig.from_mapping({'sample_period': 0.2})
        changed = config.with_mu(0.75)
        assert changed.matcher.mu == 0.75
        assert changed.matcher.sample_period == 0.2
        assert config.matcher.mu == 0.9


class TestLoader:
    def test_key_value_file(self, tmp_path):
        path = tmp_path / 'run.cfg'
        path.write_text('eta-c = 0.01  # faster\ngating = off\nclip_atom_norm = none\nn_c = 20\n', encoding='utf-8')
        assert ConfigLoader.read(path) == {'eta_c': 0.01, 'gating': False, 'clip_atom_norm': None, 'n_c': 20}

    def test_duplicate_key(self, tmp_path):
        path = tmp_path / 'run.cfg'
        path.write_text('mu = 0.9\nmu = 0.8\n', encoding='utf-8')
        with pytest.raises(ConfigurationError, match='duplicate key'):
            ConfigLoader.read(path)

    def test_nested_json_is_flattened(self, tmp_path):
        path = tmp_path / 'run.json'
        path.write_text(json.dumps({'world': {'seed': 1, 'image_size': [8, 6]}, 'mu': 0.9}), encoding='utf-8')
        assert ConfigLoader.read(path) == {'world_seed': 1, 'world_image_size': [8, 6], 'mu': 0.9}

    def test_missing_and_unsupported(self, tmp_path):
        with pytest.raises(ConfigurationError):
            ConfigLoader.read(tmp_path / 'absent.cfg')
        other = tmp_path / 'run.yaml'
        other.write_text('mu: 0.9\n', encoding='utf-8')
        with pytest.raises(ConfigurationError, match='No handler'):
            ConfigLoader.read(other)

    def test_newest_file_wins(self, tmp_path):
        older, newer = tmp_path / 'a', tmp_path / 'b'
        older.mkdir()
        newer.mkdir()
        (older / 'run.cfg').write_text('mu = 0.5\n', encoding='utf-8')
        (newer / 'run.json').write_text('{"mu": 0.6}', encoding='utf-8')
        stamp = (older / 'run.cfg').stat().st_mtime
        os.utime(newer / 'run.json', (stamp + 10, stamp + 10))

        loader = ConfigLoader([older, None, newer])

        assert loader.resolve('run') == newer / 'run.json'
        assert loader.load('run') == {'mu': 0.6}
        assert loader.load('missing') == {}


def test_settings_read_explicit_directory(tmp_path):
    (tmp_path / 'run.cfg').write_text('mu = 0.42\n', encoding='utf-8')
    settings = QbslamSettings(tmp_path)
    assert settings.run_config_path == tmp_path / 'run.cfg'
    assert settings.run_defaults == {'mu': 0.42}


class TestFlagsOverFile:
    def test_flags_win(self, tmp_path):
        path = tmp_path / 'run.cfg'
        path.write_text('mu = 0.5\nalpha = 0.3\nwindow = 7\n', encoding='utf-8')
        args = build_parser().parse_args(['run', 'data/f1', '--config', str(path), '--mu', '0.95', '--no-gating'])

        config = build_config(args)

        assert config.matcher.mu == 0.95
        assert config.backend.alpha == 0.3
        assert config.window == 7
        assert config.gating is False
        assert config.dataset == Path('data/f1')

    def test_unset_flags_keep_file_values(self, tmp_path):
        path = tmp_path / 'run.cfg'
        path.write_text('gating = false\nn_atoms = 32\n', encoding='utf-8')
        args = build_parser().parse_args(['run', 'data/f1', '--config', str(path)])

        config = build_config(args)

        assert config.gating is False
        assert config.dlsc.n_atoms == 32

    def test_atoms_flag(self, tmp_path):
        path = tmp_path / 'run.cfg'
        path.write_text('', encoding='utf-8')
        args = build_parser().parse_args(['run', 'data/f1', '--config', str(path), '--atoms', '16', '--eta-c', '0.01'])

        config = build_config(args)

        assert config.dlsc.n_atoms == 16
        assert config.dlsc.eta_c == 0.01

    def test_pose_gate_flags(self, tmp_path):
        path = tmp_path / 'run.cfg'
        path.write_text('radius_growth = 0.2\n', encoding='utf-8')
        argv = ['run', 'data/f1', '--config', str(path), '--search-radius', '3', '--no-resolution-scaling']

        config = build_config(build_parser().parse_args(argv))

        assert config.matcher.search_radius == 3.0
        assert config.matcher.radius_growth == 0.2
        assert config.resolution_scaling is False
