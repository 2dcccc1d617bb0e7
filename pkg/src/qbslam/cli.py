"""
Command-line interface.

    qbslam gen flight1 --seed 1 --out data/flight1
    qbslam run data/flight1 --out runs/f1 --replay
    qbslam replay data/flight1 --out runs/f1 --dictionary runs/f1/dictionary.dlsc
    qbslam eval runs/f1 --dataset data/flight1
    qbslam sweep-mu data/flight1 --mu 0.8 0.9 0.95 --out runs/sweep
    qbslam ablate data/flight2 --out runs/ablation

Exit codes: 0 success, 1 configuration or evaluation error, 2 dataset error,
3 numerical divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from qbslam import __version__
from qbslam.core.dlsc import load_dictionary
from qbslam.core.evaluation import GridSpec
from qbslam.core.pipeline import RunConfig, SlamPipeline, artifacts, evaluate_run_dir, generate_dataset
from qbslam.core.synthstream.world import DEFAULT_IMAGE_SIZE, SENSOR_IMAGE_SIZE
from qbslam.exceptions import ConfigurationError, DatasetError, DivergenceError, QbslamError
from qbslam.utils.config import ConfigLoader
from qbslam.utils.logging import configure_logging, enable_verbose_logging, log_and_display, log_manager
from qbslam.utils.settings import QbslamSettings

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DATASET = 2
EXIT_DIVERGENCE = 3

# ── Parameter flags → RunConfig keys ─────────────────────────────────────────

_PARAMETER_FLAGS: tuple[tuple[str, str, type, str], ...] = (
    ('--eta-c', 'eta_c', float, 'coding rate'),
    ('--eta-d', 'eta_d', float, 'dictionary learning rate'),
    ('--lambda1', 'lambda1', float, 'l1 regularisation weight'),
    ('--n-c', 'n_c', int, 'coding iterations per frame'),
    ('--n-d', 'n_d', int, 'dictionary steps per frame'),
    ('--atoms', 'n_atoms', int, 'dictionary atoms (code length)'),
    ('--sigma-w', 'sigma_w', float, 'std of the initial dictionary entries'),
    ('--clip-atom-norm', 'clip_atom_norm', float, 'rescale atoms whose norm exceeds this'),
    ('--window', 'window', int, 'surprise moving-average width'),
    ('--mu', 'mu', float, 'loop-closure similarity threshold'),
    ('--sample-period', 'sample_period', float, 'template sampling period (s)'),
    ('--exclusion-window', 'exclusion_window', float, 'ignore templates younger than this (s)'),
    ('--search-radius', 'search_radius', float, 'match only templates this close to the live pose (m)'),
    ('--radius-growth', 'radius_growth', float, 'search radius growth per meter since the last closure'),
    ('--heading-tolerance', 'heading_tolerance', float, 'max heading difference to a matched template (rad)'),
    ('--alpha', 'alpha', float, 'map relaxation step fraction'),
    ('--iterations', 'iterations', int, 'relaxation iterations per loop closure'),
    ('--seed', 'seed', int, 'dictionary initialisation seed'),
    ('--refine', 'refine', int, 'coarse-to-fine alignment passes'),
)


def _parse_size(text: str) -> tuple[int, int]:
    if text == 'default':
        return DEFAULT_IMAGE_SIZE
    if text == 'sensor':
        return SENSOR_IMAGE_SIZE
    try:
        width, height = (int(v) for v in text.lower().split('x'))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f'expected default, sensor or WxH, got {text!r}') from e
    return width, height


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--verbose', action='store_true', help='Log at INFO level.')
    parser.add_argument('--quiet', action='store_true', help='Hide progress bars and informational output.')
    parser.add_argument('--log-dir', type=Path, help='Also write a timestamped log file here.')


def _add_run_options(parser: argparse.ArgumentParser, *, mu_flag: bool = True) -> None:
    parser.add_argument('dataset', type=Path, help='Dataset directory.')
    parser.add_argument('--out', type=Path, help='Output directory.')
    parser.add_argument('--config', type=Path, help='Run config file (.cfg or .json); flags override it.')
    parser.add_argument('--color', action='store_const', const=True, default=None, help='Use RGB frames.')
    parser.add_argument(
        '--no-gating', dest='gating', action='store_const', const=False, default=None, help='Learn on every frame.'
    )
    parser.add_argument(
        '--no-resolution-scaling',
        dest='resolution_scaling',
        action='store_const',
        const=False,
        default=None,
        help='Use eta_c and lambda1 as given instead of rescaling them to the frame size.',
    )
    parser.add_argument(
        '--check-descent',
        action='store_const',
        const=True,
        default=None,
        help='Warn when a coding iteration increases the objective.',
    )
    parser.add_argument(
        '--map-normalisation', choices=('map', 'frames'), help='Divide the mapping error by map points or frames.'
    )
    for flag, key, kind, text in _PARAMETER_FLAGS:
        if key == 'mu' and not mu_flag:
            continue
        parser.add_argument(flag, dest=key, type=kind, help=text)
    _add_common(parser)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='qbslam', description='Surprise-gated dictionary-learning SLAM.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', required=True)

    gen = commands.add_parser('gen', help='Generate a synthetic dataset.')
    gen.add_argument('scenario', help='flight1, flight2, flight3 or a custom scenario file.')
    gen.add_argument('--seed', type=int, default=0)
    gen.add_argument('--out', type=Path, required=True)
    gen.add_argument('--size', type=_parse_size, help='default (64x48), sensor (346x260) or WxH.')
    _add_common(gen)

    run = commands.add_parser('run', help='Run SLAM over a dataset.')
    _add_run_options(run)
    run.add_argument('--replay', action='store_const', const=True, default=None, help='Also write replay.csv.')

    replay = commands.add_parser('replay', help='Frozen-dictionary pass over a dataset.')
    _add_run_options(replay)
    replay.add_argument('--dictionary', type=Path, help='Checkpoint to replay; learned from the dataset if omitted.')

    evaluate = commands.add_parser('eval', help='Recompute metrics from a run directory.')
    evaluate.add_argument('run_dir', type=Path)
    evaluate.add_argument('--dataset', type=Path, required=True)
    evaluate.add_argument('--config', type=Path)
    evaluate.add_argument('--refine', type=int)
    evaluate.add_argument('--map-normalisation', choices=('map', 'frames'))
    _add_common(evaluate)

    sweep = commands.add_parser('sweep-mu', help='Evaluate several loop-closure thresholds.')
    _add_run_options(sweep, mu_flag=False)
    sweep.add_argument('--mu', dest='mus', type=float, nargs='+', required=True)

    ablate = commands.add_parser('ablate', help='Compare gated and ungated learning.')
    _add_run_options(ablate)

    return parser


# ── Configuration ────────────────────────────────────────────────────────────


def _file_values(config_path: Path | None) -> dict[str, Any]:
    if config_path is not None:
        return ConfigLoader.read(config_path)
    return QbslamSettings().run_defaults


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge the config file (explicit or discovered) with command-line flags; flags win."""
    values = _file_values(getattr(args, 'config', None))
    for key in RunConfig.keys():
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            values[key] = flag_value
    return RunConfig.from_mapping(values)


# ── Commands ─────────────────────────────────────────────────────────────────


def _require_out(config: RunConfig) -> Path:
    if config.out is None:
        raise ConfigurationError('An output directory is required (--out)', config_key='out')
    return config.out


def cmd_gen(args: argparse.Namespace) -> int:
    generate_dataset(args.scenario, args.seed, args.out, args.size)
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    config = build_config(args)
    SlamPipeline(config).run(_require_out(config))
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    config = build_config(args)
    out = _require_out(config)
    pipeline = SlamPipeline(config)
    if args.dictionary is not None:
        errors = pipeline.replay_dictionary(load_dictionary(args.dictionary))
    else:
        errors = pipeline.replay(pipeline.encode_stream())
    out.mkdir(parents=True, exist_ok=True)
    artifacts.write_csv(out / artifacts.REPLAY_FILE, artifacts.REPLAY_HEADER, [(k, float(e)) for k, e in enumerate(errors)])
    log_and_display(f'Replay mean error {errors.mean():.6g} over {errors.size} frame(s)', sticky=True)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    config = build_config(args)
    report = evaluate_run_dir(args.run_dir, args.dataset, config, GridSpec.default())
    artifacts.write_json(args.run_dir / artifacts.METRICS_FILE, report.to_dict())
    log_and_display(f'MAE_L={report.mae_l:.4f} m, MAE_M={report.mae_m:.4f} m', sticky=True)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = build_config(args)
    out = _require_out(config)
    sweep = SlamPipeline(config).sweep_mu(args.mus)
    out.mkdir(parents=True, exist_ok=True)
    artifacts.write_json(out / artifacts.SWEEP_FILE, sweep.to_dict())
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    config = build_config(args)
    out = _require_out(config)
    summary = SlamPipeline(config).ablate()
    out.mkdir(parents=True, exist_ok=True)
    artifacts.write_json(out / artifacts.ABLATION_FILE, summary)
    log_and_display(json.dumps(summary, indent=2), sticky=True)
    return EXIT_OK


COMMANDS = {
    'gen': cmd_gen,
    'run': cmd_run,
    'replay': cmd_replay,
    'eval': cmd_eval,
    'sweep-mu': cmd_sweep,
    'ablate': cmd_ablate,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        enable_verbose_logging()
    if args.log_dir is not None:
        configure_logging(args.log_dir)
    log_manager.quiet = args.quiet

    try:
        return COMMANDS[args.command](args)
    except DivergenceError as e:
        log_and_display(f'Diverged at frame {e.frame_index}: {e}', level='error', sticky=True)
        return EXIT_DIVERGENCE
    except DatasetError as e:
        log_and_display(f'Dataset error: {e}', level='error', sticky=True)
        return EXIT_DATASET
    except QbslamError as e:
        log_and_display(f'{type(e).__name__}: {e}', level='error', sticky=True)
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
