"""
SLAM pipeline: DLSC-QBS encoding of the frame stream, template matching, experience
map maintenance and evaluation against ground truth.

Frames are consumed strictly in index order. Encoding does not depend on the matcher,
so one :class:`EncodedStream` serves any number of matching passes (μ sweeps).
"""

from __future__ import annotations

import json
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np

from qbslam.core.backend import ExperienceMap, integrate_odometry, on_sample
from qbslam.core.dlsc import Dictionary, DlscParams, EncoderState, SparseCode, replay_errors, save_dictionary
from qbslam.core.evaluation import (
    GridSpec,
    MetricsReport,
    Trajectory,
    align_by_grid_search,
    associate,
    mae_mapping,
)
from qbslam.core.matcher import MatcherParams, TemplateStore, pose_candidates
from qbslam.core.models.pose import ORIGIN, Pose
from qbslam.core.pipeline import artifacts
from qbslam.core.pipeline.config import RunConfig
from qbslam.core.surprise import SurpriseState, gated_learning_step
from qbslam.core.synthstream import (
    Dataset,
    fly_scenario,
    load_dataset,
    load_ground_truth,
    resolve_scenario,
    write_dataset,
)
from qbslam.core.synthstream.dataset import META_FILE
from qbslam.events import EventBus, FrameEncodedEvent, LoopClosureEvent
from qbslam.exceptions.config import ConfigurationError
from qbslam.exceptions.events import EventDeliveryError
from qbslam.exceptions.numerics import DivergenceError
from qbslam.utils.logging import get_configured_logger, log_and_display, log_manager, trackerator

logger = get_configured_logger('Pipeline')

# frames before the ablation starts tracking the peak reprojection error
WARMUP_FRAMES = 50


# ── Telemetry subscribers ────────────────────────────────────────────────────


@dataclass
class SurpriseTelemetry:
    """Collects one ``surprise.csv`` row per :class:`FrameEncodedEvent`."""

    events: list[FrameEncodedEvent] = field(default_factory=list)

    def handle_frame(self, event: FrameEncodedEvent) -> None:
        self.events.append(event)

    def __len__(self) -> int:
        return len(self.events)

    @property
    def errors(self) -> np.ndarray:
        return np.array([e.error for e in self.events], dtype=np.float64)

    @property
    def closed_steps(self) -> int:
        return sum(1 for e in self.events if not e.gate_open)

    def to_rows(self) -> list[tuple[Any, ...]]:
        return [(e.k, e.timestamp, e.error, e.s2_raw, e.s2_filtered, e.gate_open, e.learned) for e in self.events]


@dataclass
class LoopClosureCounter:
    closures: list[LoopClosureEvent] = field(default_factory=list)

    def handle_closure(self, event: LoopClosureEvent) -> None:
        self.closures.append(event)

    @property
    def count(self) -> int:
        return len(self.closures)


# ── Stage results ────────────────────────────────────────────────────────────


@dataclass(eq=False)
class EncodedStream:
    """Codes and surprise telemetry of one DLSC-QBS pass over a dataset."""

    codes: list[SparseCode]
    encoder: EncoderState
    telemetry: SurpriseTelemetry
    gating: bool
    divergence: DivergenceError | None = None

    def __len__(self) -> int:
        return len(self.codes)

    @property
    def dictionary(self) -> Dictionary:
        return self.encoder.dictionary

    @property
    def errors(self) -> np.ndarray:
        return self.telemetry.errors

    @property
    def completed(self) -> bool:
        return self.divergence is None


@dataclass(eq=False)
class SlamResult:
    """Live pose estimate per odometry sample, plus the map and templates behind it."""

    trajectory: Trajectory
    poses: list[Pose]
    experience_map: ExperienceMap
    templates: TemplateStore
    loop_closures: int
    mu: float


class SweepResult(NamedTuple):
    best_mu: float
    reports: list[MetricsReport]
    dead_reckoning_mae: float

    def to_dict(self) -> dict[str, Any]:
        return {
            'best_mu': self.best_mu,
            'dead_reckoning_mae_l': self.dead_reckoning_mae,
            'runs': [report.to_dict() for report in self.reports],
        }


class RunOutcome(NamedTuple):
    stream: EncodedStream
    result: SlamResult
    report: MetricsReport
    replay: np.ndarray | None
    written: list[Path]


# ── Pipeline ─────────────────────────────────────────────────────────────────


class SlamPipeline:
    """
    One SLAM pipeline over one dataset.

    Args:
        config: Run configuration
        dataset: Already loaded dataset; loaded from ``config.dataset`` on first use otherwise
        bus: Event bus for telemetry; a private one is created when omitted
    """

    def __init__(self, config: RunConfig, dataset: Dataset | None = None, bus: EventBus | None = None) -> None:
        self.config = config
        self.bus = bus or EventBus()
        self._dataset = dataset

    @property
    def dataset(self) -> Dataset:
        if self._dataset is None:
            if self.config.dataset is None:
                raise ConfigurationError('No dataset given', config_key='dataset')
            self._dataset = load_dataset(self.config.dataset, color=self.config.color)
        return self._dataset

    # ── Encoding ─────────────────────────────────────────────────────────────

    def dlsc_params(self, n_inputs: int) -> DlscParams:
        """DLSC setting for frames of ``n_inputs`` values, rescaled unless ``resolution_scaling`` is off."""
        params = self.config.dlsc
        return params.at_resolution(n_inputs) if self.config.resolution_scaling else params

    def _check_delivery(self, stage: str, failures_before: int) -> None:
        failed = self.bus.failures - failures_before
        if failed:
            raise EventDeliveryError(
                f'{failed} event handler call(s) failed during {stage}; telemetry is incomplete',
                stage=stage,
                failures=failed,
            )

    def _encode(self, gating: bool) -> EncodedStream:
        frames = self.dataset.frames
        if not frames:
            raise ConfigurationError('Dataset has no frames', config_key='dataset')

        encoder = EncoderState.create(frames[0].n, self.dlsc_params(frames[0].n), seed=self.config.seed)
        surprise = SurpriseState(window=self.config.window)
        telemetry = SurpriseTelemetry()
        stream = EncodedStream(codes=[], encoder=encoder, telemetry=telemetry, gating=gating)

        label = 'gated' if gating else 'ungated'
        failures_before = self.bus.failures
        with self.bus.subscribed(FrameEncodedEvent, telemetry.handle_frame):
            try:
                for frame in trackerator(frames, len(frames), f'Encoding {self.dataset.scenario} ({label})'):
                    learned = surprise.gate_open or not gating
                    code, decision = gated_learning_step(encoder, surprise, frame, gating=gating)
                    stream.codes.append(code)
                    self.bus.publish(
                        FrameEncodedEvent(
                            k=frame.index,
                            timestamp=frame.timestamp,
                            error=decision.error,
                            s2_raw=decision.s2_raw,
                            s2_filtered=decision.s2,
                            gate_open=decision.learn,
                            learned=learned,
                        )
                    )
            except DivergenceError as e:
                logger.error(f'{label} run diverged at frame {e.frame_index}: {e}')
                log_manager.finalize_progress(f'Diverged at frame {e.frame_index}')
                stream.divergence = e

        self._check_delivery(f'{label} encoding', failures_before)

        logger.info(
            f'Encoded {len(stream)} frame(s), gate closed on {telemetry.closed_steps} step(s), '
            f'final error {telemetry.errors[-1] if len(telemetry) else float("nan"):.4g}'
        )
        return stream

    def encode_stream(self, *, gating: bool | None = None) -> EncodedStream:
        """
        Run DLSC-QBS over every frame in order.

        Raises:
            DivergenceError: If coding or learning produces non-finite values (carries the frame index)
            EventDeliveryError: If a frame event subscriber raised
        """
        stream = self._encode(self.config.gating if gating is None else gating)
        if stream.divergence is not None:
            raise stream.divergence
        return stream

    def replay(self, stream: EncodedStream) -> np.ndarray:
        """Reprojection error of every frame under the final, frozen dictionary."""
        return self.replay_dictionary(stream.dictionary)

    def replay_dictionary(self, dictionary: Dictionary) -> np.ndarray:
        """Learning-frozen pass over the dataset with ``dictionary``, e.g. one loaded from a checkpoint."""
        return replay_errors(dictionary, self.dataset.frames, self.dlsc_params(dictionary.n_inputs))

    # ── Localisation ─────────────────────────────────────────────────────────

    def localise(self, stream: EncodedStream, matcher: MatcherParams | None = None) -> SlamResult:
        """
        Feed codes and odometry to the matcher and experience map.

        On every sampling tick the current code is matched against older templates whose
        experience is consistent with the live pose (see :class:`MatcherParams`),
        an experience is created at the live pose (relaxing the map on a closure, after
        which the live pose snaps to the relaxed experience) and the code is stored as
        a template of that experience.
        """
        params = matcher or self.config.matcher
        odometry = self.dataset.odometry
        if len(stream) != len(odometry):
            raise ConfigurationError(
                f'Encoded stream has {len(stream)} codes for {len(odometry)} odometry samples', config_key='dataset'
            )

        store = TemplateStore(params)
        exp_map = ExperienceMap()
        counter = LoopClosureCounter()
        pose = ORIGIN
        poses: list[Pose] = []
        travelled = 0.0
        failures_before = self.bus.failures
        with self.bus.subscribed(LoopClosureEvent, counter.handle_closure):
            for code, odo in zip(stream.codes, odometry, strict=True):
                pose = integrate_odometry(pose, odo)
                travelled += math.hypot(odo.dx, odo.dy)
                t = odo.timestamp
                if store.is_due(t):
                    candidates = _candidate_mask(store, exp_map, pose, travelled, params)
                    loop = store.find_loop_closure(code, t, candidates)
                    experience = on_sample(exp_map, pose, loop, t, self.config.backend)
                    if loop is not None:
                        pose = experience.pose
                        travelled = 0.0
                        self.bus.publish(
                            LoopClosureEvent(
                                experience_id=experience.experience_id,
                                template_id=loop.template_id,
                                matched_experience_id=loop.experience_id,
                                similarity=loop.similarity,
                                timestamp=t,
                            )
                        )
                    store.maybe_sample(code, t, experience.experience_id)
                poses.append(pose)
        self._check_delivery('localisation', failures_before)

        timestamps = np.array([odo.timestamp for odo in odometry], dtype=np.float64)
        trajectory = Trajectory.from_xy(timestamps, np.array([(p.x, p.y) for p in poses]).reshape(-1, 2))
        logger.info(f'mu={params.mu}: {len(exp_map)} experiences, {counter.count} loop closure(s)')
        return SlamResult(trajectory, poses, exp_map, store, counter.count, params.mu)

    # ── Evaluation ───────────────────────────────────────────────────────────

    def _ground_truth(self) -> Trajectory:
        return Trajectory(self.dataset.ground_truth)

    def evaluate(self, result: SlamResult, grid: GridSpec | None = None) -> MetricsReport:
        """Align the trajectory to ground truth, then compute both MAEs in the aligned frame."""
        return evaluate_trajectory(
            result.trajectory,
            result.experience_map.pose_array()[:, :2],
            self._ground_truth(),
            self.config.with_mu(result.mu),
            scenario=self.dataset.scenario,
            grid=grid,
        )

    def dead_reckoning_mae(self, grid: GridSpec | None = None) -> float:
        """Aligned localisation MAE of raw odometry integration."""
        pose = ORIGIN
        xy = []
        for odo in self.dataset.odometry:
            pose = integrate_odometry(pose, odo)
            xy.append((pose.x, pose.y))
        timestamps = [odo.timestamp for odo in self.dataset.odometry]
        trajectory = Trajectory.from_xy(np.asarray(timestamps), np.asarray(xy).reshape(-1, 2))
        gt = associate(trajectory, self._ground_truth())
        return align_by_grid_search(trajectory, gt, grid, self.config.refine).mae

    # ── Outputs ──────────────────────────────────────────────────────────────

    def write_artifacts(
        self,
        out: str | Path,
        stream: EncodedStream,
        result: SlamResult,
        report: MetricsReport,
        replay: np.ndarray | None = None,
    ) -> list[Path]:
        """Write the fixed set of run files under ``out`` and return their paths."""
        root = Path(out)
        root.mkdir(parents=True, exist_ok=True)
        t = result.trajectory.timestamps
        written = [
            artifacts.write_csv(
                root / artifacts.TRAJECTORY_FILE,
                artifacts.TRAJECTORY_HEADER,
                [(float(t[k]), p.x, p.y, p.theta) for k, p in enumerate(result.poses)],
            ),
            artifacts.write_csv(root / artifacts.MAP_FILE, artifacts.MAP_HEADER, result.experience_map.to_rows()),
            artifacts.write_csv(root / artifacts.LINKS_FILE, artifacts.LINKS_HEADER, result.experience_map.link_rows()),
            artifacts.write_csv(
                root / artifacts.TEMPLATES_FILE,
                artifacts.templates_header(stream.dictionary.n_atoms),
                result.templates.to_rows(),
            ),
            artifacts.write_csv(root / artifacts.SURPRISE_FILE, artifacts.SURPRISE_HEADER, stream.telemetry.to_rows()),
            save_dictionary(root / artifacts.DICTIONARY_FILE, stream.dictionary),
            artifacts.write_json(root / artifacts.METRICS_FILE, report.to_dict()),
        ]
        if replay is not None:
            written.append(
                artifacts.write_csv(
                    root / artifacts.REPLAY_FILE, artifacts.REPLAY_HEADER, [(k, float(e)) for k, e in enumerate(replay)]
                )
            )
        logger.info(f'Wrote {len(written)} artifact(s) to {root}')
        return written

    # ── Whole runs ───────────────────────────────────────────────────────────

    def run(self, out: str | Path | None = None) -> RunOutcome:
        """Encode, localise, evaluate and (when an output directory is known) write artifacts."""
        stream = self.encode_stream()
        result = self.localise(stream)
        report = self.evaluate(result)
        replay = self.replay(stream) if self.config.replay else None
        target = out if out is not None else self.config.out
        written = self.write_artifacts(target, stream, result, report, replay) if target is not None else []
        log_and_display(
            f'{report.scenario}: MAE_L={report.mae_l:.4f} m, MAE_M={report.mae_m:.4f} m, '
            f'{result.loop_closures} loop closure(s)',
            sticky=True,
        )
        return RunOutcome(stream, result, report, replay, written)

    def sweep_mu(self, mus: Sequence[float], grid: GridSpec | None = None) -> SweepResult:
        """
        Match and evaluate once per μ over a single encoding pass.

        The μ with the lowest localisation MAE wins; on ties the earlier one in ``mus``.
        """
        if not mus:
            raise ConfigurationError('sweep needs at least one mu value', config_key='mu')
        stream = self.encode_stream()
        reports = []
        for mu in mus:
            result = self.localise(stream, self.config.with_mu(mu).matcher)
            reports.append(self.evaluate(result, grid))
        best = min(range(len(reports)), key=lambda i: reports[i].mae_l)
        baseline = self.dead_reckoning_mae(grid)
        log_and_display(f'Best mu={reports[best].mu} (MAE_L={reports[best].mae_l:.4f}, odometry {baseline:.4f})')
        return SweepResult(reports[best].mu, reports, baseline)

    def ablate(self) -> dict[str, Any]:
        """
        Gated and ungated encoding passes with the same seed.

        Per condition: divergence status, reprojection error at frame ``WARMUP_FRAMES``
        and its peak from there on, the overall maximum (usually the cold start at
        frame 0), closed-gate steps and the mean replay error (only when the pass completed).
        """
        summary: dict[str, Any] = {}
        for label, gating in (('gated', True), ('ungated', False)):
            stream = self._encode(gating)
            errors = stream.errors
            settled = errors[WARMUP_FRAMES:]
            replay = self.replay(stream) if stream.completed else None
            summary[label] = {
                'diverged': not stream.completed,
                'diverged_at': stream.divergence.frame_index if stream.divergence else None,
                'frames': len(stream),
                'max_error': float(errors.max()) if errors.size else None,
                'error_at_50': float(errors[WARMUP_FRAMES]) if settled.size else None,
                'peak_error': float(settled.max()) if settled.size else None,
                'closed_steps': stream.telemetry.closed_steps,
                'replay_mean_error': float(replay.mean()) if replay is not None else None,
            }
        return summary


# ── Free functions ───────────────────────────────────────────────────────────


def _candidate_mask(
    store: TemplateStore, exp_map: ExperienceMap, pose: Pose, travelled: float, params: MatcherParams
) -> np.ndarray | None:
    """Templates whose experience is consistent with ``pose``; None when matching is unrestricted."""
    radius = params.radius_after(travelled)
    if radius is None or not len(store):
        return None
    poses = exp_map.pose_array()[store.experience_ids()]
    return pose_candidates(poses, pose, radius, params.heading_tolerance)


def evaluate_trajectory(
    trajectory: Trajectory,
    map_points: np.ndarray,
    ground_truth: Trajectory,
    config: RunConfig,
    scenario: str,
    grid: GridSpec | None = None,
) -> MetricsReport:
    """
    Align ``trajectory`` to ground truth by grid search and report both MAEs.

    Ground truth is first resampled onto the trajectory timestamps; the map is scored
    in the aligned frame against every ground-truth point.
    """
    gt = associate(trajectory, ground_truth)
    transform, mae_l = align_by_grid_search(trajectory, gt, grid, config.refine)
    normalize_by = len(ground_truth) if config.map_normalisation == 'frames' else None
    mae_m = mae_mapping(transform.apply_xy(np.asarray(map_points).reshape(-1, 2)), ground_truth, normalize_by)
    return MetricsReport(scenario, mae_l, mae_m, transform, config.matcher.mu, config.params_hash())


def evaluate_run_dir(run_dir: str | Path, dataset: str | Path, config: RunConfig, grid: GridSpec | None = None) -> MetricsReport:
    """Recompute the metrics of a finished run from its CSVs and the dataset's ground truth."""
    run_dir = Path(run_dir)
    ground_truth = Trajectory(load_ground_truth(dataset))
    scenario = Path(dataset).name
    meta_path = Path(dataset) / META_FILE
    if meta_path.is_file():
        scenario = str(json.loads(meta_path.read_text(encoding='utf-8')).get('scenario', scenario))
    return evaluate_trajectory(
        artifacts.read_trajectory(run_dir), artifacts.read_map_points(run_dir), ground_truth, config, scenario, grid
    )


def run_slam(config: RunConfig) -> RunOutcome:
    """Run the whole pipeline described by ``config``."""
    return SlamPipeline(config).run()


def generate_dataset(
    scenario: str,
    seed: int,
    out: str | Path,
    image_size: tuple[int, int] | None = None,
) -> Path:
    """
    Fly a built-in or custom scenario and write it in the dataset layout.

    Raises:
        UnknownScenarioError: If ``scenario`` is neither built in nor a readable file
    """
    resolved = resolve_scenario(scenario, seed=seed, image_size=image_size)
    record = fly_scenario(resolved)
    meta = {'scenario': resolved.name, 'seed': seed, 'spec': resolved.to_dict()}
    root = write_dataset(record, out, meta)
    log_and_display(f'Generated {resolved.name} ({len(record)} frames) in {root}', sticky=True)
    return root
