from qbslam.core.pipeline.config import RunConfig
from qbslam.core.pipeline.driver import (
    EncodedStream,
    LoopClosureCounter,
    RunOutcome,
    SlamPipeline,
    SlamResult,
    SurpriseTelemetry,
    SweepResult,
    evaluate_run_dir,
    evaluate_trajectory,
    generate_dataset,
    run_slam,
)

__all__ = [
    'EncodedStream',
    'LoopClosureCounter',
    'RunConfig',
    'RunOutcome',
    'SlamPipeline',
    'SlamResult',
    'SurpriseTelemetry',
    'SweepResult',
    'evaluate_run_dir',
    'evaluate_trajectory',
    'generate_dataset',
    'run_slam',
]
