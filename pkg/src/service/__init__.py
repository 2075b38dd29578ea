"""
서비스 레이어
CLI와 도메인 모듈을 연결하는 파이프라인 서비스
"""
from src.service.pipeline_service import (
    PipelineService,
    PipelineConfig,
    ScoringOptions,
    SweepRow,
    train_backend,
    prepare_vectors,
    adapt_backend,
    score_prepared,
    sweep,
    parse_alpha_grid,
    synth_config_from_values,
)

__all__ = [
    "PipelineService",
    "PipelineConfig",
    "ScoringOptions",
    "SweepRow",
    "train_backend",
    "prepare_vectors",
    "adapt_backend",
    "score_prepared",
    "sweep",
    "parse_alpha_grid",
    "synth_config_from_values",
]
