"""
성능 지표 모듈
"""
from src.metrics.detection import (
    ErrorCurve,
    MetricReport,
    error_curve,
    eer,
    min_cprimary,
    evaluate,
    relative_reduction,
)

__all__ = [
    'ErrorCurve',
    'MetricReport',
    'error_curve',
    'eer',
    'min_cprimary',
    'evaluate',
    'relative_reduction',
]
