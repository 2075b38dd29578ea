"""
합성 코퍼스 생성 모듈
"""
from src.synthgen.generator import (
    SynthConfig,
    SynthTruth,
    EvaluationSplit,
    resolve_truth,
    generate,
    generate_evaluation,
    make_trials,
)

__all__ = [
    'SynthConfig',
    'SynthTruth',
    'EvaluationSplit',
    'resolve_truth',
    'generate',
    'generate_evaluation',
    'make_trials',
]
