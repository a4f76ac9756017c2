"""Program generation and end-to-end evaluation."""

from .evaluate import Bounds, Metrics, PipelineResult, compute_metrics, evaluate, run_pipeline
from .generator import GeneratorParams, generate_source, generate_subject

__all__ = [
    "Bounds", "Metrics", "PipelineResult", "compute_metrics", "evaluate", "run_pipeline",
    "GeneratorParams", "generate_source", "generate_subject",
]
