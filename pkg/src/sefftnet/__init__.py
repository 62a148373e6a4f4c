"""Waveform speech enhancement with SE-FFTNet on a small NumPy/Cython autodiff core."""
from .backend import NAME as BACKEND
from .model import (
    ModelConfig,
    ModelParams,
    build,
    count_params,
    forward,
    receptive_field,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ModelConfig",
    "ModelParams",
    "build",
    "count_params",
    "forward",
    "receptive_field",
]
