"""Noise generation for the doubled phase-space SDEs."""

from kerrq.noise.generator import (
    INITIAL_STREAM,
    box_muller,
    increment_scales,
    noise_free_path,
    sample_noise_batch,
    sample_noise_path,
    stream_generator,
)
from kerrq.noise.statistics import noise_statistics

__all__ = [
    "INITIAL_STREAM",
    "box_muller",
    "increment_scales",
    "noise_free_path",
    "noise_statistics",
    "sample_noise_batch",
    "sample_noise_path",
    "stream_generator",
]
