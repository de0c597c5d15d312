"""Init Characteristics."""

from .characteristics import Characteristics, sample_diffuse_batch, task_generator


__all__ = [
    "Characteristics",
    "sample_diffuse_batch",
    "task_generator",
]
