"""Init Diagnostics."""

from .diagnostics import Diagnostics, entropy_increases, fit_decay_rate, fit_warm_up


__all__ = [
    "Diagnostics",
    "entropy_increases",
    "fit_decay_rate",
    "fit_warm_up",
]
