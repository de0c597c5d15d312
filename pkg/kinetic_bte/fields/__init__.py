"""Init Fields."""

from .fields import (
    PotentialField,
    diffuse_normalizer,
    global_maxwellian,
    hamiltonian,
    local_maxwellian,
    weight_tilde,
    weight_w,
)


__all__ = [
    "PotentialField",
    "diffuse_normalizer",
    "global_maxwellian",
    "hamiltonian",
    "local_maxwellian",
    "weight_tilde",
    "weight_w",
]
