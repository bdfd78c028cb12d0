"""Rotation numbers and derivative growth for the Blaschke circle-map family."""

from ._rotacalc import (
    DomainError,
    UsageError,
    cf_expand,
    cf_value,
    construct,
    convergents,
    derivative,
    growth,
    plateau,
    resume,
    rotation_number,
    solve_t,
    verify,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "UsageError",
    "cf_expand",
    "cf_value",
    "construct",
    "convergents",
    "derivative",
    "growth",
    "plateau",
    "resume",
    "rotation_number",
    "solve_t",
    "verify",
]
