"""Reusable validators for multiple Pydantic schemas."""
from typing import Any

from takens_nf.cocycle import FAMILIES
from takens_nf.schemas.utilities import nested_to_tuple, normalise_family_name


def format_family(value: str | None) -> str | None:
    """Normalise a family name and check it names a builtin family."""
    if value is None:
        return None
    family = normalise_family_name(value)
    if family not in FAMILIES:
        raise ValueError(f"unknown family {value!r}, expected one of {', '.join(FAMILIES)}")
    return family


def format_params(value: dict[str, Any]) -> dict[str, Any]:
    """Store nested list parameters as tuples."""
    return {key: nested_to_tuple(item) for key, item in value.items()}


def format_matrix(value: tuple | None) -> tuple | None:
    """Check a matrix is square and non-empty."""
    if value is None:
        return None
    if not value or any(len(row) != len(value) for row in value):
        raise ValueError("matrix must be square and non-empty")
    return value


def format_intervals(value: tuple | None) -> tuple | None:
    """Check intervals are positive and sort them."""
    if value is None:
        return None
    for lo, hi in value:
        if not 0 < lo <= hi:
            raise ValueError(f"interval [{lo}, {hi}] must satisfy 0 < lo <= hi")
    return tuple(sorted(value))


def format_positive_values(value: tuple) -> tuple:
    """Check all values are positive."""
    if any(item <= 0 for item in value):
        raise ValueError("all values must be positive")
    return value


def format_exponent(value: tuple[int, ...]) -> tuple[int, ...]:
    """Check a multi-exponent has non-negative entries."""
    if any(item < 0 for item in value):
        raise ValueError("exponents must be non-negative")
    return value
