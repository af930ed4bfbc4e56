"""Common utilities shared by the configuration schemas."""
import logging
from typing import Any

from takens_nf.cocycle import FAMILY_PARAMETERS

_logger = logging.getLogger(__name__)


def normalise_family_name(name: str) -> str:
    """Lower case family name with dashes, e.g. ``Quasiperiodic_Diagonal`` -> ``quasiperiodic-diagonal``."""
    return name.strip().lower().replace("_", "-")


def nested_to_tuple(value: Any) -> Any:
    """Turn nested lists into nested tuples, leaving every other value untouched."""
    if isinstance(value, (list, tuple)):
        return tuple(nested_to_tuple(item) for item in value)
    return value


def drop_none(value: Any) -> Any:
    """Remove None values from (nested) dictionaries."""
    if isinstance(value, dict):
        return {key: drop_none(item) for key, item in value.items() if item is not None}
    return value


def deep_merge(base: dict, overrides: dict) -> dict:
    """Merge ``overrides`` into a copy of ``base``; nested dictionaries are merged key by key."""
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def fold_family_parameters(values: dict) -> dict:
    """Fold the flat form ``{"system": "step", "left": 2, "right": 0.5}`` into ``system.family`` and ``system.params``.

    Only top-level keys that are parameters of the named family move; anything else stays where it is, so an
    unknown key is still reported under its own name. A top-level ``seed`` moves into the system as well.
    """
    system = values.get("system")
    if not isinstance(system, str):
        return values
    folded = dict(values)
    family = normalise_family_name(system)
    known = FAMILY_PARAMETERS.get(family, ())
    params = {key: folded.pop(key) for key in list(folded) if key in known}
    folded["system"] = {"family": family, "params": params}
    if "seed" in folded:
        folded["system"]["seed"] = folded.pop("seed")
    _logger.debug("Folded flat parameters %s into family %s", sorted(params), family)
    return folded
