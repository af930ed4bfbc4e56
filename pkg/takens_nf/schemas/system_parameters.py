"""System Configuration Schema.

Pydantic schemas to validate the description of the system x_{n+1} = A_n x_n + f_n(x_n): either a builtin cocycle
family with its parameters, or an inline constant matrix with inline jet coefficients.
"""
# pylint: disable=no-self-argument
# mypy: disable-error-code=assignment
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from takens_nf.cocycle import FAMILY_PARAMETERS
from takens_nf.schemas.utilities import drop_none
from takens_nf.schemas.validators import format_exponent, format_family, format_matrix, format_params


class BaseConfig(BaseModel):
    """Base model of every configuration section. Unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    def model_dump(self, **kwargs) -> dict:
        """Override the `model_dump` method.

        Remove None values from the dictionary, nested sections included.
        """
        return drop_none(super().model_dump(**kwargs))


class JetRecord(BaseConfig):
    """One monomial x_v^alpha x_c^beta with its coefficient vector over every component."""

    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    coeff: tuple[float, ...]
    modulation: float = 0.0

    _format_alpha = field_validator("alpha")(format_exponent)
    _format_beta = field_validator("beta")(format_exponent)

    @property
    def degree(self) -> int:
        """Total degree of the monomial."""
        return sum(self.alpha) + sum(self.beta)


class RandomNonlinearityConfig(BaseConfig):
    """Seed-fixed nonlinearity with every monomial of the given degrees."""

    degrees: tuple[int, ...] = (2, 3)
    scale: float = Field(default=0.05, ge=0)
    modulation: float = Field(default=0.1, ge=0)
    seed: int | None = Field(default=None, ge=0)

    @field_validator("degrees")
    def check_degrees(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        """Nonlinear terms start at degree 2."""
        if not value or min(value) < 2:
            raise ValueError("degrees must be non-empty and at least 2")
        return tuple(sorted(set(value)))


class SystemConfig(BaseConfig):
    """Validate the system section of a run configuration."""

    family: str | None = None
    params: dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(default=0, ge=0)
    linear: tuple[tuple[float, ...], ...] | None = None
    split: tuple[int, int, int] | None = None
    jets: tuple[JetRecord, ...] | None = None
    nonlinearity: RandomNonlinearityConfig | None = None
    max_order: int | None = Field(default=None, ge=2)
    v_blocks: tuple[int, ...] | None = None

    _format_family = field_validator("family")(format_family)
    _format_params = field_validator("params")(format_params)
    _format_linear = field_validator("linear")(format_matrix)

    @field_validator("split")
    def check_split(cls, value: tuple[int, int, int] | None) -> tuple[int, int, int] | None:
        """Split sizes are non-negative and not all zero."""
        if value is not None and (min(value) < 0 or sum(value) == 0):
            raise ValueError("split sizes must be non-negative with a positive sum")
        return value

    @model_validator(mode="after")
    def check_system(self) -> "SystemConfig":
        """Exactly one linear part, known family parameters and jets matching the split."""
        if (self.family is None) == (self.linear is None):
            raise ValueError("give exactly one of 'family' or 'linear'")
        if self.family is not None:
            known = FAMILY_PARAMETERS[self.family]
            for key in self.params:
                if key not in known:
                    raise ValueError(f"unknown parameter {key!r} for family {self.family!r}")
        elif self.params:
            raise ValueError("'params' requires 'family'")
        if self.jets is not None and self.nonlinearity is not None:
            raise ValueError("give at most one of 'jets' or 'nonlinearity'")
        if self.linear is not None and self.split is not None and sum(self.split) != len(self.linear):
            raise ValueError(f"split {self.split} does not match the {len(self.linear)}x{len(self.linear)} matrix")
        if self.jets is not None:
            if self.split is None:
                raise ValueError("'jets' requires 'split'")
            d_s, d_c, d_u = self.split
            for record in self.jets:
                if len(record.alpha) != d_s + d_u or len(record.beta) != d_c or len(record.coeff) != d_s + d_c + d_u:
                    raise ValueError(f"jet record {record.model_dump()} does not match split {self.split}")
                if record.degree < 2:
                    raise ValueError(f"jet record of degree {record.degree}; nonlinear terms start at degree 2")
        return self

    def jet_order(self, minimum: int) -> int:
        """Truncation order of the nonlinearity: ``max_order`` or the highest degree present, at least ``minimum``."""
        if self.max_order is not None:
            return max(self.max_order, minimum)
        degrees = [record.degree for record in self.jets or ()]
        if self.nonlinearity is not None:
            degrees += list(self.nonlinearity.degrees)
        return max([minimum, *degrees])
